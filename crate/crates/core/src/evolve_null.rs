//! Characteristic evolution of the radiation field `psi = r phi` of one angular
//! mode on a double-null lattice.
//!
//! Both charts use the same update. With `r = v - u` the mode equation reads
//! `psi_uv + 2 i q e (1/r + b/u) psi_v + kappa psi / r^2 = 0`, where `kappa` is the
//! null potential of the mode and `b = 1` only in the physical chart of the
//! charged model. The equation is integrated exactly over each lattice diamond for
//! the ansatz `psi = r^p q`, with `q` interpolated from the corners. This captures
//! the `r^p` behaviour at the axis, where `psi` is pinned to zero.
//!
//! Corners of the diamond with south corner `(i, j)`: `S = (i, j)`, `E = (i, j+1)`,
//! `W = (i+1, j)`, `N = (i+1, j+1)`, with `i` counting retarded time `u` and `j`
//! advanced time `v`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initdata::{bump_profile, smooth_step, DataFamily};
use crate::model::ModelParams;
use crate::quadrature::gauss_legendre;

const S: usize = 0;
const E: usize = 1;
const W: usize = 2;
const N: usize = 3;

/// Update coefficients of one diamond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiamondCoefficients {
    /// Weight of each corner value in the integrated lower-order terms.
    pub gamma: [Complex64; 4],
}

/// Coefficients indexed by the integer radius `k = (v_S - u_S) / h` of the south corner.
#[derive(Debug, Clone)]
pub struct DiamondTable {
    pub exponent: Complex64,
    table: Vec<DiamondCoefficients>,
}

impl DiamondTable {
    pub fn new(params: &ModelParams, ell: usize, k_max: usize) -> Self {
        let s = params.decay_exponent(ell);
        let kappa = params.null_potential(ell);
        let charge = Complex64::new(0.0, 2.0 * params.qe());
        let (z, wz) = gauss_legendre(24);
        let (x, wx) = gauss_legendre(3);
        let table = (0..=k_max)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    return DiamondCoefficients { gamma: [Complex64::new(0.0, 0.0); 4] };
                }
                let (j1, j2) = if k == 1 {
                    axis_integrals(s, &z, &wz, &x, &wx)
                } else {
                    bulk_integrals(k as f64, s, &z, &wz, &x, &wx)
                };
                let mut gamma = [Complex64::new(0.0, 0.0); 4];
                let radius = [k as f64, k as f64 + 1.0, k as f64 - 1.0, k as f64];
                for c in 0..4 {
                    if radius[c] == 0.0 {
                        continue;
                    }
                    let scale = (-s * radius[c].ln()).exp();
                    gamma[c] = scale * (kappa * j1[c] + charge * (s * j1[c] + j2[c]));
                }
                DiamondCoefficients { gamma }
            })
            .collect();
        DiamondTable { exponent: s, table }
    }

    pub fn get(&self, k: usize) -> &DiamondCoefficients {
        &self.table[k]
    }

    pub fn k_max(&self) -> usize {
        self.table.len() - 1
    }
}

/// Bilinear corner basis on the unit square.
fn bilinear(c: usize, x: f64, y: f64) -> (f64, f64) {
    // (value, d/dy)
    match c {
        S => ((1.0 - x) * (1.0 - y), -(1.0 - x)),
        E => ((1.0 - x) * y, 1.0 - x),
        W => (x * (1.0 - y), -x),
        _ => (x * y, x),
    }
}

/// `int int (k + y - x)^{s-2} phi_c` and `int int (k + y - x)^{s-1} d_y phi_c` for
/// `k >= 2`, reduced to the diagonal variable `z = y - x` and done by Gauss-Legendre
/// on each side of `z = 0`.
fn bulk_integrals(
    k: f64,
    s: Complex64,
    z: &[f64],
    wz: &[f64],
    x: &[f64],
    wx: &[f64],
) -> ([Complex64; 4], [Complex64; 4]) {
    let mut j1 = [Complex64::new(0.0, 0.0); 4];
    let mut j2 = [Complex64::new(0.0, 0.0); 4];
    for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
        for (zq, wq) in z.iter().zip(wz) {
            let zz = lo + (hi - lo) * (zq + 1.0) / 2.0;
            let wzz = wq * (hi - lo) / 2.0;
            let base = (k + zz).ln();
            let k1 = ((s - 2.0) * base).exp() * wzz;
            let k2 = ((s - 1.0) * base).exp() * wzz;
            let (xa, xb) = if zz < 0.0 { (-zz, 1.0) } else { (0.0, 1.0 - zz) };
            for c in 0..4 {
                let (mut v, mut dv) = (0.0, 0.0);
                for (xq, wxq) in x.iter().zip(wx) {
                    let xx = xa + (xb - xa) * (xq + 1.0) / 2.0;
                    let (a, b) = bilinear(c, xx, xx + zz);
                    v += a * wxq * (xb - xa) / 2.0;
                    dv += b * wxq * (xb - xa) / 2.0;
                }
                j1[c] += k1 * v;
                j2[c] += k2 * dv;
            }
        }
    }
    (j1, j2)
}

/// Integrals for the diamond touching the axis (`k = 1`, west corner at `r = 0`).
/// The corner basis is linear: `phi_S = 1 - y`, `phi_E = y - x`, `phi_N = x`.
/// On `z < 0` the singular kernel is integrated in closed form in `t = 1 + z`.
fn axis_integrals(
    s: Complex64,
    z: &[f64],
    wz: &[f64],
    x: &[f64],
    wx: &[f64],
) -> ([Complex64; 4], [Complex64; 4]) {
    let one = Complex64::new(1.0, 0.0);
    let inv = |a: Complex64| one / a;
    // lower half, kernels t^{s-2} and t^{s-1} against the closed-form profiles
    let mut j1 = [
        inv(s) - inv(s + 1.0) * 0.5,
        inv(s + 1.0) - inv(s),
        Complex64::new(0.0, 0.0),
        inv(s) - inv(s + 1.0) * 0.5,
    ];
    let mut j2 = [
        -inv(s + 1.0),
        inv(s + 1.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    let linear = |c: usize, xx: f64, yy: f64| -> (f64, f64) {
        match c {
            S => (1.0 - yy, -1.0),
            E => (yy - xx, 1.0),
            _ => (xx, 0.0),
        }
    };
    for (zq, wq) in z.iter().zip(wz) {
        let zz = (zq + 1.0) / 2.0;
        let wzz = wq / 2.0;
        let base = (1.0 + zz).ln();
        let k1 = ((s - 2.0) * base).exp() * wzz;
        let k2 = ((s - 1.0) * base).exp() * wzz;
        let len = 1.0 - zz;
        for c in [S, E, N] {
            let (mut v, mut dv) = (0.0, 0.0);
            for (xq, wxq) in x.iter().zip(wx) {
                let xx = len * (xq + 1.0) / 2.0;
                let (a, b) = linear(c, xx, xx + zz);
                v += a * wxq * len / 2.0;
                dv += b * wxq * len / 2.0;
            }
            j1[c] += k1 * v;
            j2[c] += k2 * dv;
        }
    }
    (j1, j2)
}

/// One diamond update: returns `psi_N`.
#[inline]
fn diamond(
    g: &[Complex64; 4],
    beta: Complex64,
    south: Complex64,
    east: Complex64,
    west: Complex64,
) -> Complex64 {
    (east * (1.0 - g[E] - beta) + west * (1.0 - g[W] + beta) - south * (1.0 + g[S] - beta))
        / (1.0 + g[N] + beta)
}

/// Which chart a lattice lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullMode {
    /// `(U, V)` with `U, V in [-1, 0]`, Cauchy data on `U + V = -1`.
    Compactified,
    /// `(u, v)` with characteristic data on `u = u0` and `v = v0`.
    Physical,
}

/// Lattice values of `psi`. Row `i` is the retarded time `u0 + i h`; it stores the
/// advanced times `v0 + j h` for `j` in `row_start[i]..=n_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullField {
    pub mode: NullMode,
    pub ell: usize,
    pub params: ModelParams,
    pub u0: f64,
    pub v0: f64,
    pub h: f64,
    pub n_v: usize,
    pub row_start: Vec<usize>,
    pub rows: Vec<Vec<Complex64>>,
}

impl NullField {
    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        let start = *self.row_start.get(i)?;
        if j < start || j > self.n_v {
            return None;
        }
        Some(self.rows[i][j - start])
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.h
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.h
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|psi|` on the axis `u = v`.
    pub fn axis_max(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows.len() {
            if let Some(j) = self.axis_column(i) {
                if let Some(v) = self.get(i, j) {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    fn axis_column(&self, i: usize) -> Option<usize> {
        let off = ((self.v0 - self.u0) / self.h).round() as i64;
        let j = i as i64 - off;
        (j >= 0).then_some(j as usize)
    }
}

fn guard_check(value: Complex64, guard: f64, time: f64) -> Result<()> {
    if !value.is_finite() || value.norm() > guard {
        return Err(Error::BlowUp { guard, time });
    }
    Ok(())
}

/// Evolves Cauchy data on the initial hyperboloid with the compactified lattice
/// `U_i = -1 + i h`, `V_j = -1 + j h`, `h = 1/n`. The initial slice is the
/// anti-diagonal `i + j = n`, null infinity is the column `j = n` and the axis is
/// `i = j`. The data `(W, d_T W)` are the ones used by the Cauchy solver, and
/// `psi = R^p W`. The second anti-diagonal comes from a Taylor step in `T`.
pub fn evolve_compactified(family: &DataFamily, params: &ModelParams, n: usize) -> Result<NullField> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::OutOfRange(format!("lattice size n = {n} must be even and >= 8")));
    }
    family.validate()?;
    let ell = family.ell;
    let h = 1.0 / n as f64;
    let p = params.decay_exponent(ell);
    let alpha = params.alpha(ell);
    let qe = params.qe();
    let table = DiamondTable::new(params, ell, n);

    let w0 = |r: f64| family.amplitude * family.profile(r);
    let w1 = |r: f64| family.velocity * family.profile(r);
    let fd: f64 = 1e-4;
    let psi_at = |r: f64, dt: f64| -> Complex64 {
        if r <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let d = fd.min(r / 2.0);
        let (a, b, c) = (w0(r - d), w0(r), w0(r + d));
        let wr = (c - a) / (2.0 * d);
        let wrr = (c - b * 2.0 + a) / (d * d);
        let wt = w1(r);
        let wtt = wrr + wr * ((2.0 * alpha + 1.0) / r) - wt * Complex64::new(0.0, 2.0 * qe / r);
        let rp = (p * r.ln()).exp();
        rp * (b + wt * dt + wtt * (dt * dt / 2.0))
    };

    let mut row_start = Vec::with_capacity(n + 1);
    let mut rows = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let start = i.max(n.saturating_sub(i));
        row_start.push(start);
        rows.push(vec![Complex64::new(0.0, 0.0); n - start + 1]);
    }
    // initial slice and the Taylor-launched neighbour
    for i in 0..=n {
        let j = n - i;
        if j >= i {
            rows[i][j - row_start[i]] = psi_at((j - i) as f64 * h, 0.0);
        }
        if j + 1 <= n && j + 1 >= i && j + 1 >= row_start[i] {
            rows[i][j + 1 - row_start[i]] = psi_at((j + 1 - i) as f64 * h, h);
        }
    }
    let data_max = rows.iter().flat_map(|r| r.iter()).map(|v| v.norm()).fold(0.0, f64::max);
    let guard = 1e6 * data_max.max(f64::MIN_POSITIVE);

    for level in (n + 2)..=(2 * n) {
        let i_lo = level - n;
        let i_hi = level / 2;
        for i in i_lo..=i_hi {
            let j = level - i;
            if i == j {
                continue; // axis stays zero
            }
            let k = j - i;
            let g = &table.get(k).gamma;
            let south = rows[i - 1][j - 1 - row_start[i - 1]];
            let east = rows[i - 1][j - row_start[i - 1]];
            let west = if k == 1 { Complex64::new(0.0, 0.0) } else { rows[i][j - 1 - row_start[i]] };
            let value = diamond(g, Complex64::new(0.0, 0.0), south, east, west);
            guard_check(value, guard, -2.0 + level as f64 * h)?;
            let start = row_start[i];
            rows[i][j - start] = value;
        }
    }
    Ok(NullField {
        mode: NullMode::Compactified,
        ell,
        params: *params,
        u0: -1.0,
        v0: -1.0,
        h,
        n_v: n,
        row_start,
        rows,
    })
}

/// Radiation field along the last advanced-time column, against physical retarded
/// time. In the compactified chart this is null infinity `V = 0` and `u = -1/U`;
/// the point `U = 0` (future timelike infinity) is dropped.
pub fn sample_radiation(field: &NullField) -> Vec<(f64, Complex64)> {
    let j = field.n_v;
    let mut out = Vec::new();
    for i in 0..field.rows.len() {
        if let Some(value) = field.get(i, j) {
            let u = field.u(i);
            match field.mode {
                NullMode::Compactified if u < 0.0 => out.push((-1.0 / u, value)),
                NullMode::Compactified => {}
                NullMode::Physical => out.push((u, value)),
            }
        }
    }
    out
}

/// `phi = psi / r0` along `v - u = r0` against `t = u + v`, linear in `v` between
/// lattice points.
pub fn sample_timelike(field: &NullField, r0: f64) -> Result<Vec<(f64, Complex64)>> {
    let m = r0 / field.h;
    let span = (field.n_v as f64) * field.h;
    if !(r0 > 0.0) || r0 > span {
        return Err(Error::Range(format!("r0 = {r0} outside (0, {span}]")));
    }
    let mut out = Vec::new();
    for i in 0..field.rows.len() {
        let Some(axis) = field.axis_column(i) else { continue };
        let jf = axis as f64 + m;
        let j0 = jf.floor() as usize;
        let frac = jf - j0 as f64;
        let lo = field.get(i, j0);
        let hi = if frac > 1e-12 { field.get(i, j0 + 1) } else { lo };
        if let (Some(a), Some(b)) = (lo, hi) {
            let value = a * (1.0 - frac) + b * frac;
            let u = field.u(i);
            out.push((2.0 * u + r0, value / r0));
        }
    }
    Ok(out)
}

/// `W = psi / R^p` on the anti-diagonal of compactified time `T`, as `(R, W)` pairs.
pub fn w_slice(field: &NullField, time: f64) -> Result<Vec<(f64, Complex64)>> {
    if field.mode != NullMode::Compactified {
        return Err(Error::Domain("w_slice needs a compactified lattice".into()));
    }
    let level_f = (time + 2.0) / field.h;
    let level = level_f.round() as usize;
    if (level_f - level as f64).abs() > 1e-9 || level < field.n_v || level > 2 * field.n_v {
        return Err(Error::Range(format!("T = {time} is not a lattice level")));
    }
    let p = field.params.decay_exponent(field.ell);
    let mut out = Vec::new();
    for i in 0..=level / 2 {
        let j = level - i;
        if j <= i || j > field.n_v {
            continue;
        }
        let r = (j - i) as f64 * field.h;
        if let Some(v) = field.get(i, j) {
            out.push((r, v / (p * r.ln()).exp()));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// `P_l(0)`: `W = psi / R^p` on null infinity next to `i+`, at `R = 2h, 4h, 6h`,
/// extrapolated quadratically to `R = 0`.
pub fn axis_amplitude(field: &NullField) -> Result<Complex64> {
    if field.mode != NullMode::Compactified {
        return Err(Error::Domain("axis amplitude needs a compactified lattice".into()));
    }
    let n = field.n_v;
    let p = field.params.decay_exponent(field.ell);
    let w_at = |k: usize| -> Result<Complex64> {
        let v = field
            .get(n - k, n)
            .ok_or_else(|| Error::Range(format!("lattice too small for k = {k}")))?;
        let r = k as f64 * field.h;
        Ok(v / (p * r.ln()).exp())
    };
    Ok(w_at(2)? * 3.0 - w_at(4)? * 3.0 + w_at(6)?)
}

/// `P_l(0)` on lattices `n` and `2n` and their Richardson combination.
pub fn richardson_amplitude(
    family: &DataFamily,
    params: &ModelParams,
    n: usize,
) -> Result<(Complex64, Complex64, Complex64)> {
    let (coarse, fine) = rayon::join(
        || evolve_compactified(family, params, n).and_then(|f| axis_amplitude(&f)),
        || evolve_compactified(family, params, 2 * n).and_then(|f| axis_amplitude(&f)),
    );
    let (coarse, fine) = (coarse?, fine?);
    Ok((coarse, fine, (fine * 4.0 - coarse) / 3.0))
}

/// Profile of characteristic data on the initial outgoing ray, as a function of
/// the radius `r = v - u0` along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayProfile {
    /// `exp(-1/(1-s^2))`, compactly supported.
    Bump,
    /// `exp(-s^2)`.
    Gaussian,
    /// Smooth switch-on to a constant, so that `psi` has a nonzero limit at null infinity.
    Step,
}

impl std::str::FromStr for RayProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bump" => Ok(RayProfile::Bump),
            "gaussian" => Ok(RayProfile::Gaussian),
            "step" => Ok(RayProfile::Step),
            other => Err(Error::Parse(format!("unknown ray profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayData {
    pub profile: RayProfile,
    pub center: f64,
    pub width: f64,
    pub amplitude: Complex64,
}

impl RayData {
    pub fn value(&self, r: f64) -> Complex64 {
        let s = (r - self.center) / self.width;
        let shape = match self.profile {
            RayProfile::Bump => bump_profile(s),
            RayProfile::Gaussian => (-s * s).exp(),
            RayProfile::Step => smooth_step((s + 1.0) / 2.0),
        };
        // psi vanishes on the axis
        if r <= 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitude * shape
        }
    }
}

/// Physical-chart lattice window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalDomain {
    pub u0: f64,
    pub u_max: f64,
    pub v0: f64,
    pub v_max: f64,
    pub h: f64,
}

impl Default for PhysicalDomain {
    fn default() -> Self {
        PhysicalDomain {
            u0: 1.0,
            u_max: 1e3,
            v0: 1.0,
            v_max: 4e3,
            h: 1.0 / 16.0,
        }
    }
}

impl PhysicalDomain {
    fn steps(&self, span: f64) -> Result<usize> {
        let k = span / self.h;
        if (k - k.round()).abs() > 1e-6 || k < 1.0 {
            return Err(Error::Axis(format!("span {span} is not a multiple of h = {}", self.h)));
        }
        Ok(k.round() as usize)
    }

    pub fn validate(&self) -> Result<(usize, usize, usize)> {
        if !(self.h > 0.0) || !(self.u0 > 0.0) || self.v0 < self.u0 || self.u_max <= self.u0 {
            return Err(Error::OutOfRange(format!("invalid null window {self:?}")));
        }
        if self.v_max < self.u_max {
            return Err(Error::OutOfRange("v_max must be at least u_max".into()));
        }
        let offset = if self.v0 == self.u0 { 0 } else { self.steps(self.v0 - self.u0)? };
        Ok((self.steps(self.u_max - self.u0)?, self.steps(self.v_max - self.v0)?, offset))
    }
}

/// Series recorded during a physical-chart run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalRun {
    /// `psi(u, v_max)`.
    pub radiation_raw: Vec<(f64, Complex64)>,
    /// `(v_max psi(u, v_max) - v_half psi(u, v_half)) / (v_max - v_half)` with
    /// `v_half ~ v_max / 2`, which removes the `1/v` correction to the limit.
    pub radiation: Vec<(f64, Complex64)>,
    /// One `(t, psi/r0)` series per requested `r0`.
    pub timelike: Vec<(f64, Vec<(f64, Complex64)>)>,
    /// Full lattice, when requested.
    pub field: Option<NullField>,
}

/// Evolves characteristic data `psi(u0, v) = data(v - u0)` (and zero on the ingoing
/// ray `v = v0`) through the window, recording radiation and timelike series.
pub fn evolve_physical(
    data: &RayData,
    domain: &PhysicalDomain,
    params: &ModelParams,
    ell: usize,
    radii: &[f64],
    keep_field: bool,
) -> Result<PhysicalRun> {
    evolve_physical_with(|r| data.value(r), domain, params, ell, radii, keep_field)
}

/// As [`evolve_physical`], with the outgoing data given as a function of `r = v - u0`.
pub fn evolve_physical_with<F: Fn(f64) -> Complex64>(
    data: F,
    domain: &PhysicalDomain,
    params: &ModelParams,
    ell: usize,
    radii: &[f64],
    keep_field: bool,
) -> Result<PhysicalRun> {
    let (n_u, n_v, offset) = domain.validate()?;
    let h = domain.h;
    for &r0 in radii {
        if !(r0 > 0.0) || r0 > domain.v_max - domain.u_max {
            return Err(Error::Range(format!("timelike radius {r0} outside the window")));
        }
    }
    let k_max = n_v + offset + 1;
    let table = DiamondTable::new(params, ell, k_max);
    let charge = params.qe() * if params.kind == crate::model::Kind::Csf { 1.0 } else { 0.0 };

    let v_of = |j: usize| domain.v0 + j as f64 * h;
    let u_of = |i: usize| domain.u0 + i as f64 * h;
    let start_of = |i: usize| i.saturating_sub(offset);
    let j_half = (((domain.v_max / 2.0) - domain.v0) / h).round().max(0.0) as usize;
    let v_half = v_of(j_half);

    let mut row: Vec<Complex64> = (0..=n_v).map(|j| data(v_of(j) - domain.u0)).collect();
    let guard = 1e6 * row.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut next = vec![Complex64::new(0.0, 0.0); n_v + 1];
    let mut run = PhysicalRun {
        radiation_raw: Vec::new(),
        radiation: Vec::new(),
        timelike: radii.iter().map(|&r| (r, Vec::new())).collect(),
        field: None,
    };
    let mut stored: Vec<Vec<Complex64>> = Vec::new();
    let record = |i: usize, row: &[Complex64], run: &mut PhysicalRun| {
        let u = u_of(i);
        let start = start_of(i);
        run.radiation_raw.push((u, row[n_v]));
        if j_half >= start && v_half < domain.v_max && v_half > u {
            let a = (row[n_v] * domain.v_max - row[j_half] * v_half) / (domain.v_max - v_half);
            run.radiation.push((u, a));
        }
        for (r0, series) in run.timelike.iter_mut() {
            let axis = i as f64 - offset as f64;
            let jf = axis + *r0 / h;
            if jf < 0.0 {
                continue;
            }
            let j0 = jf.floor() as usize;
            let frac = jf - j0 as f64;
            if j0 < start || j0 > n_v || (frac > 1e-12 && j0 + 1 > n_v) {
                continue;
            }
            let value = if frac > 1e-12 { row[j0] * (1.0 - frac) + row[j0 + 1] * frac } else { row[j0] };
            series.push((2.0 * u + *r0, value / *r0));
        }
    };
    if offset == 0 {
        row[0] = Complex64::new(0.0, 0.0);
    }
    record(0, &row, &mut run);
    if keep_field {
        stored.push(row.clone());
    }

    for i in 1..=n_u {
        let start = start_of(i);
        let u_center = u_of(i) - h / 2.0;
        let beta = Complex64::new(0.0, charge * h / u_center);
        next[..start].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        // first stored point: the axis, or the ingoing ray v = v0 (zero data)
        next[start] = Complex64::new(0.0, 0.0);
        for j in (start + 1)..=n_v {
            let k = j + offset - i;
            let g = &table.get(k).gamma;
            let west = if k == 1 { Complex64::new(0.0, 0.0) } else { next[j - 1] };
            let value = diamond(g, beta, row[j - 1], row[j], west);
            next[j] = value;
        }
        guard_check(next[n_v], guard, u_of(i))?;
        if next[start + 1..].iter().any(|v| !v.is_finite() || v.norm() > guard) {
            return Err(Error::BlowUp { guard, time: u_of(i) });
        }
        std::mem::swap(&mut row, &mut next);
        record(i, &row, &mut run);
        if keep_field {
            stored.push(row.clone());
        }
    }
    if keep_field {
        let row_start: Vec<usize> = (0..=n_u).map(start_of).collect();
        let rows = stored
            .into_iter()
            .zip(&row_start)
            .map(|(r, &s)| r[s..].to_vec())
            .collect();
        run.field = Some(NullField {
            mode: NullMode::Physical,
            ell,
            params: *params,
            u0: domain.u0,
            v0: domain.v0,
            h,
            n_v,
            row_start,
            rows,
        });
    }
    Ok(run)
}
