//! Twisted radial derivatives `R^{-a} d_R (R^a f)`, weighted norms, the conserved
//! energy and the twisted Hardy inequality on cell-centred radial grids.
//!
//! All `L^2` norms use the measure `R dR` of a single normalized angular mode.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::initdata::tderiv_data;
use crate::model::{angular_eigenvalue, ModelParams};

/// Cell-centred grid on `(0, r_max)` with nodes `(j + 1/2) h`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub n: usize,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n < 4 || !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::OutOfRange(format!(
                "radial grid needs n >= 4 and r_max > 0 (got n = {n}, r_max = {r_max})"
            )));
        }
        Ok(RadialGrid { n, r_max })
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Radius of node `j` (zero-based).
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h()
    }

    /// Radius of the interior face between nodes `j` and `j + 1`.
    pub fn face(&self, j: usize) -> f64 {
        (j as f64 + 1.0) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..self.n - 1).map(|j| self.face(j)).collect()
    }
}

/// Where the samples of a [`RadialGridFunction`] live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// The `n` cell centres.
    Nodes,
    /// The `n - 1` interior faces.
    Faces,
}

/// Complex samples of one angular mode on a radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGridFunction {
    pub grid: RadialGrid,
    pub location: Location,
    pub ell: usize,
    pub values: Vec<Complex64>,
}

impl RadialGridFunction {
    pub fn zeros(grid: RadialGrid, ell: usize) -> Self {
        RadialGridFunction {
            grid,
            location: Location::Nodes,
            ell,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, ell: usize, f: F) -> Self {
        RadialGridFunction {
            grid,
            location: Location::Nodes,
            ell,
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: RadialGrid, ell: usize, f: F) -> Self {
        Self::from_fn(grid, ell, |r| Complex64::new(f(r), 0.0))
    }

    /// Radii of the samples.
    pub fn radii(&self) -> Vec<f64> {
        match self.location {
            Location::Nodes => self.grid.nodes(),
            Location::Faces => self.grid.faces(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Pointwise product with a real function of the radius.
    pub fn weighted<F: Fn(f64) -> f64>(&self, w: F) -> Self {
        let mut out = self.clone();
        for (v, r) in out.values.iter_mut().zip(self.radii()) {
            *v *= w(r);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `int |f|^2 R dR` by the midpoint rule on the sample locations.
    pub fn l2_norm_sqr(&self) -> f64 {
        let h = self.grid.h();
        self.values
            .iter()
            .zip(self.radii())
            .map(|(v, r)| v.norm_sqr() * r * h)
            .sum()
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        assert_eq!(self.location, other.location, "location mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Cell averages over blocks of `factor` node cells.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if self.location != Location::Nodes || factor == 0 || self.grid.n % factor != 0 {
            return Err(Error::OutOfRange(format!(
                "cannot coarsen {} cells by {factor}",
                self.grid.n
            )));
        }
        let grid = RadialGrid::new(self.grid.n / factor, self.grid.r_max)?;
        let values = self
            .values
            .chunks(factor)
            .map(|c| c.iter().sum::<Complex64>() / factor as f64)
            .collect();
        Ok(RadialGridFunction {
            grid,
            location: Location::Nodes,
            ell: self.ell,
            values,
        })
    }

    /// Midpoint-rule inner product `int f conj(g) R dR`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.check_same(other);
        let h = self.grid.h();
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.radii())
            .map(|((a, b), r)| a * b.conj() * r * h)
            .sum()
    }
}

/// Twisted derivative of node samples, returned on the interior faces:
/// `(R_{j+1}^a f_{j+1} - R_j^a f_j) / (h R_{j+1/2}^a)`.
pub fn twisted_d(f: &RadialGridFunction, alpha: f64) -> RadialGridFunction {
    assert_eq!(f.location, Location::Nodes, "twisted_d expects node samples");
    let g = f.grid;
    let h = g.h();
    let scaled: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * g.node(j).powf(alpha))
        .collect();
    let values = (0..g.n - 1)
        .map(|j| (scaled[j + 1] - scaled[j]) / (h * g.face(j).powf(alpha)))
        .collect();
    RadialGridFunction {
        grid: g,
        location: Location::Faces,
        ell: f.ell,
        values,
    }
}

/// Twisted derivative of face samples, returned on the nodes. The two boundary
/// fluxes `R^a v` at `R = 0` and `R = r_max` are extrapolated linearly from the interior.
pub fn twisted_d_faces(v: &RadialGridFunction, alpha: f64) -> RadialGridFunction {
    assert_eq!(v.location, Location::Faces, "twisted_d_faces expects face samples");
    let g = v.grid;
    let h = g.h();
    let n = g.n;
    let mut flux = Vec::with_capacity(n + 1);
    let interior: Vec<Complex64> = v
        .values
        .iter()
        .enumerate()
        .map(|(j, x)| x * g.face(j).powf(alpha))
        .collect();
    flux.push(interior[0] * 2.0 - interior[1]);
    flux.extend_from_slice(&interior);
    flux.push(interior[n - 2] * 2.0 - interior[n - 3]);
    let values = (0..n)
        .map(|j| (flux[j + 1] - flux[j]) / (h * g.node(j).powf(alpha)))
        .collect();
    RadialGridFunction {
        grid: g,
        location: Location::Nodes,
        ell: v.ell,
        values,
    }
}

/// Flux-form composition `d^{1-a} d^{a}`.
pub fn twisted_second(f: &RadialGridFunction, alpha: f64) -> RadialGridFunction {
    twisted_d_faces(&twisted_d(f, alpha), 1.0 - alpha)
}

/// First and second centred derivatives at the nodes, second order, with
/// one-sided stencils at the two ends.
fn node_derivatives(f: &RadialGridFunction) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = f.grid.n;
    let h = f.grid.h();
    let v = &f.values;
    let mut d1 = vec![Complex64::new(0.0, 0.0); n];
    let mut d2 = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        d1[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
        d2[j] = (v[j + 1] - v[j] * 2.0 + v[j - 1]) / (h * h);
    }
    d1[0] = (v[0] * -3.0 + v[1] * 4.0 - v[2]) / (2.0 * h);
    d1[n - 1] = (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) / (2.0 * h);
    d2[0] = (v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) / (h * h);
    d2[n - 1] = (v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) / (h * h);
    (d1, d2)
}

/// Expanded form `f'' + f'/R - a^2 f / R^2`, kept as a cross-check of [`twisted_second`].
pub fn twisted_second_expanded(f: &RadialGridFunction, alpha: f64) -> RadialGridFunction {
    assert_eq!(f.location, Location::Nodes);
    let (d1, d2) = node_derivatives(f);
    let mut out = f.clone();
    for (j, r) in f.grid.nodes().into_iter().enumerate() {
        out.values[j] = d2[j] + d1[j] / r - f.values[j] * (alpha * alpha / (r * r));
    }
    out
}

/// Outcome of a Hardy inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `||R^{-1-p} f||` with `||R^{-p} d^a f|| / |a + p|`; passes if
/// `lhs <= rhs (1 + tol)`.
pub fn hardy_check(f: &RadialGridFunction, alpha: f64, p: f64, tol: f64) -> Result<HardyReport> {
    let s = alpha + p;
    if s.abs() < 1e-9 {
        return Err(Error::Degenerate(format!("alpha + p = {s}")));
    }
    let lhs = f.weighted(|r| r.powf(-1.0 - p)).l2_norm_sqr().sqrt();
    let rhs = twisted_d(f, alpha).weighted(|r| r.powf(-p)).l2_norm_sqr().sqrt() / s.abs();
    Ok(HardyReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + tol),
    })
}

fn power_moment(a: f64, b: f64, s: f64) -> f64 {
    // int_a^b R^s dR for s > -1
    (b.powf(s + 1.0) - a.powf(s + 1.0)) / (s + 1.0)
}

/// Cell masses `int_cell R^{2 beta + 1}` of the kinetic term.
pub fn kinetic_masses(grid: RadialGrid, beta: f64) -> Vec<f64> {
    let h = grid.h();
    (0..grid.n)
        .map(|j| power_moment(j as f64 * h, (j as f64 + 1.0) * h, 2.0 * beta + 1.0))
        .collect()
}

/// Face conductances `R_f^{2 beta + 1} / h` of the gradient term, interior faces
/// followed by the outer face at `r_max`.
pub fn gradient_conductances(grid: RadialGrid, beta: f64) -> Vec<f64> {
    let h = grid.h();
    let k = 2.0 * beta + 1.0;
    let mut out: Vec<f64> = grid.faces().iter().map(|r| r.powf(k) / h).collect();
    out.push(grid.r_max.powf(k) / h);
    out
}

/// Energy of one mode, `int (|d_T Phi|^2 + |d^{a0} Phi|^2 + l(l+1) R^{-2} |Phi|^2) R dR`
/// with `Phi = R^{a_l} W`.
///
/// For the Dirichlet branch the last two terms integrate by parts to
/// `int R^{2 a_l + 1} |d_R W|^2 dR`, since `a_l^2 - a_0^2 = l(l+1)`. That form is
/// discretized with exact cell masses for the kinetic term and face differences
/// for the gradient; the outer face uses the Dirichlet ghost `W_{n+1} = -W_n`.
/// This is the quadratic invariant of the time-centred schemes in `evolve_ads`.
pub fn energy(
    w: &RadialGridFunction,
    wdot: &RadialGridFunction,
    params: &ModelParams,
    ell: usize,
) -> f64 {
    assert_eq!(w.grid, wdot.grid, "grid mismatch");
    let g = w.grid;
    let n = g.n;
    let beta = params.alpha(ell);
    let kinetic: f64 = kinetic_masses(g, beta)
        .iter()
        .zip(&wdot.values)
        .map(|(m, v)| m * v.norm_sqr())
        .sum();
    let cond = gradient_conductances(g, beta);
    let mut gradient: f64 = (0..n - 1)
        .map(|j| cond[j] * (w.values[j + 1] - w.values[j]).norm_sqr())
        .sum();
    gradient += 2.0 * cond[n - 1] * w.values[n - 1].norm_sqr();
    kinetic + gradient
}

/// `||f||^2` in the weighted `H^1` norm with twisting exponent `alpha`, for mode `f.ell`.
pub fn h1_norm_sqr(f: &RadialGridFunction, alpha: f64) -> f64 {
    let lam = angular_eigenvalue(f.ell);
    let singular = f.weighted(|r| 1.0 / r).l2_norm_sqr();
    (1.0 + lam) * singular + twisted_d(f, alpha).l2_norm_sqr()
}

/// `||f||^2` in the unweighted second-order norm (sum over two derivatives plus
/// `||R^{-1} f||^2_{H^1}`), per mode with the angular eigenvalue substituted.
pub fn h2_norm_sqr(f: &RadialGridFunction) -> f64 {
    let lam = angular_eigenvalue(f.ell);
    let h = f.grid.h();
    let (d1, d2) = node_derivatives(f);
    let mut total = 0.0;
    for (j, r) in f.grid.nodes().into_iter().enumerate() {
        let v = f.values[j].norm_sqr();
        let angular_second = (lam * lam - lam) * v / r.powi(4);
        let mixed = lam * d1[j].norm_sqr() / (r * r);
        total += (angular_second + mixed + d2[j].norm_sqr()) * r * h;
    }
    total + h1_norm_sqr(&f.weighted(|r| 1.0 / r), 0.0)
}

/// Per-mode second-order data norm used for the solution class: on `l = 0` only the
/// twisted second derivative is controlled, on `l >= 1` the full second-order norm.
pub fn h2_00_norm_sqr(f: &RadialGridFunction, params: &ModelParams) -> f64 {
    if f.ell == 0 {
        twisted_second(f, params.alpha(0)).l2_norm_sqr()
    } else {
        h2_norm_sqr(f)
    }
}

/// Norms of a data pair `(Phi0, Phi0dot)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataNorms {
    pub h1_data: f64,
    pub h2_data: f64,
    /// Includes time derivatives up to order `n_time + 1` generated by the recursion.
    pub h2_data_n: f64,
    pub n_time: usize,
}

pub fn data_norms(
    phi0: &RadialGridFunction,
    phi0_dot: &RadialGridFunction,
    params: &ModelParams,
    n_time: usize,
) -> Result<DataNorms> {
    let a0 = params.alpha(0);
    let h1 = h1_norm_sqr(phi0, a0) + phi0_dot.l2_norm_sqr();
    let h2 = h2_00_norm_sqr(phi0, params) + h1_norm_sqr(phi0_dot, a0);
    let mut h2n = h2;
    if n_time > 0 {
        let derivs = tderiv_data(phi0, phi0_dot, params, n_time + 1)?;
        for j in 1..=n_time {
            h2n += h2_00_norm_sqr(&derivs[j], params) + h1_norm_sqr(&derivs[j + 1], a0);
        }
    }
    Ok(DataNorms {
        h1_data: h1.sqrt(),
        h2_data: h2.sqrt(),
        h2_data_n: h2n.sqrt(),
        n_time,
    })
}
