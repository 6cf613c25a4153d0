//! Initial data on the initial hyperboloid `T = -1`, stored in the regularized
//! variable `W = R^{-alpha_l} Phi`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::twisted::{twisted_second, RadialGrid, RadialGridFunction};

/// Outer edge of the admissible support of compact families.
pub const SUPPORT_EDGE: f64 = 0.9;
/// Radius up to which the static solutions are exact.
pub const STATIC_RADIUS: f64 = 2.0;
/// Radius beyond which the static cutoff vanishes.
pub const STATIC_CUTOFF_END: f64 = 2.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `exp(-1/(1-s^2))` in `s = (R - center)/width`.
    Bump,
    /// `(1 - s^2)^4`, a `C^3` polynomial bump.
    PolynomialBump,
    /// Cutoff of the static solution `R^{alpha_l} Y_lm`.
    StaticMode,
    /// Piecewise linear interpolation of a user table, zero outside it.
    CustomTable,
    /// `exp(-s^2)`, not compactly supported; reaches null infinity.
    Gaussian,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bump" => Ok(FamilyKind::Bump),
            "polynomial_bump" => Ok(FamilyKind::PolynomialBump),
            "static_mode" => Ok(FamilyKind::StaticMode),
            "custom_table" => Ok(FamilyKind::CustomTable),
            "gaussian" => Ok(FamilyKind::Gaussian),
            other => Err(Error::Parse(format!("unknown data family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataFamily {
    pub kind: FamilyKind,
    pub center: f64,
    pub width: f64,
    pub amplitude: Complex64,
    /// Amplitude of the same profile used for `d_T W`.
    pub velocity: Complex64,
    pub ell: usize,
    pub m: i64,
    /// `(R, value)` samples for [`FamilyKind::CustomTable`], sorted by `R`.
    pub table: Vec<(f64, f64)>,
}

impl DataFamily {
    pub fn bump(center: f64, width: f64, amplitude: Complex64, ell: usize) -> Self {
        DataFamily {
            kind: FamilyKind::Bump,
            center,
            width,
            amplitude,
            velocity: Complex64::new(0.0, 0.0),
            ell,
            m: 0,
            table: Vec::new(),
        }
    }

    pub fn gaussian(center: f64, width: f64, amplitude: Complex64, ell: usize) -> Self {
        DataFamily {
            kind: FamilyKind::Gaussian,
            ..Self::bump(center, width, amplitude, ell)
        }
    }

    pub fn static_mode(ell: usize, m: i64) -> Self {
        DataFamily {
            kind: FamilyKind::StaticMode,
            m,
            ..Self::bump(0.0, 1.0, Complex64::new(1.0, 0.0), ell)
        }
    }

    pub fn with_velocity(mut self, velocity: Complex64) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() as usize > self.ell {
            return Err(Error::Index(format!("|m| = {} exceeds l = {}", self.m.abs(), self.ell)));
        }
        if !self.amplitude.is_finite() || !self.velocity.is_finite() {
            return Err(Error::OutOfRange("non-finite amplitude".into()));
        }
        match self.kind {
            FamilyKind::Bump | FamilyKind::PolynomialBump => {
                if !(self.width > 0.0) {
                    return Err(Error::OutOfRange(format!("width = {} must be positive", self.width)));
                }
                let (lo, hi) = (self.center - self.width, self.center + self.width);
                if lo < 0.0 || hi > SUPPORT_EDGE {
                    return Err(Error::Support(format!(
                        "[{lo}, {hi}] is not inside (0, {SUPPORT_EDGE})"
                    )));
                }
            }
            FamilyKind::Gaussian => {
                if !(self.width > 0.0) || !(self.center > 0.0 && self.center < SUPPORT_EDGE) {
                    return Err(Error::Support(format!(
                        "gaussian needs width > 0 and center in (0, {SUPPORT_EDGE})"
                    )));
                }
            }
            FamilyKind::CustomTable => {
                if self.table.len() < 2 {
                    return Err(Error::Parse("custom table needs at least two rows".into()));
                }
                if self.table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Parse("custom table radii must increase".into()));
                }
                let nonzero_edge = self
                    .table
                    .iter()
                    .filter(|(_, v)| *v != 0.0)
                    .map(|(r, _)| *r)
                    .fold(0.0, f64::max);
                if self.table[0].0 < 0.0 || nonzero_edge > SUPPORT_EDGE {
                    return Err(Error::Support(format!(
                        "table is nonzero at R = {nonzero_edge} beyond {SUPPORT_EDGE}"
                    )));
                }
            }
            FamilyKind::StaticMode => {}
        }
        Ok(())
    }

    /// Real profile of the family at radius `r`.
    pub fn profile(&self, r: f64) -> f64 {
        let s = (r - self.center) / self.width;
        match self.kind {
            FamilyKind::Bump => bump_profile(s),
            FamilyKind::PolynomialBump => {
                if s.abs() < 1.0 {
                    (1.0 - s * s).powi(4)
                } else {
                    0.0
                }
            }
            FamilyKind::Gaussian => (-s * s).exp(),
            FamilyKind::StaticMode => static_cutoff(r),
            FamilyKind::CustomTable => interpolate_table(&self.table, r),
        }
    }
}

/// `exp(-1/(1-s^2))` on `|s| < 1`, zero elsewhere.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 at `x <= 0` to 1 at `x >= 1`.
pub fn smooth_step(x: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (f(x), f(1.0 - x));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Equal to 1 on `R <= 2`, 0 on `R >= 2.4`, smooth in between.
pub fn static_cutoff(r: f64) -> f64 {
    1.0 - smooth_step((r - STATIC_RADIUS) / (STATIC_CUTOFF_END - STATIC_RADIUS))
}

fn interpolate_table(table: &[(f64, f64)], r: f64) -> f64 {
    let (first, last) = (table[0], table[table.len() - 1]);
    if r < first.0 || r > last.0 {
        return 0.0;
    }
    let k = table.partition_point(|(x, _)| *x <= r).clamp(1, table.len() - 1);
    let (x0, y0) = table[k - 1];
    let (x1, y1) = table[k];
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

/// Samples `(W, d_T W)` of the family on `grid`.
pub fn make_data(
    family: &DataFamily,
    grid: RadialGrid,
) -> Result<(RadialGridFunction, RadialGridFunction)> {
    family.validate()?;
    let w = RadialGridFunction::from_fn(grid, family.ell, |r| family.amplitude * family.profile(r));
    let wdot = if family.kind == FamilyKind::StaticMode {
        RadialGridFunction::zeros(grid, family.ell)
    } else {
        RadialGridFunction::from_fn(grid, family.ell, |r| family.velocity * family.profile(r))
    };
    Ok((w, wdot))
}

/// Static solution `R^{alpha_l} chi(R) Y_lm`, returned as its radial `W = chi`.
pub fn static_solution(ell: usize, m: i64, grid: RadialGrid) -> Result<RadialGridFunction> {
    if m.unsigned_abs() as usize > ell {
        return Err(Error::Index(format!("|m| = {} exceeds l = {ell}", m.abs())));
    }
    Ok(RadialGridFunction::from_real_fn(grid, ell, static_cutoff))
}

/// Smooth extension of data supported in `R <= 1` to a function supported in
/// `R <= 1 + delta`. Away from the cutoff the data are untouched; on
/// `[1 - 2 delta, 1]` the data are blended into their convolution with a
/// unit-mass kernel of half-width `delta`.
pub fn mollify_extend(data: &RadialGridFunction, delta: f64) -> Result<RadialGridFunction> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::OutOfRange(format!("delta = {delta} must lie in (0, 1/2)")));
    }
    let g = data.grid;
    let h = g.h();
    let radii = g.nodes();
    let half = (delta / h).floor() as isize;
    let kernel: Vec<f64> = (-half..=half)
        .map(|k| bump_profile(k as f64 * h / delta))
        .collect();
    let mass: f64 = kernel.iter().sum();
    let mut out = data.clone();
    if mass == 0.0 {
        return Ok(out);
    }
    for (j, &r) in radii.iter().enumerate() {
        let blend = smooth_step((r - (1.0 - 2.0 * delta)) / delta);
        if blend == 0.0 {
            continue;
        }
        let mut conv = Complex64::new(0.0, 0.0);
        for (k, w) in kernel.iter().enumerate() {
            let idx = j as isize + k as isize - half;
            if idx >= 0 && (idx as usize) < g.n {
                conv += data.values[idx as usize] * (w / mass);
            }
        }
        out.values[j] = data.values[j] * (1.0 - blend) + conv * blend;
    }
    Ok(out)
}

/// `d_T^k Phi` at `T = -1` for `k = 0..=n`, from the mode equation
/// `d_T^2 Phi = d^{1-a_l} d^{a_l} Phi - 2 i q e R^{-1} d_T Phi`.
///
/// The twisting exponent of the mode is used directly; it differs from the
/// `alpha_0` form with an explicit `-l(l+1)/R^2` term only by truncation error.
pub fn tderiv_data(
    phi0: &RadialGridFunction,
    phi0_dot: &RadialGridFunction,
    params: &ModelParams,
    n: usize,
) -> Result<Vec<RadialGridFunction>> {
    if phi0.grid != phi0_dot.grid || phi0.location != phi0_dot.location {
        return Err(Error::OutOfRange("data pair on different grids".into()));
    }
    let alpha = params.alpha(phi0.ell);
    let charge = Complex64::new(0.0, -2.0 * params.qe());
    let mut out = vec![phi0.clone(), phi0_dot.clone()];
    for k in 2..=n {
        let next = twisted_second(&out[k - 2], alpha)
            .add(&out[k - 1].weighted(|r| 1.0 / r).scale(charge));
        out.push(next);
    }
    out.truncate(n + 1);
    Ok(out)
}
