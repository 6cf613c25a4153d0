//! Spherical harmonics on a Gauss–Legendre × uniform product grid.
//!
//! Harmonics are orthonormal on the unit sphere with the Condon–Shortley phase.
//! Angular derivatives act on coefficients through the eigenvalues `l(l+1)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::angular_eigenvalue;
use crate::quadrature::gauss_legendre;

/// Flat index of `(ell, m)` in coefficient arrays.
pub fn mode_index(ell: usize, m: i64) -> usize {
    ((ell * ell + ell) as i64 + m) as usize
}

fn check_index(ell: usize, m: i64) -> Result<()> {
    if m.unsigned_abs() as usize > ell {
        return Err(Error::Index(format!("|m| = {} exceeds l = {ell}", m.abs())));
    }
    Ok(())
}

/// Normalized associated Legendre values `N_l^m P_l^m(x)` for fixed `m >= 0` and `l = m..=l_max`.
fn normalized_legendre_column(m: usize, l_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; l_max + 1];
    if m > l_max {
        return out;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -s * ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt();
    }
    out[m] = pmm;
    if m + 1 <= l_max {
        out[m + 1] = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    }
    let mf = m as f64;
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        out[l] = a * (x * out[l - 1] - out[l - 2] / a_prev);
    }
    out
}

/// Value of the orthonormal harmonic `Y_{l,m}` at polar angle `theta`, azimuth `phi`.
pub fn eval_harmonic(ell: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    check_index(ell, m)?;
    let ma = m.unsigned_abs() as usize;
    let p = normalized_legendre_column(ma, ell, theta.cos())[ell];
    let y = Complex64::from_polar(p, ma as f64 * phi);
    if m >= 0 {
        Ok(y)
    } else {
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    }
}

/// Product quadrature grid resolving harmonics up to a band limit.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub band_limit: usize,
    pub cos_theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub n_phi: usize,
    /// `legendre[l][m][i]` = normalized `P_l^m` at the `i`-th latitude node.
    legendre: Vec<Vec<Vec<f64>>>,
}

impl SphereGrid {
    /// Grid with `L + 1` latitudes and `2L + 2` longitudes, exact for products up to degree `2L`.
    pub fn new(band_limit: usize) -> Self {
        let n_theta = band_limit + 1;
        let (cos_theta, theta_weights) = gauss_legendre(n_theta);
        let n_phi = 2 * band_limit + 2;
        let mut legendre = vec![vec![vec![0.0; n_theta]; band_limit + 1]; band_limit + 1];
        for (i, &x) in cos_theta.iter().enumerate() {
            for m in 0..=band_limit {
                let col = normalized_legendre_column(m, band_limit, x);
                for l in m..=band_limit {
                    legendre[l][m][i] = col[l];
                }
            }
        }
        SphereGrid {
            band_limit,
            cos_theta,
            theta_weights,
            n_phi,
            legendre,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// Quadrature weight of sample `(i, j)`.
    pub fn weight(&self, i: usize) -> f64 {
        self.theta_weights[i] * 2.0 * PI / self.n_phi as f64
    }

    fn harmonic_at(&self, ell: usize, m: i64, i: usize, j: usize) -> Complex64 {
        let ma = m.unsigned_abs() as usize;
        let p = self.legendre[ell][ma][i];
        let y = Complex64::from_polar(p, ma as f64 * self.phi(j));
        if m >= 0 {
            y
        } else if ma % 2 == 0 {
            y.conj()
        } else {
            -y.conj()
        }
    }
}

/// Samples of a function on a [`SphereGrid`], stored latitude-major.
#[derive(Debug, Clone)]
pub struct SphereFunction {
    pub grid: SphereGrid,
    pub values: Vec<Complex64>,
}

/// Coefficients `c_{l,m}` for `0 <= l <= L`, indexed by [`mode_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub band_limit: usize,
    pub coeffs: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn zeros(band_limit: usize) -> Self {
        ModeCoefficients {
            band_limit,
            coeffs: vec![Complex64::new(0.0, 0.0); (band_limit + 1) * (band_limit + 1)],
        }
    }

    pub fn get(&self, ell: usize, m: i64) -> Complex64 {
        self.coeffs[mode_index(ell, m)]
    }

    pub fn set(&mut self, ell: usize, m: i64, value: Complex64) {
        self.coeffs[mode_index(ell, m)] = value;
    }

    /// Sum of `|c|^2` over degree `ell`.
    pub fn degree_power(&self, ell: usize) -> f64 {
        (-(ell as i64)..=ell as i64)
            .map(|m| self.get(ell, m).norm_sqr())
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl SphereFunction {
    pub fn zeros(grid: &SphereGrid) -> Self {
        SphereFunction {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(theta, phi)` on the grid.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: &SphereGrid, f: F) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.n_theta() {
            let theta = grid.cos_theta[i].acos();
            for j in 0..grid.n_phi {
                out.values[i * grid.n_phi + j] = f(theta, grid.phi(j));
            }
        }
        out
    }

    /// Reconstructs the band-limited function with the given coefficients.
    pub fn synthesize(grid: &SphereGrid, coeffs: &ModeCoefficients) -> Self {
        let mut out = Self::zeros(grid);
        let lmax = coeffs.band_limit.min(grid.band_limit);
        for i in 0..grid.n_theta() {
            for j in 0..grid.n_phi {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..=lmax {
                    for m in -(l as i64)..=l as i64 {
                        let c = coeffs.get(l, m);
                        if c != Complex64::new(0.0, 0.0) {
                            acc += c * grid.harmonic_at(l, m, i, j);
                        }
                    }
                }
                out.values[i * grid.n_phi + j] = acc;
            }
        }
        out
    }

    /// Coefficients of every degree up to the band limit.
    pub fn analyze(&self) -> ModeCoefficients {
        let grid = &self.grid;
        let mut coeffs = ModeCoefficients::zeros(grid.band_limit);
        for l in 0..=grid.band_limit {
            for m in -(l as i64)..=l as i64 {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..grid.n_theta() {
                    let w = grid.weight(i);
                    for j in 0..grid.n_phi {
                        acc += self.values[i * grid.n_phi + j] * grid.harmonic_at(l, m, i, j).conj() * w;
                    }
                }
                coeffs.set(l, m, acc);
            }
        }
        coeffs
    }

    /// Quadrature inner product `<self, other>` (conjugate-linear in `other`).
    pub fn inner(&self, other: &SphereFunction) -> Complex64 {
        let g = &self.grid;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..g.n_theta() {
            let w = g.weight(i);
            for j in 0..g.n_phi {
                let k = i * g.n_phi + j;
                acc += self.values[k] * other.values[k].conj() * w;
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    fn map_coefficients<F: Fn(usize) -> f64>(&self, factor: F) -> SphereFunction {
        let mut c = self.analyze();
        for l in 0..=c.band_limit {
            let f = factor(l);
            for m in -(l as i64)..=l as i64 {
                let v = c.get(l, m) * f;
                c.set(l, m, v);
            }
        }
        SphereFunction::synthesize(&self.grid, &c)
    }

    /// Spectral sphere Laplacian.
    pub fn laplacian(&self) -> SphereFunction {
        self.map_coefficients(|l| -angular_eigenvalue(l))
    }

    /// `||grad f||^2`, evaluated as the quadrature of `conj(f) * (-Laplacian f)`.
    pub fn gradient_norm_sqr(&self) -> f64 {
        let lap = self.laplacian();
        -self.inner(&lap).re
    }

    fn shifted_laplacian(&self, shift: f64) -> SphereFunction {
        self.map_coefficients(|l| shift - angular_eigenvalue(l))
    }
}

/// Degree-`ell` part `pi_l f` as coefficients (all other degrees zero).
pub fn project(f: &SphereFunction, ell: usize) -> Result<ModeCoefficients> {
    if ell > f.grid.band_limit {
        return Err(Error::BandLimit {
            degree: ell,
            limit: f.grid.band_limit,
        });
    }
    let all = f.analyze();
    let mut out = ModeCoefficients::zeros(f.grid.band_limit);
    for m in -(ell as i64)..=ell as i64 {
        out.set(ell, m, all.get(ell, m));
    }
    Ok(out)
}

/// Sum of all degrees `>= ell`, as samples on the same grid.
pub fn project_geq(f: &SphereFunction, ell: usize) -> Result<SphereFunction> {
    if ell > f.grid.band_limit {
        return Err(Error::BandLimit {
            degree: ell,
            limit: f.grid.band_limit,
        });
    }
    let mut c = f.analyze();
    for l in 0..ell {
        for m in -(l as i64)..=l as i64 {
            c.set(l, m, Complex64::new(0.0, 0.0));
        }
    }
    Ok(SphereFunction::synthesize(&f.grid, &c))
}

/// Residuals of the angular Poincaré identities and slacks of the two inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareResiduals {
    /// First identity on `f_{l0}`: `|lhs - middle| + |middle|`.
    pub identity_own_mode: f64,
    /// Second identity, maximum over `l >= l0` of the two pairwise differences.
    pub identity_shifted: f64,
    /// Gradient-ratio identity, maximum over `l >= l0 + 1`.
    pub identity_ratio: f64,
    /// `rhs - lhs` of the inequality with `(Laplacian + 2)` on `f_{>= l0}`.
    pub slack_laplacian: f64,
    /// `rhs - lhs` of the gradient inequality on `f_{>= l0}`.
    pub slack_gradient: f64,
    /// Scale used to normalize the residuals (`||f||^2 + ||grad f||^2`).
    pub scale: f64,
}

pub fn poincare_residuals(f: &SphereFunction, ell0: usize) -> Result<PoincareResiduals> {
    let band = f.grid.band_limit;
    if ell0 > band {
        return Err(Error::BandLimit {
            degree: ell0,
            limit: band,
        });
    }
    let lam0 = angular_eigenvalue(ell0);
    let degree_part = |l: usize| -> Result<SphereFunction> {
        Ok(SphereFunction::synthesize(&f.grid, &project(f, l)?))
    };

    let own = degree_part(ell0)?;
    let own_lhs = own.gradient_norm_sqr() - lam0 * own.norm_sqr();
    let own_mid = own.shifted_laplacian(lam0).norm_sqr();
    let identity_own_mode = (own_lhs - own_mid).abs() + own_mid.abs();

    let mut identity_shifted: f64 = 0.0;
    let mut identity_ratio: f64 = 0.0;
    for l in ell0..=band {
        let part = degree_part(l)?;
        let gap = angular_eigenvalue(l) - lam0;
        let grad = part.gradient_norm_sqr();
        let bracket = grad - lam0 * part.norm_sqr();
        let left = gap * bracket;
        let mid = part.shifted_laplacian(lam0).norm_sqr();
        let right = gap * gap * part.norm_sqr();
        identity_shifted = identity_shifted.max((left - mid).abs()).max((mid - right).abs());
        if l > ell0 {
            let ratio_rhs = gap / angular_eigenvalue(l) * grad;
            identity_ratio = identity_ratio.max((bracket - ratio_rhs).abs());
        }
    }

    let tail = project_geq(f, ell0)?;
    let grad = tail.gradient_norm_sqr();
    let bracket = grad - lam0 * tail.norm_sqr();
    let shifted = tail.shifted_laplacian(2.0).norm_sqr();
    let slack_laplacian = shifted / (2.0 * (ell0 as f64 + 1.0)) - bracket;
    let slack_gradient = (ell0 as f64 + 2.0) / 2.0 * bracket - grad;

    Ok(PoincareResiduals {
        identity_own_mode,
        identity_shifted,
        identity_ratio,
        slack_laplacian,
        slack_gradient,
        scale: f.norm_sqr() + f.gradient_norm_sqr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(grid: &SphereGrid, ell: usize, m: i64) -> SphereFunction {
        let mut c = ModeCoefficients::zeros(grid.band_limit);
        c.set(ell, m, Complex64::new(1.0, 0.0));
        SphereFunction::synthesize(grid, &c)
    }

    fn random_function(grid: &SphereGrid, rng: &mut ChaCha8Rng) -> SphereFunction {
        let mut c = ModeCoefficients::zeros(grid.band_limit);
        for v in c.coeffs.iter_mut() {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        SphereFunction::synthesize(grid, &c)
    }

    #[test]
    fn constant_harmonic() {
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            let y = eval_harmonic(0, 0, t, p).unwrap();
            assert!((y.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y.im == 0.0);
        }
        assert!(matches!(eval_harmonic(1, 2, 0.0, 0.0), Err(Error::Index(_))));
    }

    #[test]
    fn closed_forms_of_low_degree() {
        let (t, p) = (0.7, 1.3);
        let y10 = eval_harmonic(1, 0, t, p).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-14);
        let y11 = eval_harmonic(1, 1, t, p).unwrap();
        let want = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - want).norm() < 1e-14);
        let y2m1 = eval_harmonic(2, -1, t, p).unwrap();
        let want = Complex64::from_polar((15.0 / (8.0 * PI)).sqrt() * t.sin() * t.cos(), -p);
        assert!((y2m1 - want).norm() < 1e-14);
    }

    #[test]
    fn orthonormality_by_quadrature() {
        let grid = SphereGrid::new(6);
        let f = SphereFunction::from_fn(&grid, |t, p| eval_harmonic(3, 2, t, p).unwrap());
        assert!((f.norm_sqr() - 1.0).abs() < 1e-13);
        let a = SphereFunction::from_fn(&grid, |t, p| eval_harmonic(1, 0, t, p).unwrap());
        let b = SphereFunction::from_fn(&grid, |t, p| eval_harmonic(2, 0, t, p).unwrap());
        assert!(a.inner(&b).norm() < 1e-14);
        for l in 0..=6 {
            for m in -(l as i64)..=l as i64 {
                for l2 in 0..=6 {
                    for m2 in -(l2 as i64)..=l2 as i64 {
                        let ip = basis(&grid, l, m).inner(&basis(&grid, l2, m2));
                        let want = if (l, m) == (l2, m2) { 1.0 } else { 0.0 };
                        assert!((ip - want).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let grid = SphereGrid::new(4);
        let f = basis(&grid, 1, 1);
        let p1 = project(&f, 1).unwrap();
        assert!((p1.get(1, 1) - 1.0).norm() < 1e-13);
        assert!(project(&f, 0).unwrap().total_power() < 1e-26);

        let mut c = ModeCoefficients::zeros(4);
        c.set(0, 0, Complex64::new(3.0, 0.0));
        c.set(2, 0, Complex64::new(2.0, 0.0));
        let f = SphereFunction::synthesize(&grid, &c);
        let g = project_geq(&f, 1).unwrap();
        let want = basis(&grid, 2, 0);
        for (a, b) in g.values.iter().zip(&want.values) {
            assert!((a - b * 2.0).norm() < 1e-13);
        }

        let one = SphereFunction::from_fn(&grid, |_, _| Complex64::new(1.0, 0.0));
        let c = project(&one, 0).unwrap();
        assert!((c.get(0, 0).re - (4.0 * PI).sqrt()).abs() < 1e-13);
        assert!(matches!(project(&one, 5), Err(Error::BandLimit { .. })));
    }

    #[test]
    fn eigenvalue_relation_on_basis() {
        let grid = SphereGrid::new(5);
        for l in 0..=5 {
            for m in -(l as i64)..=l as i64 {
                let f = basis(&grid, l, m);
                let lap = f.laplacian();
                let lam = angular_eigenvalue(l);
                for (a, b) in lap.values.iter().zip(&f.values) {
                    assert!((a + b * lam).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn poincare_examples() {
        let grid = SphereGrid::new(4);
        let r = poincare_residuals(&basis(&grid, 1, 0), 1).unwrap();
        assert!(r.identity_own_mode < 1e-12);
        let f = basis(&grid, 2, 0);
        let r = poincare_residuals(&f, 1).unwrap();
        assert!(r.identity_shifted < 1e-12);
        assert!(r.identity_ratio < 1e-12);
        let part = SphereFunction::synthesize(&grid, &project(&f, 2).unwrap());
        let lhs = part.gradient_norm_sqr() - 2.0 * part.norm_sqr();
        assert!((lhs - (6.0 - 2.0) / 6.0 * part.gradient_norm_sqr()).abs() < 1e-12);
        assert!(((6.0 - 2.0) * lhs - 16.0).abs() < 1e-12);
    }

    /// The Laplacian inequality cannot hold at `l0 = 0`: `(Laplacian + 2)` annihilates degree one.
    #[test]
    fn laplacian_inequality_fails_at_degree_zero() {
        let grid = SphereGrid::new(3);
        let r = poincare_residuals(&basis(&grid, 1, 0), 0).unwrap();
        assert!((r.slack_laplacian + 2.0).abs() < 1e-12);
    }

    /// The gradient inequality reads `l(l+1) <= 0` on `f = Y_{l,m}` for `l >= 1`.
    #[test]
    fn gradient_inequality_fails_on_own_degree() {
        let grid = SphereGrid::new(4);
        for l in 1..=3 {
            let r = poincare_residuals(&basis(&grid, l, 0), l).unwrap();
            assert!((r.slack_gradient + angular_eigenvalue(l)).abs() < 1e-11);
        }
    }

    #[test]
    fn parseval() {
        let grid = SphereGrid::new(8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let f = random_function(&grid, &mut rng);
            let c = f.analyze();
            assert!((c.total_power() - f.norm_sqr()).abs() < 1e-10 * f.norm_sqr());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn identities_hold(seed in any::<u64>(), ell0 in 0usize..3) {
            let grid = SphereGrid::new(6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&grid, &mut rng);
            let r = poincare_residuals(&f, ell0).unwrap();
            prop_assert!(r.identity_own_mode <= 1e-9 * r.scale.max(1.0));
            prop_assert!(r.identity_shifted <= 1e-9 * r.scale.max(1.0) * 100.0);
            prop_assert!(r.identity_ratio <= 1e-9 * r.scale.max(1.0));
        }

        #[test]
        fn laplacian_inequality_for_positive_degrees(seed in any::<u64>(), ell0 in 1usize..4) {
            let grid = SphereGrid::new(6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&grid, &mut rng);
            let r = poincare_residuals(&f, ell0).unwrap();
            prop_assert!(r.slack_laplacian >= -1e-9 * r.scale);
        }

        #[test]
        fn gradient_inequality_above_own_degree(seed in any::<u64>(), ell0 in 0usize..4) {
            let grid = SphereGrid::new(6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&grid, &mut rng);
            let above = project_geq(&f, ell0 + 1).unwrap();
            let r = poincare_residuals(&above, ell0).unwrap();
            prop_assert!(r.slack_gradient >= -1e-9 * r.scale);
        }

        #[test]
        fn projections_orthogonal(seed in any::<u64>(), l1 in 0usize..5, l2 in 0usize..5) {
            let grid = SphereGrid::new(5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&grid, &mut rng);
            let g = random_function(&grid, &mut rng);
            let pf = SphereFunction::synthesize(&grid, &project(&f, l1).unwrap());
            let pg = SphereFunction::synthesize(&grid, &project(&g, l2).unwrap());
            let ip = pf.inner(&pg).norm();
            if l1 != l2 {
                prop_assert!(ip < 1e-10 * (f.norm_sqr() + g.norm_sqr()));
            }
            let ppf = SphereFunction::synthesize(&grid, &project(&pf, l1).unwrap());
            for (a, b) in ppf.values.iter().zip(&pf.values) {
                prop_assert!((a - b).norm() < 1e-10 * f.norm_sqr().sqrt());
            }
        }
    }
}
