//! Per-mode Dirichlet problem `d^{1-a} d^{a} Phi = f` and empirical checks of the
//! energy and weighted elliptic estimates.
//!
//! The problem is solved for `W = R^{-a} Phi`, which satisfies
//! `(R^{2a+1} W')' = R^{a+1} f`. A cell-centred finite-volume discretization of
//! that flux form gives a symmetric positive definite tridiagonal matrix.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::initdata::bump_profile;
use crate::model::ModelParams;
use crate::tridiag::SymmetricTridiagonal;
use crate::twisted::{h1_norm_sqr, h2_norm_sqr, twisted_second, RadialGrid, RadialGridFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem {
    /// Twisting exponent of the operator.
    pub alpha: f64,
    pub rhs: RadialGridFunction,
    /// Value of `Phi` at `R = r_max`.
    pub outer_value: Complex64,
}

impl EllipticProblem {
    pub fn new(alpha: f64, rhs: RadialGridFunction) -> Self {
        EllipticProblem {
            alpha,
            rhs,
            outer_value: Complex64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::OutOfRange(format!("alpha = {} must be positive", self.alpha)));
        }
        if !self.rhs.is_finite() || !self.outer_value.is_finite() {
            return Err(Error::OutOfRange("non-finite right-hand side".into()));
        }
        Ok(())
    }
}

fn power_moment(a: f64, b: f64, s: f64) -> f64 {
    (b.powf(s + 1.0) - a.powf(s + 1.0)) / (s + 1.0)
}

/// Assembles the stiffness matrix of `-(R^{2a+1} W')'` with a regular axis and a
/// Dirichlet ghost at the outer face. Also returns the outer face coefficient.
fn stiffness(grid: RadialGrid, alpha: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let n = grid.n;
    let h = grid.h();
    let k = 2.0 * alpha + 1.0;
    let face: Vec<f64> = grid.faces().iter().map(|r| r.powf(k) / h).collect();
    let outer = grid.r_max.powf(k) / h;
    let mut diag = vec![0.0; n];
    for j in 0..n {
        let left = if j == 0 { 0.0 } else { face[j - 1] };
        let right = if j == n - 1 { 2.0 * outer } else { face[j] };
        diag[j] = left + right;
    }
    let off = face.iter().map(|c| -c).collect();
    (diag, off, outer)
}

/// Solves the per-mode Dirichlet problem and returns `Phi` at the nodes.
pub fn solve_dirichlet(problem: &EllipticProblem) -> Result<RadialGridFunction> {
    problem.validate()?;
    let grid = problem.rhs.grid;
    let alpha = problem.alpha;
    let (diag, off, outer) = stiffness(grid, alpha);
    let matrix = SymmetricTridiagonal::factor(&diag, &off)?;

    let h = grid.h();
    let w_outer = problem.outer_value / grid.r_max.powf(alpha);
    // cell integral of R^{a+1} f = R^{2a} (R^{1-a} f), second factor taken at the node;
    // exact for right-hand sides behaving like R^{a-1} at the axis
    let load: Vec<Complex64> = (0..grid.n)
        .map(|j| {
            let r = grid.node(j);
            let mass = power_moment(j as f64 * h, (j as f64 + 1.0) * h, 2.0 * alpha);
            -problem.rhs.values[j] * r.powf(1.0 - alpha) * mass
        })
        .collect();
    let mut re: Vec<f64> = load.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = load.iter().map(|v| v.im).collect();
    re[grid.n - 1] += 2.0 * outer * w_outer.re;
    im[grid.n - 1] += 2.0 * outer * w_outer.im;
    let w_re = matrix.solve(&re);
    let w_im = matrix.solve(&im);
    let mut phi = RadialGridFunction::zeros(grid, problem.rhs.ell);
    for j in 0..grid.n {
        phi.values[j] = Complex64::new(w_re[j], w_im[j]) * grid.node(j).powf(alpha);
    }
    Ok(phi)
}

/// Smallest LDL pivot of the solver matrix; positive means positive definite.
pub fn smallest_pivot(grid: RadialGrid, alpha: f64) -> Result<f64> {
    let (diag, off, _) = stiffness(grid, alpha);
    Ok(SymmetricTridiagonal::factor(&diag, &off)?.smallest_pivot())
}

/// Ratios for one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberRatios {
    pub seed: u64,
    /// `||Phi||_{H^1} / ||f||_{L^2}`.
    pub energy: f64,
    /// `||Phi||_{H^2_{l,p}} / ||R^{-p} f||_{L^2}`.
    pub elliptic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    pub members: Vec<MemberRatios>,
    pub max_energy: f64,
    pub max_elliptic: f64,
}

/// Random smooth right-hand side supported in `[0.1, 0.9]`.
fn random_rhs(grid: RadialGrid, ell: usize, rng: &mut ChaCha8Rng) -> RadialGridFunction {
    let bumps: Vec<(f64, f64, Complex64)> = (0..3)
        .map(|_| {
            let width = rng.gen_range(0.05..0.2);
            let center = rng.gen_range(0.1 + width..0.9 - width);
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (center, width, amp)
        })
        .collect();
    RadialGridFunction::from_fn(grid, ell, |r| {
        bumps
            .iter()
            .map(|(c, w, a)| a * bump_profile((r - c) / w))
            .sum()
    })
}

/// Solves the Dirichlet problem on `(0, 1)` for `members` seeded right-hand sides
/// with components in modes `ell` and `ell + 1`, and reports the ratios of the
/// energy estimate and the weighted elliptic estimate.
pub fn estimate_report(
    params: &ModelParams,
    ell: usize,
    p: f64,
    n: usize,
    members: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let a_low = params.alpha(ell);
    let a_high = params.alpha(ell + 1);
    if !(p + 1.0 < a_high) || (p + 1.0 + a_low).abs() < 1e-9 {
        return Err(Error::Hypothesis(format!(
            "need p + 1 < {a_high} and p + 1 != -{a_low} (p = {p})"
        )));
    }
    let grid = RadialGrid::new(n, 1.0)?;
    let results: Result<Vec<MemberRatios>> = (0..members)
        .into_par_iter()
        .map(|k| {
            let member_seed = seed.wrapping_add(k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(member_seed);
            let f_low = random_rhs(grid, ell, &mut rng);
            let f_high = random_rhs(grid, ell + 1, &mut rng);
            let phi_low = solve_dirichlet(&EllipticProblem::new(a_low, f_low.clone()))?;
            let phi_high = solve_dirichlet(&EllipticProblem::new(a_high, f_high.clone()))?;

            let f_l2 = f_low.l2_norm_sqr() + f_high.l2_norm_sqr();
            let phi_h1 = h1_norm_sqr(&phi_low, 0.0) + h1_norm_sqr(&phi_high, 0.0);
            let weight = |r: f64| r.powf(-p);
            let f_weighted = f_low.weighted(weight).l2_norm_sqr() + f_high.weighted(weight).l2_norm_sqr();
            let phi_weighted = h2_norm_sqr(&phi_high.weighted(weight))
                + twisted_second(&phi_low, a_low).weighted(weight).l2_norm_sqr();
            let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { (num / den).sqrt() };
            Ok(MemberRatios {
                seed: member_seed,
                energy: ratio(phi_h1, f_l2),
                elliptic: ratio(phi_weighted, f_weighted),
            })
        })
        .collect();
    let members = results?;
    let max_energy = members.iter().map(|m| m.energy).fold(0.0, f64::max);
    let max_elliptic = members.iter().map(|m| m.elliptic).fold(0.0, f64::max);
    Ok(EstimateReport {
        n,
        members,
        max_energy,
        max_elliptic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn manufactured(alpha: f64, n: usize) -> (RadialGridFunction, RadialGridFunction) {
        let g = RadialGrid::new(n, 1.0).unwrap();
        let f = RadialGridFunction::from_real_fn(g, 0, |r| -(2.0 * alpha + 1.0) * r.powf(alpha - 1.0));
        let exact = RadialGridFunction::from_real_fn(g, 0, |r| r.powf(alpha) * (1.0 - r));
        (f, exact)
    }

    fn max_error(alpha: f64, n: usize) -> f64 {
        let (f, exact) = manufactured(alpha, n);
        let phi = solve_dirichlet(&EllipticProblem::new(alpha, f)).unwrap();
        phi.sub(&exact).max_abs()
    }

    /// `W = 1 - R^2`, regular at the axis: `f = -(4a + 4) R^a`.
    fn regular_error(alpha: f64, n: usize) -> f64 {
        let g = RadialGrid::new(n, 1.0).unwrap();
        let f = RadialGridFunction::from_real_fn(g, 0, |r| -(4.0 * alpha + 4.0) * r.powf(alpha));
        let phi = solve_dirichlet(&EllipticProblem::new(alpha, f)).unwrap();
        phi.values
            .iter()
            .zip(g.nodes())
            .map(|(v, r)| (v - r.powf(alpha) * (1.0 - r * r)).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = RadialGrid::new(64, 1.0).unwrap();
        let phi = solve_dirichlet(&EllipticProblem::new(0.7, RadialGridFunction::zeros(g, 0))).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let g = RadialGrid::new(64, 1.0).unwrap();
        let p = EllipticProblem::new(0.0, RadialGridFunction::zeros(g, 0));
        assert!(matches!(solve_dirichlet(&p), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn manufactured_solution_recovered() {
        // W = 1 - R is linear, so face gradients, the axis flux and the ghost are exact
        for alpha in [0.4, 1.5] {
            for n in [128, 256, 512] {
                assert!(max_error(alpha, n) < 1e-12, "alpha {alpha}, n {n}");
            }
        }
    }

    #[test]
    fn regular_solution_second_order() {
        for alpha in [0.4, 1.5] {
            let (e1, e2, e3) = (regular_error(alpha, 128), regular_error(alpha, 256), regular_error(alpha, 512));
            let o1 = (e1 / e2).log2();
            let o2 = (e2 / e3).log2();
            assert!(o1 > 1.9 && o2 > 1.9, "alpha {alpha}: {o1} {o2}");
        }
    }

    #[test]
    fn outer_value_is_honoured() {
        // f = 0 with Phi(1) = 1 gives the static solution R^a.
        let g = RadialGrid::new(128, 1.0).unwrap();
        let mut p = EllipticProblem::new(1.2, RadialGridFunction::zeros(g, 0));
        p.outer_value = Complex64::new(1.0, 0.0);
        let phi = solve_dirichlet(&p).unwrap();
        for (v, r) in phi.values.iter().zip(g.nodes()) {
            assert!((v.re - r.powf(1.2)).abs() < 1e-12);
        }
    }

    #[test]
    fn coercive_for_positive_alpha() {
        for alpha in [0.05, 0.5, 2.0, 5.0] {
            assert!(smallest_pivot(RadialGrid::new(512, 1.0).unwrap(), alpha).unwrap() > 0.0);
        }
    }

    /// Closed-form norms of the manufactured pair for `a = 1.5`:
    /// `||Phi||^2_{H^1}` and `||f||^2` by quadrature of the formulas.
    #[test]
    fn manufactured_ratios_match_oracle() {
        let alpha: f64 = 1.5;
        let phi = |r: f64| r.powf(alpha) * (1.0 - r);
        let dphi = |r: f64| alpha * r.powf(alpha - 1.0) * (1.0 - r) - r.powf(alpha);
        let h1 = integrate(|r| (phi(r) / r).powi(2) * r + dphi(r).powi(2) * r, 0.0, 1.0, 20, 8);
        let f2 = integrate(|r| ((2.0 * alpha + 1.0) * r.powf(alpha - 1.0)).powi(2) * r, 0.0, 1.0, 20, 8);
        let (f, _) = manufactured(alpha, 2048);
        let sol = solve_dirichlet(&EllipticProblem::new(alpha, f.clone())).unwrap();
        let got = (h1_norm_sqr(&sol, 0.0) / f.l2_norm_sqr()).sqrt();
        let want = (h1 / f2).sqrt();
        assert!((got - want).abs() < 1e-3 * want, "{got} vs {want}");
        let ell = (twisted_second(&sol, alpha).l2_norm_sqr() / f.l2_norm_sqr()).sqrt();
        assert!((ell - 1.0).abs() < 0.05, "{ell}");
    }

    #[test]
    fn estimate_report_hypothesis_and_stability() {
        let params = ModelParams::isp(2.0);
        assert!(matches!(
            estimate_report(&params, 0, 1.5, 128, 2, 1),
            Err(Error::Hypothesis(_))
        ));
        let a = estimate_report(&params, 0, 0.0, 256, 8, 7).unwrap();
        let b = estimate_report(&params, 0, 0.0, 512, 8, 7).unwrap();
        assert!(a.max_energy.is_finite() && a.max_elliptic.is_finite());
        assert!(((a.max_energy - b.max_energy) / b.max_energy).abs() < 0.1);
        assert!(((a.max_elliptic - b.max_elliptic) / b.max_elliptic).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn linearity(seed in 0u64..1000, alpha in 0.2f64..3.0) {
            let g = RadialGrid::new(128, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f1 = random_rhs(g, 0, &mut rng);
            let f2 = random_rhs(g, 0, &mut rng);
            let s = |f: RadialGridFunction| solve_dirichlet(&EllipticProblem::new(alpha, f)).unwrap();
            let sum = s(f1.add(&f2));
            let parts = s(f1).add(&s(f2));
            prop_assert!(sum.sub(&parts).max_abs() <= 1e-12 * sum.max_abs().max(1e-300));
        }
    }
}
