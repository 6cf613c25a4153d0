//! Self-checks bundled with the binary: `verify --suite <name>`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tailwave_core::elliptic::{estimate_report, solve_dirichlet, EllipticProblem};
use tailwave_core::evolve_ads::{evolve, AdsState, EvolveOptions, DEFAULT_R_MAX};
use tailwave_core::harmonics::{poincare_residuals, ModeCoefficients, SphereFunction, SphereGrid};
use tailwave_core::initdata::{bump_profile, make_data, DataFamily};
use tailwave_core::model::ModelParams;
use tailwave_core::twisted::{hardy_check, RadialGrid, RadialGridFunction};

use crate::error::{CliError, CliResult};

/// Hardy inequality parameters `(alpha, p)` exercised by the suite.
pub const HARDY_PAIRS: [(f64, f64); 3] = [(1.0, 0.0), (1.5, 0.3), (0.4, -1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hardy,
    Poincare,
    Elliptic,
    Static,
    Energy,
    All,
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "hardy" => Ok(Suite::Hardy),
            "poincare" => Ok(Suite::Poincare),
            "elliptic" => Ok(Suite::Elliptic),
            "static" => Ok(Suite::Static),
            "energy" => Ok(Suite::Energy),
            "all" => Ok(Suite::All),
            other => Err(CliError::Argument(format!(
                "unknown suite '{other}' (hardy, poincare, elliptic, static, energy, all)"
            ))),
        }
    }
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(suite: &'static str, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            suite,
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(suite: &'static str, name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            suite,
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// Sum of one to three smooth bumps supported in `[0.05, 0.95]`.
fn random_radial(grid: RadialGrid, rng: &mut ChaCha8Rng) -> RadialGridFunction {
    let count = rng.gen_range(1..=3);
    let bumps: Vec<(f64, f64, Complex64)> = (0..count)
        .map(|_| {
            let width = rng.gen_range(0.03..0.3);
            let center = rng.gen_range(0.05 + width..0.95 - width);
            (center, width, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    RadialGridFunction::from_fn(grid, 0, |r| bumps.iter().map(|(c, w, a)| a * bump_profile((r - c) / w)).sum())
}

pub fn hardy_suite(seed: u64, members: usize) -> CliResult<Vec<Check>> {
    let grid = RadialGrid::new(4096, 1.0)?;
    let tol = 1e-9 + 10.0 * grid.h() * grid.h();
    let mut checks = Vec::new();
    for (k, &(alpha, p)) in HARDY_PAIRS.iter().enumerate() {
        let results: CliResult<Vec<f64>> = (0..members)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((k as u64) << 32) ^ i as u64);
                let f = random_radial(grid, &mut rng);
                let report = hardy_check(&f, alpha, p, tol)?;
                Ok(if report.rhs > 0.0 { report.lhs / report.rhs } else { 0.0 })
            })
            .collect();
        let worst = results?.into_iter().fold(0.0, f64::max);
        checks.push(Check::at_most(
            "hardy",
            format!("max lhs/rhs over {members} functions, alpha={alpha}, p={p}"),
            worst,
            1.0 + tol,
        ));
    }
    Ok(checks)
}

pub fn poincare_suite(seed: u64, members: usize) -> CliResult<Vec<Check>> {
    let band = 8;
    let grid = SphereGrid::new(band);
    let mut checks = Vec::new();
    for ell0 in 0..=2usize {
        let mut worst_identity: f64 = 0.0;
        let mut worst_slack = f64::INFINITY;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ell0 as u64));
        for _ in 0..members {
            let mut c = ModeCoefficients::zeros(band);
            for v in c.coeffs.iter_mut() {
                *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let f = SphereFunction::synthesize(&grid, &c);
            let r = poincare_residuals(&f, ell0)?;
            let identity = r.identity_own_mode.max(r.identity_shifted).max(r.identity_ratio);
            worst_identity = worst_identity.max(identity / r.scale);
            worst_slack = worst_slack.min(r.slack_laplacian.min(r.slack_gradient) / r.scale);
        }
        checks.push(Check::at_most(
            "poincare",
            format!("identity residual / scale, l0={ell0}"),
            worst_identity,
            1e-9,
        ));
        checks.push(Check::at_least(
            "poincare",
            format!("min inequality slack / scale, l0={ell0}"),
            worst_slack,
            -1e-9,
        ));
    }
    Ok(checks)
}

/// Max-norm error of the solver on `Phi = R^a (1 - R)` and on `Phi = R^a (1 - R^2)`.
pub fn elliptic_errors(alpha: f64, n: usize) -> CliResult<(f64, f64)> {
    let grid = RadialGrid::new(n, 1.0)?;
    let error = |f: RadialGridFunction, exact: &dyn Fn(f64) -> f64| -> CliResult<f64> {
        let phi = solve_dirichlet(&EllipticProblem::new(alpha, f))?;
        Ok(phi
            .values
            .iter()
            .zip(grid.nodes())
            .map(|(v, r)| (v - exact(r)).norm())
            .fold(0.0, f64::max))
    };
    let linear = error(
        RadialGridFunction::from_real_fn(grid, 0, |r| -(2.0 * alpha + 1.0) * r.powf(alpha - 1.0)),
        &|r| r.powf(alpha) * (1.0 - r),
    )?;
    let quadratic = error(
        RadialGridFunction::from_real_fn(grid, 0, |r| -(4.0 * alpha + 4.0) * r.powf(alpha)),
        &|r| r.powf(alpha) * (1.0 - r * r),
    )?;
    Ok((linear, quadratic))
}

/// Observed order from errors on `n` and `2n`, or `None` when both sit at roundoff.
pub fn observed_order(coarse: f64, fine: f64, floor: f64) -> Option<f64> {
    if coarse <= floor && fine <= floor {
        None
    } else {
        Some((coarse / fine).log2())
    }
}

pub fn elliptic_suite(seed: u64) -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in [0.4, 1.5] {
        let (l1, q1) = elliptic_errors(alpha, 256)?;
        let (l2, q2) = elliptic_errors(alpha, 512)?;
        // exact recovery counts as order 2 or better
        let h2 = (1.0f64 / 512.0).powi(2);
        checks.push(Check::at_most(
            "elliptic",
            format!("manufactured R^a(1-R) max error, alpha={alpha}, n=512"),
            l2,
            h2,
        ));
        if let Some(order) = observed_order(l1, l2, 1e-12) {
            checks.push(Check::at_least("elliptic", format!("manufactured order, alpha={alpha}"), order, 1.9));
        }
        let order = observed_order(q1, q2, 1e-12).unwrap_or(f64::INFINITY);
        checks.push(Check::at_least(
            "elliptic",
            format!("regular R^a(1-R^2) order, alpha={alpha}"),
            order,
            1.9,
        ));
    }
    let params = ModelParams::isp(2.0);
    let (coarse, fine) = (
        estimate_report(&params, 0, 0.0, 512, 32, seed)?,
        estimate_report(&params, 0, 0.0, 1024, 32, seed)?,
    );
    let drift = |a: f64, b: f64| if a == 0.0 { 0.0 } else { (b / a - 1.0).abs() };
    checks.push(Check::at_most(
        "elliptic",
        "energy-estimate ratio drift 512 -> 1024",
        drift(coarse.max_energy, fine.max_energy),
        0.1,
    ));
    checks.push(Check::at_most(
        "elliptic",
        "elliptic-estimate ratio drift 512 -> 1024",
        drift(coarse.max_elliptic, fine.max_elliptic),
        0.1,
    ));
    Ok(checks)
}

/// Largest `|W - 1|` on `R <= 1` over `T in [-1, 0]` for static data.
pub fn static_error(params: ModelParams, ell: usize, n: usize) -> CliResult<f64> {
    let grid = RadialGrid::new(n, DEFAULT_R_MAX)?;
    let (w, wdot) = make_data(&DataFamily::static_mode(ell, 0), grid)?;
    let opts = EvolveOptions {
        stride: (n / 16).max(1),
        keep_snapshots: true,
        ..EvolveOptions::default()
    };
    let ev = evolve(AdsState::new(w, wdot, params)?, &opts)?;
    let inner = grid.nodes().iter().take_while(|r| **r <= 1.0).count();
    Ok(ev
        .snapshots
        .iter()
        .chain(std::iter::once(&ev.final_state))
        .flat_map(|s| s.w.values[..inner].iter().map(|v| (v - 1.0).norm()))
        .fold(0.0, f64::max))
}

pub fn static_cases() -> [(ModelParams, usize, &'static str); 3] {
    [
        (ModelParams::isp(2.0), 0, "isp a=2 l=0"),
        (ModelParams::csf(0.3, 1.0), 0, "csf qe=0.3 l=0"),
        (ModelParams::csf(0.3, 1.0), 1, "csf qe=0.3 l=1"),
    ]
}

pub fn static_suite() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for (params, ell, label) in static_cases() {
        let errs: Vec<f64> = [256usize, 512, 1024]
            .par_iter()
            .map(|&n| static_error(params, ell, n))
            .collect::<CliResult<_>>()?;
        let h = DEFAULT_R_MAX / 1024.0;
        checks.push(Check::at_most("static", format!("{label}: max|W-1| at n=1024"), errs[2], 10.0 * h * h));
        let order = observed_order(errs[1], errs[2], 1e-13).unwrap_or(f64::INFINITY);
        checks.push(Check::at_least("static", format!("{label}: order 512 -> 1024"), order, 1.9));
    }
    Ok(checks)
}

/// Relative energy drift over `T in [-1, 0]` for bump data.
pub fn energy_drift(params: ModelParams, n: usize) -> CliResult<f64> {
    let grid = RadialGrid::new(n, DEFAULT_R_MAX)?;
    let (w, wdot) = make_data(&DataFamily::bump(0.4, 0.3, Complex64::new(1.0, 0.0), 0), grid)?;
    let opts = EvolveOptions {
        stride: 16,
        ..EvolveOptions::default()
    };
    Ok(evolve(AdsState::new(w, wdot, params)?, &opts)?.max_energy_drift)
}

pub fn energy_suite() -> CliResult<Vec<Check>> {
    let cases = [(ModelParams::isp(2.0), "isp a=2"), (ModelParams::csf(0.3, 1.0), "csf qe=0.3")];
    cases
        .par_iter()
        .map(|&(params, label)| {
            Ok(Check::at_most(
                "energy",
                format!("{label}: relative drift, n=2048, cfl=0.4"),
                energy_drift(params, 2048)?,
                1e-6,
            ))
        })
        .collect()
}

pub fn run_suite(suite: Suite, seed: u64) -> CliResult<Vec<Check>> {
    Ok(match suite {
        Suite::Hardy => hardy_suite(seed, 200)?,
        Suite::Poincare => poincare_suite(seed, 100)?,
        Suite::Elliptic => elliptic_suite(seed)?,
        Suite::Static => static_suite()?,
        Suite::Energy => energy_suite()?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Hardy, Suite::Poincare, Suite::Elliptic, Suite::Static, Suite::Energy] {
                all.extend(run_suite(s, seed)?);
            }
            all
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("hardy".parse::<Suite>().unwrap(), Suite::Hardy);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn order_helper() {
        assert_eq!(observed_order(1e-15, 1e-15, 1e-12), None);
        assert!((observed_order(4e-4, 1e-4, 1e-12).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_hardy_and_poincare_runs_pass() {
        assert!(hardy_suite(1, 10).unwrap().iter().all(|c| c.pass));
        assert!(poincare_suite(1, 5).unwrap().iter().all(|c| c.pass));
    }
}
