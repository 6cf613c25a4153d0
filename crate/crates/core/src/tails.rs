//! Power-law fits of decaying series and checks of the asymptotic profile.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Fewest samples a fit window may hold.
pub const MIN_WINDOW_SAMPLES: usize = 8;

/// `|y| ~ A x^exponent`, `arg y ~ phase + phase_slope ln x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub phase_slope: f64,
    /// `A e^{i phase}`.
    pub amplitude: Complex64,
    pub window: (f64, f64),
    pub samples: usize,
    /// RMS deviation of `ln|y|` from the fitted line.
    pub residual: f64,
}

/// Slope, intercept and RMS residual of the least-squares line through `(x, y)`.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let d = y - (intercept + slope * x);
            d * d
        })
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Log-log least squares on the samples with `lo <= x <= hi`. The phase is
/// unwrapped starting from the left edge of the window.
pub fn fit_power_law(series: &[(f64, Complex64)], lo: f64, hi: f64) -> Result<PowerLawFit> {
    let window: Vec<&(f64, Complex64)> = series
        .iter()
        .filter(|(x, _)| *x >= lo && *x <= hi && *x > 0.0)
        .collect();
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::EmptyWindow {
            lo,
            hi,
            count: window.len(),
            need: MIN_WINDOW_SAMPLES,
        });
    }
    if let Some((x, _)) = window.iter().find(|(_, y)| !(y.norm() > 0.0)) {
        return Err(Error::ZeroSample(*x));
    }
    let mut sorted = window;
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lx: Vec<f64> = sorted.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = sorted.iter().map(|(_, y)| y.norm().ln()).collect();
    let mut phase = Vec::with_capacity(sorted.len());
    let mut last = sorted[0].1.arg();
    for (_, y) in &sorted {
        let mut a = y.arg();
        while a - last > std::f64::consts::PI {
            a -= 2.0 * std::f64::consts::PI;
        }
        while a - last < -std::f64::consts::PI {
            a += 2.0 * std::f64::consts::PI;
        }
        phase.push(a);
        last = a;
    }
    let (exponent, ln_amp, residual) = line_fit(&lx, &ly);
    let (phase_slope, phase0, _) = line_fit(&lx, &phase);
    Ok(PowerLawFit {
        exponent,
        phase_slope,
        amplitude: Complex64::from_polar(ln_amp.exp(), phase0),
        window: (lo, hi),
        samples: sorted.len(),
        residual,
    })
}

/// Last decade of the samples, leaving out the final 5%.
pub fn default_window(series: &[(f64, Complex64)]) -> Option<(f64, f64)> {
    if series.is_empty() {
        return None;
    }
    let mut xs: Vec<f64> = series.iter().map(|(x, _)| *x).filter(|x| *x > 0.0).collect();
    xs.sort_by(f64::total_cmp);
    let first = *xs.first()?;
    let hi = xs[((xs.len() - 1) as f64 * 0.95).floor() as usize];
    Some(((hi / 10.0).max(first), hi))
}

/// A fit next to the value predicted by the exponent table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub fit: PowerLawFit,
    pub predicted_exponent: f64,
    pub predicted_phase_slope: f64,
    /// `|fitted - predicted| / |predicted|`.
    pub relative_error: f64,
}

impl TailReport {
    pub fn new(fit: PowerLawFit, predicted_exponent: f64, predicted_phase_slope: f64) -> Self {
        let relative_error = if predicted_exponent != 0.0 {
            (fit.exponent - predicted_exponent).abs() / predicted_exponent.abs()
        } else {
            fit.exponent.abs()
        };
        TailReport {
            fit,
            predicted_exponent,
            predicted_phase_slope,
            relative_error,
        }
    }

    /// Relative error of the phase slope, or its absolute value when none is predicted.
    pub fn phase_error(&self) -> f64 {
        if self.predicted_phase_slope != 0.0 {
            (self.fit.phase_slope - self.predicted_phase_slope).abs() / self.predicted_phase_slope.abs()
        } else {
            self.fit.phase_slope.abs()
        }
    }
}

/// Predicted decay at null infinity: `(t - r)^{-p}`.
pub fn radiation_report(fit: PowerLawFit, params: &ModelParams, ell: usize) -> TailReport {
    let p = params.decay_exponent(ell);
    TailReport::new(fit, -p.re, -p.im)
}

/// Predicted decay along a timelike line: `t^{-2p}`.
pub fn timelike_report(fit: PowerLawFit, params: &ModelParams, ell: usize) -> TailReport {
    let p = params.decay_exponent(ell);
    TailReport::new(fit, -2.0 * p.re, -2.0 * p.im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateDoubling {
    pub radiation: TailReport,
    pub timelike: TailReport,
    pub radiation_tolerance: f64,
    pub timelike_tolerance: f64,
    pub radiation_pass: bool,
    pub timelike_pass: bool,
}

impl RateDoubling {
    pub fn pass(&self) -> bool {
        self.radiation_pass && self.timelike_pass
    }
}

/// Compares the two fitted exponents with `-Re p` and `-2 Re p`. Tolerances are relative.
pub fn rate_doubling_report(
    radiation: PowerLawFit,
    timelike: PowerLawFit,
    params: &ModelParams,
    ell: usize,
    radiation_tolerance: f64,
    timelike_tolerance: f64,
) -> RateDoubling {
    let radiation = radiation_report(radiation, params, ell);
    let timelike = timelike_report(timelike, params, ell);
    RateDoubling {
        radiation_pass: radiation.relative_error <= radiation_tolerance,
        timelike_pass: timelike.relative_error <= timelike_tolerance,
        radiation,
        timelike,
        radiation_tolerance,
        timelike_tolerance,
    }
}

/// Radiation field `r phi` at a physical point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub r: f64,
    pub psi: Complex64,
}

impl ProfileSample {
    /// Sample from the compactified field `W` at `(T, R)`, using `r phi = R^p W`.
    pub fn from_compact(time: f64, radius: f64, w: Complex64, params: &ModelParams, ell: usize) -> Result<Self> {
        let (big_u, big_v) = ((time - radius) / 2.0, (time + radius) / 2.0);
        if !(big_v < 0.0) || !(radius > 0.0) {
            return Err(Error::Domain(format!("(T, R) = ({time}, {radius}) is not an interior point")));
        }
        let (u, v) = (-1.0 / big_u, -1.0 / big_v);
        let p = params.decay_exponent(ell);
        Ok(ProfileSample {
            t: u + v,
            r: v - u,
            psi: w * (p * radius.ln()).exp(),
        })
    }

    /// `r / ((t - r)(t + r))`.
    fn weight_base(&self) -> f64 {
        self.r / ((self.t - self.r) * (self.t + self.r))
    }

    /// `|r phi - Q x^p| / x^{Re p}` with `x = r / ((t - r)(t + r))`.
    pub fn weighted_error(&self, q: Complex64, p: Complex64) -> f64 {
        let ln_x = self.weight_base().ln();
        let profile = q * (p * ln_x).exp();
        (self.psi - profile).norm() / (p.re * ln_x).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileResidual {
    /// Decay rate of the weighted error in `t - r`; `None` when the error vanishes.
    pub nu: Option<f64>,
    pub max_weighted: f64,
    pub fit_residual: f64,
}

/// Weighted deviation from the profile `Q (r/((t-r)(t+r)))^p`, and its decay rate
/// in `t - r` from a log-log fit over all samples with a nonzero error.
pub fn profile_residual(
    samples: &[ProfileSample],
    q: Complex64,
    params: &ModelParams,
    ell: usize,
) -> ProfileResidual {
    let p = params.decay_exponent(ell);
    let errors: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.t - s.r, s.weighted_error(q, p)))
        .collect();
    let max_weighted = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let scale = max_weighted.max(f64::MIN_POSITIVE);
    let (lx, ly): (Vec<f64>, Vec<f64>) = errors
        .iter()
        .filter(|(x, e)| *x > 0.0 && *e > 1e-14 * scale && e.is_finite())
        .map(|(x, e)| (x.ln(), e.ln()))
        .unzip();
    if lx.len() < 2 || max_weighted == 0.0 {
        return ProfileResidual {
            nu: None,
            max_weighted,
            fit_residual: 0.0,
        };
    }
    let (slope, _, fit_residual) = line_fit(&lx, &ly);
    ProfileResidual {
        nu: Some(-slope),
        max_weighted,
        fit_residual,
    }
}

/// `max E (t - r)^nu`, the constant needed for the remainder bound with rate `nu`.
pub fn remainder_constant(samples: &[ProfileSample], q: Complex64, params: &ModelParams, ell: usize, nu: f64) -> f64 {
    let p = params.decay_exponent(ell);
    samples
        .iter()
        .map(|s| s.weighted_error(q, p) * (s.t - s.r).powf(nu))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(f: impl Fn(f64) -> Complex64, lo: f64, hi: f64, n: usize) -> Vec<(f64, Complex64)> {
        (0..n)
            .map(|k| {
                let x = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
                (x, f(x))
            })
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let s = series(|x| Complex64::new(x.powi(-2), 0.0), 1.0, 1e3, 200);
        let fit = fit_power_law(&s, 1.0, 1e3).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.amplitude - 1.0).norm() < 1e-10);
    }

    #[test]
    fn corrected_power_law() {
        let s = series(|x| Complex64::new(x.powi(-2) * (1.0 + x.powf(-0.5)), 0.0), 10.0, 1e4, 400);
        let fit = fit_power_law(&s, 1e2, 1e3).unwrap();
        assert!((fit.exponent + 2.0).abs() < 0.04, "{}", fit.exponent);
    }

    #[test]
    fn complex_exponent() {
        let p = Complex64::new(0.9, 0.3);
        let s = series(|x| (-p * x.ln()).exp(), 10.0, 1e4, 300);
        let fit = fit_power_law(&s, 10.0, 1e4).unwrap();
        assert!((fit.exponent + 0.9).abs() < 1e-12);
        assert!((fit.phase_slope + 0.3).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn window_errors() {
        let s = series(|x| Complex64::new(1.0 / x, 0.0), 1.0, 10.0, 20);
        assert!(matches!(fit_power_law(&s, 100.0, 200.0), Err(Error::EmptyWindow { count: 0, .. })));
        let mut z = s.clone();
        z[10].1 = Complex64::new(0.0, 0.0);
        assert!(matches!(fit_power_law(&z, 1.0, 10.0), Err(Error::ZeroSample(_))));
    }

    #[test]
    fn default_window_is_last_decade() {
        let s = series(|x| Complex64::new(1.0 / x, 0.0), 1.0, 1e3, 101);
        let (lo, hi) = default_window(&s).unwrap();
        assert!(hi < 1e3 && hi > 5e2);
        assert!((hi / lo - 10.0).abs() < 1e-12);
        assert!(default_window(&[]).is_none());
    }

    #[test]
    fn rate_doubling_expectations() {
        let fake = |e: f64, ph: f64| PowerLawFit {
            exponent: e,
            phase_slope: ph,
            amplitude: Complex64::new(1.0, 0.0),
            window: (1.0, 2.0),
            samples: 8,
            residual: 0.0,
        };
        let isp2 = rate_doubling_report(fake(-2.0, 0.0), fake(-4.0, 0.0), &ModelParams::isp(2.0), 0, 0.05, 0.08);
        assert!(isp2.pass());
        assert_eq!(isp2.radiation.predicted_exponent, -2.0);
        assert_eq!(isp2.timelike.predicted_exponent, -4.0);
        let isp0 = rate_doubling_report(fake(-2.0, 0.0), fake(-4.0, 0.0), &ModelParams::isp(0.0), 1, 0.05, 0.08);
        assert!(isp0.pass());
        let csf = radiation_report(fake(-0.9, -0.3), &ModelParams::csf(0.3, 1.0), 0);
        assert!((csf.predicted_exponent + 0.9).abs() < 1e-12);
        assert!((csf.predicted_phase_slope + 0.3).abs() < 1e-12);
        assert!(csf.relative_error < 1e-12 && csf.phase_error() < 1e-12);
        let off = rate_doubling_report(fake(-1.0, 0.0), fake(-4.0, 0.0), &ModelParams::isp(2.0), 0, 0.05, 0.08);
        assert!(!off.radiation_pass && off.timelike_pass);
    }

    fn profile_samples(params: &ModelParams, q: Complex64, extra: impl Fn(f64) -> f64) -> Vec<ProfileSample> {
        let p = params.decay_exponent(0);
        let mut out = Vec::new();
        for a in 0..30 {
            for b in 1..10 {
                let u = 2.0 * 1.3f64.powi(a);
                let r = 0.5 * b as f64;
                let t = 2.0 * u + r;
                let x = r / ((t - r) * (t + r));
                out.push(ProfileSample {
                    t,
                    r,
                    psi: q * (p * x.ln()).exp() * (1.0 + extra(t - r)),
                });
            }
        }
        out
    }

    #[test]
    fn exact_profile_has_zero_residual() {
        let params = ModelParams::csf(0.3, 1.0);
        let q = Complex64::new(0.7, -0.2);
        let s = profile_samples(&params, q, |_| 0.0);
        let res = profile_residual(&s, q, &params, 0);
        assert!(res.max_weighted < 1e-14);
    }

    #[test]
    fn first_order_correction_gives_unit_rate() {
        let params = ModelParams::isp(2.0);
        let q = Complex64::new(1.3, 0.0);
        let s = profile_samples(&params, q, |x| 1.0 / x);
        let res = profile_residual(&s, q, &params, 0);
        assert!((res.nu.unwrap() - 1.0).abs() < 1e-9, "{:?}", res);
        let c = remainder_constant(&s, q, &params, 0, 1.0);
        assert!((c - 1.3).abs() < 1e-9);
    }

    #[test]
    fn compact_sample_maps_to_physical_point() {
        let params = ModelParams::isp(2.0);
        let s = ProfileSample::from_compact(-0.5, 0.25, Complex64::new(1.0, 0.0), &params, 0).unwrap();
        // U = -3/8, V = -1/8
        assert!((s.t - (8.0 / 3.0 + 8.0)).abs() < 1e-12);
        assert!((s.r - (8.0 - 8.0 / 3.0)).abs() < 1e-12);
        assert!((s.psi.re - 0.0625).abs() < 1e-15);
        // Q x^p = P(0) R^p with Q = 4^p P(0) and x = R/4, so the weighted error is 4^{Re p} |W - P(0)|
        let q = Complex64::new(16.0 * 0.5, 0.0);
        assert!((s.weighted_error(q, params.decay_exponent(0)) - 8.0).abs() < 1e-12);
        assert!(ProfileSample::from_compact(0.0, 0.1, Complex64::new(1.0, 0.0), &params, 0).is_err());
    }

    proptest! {
        #[test]
        fn fit_recovers_any_power(e in -4.0f64..-0.1, ph in -1.0f64..1.0, amp in 0.1f64..10.0) {
            let p = Complex64::new(-e, -ph);
            let s = series(|x| amp * (-p * x.ln()).exp(), 5.0, 5e3, 64);
            let fit = fit_power_law(&s, 5.0, 5e3).unwrap();
            prop_assert!((fit.exponent - e).abs() < 1e-10);
            prop_assert!((fit.phase_slope - ph).abs() < 1e-10);
            prop_assert!((fit.amplitude.norm() - amp).abs() < 1e-8 * amp);
        }

        #[test]
        fn profile_weight_is_scale_free(q_re in -2.0f64..2.0, q_im in -2.0f64..2.0, qe in 0.0f64..0.45) {
            let params = ModelParams::csf(qe, 1.0);
            let q = Complex64::new(q_re, q_im);
            let s = profile_samples(&params, q, |_| 0.0);
            prop_assert!(profile_residual(&s, q, &params, 0).max_weighted < 1e-12);
        }
    }
}
