//! The solver and analysis subcommands.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use tailwave_core::evolve_ads::{compute_q, evolve, AdsState, EvolveOptions, Evolution};
use tailwave_core::evolve_null::{
    axis_amplitude, evolve_compactified, evolve_physical, sample_radiation, NullMode,
};
use tailwave_core::initdata::{make_data, mollify_extend};
use tailwave_core::io::{format_float as ff, read_series_file, series_rows};
use tailwave_core::model::{exponent_table, validate_params, Kind, ModelParams};
use tailwave_core::tails::{default_window, fit_power_law, radiation_report, timelike_report, TailReport};
use tailwave_core::twisted::RadialGrid;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{summary_line, RunOutput};

/// Builds validated model parameters from command-line couplings.
pub fn model_from_args(kind: Kind, a: f64, q: f64, e: f64) -> CliResult<ModelParams> {
    let params = match kind {
        Kind::Isp => ModelParams::isp(a),
        Kind::Csf => ModelParams::csf(q, e),
    };
    Ok(validate_params(params)?)
}

/// `ell,re_p,im_p,alpha` rows for `ell = 0..=lmax`.
pub fn exponents_csv(params: &ModelParams, lmax: usize) -> String {
    let mut out = String::from("ell,re_p,im_p,alpha\n");
    for m in exponent_table(params, lmax).modes {
        out.push_str(&format!("{},{},{},{}\n", m.ell, ff(m.p.re), ff(m.p.im), ff(m.alpha)));
    }
    out
}

/// Runs the Cauchy solver described by the config.
pub fn run_ads(cfg: &RunConfig, n_r: usize, keep_snapshots: bool) -> CliResult<Evolution> {
    let grid = RadialGrid::new(n_r, cfg.grid.r_max)?;
    let (mut w, mut wdot) = make_data(&cfg.data.family, grid)?;
    if let Some(delta) = cfg.data.delta {
        w = mollify_extend(&w, delta)?;
        wdot = mollify_extend(&wdot, delta)?;
    }
    let state = AdsState::new(w, wdot, cfg.model)?;
    let opts = EvolveOptions {
        t_end: cfg.run.t_end,
        cfl: cfg.grid.cfl,
        stride: cfg.run.snapshot_stride,
        integrator: cfg.grid.integrator,
        keep_snapshots,
        ..EvolveOptions::default()
    };
    Ok(evolve(state, &opts)?)
}

fn snapshot_rows(states: &[&AdsState]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in states {
        for (j, r) in s.w.grid.nodes().into_iter().enumerate() {
            let (w, wd) = (s.w.values[j], s.wdot.values[j]);
            rows.push(vec![ff(s.time), ff(r), ff(w.re), ff(w.im), ff(wd.re), ff(wd.im)]);
        }
    }
    rows
}

pub fn evolve_ads_command(cfg: &RunConfig) -> CliResult<String> {
    let keep = cfg.run.snapshot_stride > 0;
    let ev = run_ads(cfg, cfg.grid.n_r, keep)?;
    let ell = cfg.data.family.ell;
    let p0 = ev.p_final();
    let q = compute_q(p0, &cfg.model, ell);

    let mut out = RunOutput::create(cfg.output_dir(), "evolve-ads", &cfg.echo)?;
    let mut states: Vec<&AdsState> = ev.snapshots.iter().collect();
    if states.last().map(|s| s.time) != Some(ev.final_state.time) {
        states.push(&ev.final_state);
    }
    out.csv("snapshots.csv", &["T", "R", "re_W", "im_W", "re_Wdot", "im_Wdot"], &snapshot_rows(&states))?;
    let p_rows: Vec<Vec<String>> = ev
        .p_series
        .samples
        .iter()
        .map(|(t, p)| vec![ff(*t), ff(p.re), ff(p.im)])
        .collect();
    out.csv("p_series.csv", &["T", "re_P", "im_P"], &p_rows)?;
    let summary = vec![
        ell.to_string(),
        ff(p0.re),
        ff(p0.im),
        ff(q.re),
        ff(q.im),
        ff(ev.max_energy_drift),
        cfg.grid.n_r.to_string(),
        ff(cfg.grid.cfl),
    ];
    out.csv(
        "summary.csv",
        &["ell", "re_P0", "im_P0", "re_Q", "im_Q", "energy_drift", "n", "cfl"],
        &[summary],
    )?;
    out.note("steps", ev.steps);
    out.note("dt", ff(ev.dt));
    out.finish()?;
    Ok(summary_line(
        "evolve-ads",
        &[
            ("ell", ell.to_string()),
            ("re_P0", ff(p0.re)),
            ("im_P0", ff(p0.im)),
            ("re_Q", ff(q.re)),
            ("im_Q", ff(q.im)),
            ("energy_drift", ff(ev.max_energy_drift)),
            ("n", cfg.grid.n_r.to_string()),
        ],
    ))
}

pub fn evolve_null_command(cfg: &RunConfig) -> CliResult<String> {
    let ell = cfg.data.family.ell;
    let out = RunOutput::create(cfg.output_dir(), "evolve-null", &cfg.echo)?;
    let line = match cfg.null.mode {
        NullMode::Compactified => {
            let field = evolve_compactified(&cfg.data.family, &cfg.model, cfg.null.n)?;
            let p0 = axis_amplitude(&field)?;
            let q = compute_q(p0, &cfg.model, ell);
            out.csv("radiation.csv", &["u", "re", "im", "abs"], &series_rows(&sample_radiation(&field)))?;
            out.csv(
                "summary.csv",
                &["ell", "re_P0", "im_P0", "re_Q", "im_Q", "n"],
                &[vec![ell.to_string(), ff(p0.re), ff(p0.im), ff(q.re), ff(q.im), cfg.null.n.to_string()]],
            )?;
            summary_line(
                "evolve-null",
                &[
                    ("mode", "compactified".into()),
                    ("ell", ell.to_string()),
                    ("re_P0", ff(p0.re)),
                    ("im_P0", ff(p0.im)),
                    ("n", cfg.null.n.to_string()),
                ],
            )
        }
        NullMode::Physical => {
            let run = evolve_physical(&cfg.null.ray, &cfg.null.domain, &cfg.model, ell, &cfg.null.radii, false)?;
            out.csv("radiation.csv", &["u", "re", "im", "abs"], &series_rows(&run.radiation))?;
            out.csv("radiation_raw.csv", &["u", "re", "im", "abs"], &series_rows(&run.radiation_raw))?;
            for (r0, series) in &run.timelike {
                out.csv(&format!("timelike_r{}.csv", ff(*r0)), &["t", "re", "im", "abs"], &series_rows(series))?;
            }
            let last = run.radiation.last().map(|s| s.1).unwrap_or_default();
            summary_line(
                "evolve-null",
                &[
                    ("mode", "physical".into()),
                    ("ell", ell.to_string()),
                    ("samples", run.radiation.len().to_string()),
                    ("last_abs", ff(last.norm())),
                ],
            )
        }
    };
    out.finish()?;
    Ok(line)
}

/// Which decay law a series is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Radiation,
    Timelike,
}

pub fn parse_window(text: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::Argument(format!("window '{text}' must look like lo:hi")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Argument(format!("window bound '{s}' is not a number")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(CliError::Argument(format!("window {lo}:{hi} must satisfy 0 < lo < hi")));
    }
    Ok((lo, hi))
}

/// Fits a series file and compares with the predicted exponent.
pub fn tails_report(
    input: &Path,
    window: Option<(f64, f64)>,
    params: &ModelParams,
    ell: usize,
    observable: Option<Observable>,
) -> CliResult<TailReport> {
    let (label, series) = read_series_file(input)?;
    let observable = observable.unwrap_or(if label == "t" { Observable::Timelike } else { Observable::Radiation });
    let (lo, hi) = match window {
        Some(w) => w,
        None => default_window(&series).ok_or_else(|| CliError::Argument("series is empty".into()))?,
    };
    let fit = fit_power_law(&series, lo, hi)?;
    Ok(match observable {
        Observable::Radiation => radiation_report(fit, params, ell),
        Observable::Timelike => timelike_report(fit, params, ell),
    })
}

pub const TAILS_HEADER: &[&str] = &[
    "exponent",
    "phase_slope",
    "re_amplitude",
    "im_amplitude",
    "window_lo",
    "window_hi",
    "samples",
    "residual",
    "predicted_exponent",
    "predicted_phase_slope",
    "relative_error",
];

pub fn tails_row(r: &TailReport) -> Vec<String> {
    vec![
        ff(r.fit.exponent),
        ff(r.fit.phase_slope),
        ff(r.fit.amplitude.re),
        ff(r.fit.amplitude.im),
        ff(r.fit.window.0),
        ff(r.fit.window.1),
        r.fit.samples.to_string(),
        ff(r.fit.residual),
        ff(r.predicted_exponent),
        ff(r.predicted_phase_slope),
        ff(r.relative_error),
    ]
}

pub fn tails_text(r: &TailReport) -> String {
    format!(
        "fitted exponent {:.4} (predicted {:.4}, relative error {:.2e}); phase slope {:.4} (predicted {:.4}); \
         window [{}, {}] with {} samples, residual {:.2e}",
        r.fit.exponent,
        r.predicted_exponent,
        r.relative_error,
        r.fit.phase_slope,
        r.predicted_phase_slope,
        r.fit.window.0,
        r.fit.window.1,
        r.fit.samples,
        r.fit.residual
    )
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coupling: f64,
    pub ell: usize,
    pub p0: Complex64,
    pub q: Complex64,
    pub energy_drift: f64,
}

/// Runs the Cauchy solver for every coupling and mode in parallel. For ISP the
/// coupling is `a`; for CSF it is `q` with `e` taken from the config.
pub fn sweep(cfg: &RunConfig, couplings: &[f64], ells: &[usize]) -> CliResult<Vec<SweepRow>> {
    let jobs: Vec<(f64, usize)> = couplings
        .iter()
        .flat_map(|&c| ells.iter().map(move |&l| (c, l)))
        .collect();
    jobs.par_iter()
        .map(|&(coupling, ell)| {
            let mut job = cfg.clone();
            job.model = match cfg.model.kind {
                Kind::Isp => validate_params(ModelParams::isp(coupling))?,
                Kind::Csf => validate_params(ModelParams::csf(coupling, cfg.model.e))?,
            };
            job.data.family.ell = ell;
            job.data.family.m = 0;
            let ev = run_ads(&job, job.grid.n_r, false)?;
            let p0 = ev.p_final();
            Ok(SweepRow {
                coupling,
                ell,
                p0,
                q: compute_q(p0, &job.model, ell),
                energy_drift: ev.max_energy_drift,
            })
        })
        .collect()
}

pub fn sweep_command(cfg: &RunConfig, couplings: &[f64], ells: &[usize]) -> CliResult<String> {
    let rows = sweep(cfg, couplings, ells)?;
    let mut out = RunOutput::create(cfg.output_dir(), "sweep", &cfg.echo)?;
    let kind = match cfg.model.kind {
        Kind::Isp => "isp",
        Kind::Csf => "csf",
    };
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                kind.to_string(),
                ff(r.coupling),
                r.ell.to_string(),
                ff(r.p0.re),
                ff(r.p0.im),
                ff(r.q.re),
                ff(r.q.im),
                ff(r.energy_drift),
            ]
        })
        .collect();
    out.csv(
        "sweep.csv",
        &["kind", "coupling", "ell", "re_P0", "im_P0", "re_Q", "im_Q", "energy_drift"],
        &csv_rows,
    )?;
    out.note("runs", rows.len());
    out.finish()?;
    Ok(summary_line("sweep", &[("runs", rows.len().to_string())]))
}
