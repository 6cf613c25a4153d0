//! Three-grid self-convergence of both solvers.

use tailwave_core::evolve_null::{axis_amplitude, evolve_compactified, sample_radiation, NullField};

use crate::commands::run_ads;
use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Ads,
    Null,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Ads => "ads",
            Solver::Null => "null",
        }
    }
}

/// Differences between grids `n`/`2n` and `2n`/`4n` of one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub solver: Solver,
    pub observable: &'static str,
    pub coarse_diff: f64,
    pub fine_diff: f64,
    /// `None` when both differences sit at roundoff.
    pub order: Option<f64>,
}

impl OrderEstimate {
    fn new(solver: Solver, observable: &'static str, coarse_diff: f64, fine_diff: f64, scale: f64) -> Self {
        let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let order = if coarse_diff <= floor && fine_diff <= floor {
            None
        } else {
            Some((coarse_diff / fine_diff).log2())
        };
        OrderEstimate {
            solver,
            observable,
            coarse_diff,
            fine_diff,
            order,
        }
    }

    pub fn order_text(&self) -> String {
        match self.order {
            Some(o) => format!("{o:.4}"),
            None => "saturated".into(),
        }
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.order.is_none_or(|o| o >= lo && o <= hi)
    }
}

pub fn ads_orders(cfg: &RunConfig) -> CliResult<Vec<OrderEstimate>> {
    let n = cfg.grid.n_r;
    let runs: Vec<_> = [n, 2 * n, 4 * n]
        .into_iter()
        .map(|m| run_ads(cfg, m, false))
        .collect::<CliResult<_>>()?;
    let p: Vec<_> = runs.iter().map(|r| r.p_final()).collect();
    let energy: Vec<f64> = runs.iter().map(|r| r.final_state.energy()).collect();
    let fields: Vec<_> = runs
        .iter()
        .enumerate()
        .map(|(k, r)| r.final_state.w.coarsen(1 << k))
        .collect::<Result<_, _>>()?;
    let field_diff = |a: usize, b: usize| fields[a].sub(&fields[b]).l2_norm_sqr().sqrt();
    let field_scale = fields[2].l2_norm_sqr().sqrt();
    Ok(vec![
        OrderEstimate::new(Solver::Ads, "P0", (p[0] - p[1]).norm(), (p[1] - p[2]).norm(), p[2].norm()),
        OrderEstimate::new(
            Solver::Ads,
            "energy",
            (energy[0] - energy[1]).abs(),
            (energy[1] - energy[2]).abs(),
            energy[2],
        ),
        OrderEstimate::new(Solver::Ads, "field", field_diff(0, 1), field_diff(1, 2), field_scale),
    ])
}

/// Largest difference at lattice points shared with a lattice twice as fine.
fn lattice_gap(coarse: &NullField, fine: &NullField) -> f64 {
    let mut gap = 0.0f64;
    for i in 0..coarse.rows.len() {
        for j in coarse.row_start[i]..=coarse.n_v {
            if let (Some(a), Some(b)) = (coarse.get(i, j), fine.get(2 * i, 2 * j)) {
                gap = gap.max((a - b).norm());
            }
        }
    }
    gap
}

pub fn null_orders(cfg: &RunConfig) -> CliResult<Vec<OrderEstimate>> {
    let n = cfg.null.n;
    let fields: Vec<NullField> = [n, 2 * n, 4 * n]
        .into_iter()
        .map(|m| evolve_compactified(&cfg.data.family, &cfg.model, m))
        .collect::<Result<_, _>>()?;
    let p: Vec<_> = fields.iter().map(axis_amplitude).collect::<Result<_, _>>()?;
    let rad: Vec<_> = fields.iter().map(sample_radiation).collect();
    let rad_gap = |a: usize| {
        rad[a]
            .iter()
            .enumerate()
            .filter_map(|(i, (_, y))| rad[a + 1].get(2 * i).map(|(_, z)| (y - z).norm()))
            .fold(0.0, f64::max)
    };
    let scale = fields[2].max_abs();
    Ok(vec![
        OrderEstimate::new(Solver::Null, "P0", (p[0] - p[1]).norm(), (p[1] - p[2]).norm(), p[2].norm()),
        OrderEstimate::new(Solver::Null, "radiation", rad_gap(0), rad_gap(1), scale),
        OrderEstimate::new(
            Solver::Null,
            "field",
            lattice_gap(&fields[0], &fields[1]),
            lattice_gap(&fields[1], &fields[2]),
            scale,
        ),
    ])
}

pub fn rows(estimates: &[OrderEstimate]) -> Vec<Vec<String>> {
    use tailwave_core::io::format_float as ff;
    estimates
        .iter()
        .map(|e| {
            vec![
                e.solver.name().to_string(),
                e.observable.to_string(),
                ff(e.coarse_diff),
                ff(e.fine_diff),
                e.order_text(),
            ]
        })
        .collect()
}
