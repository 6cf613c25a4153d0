//! The characteristic and Cauchy solvers agree on a common compactified slice.

use num_complex::Complex64;
use tailwave_core::evolve_ads::{evolve, AdsState, EvolveOptions, DEFAULT_R_MAX};
use tailwave_core::evolve_null::{evolve_compactified, w_slice};
use tailwave_core::initdata::{make_data, DataFamily};
use tailwave_core::model::ModelParams;
use tailwave_core::twisted::RadialGrid;

const SLICE: f64 = -0.5;

/// RMS difference of `W` on `T = -1/2` over `R in [0.05, 0.45]`, with the
/// cell-centred Cauchy values interpolated linearly to the lattice radii.
fn slice_gap(family: &DataFamily, params: ModelParams, n_null: usize) -> f64 {
    let field = evolve_compactified(family, &params, n_null).unwrap();
    let null = w_slice(&field, SLICE).unwrap();

    let n_ads = (DEFAULT_R_MAX * n_null as f64) as usize;
    let grid = RadialGrid::new(n_ads, DEFAULT_R_MAX).unwrap();
    let (w, wdot) = make_data(family, grid).unwrap();
    let opts = EvolveOptions {
        t_end: SLICE,
        ..EvolveOptions::default()
    };
    let ads = evolve(AdsState::new(w, wdot, params).unwrap(), &opts).unwrap().final_state.w;

    let h = grid.h();
    let mut sum = 0.0;
    let mut count = 0;
    for (r, wn) in null.into_iter().filter(|(r, _)| (0.05..=0.45).contains(r)) {
        let x = r / h - 0.5;
        let j = x.floor() as usize;
        let t = x - j as f64;
        let wa: Complex64 = ads.values[j] * (1.0 - t) + ads.values[j + 1] * t;
        sum += (wn - wa).norm_sqr();
        count += 1;
    }
    (sum / count as f64).sqrt()
}

#[test]
fn charged_bump_agrees_at_second_order() {
    let family = DataFamily::bump(0.4, 0.3, Complex64::new(1.0, 0.0), 0);
    let params = ModelParams::csf(0.3, 1.0);
    let gaps: Vec<f64> = [128, 256, 512].iter().map(|&n| slice_gap(&family, params, n)).collect();
    let orders: Vec<f64> = gaps.windows(2).map(|g| (g[0] / g[1]).log2()).collect();
    assert!(gaps[2] < 1e-3, "gaps {gaps:?}");
    assert!(orders[1] > 1.8 && orders[1] < 2.3, "gaps {gaps:?}, orders {orders:?}");
}

#[test]
fn gaussian_mode_one_agrees_at_second_order() {
    let family = DataFamily::gaussian(0.3, 0.2, Complex64::new(0.5, 1.0), 1);
    let params = ModelParams::isp(-0.2);
    let gaps: Vec<f64> = [128, 256, 512].iter().map(|&n| slice_gap(&family, params, n)).collect();
    let order = (gaps[1] / gaps[2]).log2();
    assert!(order > 1.8 && order < 2.3, "gaps {gaps:?}");
}
