//! Cauchy evolution of one angular mode on the compactified chart, from the
//! initial hyperboloid `T = -1` to `T = 0`, in the regularized variable
//! `W = R^{-alpha_l} Phi`:
//!
//! `W_TT = W_RR + (2 alpha_l + 1) W_R / R - 2 i q e W_T / R`.
//!
//! Multiplying by `R^{2 alpha_l + 1}` gives the flux form discretized here with
//! cell masses `M`, a stiffness matrix `A` and a diagonal charge weight `C`:
//! `M W'' + 2 i q e C W' + A W = 0`. The flux weight vanishes at the axis, which
//! encodes the regular axis closure `(2 alpha_l + 1) W_R(0) = 2 i q e W_T(0)`.
//! The outer boundary at `R_max` is homogeneous Dirichlet.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::tridiag::solve_complex;
use crate::twisted::{energy, gradient_conductances, kinetic_masses, RadialGrid, RadialGridFunction};

/// Default outer radius of the evolution grid.
pub const DEFAULT_R_MAX: f64 = 2.5;
/// Default largest admissible `dt / h`.
pub const DEFAULT_CFL_LIMIT: f64 = 0.5;
/// Default blow-up guard relative to the initial maximum of `|W|`.
pub const DEFAULT_GUARD_FACTOR: f64 = 1e6;

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Implicit midpoint rule; conserves the discrete energy to roundoff.
    ImplicitMidpoint,
    /// Kick-drift-kick leapfrog with a time-centred (Cayley) charge kick;
    /// the discrete energy oscillates at `O(dt^2)`.
    Leapfrog,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" | "implicit_midpoint" => Ok(Integrator::ImplicitMidpoint),
            "leapfrog" => Ok(Integrator::Leapfrog),
            other => Err(Error::Parse(format!("unknown integrator '{other}'"))),
        }
    }
}

/// One time slice of a single mode.
#[derive(Debug, Clone, PartialEq)]
pub struct AdsState {
    pub time: f64,
    pub ell: usize,
    pub w: RadialGridFunction,
    pub wdot: RadialGridFunction,
    pub params: ModelParams,
}

impl AdsState {
    pub fn new(w: RadialGridFunction, wdot: RadialGridFunction, params: ModelParams) -> Result<Self> {
        if w.grid != wdot.grid || w.ell != wdot.ell {
            return Err(Error::OutOfRange("W and dW/dT live on different grids or modes".into()));
        }
        if !w.is_finite() || !wdot.is_finite() {
            return Err(Error::OutOfRange("non-finite initial data".into()));
        }
        Ok(AdsState {
            time: -1.0,
            ell: w.ell,
            w,
            wdot,
            params,
        })
    }

    pub fn energy(&self) -> f64 {
        energy(&self.w, &self.wdot, &self.params, self.ell)
    }

    /// Value of `W` at the axis, i.e. `P_l(T)`.
    pub fn axis_value(&self) -> Complex64 {
        extract_p(&self.w)
    }
}

/// Samples of `P_l(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PSeries {
    pub ell: usize,
    pub samples: Vec<(f64, Complex64)>,
}

impl PSeries {
    /// Last recorded value, `P_l(T_end)`.
    pub fn last(&self) -> Option<Complex64> {
        self.samples.last().map(|s| s.1)
    }
}

/// Axis limit of `W` by quadratic extrapolation from the three innermost cells.
pub fn extract_p(w: &RadialGridFunction) -> Complex64 {
    let v = &w.values;
    v[0] * (15.0 / 8.0) - v[1] * (5.0 / 4.0) + v[2] * (3.0 / 8.0)
}

/// `Q_l = 4^{p_l} P_l(0)`.
pub fn compute_q(p0: Complex64, params: &ModelParams, ell: usize) -> Complex64 {
    let p = params.decay_exponent(ell);
    (p * 4f64.ln()).exp() * p0
}

/// Precomputed operators of one mode on one grid.
#[derive(Debug, Clone)]
pub struct AdsSolver {
    pub grid: RadialGrid,
    pub params: ModelParams,
    pub ell: usize,
    pub integrator: Integrator,
    pub cfl_limit: f64,
    mass: Vec<f64>,
    charge: Vec<f64>,
    /// Interior face conductances, then the outer face.
    cond: Vec<f64>,
}

impl AdsSolver {
    pub fn new(grid: RadialGrid, params: ModelParams, ell: usize, integrator: Integrator) -> Self {
        let beta = params.alpha(ell);
        let h = grid.h();
        let charge = (0..grid.n)
            .map(|j| {
                let (lo, hi) = (j as f64 * h, (j as f64 + 1.0) * h);
                (hi.powf(2.0 * beta + 1.0) - lo.powf(2.0 * beta + 1.0)) / (2.0 * beta + 1.0)
            })
            .collect();
        AdsSolver {
            grid,
            params,
            ell,
            integrator,
            cfl_limit: DEFAULT_CFL_LIMIT,
            mass: kinetic_masses(grid, beta),
            charge,
            cond: gradient_conductances(grid, beta),
        }
    }

    /// `(A W)_j`.
    fn stiffness_apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n - 1 {
            let flux = (w[j + 1] - w[j]) * self.cond[j];
            out[j] -= flux;
            out[j + 1] += flux;
        }
        out[n - 1] += w[n - 1] * (2.0 * self.cond[n - 1]);
        out
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        let bound = self.cfl_limit * self.grid.h();
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, bound });
        }
        Ok(())
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &AdsState, dt: f64) -> Result<AdsState> {
        self.check_dt(dt)?;
        let (w, v) = match self.integrator {
            Integrator::ImplicitMidpoint => self.midpoint(&state.w.values, &state.wdot.values, dt)?,
            Integrator::Leapfrog => self.leapfrog(&state.w.values, &state.wdot.values, dt),
        };
        let mut next = state.clone();
        next.time = state.time + dt;
        next.w.values = w;
        next.wdot.values = v;
        Ok(next)
    }

    /// Solves `(M + i qe dt C + dt^2/4 A) V+ = (M - i qe dt C - dt^2/4 A) V - dt A W`,
    /// then `W+ = W + dt (V + V+) / 2`.
    fn midpoint(
        &self,
        w: &[Complex64],
        v: &[Complex64],
        dt: f64,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let n = self.grid.n;
        let qe = self.params.qe();
        let q = dt * dt / 4.0;
        let aw = self.stiffness_apply(w);
        let av = self.stiffness_apply(v);
        let mut lower = vec![Complex64::new(0.0, 0.0); n];
        let mut upper = vec![Complex64::new(0.0, 0.0); n];
        let mut diag = vec![Complex64::new(0.0, 0.0); n];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let charge = Complex64::new(0.0, qe * dt * self.charge[j]);
            let left = if j > 0 { self.cond[j - 1] } else { 0.0 };
            let right = if j + 1 < n { self.cond[j] } else { 2.0 * self.cond[n - 1] };
            diag[j] = Complex64::new(self.mass[j] + q * (left + right), 0.0) + charge;
            if j > 0 {
                lower[j] = Complex64::new(-q * left, 0.0);
            }
            if j + 1 < n {
                upper[j] = Complex64::new(-q * right, 0.0);
            }
            rhs[j] = v[j] * self.mass[j] - charge * v[j] - av[j] * q - aw[j] * dt;
        }
        let v_next = solve_complex(&lower, &diag, &upper, &rhs)?;
        let w_next = w
            .iter()
            .zip(v.iter().zip(&v_next))
            .map(|(w, (a, b))| w + (a + b) * (dt / 2.0))
            .collect();
        Ok((w_next, v_next))
    }

    /// Half kick with the charge term averaged over the kick.
    fn kick(&self, w: &[Complex64], v: &mut [Complex64], half: f64) {
        let qe = self.params.qe();
        let aw = self.stiffness_apply(w);
        for j in 0..self.grid.n {
            let rot = Complex64::new(0.0, qe * half * self.charge[j]);
            let m = self.mass[j];
            v[j] = ((m - rot) * v[j] - aw[j] * half) / (m + rot);
        }
    }

    fn leapfrog(&self, w: &[Complex64], v: &[Complex64], dt: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut v = v.to_vec();
        self.kick(w, &mut v, dt / 2.0);
        let w_next: Vec<Complex64> = w.iter().zip(&v).map(|(w, v)| w + v * dt).collect();
        self.kick(&w_next, &mut v, dt / 2.0);
        (w_next, v)
    }
}

/// Free-standing single step with a freshly assembled solver.
pub fn step(state: &AdsState, dt: f64, integrator: Integrator) -> Result<AdsState> {
    AdsSolver::new(state.w.grid, state.params, state.ell, integrator).step(state, dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub t_end: f64,
    /// `dt / h`.
    pub cfl: f64,
    pub cfl_limit: f64,
    /// Steps between recorded `P` samples and snapshots; 0 records only the end points.
    pub stride: usize,
    pub integrator: Integrator,
    pub guard_factor: f64,
    pub keep_snapshots: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            t_end: 0.0,
            cfl: 0.4,
            cfl_limit: DEFAULT_CFL_LIMIT,
            stride: 0,
            integrator: Integrator::ImplicitMidpoint,
            guard_factor: DEFAULT_GUARD_FACTOR,
            keep_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub final_state: AdsState,
    pub snapshots: Vec<AdsState>,
    pub p_series: PSeries,
    pub dt: f64,
    pub steps: usize,
    pub energy_initial: f64,
    /// Largest `|E(T) - E(-1)| / E(-1)` over recorded samples (0 for zero data).
    pub max_energy_drift: f64,
}

impl Evolution {
    pub fn p_final(&self) -> Complex64 {
        self.final_state.axis_value()
    }
}

/// Marches `initial` (at `T = -1`) to `opts.t_end`, landing exactly on it.
pub fn evolve(initial: AdsState, opts: &EvolveOptions) -> Result<Evolution> {
    let grid = initial.w.grid;
    if !(opts.t_end > initial.time) || opts.t_end > 0.0 {
        return Err(Error::OutOfRange(format!(
            "t_end = {} must lie in ({}, 0]",
            opts.t_end, initial.time
        )));
    }
    let span = opts.t_end - initial.time;
    let steps = (span / (opts.cfl * grid.h())).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let mut solver = AdsSolver::new(grid, initial.params, initial.ell, opts.integrator);
    solver.cfl_limit = opts.cfl_limit;

    let guard = opts.guard_factor * initial.w.max_abs();
    let energy_initial = initial.energy();
    let mut max_drift = 0.0f64;
    let mut state = initial;
    let mut p_samples = vec![(state.time, state.axis_value())];
    let mut snapshots = if opts.keep_snapshots { vec![state.clone()] } else { Vec::new() };
    let record = |s: &AdsState, drift: &mut f64| {
        if energy_initial > 0.0 {
            *drift = drift.max((s.energy() - energy_initial).abs() / energy_initial);
        }
    };
    for k in 1..=steps {
        state = solver.step(&state, dt)?;
        if k == steps {
            state.time = opts.t_end;
        }
        let max = state.w.max_abs();
        if !max.is_finite() || max > guard {
            return Err(Error::BlowUp { guard, time: state.time });
        }
        let due = (opts.stride > 0 && k % opts.stride == 0) || k == steps;
        if due {
            record(&state, &mut max_drift);
            p_samples.push((state.time, state.axis_value()));
            if opts.keep_snapshots {
                snapshots.push(state.clone());
            }
        }
    }
    Ok(Evolution {
        p_series: PSeries {
            ell: state.ell,
            samples: p_samples,
        },
        final_state: state,
        snapshots,
        dt,
        steps,
        energy_initial,
        max_energy_drift: max_drift,
    })
}
