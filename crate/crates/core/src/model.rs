//! Equation parameters and the closed-form exponent tables.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which equation is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Wave equation with inverse-square potential `a / r^2`.
    Isp,
    /// Charged wave equation in a Coulomb field; only the product `q e` enters.
    Csf,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "isp" => Ok(Kind::Isp),
            "csf" => Ok(Kind::Csf),
            other => Err(Error::Parse(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Coupling constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub kind: Kind,
    /// Potential strength (ISP only).
    pub a: f64,
    /// Field charge (CSF only).
    pub q: f64,
    /// Background charge (CSF only).
    pub e: f64,
    qe: f64,
}

impl ModelParams {
    pub fn isp(a: f64) -> Self {
        ModelParams {
            kind: Kind::Isp,
            a,
            q: 0.0,
            e: 0.0,
            qe: 0.0,
        }
    }

    pub fn csf(q: f64, e: f64) -> Self {
        ModelParams {
            kind: Kind::Csf,
            a: 0.0,
            q,
            e,
            qe: q * e,
        }
    }

    /// Charge coupling `q e`; zero for ISP.
    pub fn qe(&self) -> f64 {
        self.qe
    }

    /// Twisting exponent of mode `ell`.
    pub fn alpha(&self, ell: usize) -> f64 {
        let lam = angular_eigenvalue(ell);
        match self.kind {
            Kind::Isp => (1.0 + 4.0 * self.a + 4.0 * lam).sqrt() / 2.0,
            Kind::Csf => (1.0 - 4.0 * self.qe * self.qe + 4.0 * lam).sqrt() / 2.0,
        }
    }

    /// Decay exponent `1/2 + alpha + i q e` of mode `ell`.
    pub fn decay_exponent(&self, ell: usize) -> Complex64 {
        Complex64::new(0.5 + self.alpha(ell), self.qe)
    }

    /// Coefficient of `psi / R^2` in the null form `d_U d_V psi = -(coefficient) psi / R^2 + ...`.
    pub fn null_potential(&self, ell: usize) -> Complex64 {
        let lam = angular_eigenvalue(ell);
        match self.kind {
            Kind::Isp => Complex64::new(self.a + lam, 0.0),
            Kind::Csf => Complex64::new(lam, -self.qe),
        }
    }
}

/// Eigenvalue `l(l+1)` of minus the sphere Laplacian.
pub fn angular_eigenvalue(ell: usize) -> f64 {
    let l = ell as f64;
    l * (l + 1.0)
}

/// Checks the admissible parameter ranges and returns the parameters unchanged.
pub fn validate_params(params: ModelParams) -> Result<ModelParams> {
    let finite = [params.a, params.q, params.e].iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::OutOfRange("non-finite coupling".into()));
    }
    match params.kind {
        Kind::Isp => {
            if params.a <= -0.25 {
                return Err(Error::OutOfRange(format!(
                    "a = {} must exceed -1/4",
                    params.a
                )));
            }
        }
        Kind::Csf => {
            let qe = params.q * params.e;
            if qe == 0.0 {
                return Err(Error::OutOfRange(
                    "q e = 0 is not a charged model; use kind = isp with a = 0".into(),
                ));
            }
            if qe.abs() >= 0.5 {
                return Err(Error::OutOfRange(format!("|q e| = {} must be below 1/2", qe.abs())));
            }
        }
    }
    Ok(params)
}

/// Exponents of a single angular mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeExponents {
    pub ell: usize,
    pub p: Complex64,
    pub alpha: f64,
}

/// Exponents for modes `0..=ell_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentTable {
    pub modes: Vec<ModeExponents>,
}

impl ExponentTable {
    pub fn get(&self, ell: usize) -> Option<&ModeExponents> {
        self.modes.get(ell)
    }
}

pub fn exponent_table(params: &ModelParams, ell_max: usize) -> ExponentTable {
    let modes = (0..=ell_max)
        .map(|ell| ModeExponents {
            ell,
            p: params.decay_exponent(ell),
            alpha: params.alpha(ell),
        })
        .collect();
    ExponentTable { modes }
}
