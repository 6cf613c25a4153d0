//! Coordinate charts on the spherically symmetric Minkowski quotient.
//!
//! Physical `(t, r)`, null `(u, v)`, and compactified `(U, V)` / `(T, R)`
//! coordinates with `U = -1/u`, `V = -1/v`, `T = U + V`, `R = V - U`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub t: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullPoint {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactPoint {
    pub big_u: f64,
    pub big_v: f64,
}

impl CompactPoint {
    pub fn time(&self) -> f64 {
        self.big_u + self.big_v
    }

    pub fn radius(&self) -> f64 {
        self.big_v - self.big_u
    }

    pub fn from_time_radius(time: f64, radius: f64) -> Self {
        CompactPoint {
            big_u: (time - radius) / 2.0,
            big_v: (time + radius) / 2.0,
        }
    }
}

pub fn null_from_spherical(p: SphericalPoint) -> NullPoint {
    NullPoint {
        u: (p.t - p.r) / 2.0,
        v: (p.t + p.r) / 2.0,
    }
}

pub fn spherical_from_null(p: NullPoint) -> SphericalPoint {
    SphericalPoint {
        t: p.u + p.v,
        r: p.v - p.u,
    }
}

/// Maps into the compactified chart; only the region `u > 0` is covered.
pub fn compact_from_null(p: NullPoint) -> Result<CompactPoint> {
    if !(p.u > 0.0) || p.v < p.u {
        return Err(Error::Domain(format!(
            "(u, v) = ({}, {}) needs 0 < u <= v",
            p.u, p.v
        )));
    }
    Ok(CompactPoint {
        big_u: -1.0 / p.u,
        big_v: -1.0 / p.v,
    })
}

/// Inverse of [`compact_from_null`]; needs `U <= V < 0`.
pub fn null_from_compact(p: CompactPoint) -> Result<NullPoint> {
    if !(p.big_v < 0.0) || p.big_u > p.big_v {
        return Err(Error::Domain(format!(
            "(U, V) = ({}, {}) needs U <= V < 0",
            p.big_u, p.big_v
        )));
    }
    Ok(NullPoint {
        u: -1.0 / p.big_u,
        v: -1.0 / p.big_v,
    })
}

/// Compactified radius of the point at area radius `r` on the initial hyperboloid.
pub fn sigma1_radius_of_r(r: f64) -> f64 {
    r / (2.0 + (4.0 + r * r).sqrt())
}

/// Time coordinate `t` of the initial hyperboloid at area radius `r`.
pub fn sigma1_time_of_r(r: f64) -> f64 {
    2.0 + (4.0 + r * r).sqrt()
}

/// Membership in the future domain of dependence of the initial hyperboloid.
pub fn in_forward_domain(p: SphericalPoint) -> bool {
    let s = p.t - 2.0;
    s * s - p.r * p.r >= 4.0 && p.t >= 4.0
}

/// Morawetz field and its orthogonal partner in the `(d_t, d_r)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzCoefficients {
    pub k_t: f64,
    pub k_r: f64,
    pub kperp_t: f64,
    pub kperp_r: f64,
}

pub fn morawetz_coefficients(p: SphericalPoint) -> MorawetzCoefficients {
    let s = (p.t * p.t + p.r * p.r) / 2.0;
    let m = p.r * p.t;
    MorawetzCoefficients {
        k_t: s,
        k_r: m,
        kperp_t: m,
        kperp_r: s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn null_examples() {
        assert_eq!(
            null_from_spherical(SphericalPoint { t: 4.0, r: 0.0 }),
            NullPoint { u: 2.0, v: 2.0 }
        );
        assert_eq!(
            null_from_spherical(SphericalPoint { t: 3.0, r: 1.0 }),
            NullPoint { u: 1.0, v: 2.0 }
        );
    }

    #[test]
    fn compact_examples() {
        let c = compact_from_null(NullPoint { u: 1.0, v: 2.0 }).unwrap();
        assert_eq!((c.big_u, c.big_v), (-1.0, -0.5));
        assert_eq!(c.time(), -1.5);
        assert_eq!(c.radius(), 0.5);
        assert_eq!(c.radius(), 1.0 / (1.0 * 2.0));

        let c = compact_from_null(NullPoint { u: 2.0, v: 2.0 }).unwrap();
        assert_eq!((c.time(), c.radius()), (-1.0, 0.0));

        let c = compact_from_null(NullPoint { u: 1.0, v: 1e12 }).unwrap();
        assert!((c.radius() - 1.0).abs() < 1e-11);

        assert!(matches!(
            compact_from_null(NullPoint { u: 0.0, v: 1.0 }),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            compact_from_null(NullPoint { u: -1.0, v: 1.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn hyperboloid_radius() {
        assert_eq!(sigma1_radius_of_r(0.0), 0.0);
        assert!(sigma1_radius_of_r(1e9) < 1.0);
        assert!((sigma1_radius_of_r(1e9) - 1.0).abs() < 1e-8);
        let r = 3.0;
        let t = sigma1_time_of_r(r);
        let alt = 4.0 * r / (t * t - r * r);
        assert!(rel(sigma1_radius_of_r(r), alt) < 1e-14);
        assert!(rel(sigma1_radius_of_r(r), 3.0 / (2.0 + 13f64.sqrt())) < 1e-15);
    }

    #[test]
    fn hyperboloid_is_initial_slice() {
        let mut r: f64 = 0.1;
        while r <= 100.0 {
            let t = sigma1_time_of_r(r);
            let c = compact_from_null(null_from_spherical(SphericalPoint { t, r })).unwrap();
            assert!(rel(c.radius(), sigma1_radius_of_r(r)) < 1e-12);
            assert!((c.time() + 1.0).abs() < 1e-12);
            r *= 1.3;
        }
    }

    #[test]
    fn forward_domain_examples() {
        assert!(in_forward_domain(SphericalPoint { t: 4.0, r: 0.0 }));
        assert!(!in_forward_domain(SphericalPoint { t: 4.0, r: 1.0 }));
        assert!(in_forward_domain(SphericalPoint { t: 10.0, r: 2.0 }));
        assert!(!in_forward_domain(SphericalPoint { t: 0.0, r: 0.0 }));
    }

    #[test]
    fn morawetz_examples() {
        let m = morawetz_coefficients(SphericalPoint { t: 2.0, r: 0.0 });
        assert_eq!((m.k_t, m.k_r, m.kperp_t, m.kperp_r), (2.0, 0.0, 0.0, 2.0));
        let m = morawetz_coefficients(SphericalPoint { t: 1.0, r: 1.0 });
        assert_eq!((m.k_t, m.k_r, m.kperp_t, m.kperp_r), (1.0, 1.0, 1.0, 1.0));
    }

    /// Pushes `d_T` and `d_R` forward by differentiating the inverse chart numerically.
    /// With `T = U + V` the chain rule gives `d_U + d_V = 2 d_T`, so `K = 2 d_T` and `K_perp = 2 d_R`.
    #[test]
    fn morawetz_is_twice_compact_time_and_radius() {
        let p = NullPoint { u: 1.0, v: 2.0 };
        let c = compact_from_null(p).unwrap();
        let eps = 1e-6;
        let push = |dt_: f64, dr_: f64| {
            let time = c.time();
            let radius = c.radius();
            let plus = spherical_from_null(
                null_from_compact(CompactPoint::from_time_radius(time + eps * dt_, radius + eps * dr_))
                    .unwrap(),
            );
            let minus = spherical_from_null(
                null_from_compact(CompactPoint::from_time_radius(time - eps * dt_, radius - eps * dr_))
                    .unwrap(),
            );
            ((plus.t - minus.t) / (2.0 * eps), (plus.r - minus.r) / (2.0 * eps))
        };
        let m = morawetz_coefficients(spherical_from_null(p));
        let (kt, kr) = push(1.0, 0.0);
        let (pt, pr) = push(0.0, 1.0);
        assert!(rel(2.0 * kt, m.k_t) < 1e-8 && rel(2.0 * kr, m.k_r) < 1e-8);
        assert!(rel(2.0 * pt, m.kperp_t) < 1e-8 && rel(2.0 * pr, m.kperp_r) < 1e-8);
        // K = u^2 d_u + v^2 d_v has (d_t, d_r) components (u^2 + v^2, v^2 - u^2).
        let (u, v) = (p.u, p.v);
        assert!(rel(m.k_t, u * u + v * v) < 1e-14);
        assert!(rel(m.k_r, v * v - u * u) < 1e-14);
    }

    proptest! {
        #[test]
        fn round_trips(u in 0.01f64..1e3, dr in 0.0f64..1e3) {
            let p = NullPoint { u, v: u + dr };
            let s = spherical_from_null(p);
            let back = null_from_spherical(s);
            // u = (t - r)/2 cancels when v >> u, so both errors scale with v.
            prop_assert!((back.u - p.u).abs() <= 1e-12 * p.v && (back.v - p.v).abs() <= 1e-12 * p.v);
            let c = compact_from_null(p).unwrap();
            let back = null_from_compact(c).unwrap();
            prop_assert!(rel(back.u, p.u) < 1e-12 && rel(back.v, p.v) < 1e-12);
            let tr = CompactPoint::from_time_radius(c.time(), c.radius());
            prop_assert!(rel(tr.big_u, c.big_u) < 1e-12);
            prop_assert!((tr.big_v - c.big_v).abs() <= 1e-12 * c.big_u.abs());
        }

        #[test]
        fn radius_and_time_identities(u in 0.01f64..1e3, dr in 0.0f64..1e3) {
            let p = NullPoint { u, v: u + dr };
            let s = spherical_from_null(p);
            let c = compact_from_null(p).unwrap();
            let expect_r = 4.0 * s.r / ((s.t - s.r) * (s.t + s.r));
            // t - r loses a relative v/u to cancellation.
            prop_assert!((c.radius() - expect_r).abs() <= 1e-12 * (1.0 / p.u) * (p.v / p.u));
            prop_assert!((c.radius() - s.r / (p.u * p.v)).abs() <= 1e-12 * (1.0 / p.u));
            prop_assert!(rel(c.time().abs(), 1.0 / p.u + 1.0 / p.v) < 1e-12);
        }
    }
}
