//! Closed-form boundary certainty for homogeneous linear models on the unit
//! sphere under a uniform prior.
//!
//! When explanations are released only for points with `|⟨w*, x⟩| > α`, the
//! version space is the spherical cap of half-angle `φ = arcsin α` around
//! `w*`. A manipulation radius `r` on the sphere corresponds to the angle
//! `ψ = 2·arcsin(r/2)`. The worst-case certainty gain over all boundary pairs
//! is
//!
//! ```text
//!          ∫₀^{ψ/2} F(θ) dθ
//! Π(α) = ───────────────────        if ψ ≤ 2φ,     and 1 otherwise,
//!          ∫₀^{φ}   F(θ) dθ
//! ```
//!
//! with `F(θ) = (1 − cos²φ / cos²θ)₊^{(d−2)/2}`, the density of the polar angle
//! of a cap-uniform normal projected onto the plane of the pair.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadrature;
use crate::scalar::Scalar;

/// Half-angle of the version-space cap for margin cutoff `alpha`.
pub fn angle_phi<T: Scalar>(alpha: T) -> Result<T> {
    if !(alpha >= T::zero() && alpha < T::one()) {
        return domain(format!("alpha must lie in [0, 1), got {alpha}"));
    }
    Ok(alpha.asin())
}

/// Boundary-band angle for manipulation radius `r` on the unit sphere.
pub fn angle_psi<T: Scalar>(r: T) -> Result<T> {
    if !(r > T::zero() && r <= T::lit(2.0)) {
        return domain(format!("r must lie in (0, 2], got {r}"));
    }
    Ok(T::lit(2.0) * (r / T::lit(2.0)).asin())
}

/// Geometry of a cap/band configuration. All four parameterisations are kept
/// in sync by the constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapGeometry<T> {
    pub d: usize,
    pub alpha: T,
    pub phi: T,
    pub r: T,
    pub psi: T,
}

impl<T: Scalar> CapGeometry<T> {
    pub fn from_alpha_r(d: usize, alpha: T, r: T) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            d,
            alpha,
            phi: angle_phi(alpha)?,
            r,
            psi: angle_psi(r)?,
        })
    }

    pub fn from_angles(d: usize, phi: T, psi: T) -> Result<Self> {
        check_dim(d)?;
        if !(phi >= T::zero() && phi < T::FRAC_PI_2()) {
            return domain(format!("phi must lie in [0, π/2), got {phi}"));
        }
        if !(psi > T::zero() && psi <= T::PI()) {
            return domain(format!("psi must lie in (0, π], got {psi}"));
        }
        let r = T::lit(2.0) * (psi / T::lit(2.0)).sin();
        Ok(Self {
            d,
            alpha: phi.sin(),
            phi,
            r: r.min(T::lit(2.0)),
            psi,
        })
    }

    /// Same band, different cutoff.
    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Ok(Self {
            alpha,
            phi: angle_phi(alpha)?,
            ..*self
        })
    }

    /// True when the band is wide enough that some pair is always split.
    pub fn saturated(&self) -> bool {
        self.psi > T::lit(2.0) * self.phi
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    Ok(())
}

/// `1 − cos²φ / cos²θ` written as `sin(φ−θ)·sin(φ+θ) / cos²θ` so the factor
/// does not cancel catastrophically near `θ = φ`. Zero outside `|θ| ≤ φ`.
fn base<T: Scalar>(theta: T, phi: T) -> T {
    let t = theta.abs();
    if t > phi {
        return T::zero();
    }
    let c = t.cos();
    ((phi - t).sin() * (phi + t).sin() / (c * c)).max(T::zero())
}

/// Projected polar-angle density, clamped to zero outside the cap.
pub fn f_theta<T: Scalar>(theta: T, phi: T, d: usize) -> Result<T> {
    if !(theta.abs() < T::FRAC_PI_2()) {
        return domain(format!("theta must lie in (−π/2, π/2), got {theta}"));
    }
    if !(phi >= T::zero() && phi < T::FRAC_PI_2()) {
        return domain(format!("phi must lie in [0, π/2), got {phi}"));
    }
    check_dim(d)?;
    if theta.abs() > phi {
        return Ok(T::zero());
    }
    let exponent = T::from_count(d - 2) / T::lit(2.0);
    Ok(base(theta, phi).powf(exponent))
}

/// `F(θ)/F(0)`, evaluated in log space so it stays representable for large `d`
/// where `F(0) = sin^{d−2} φ` underflows.
fn normalized_density<T: Scalar>(theta: T, phi: T, d: usize) -> T {
    let b = base(theta, phi);
    if b <= T::zero() {
        return T::zero();
    }
    let s = phi.sin();
    let exponent = T::from_count(d - 2) / T::lit(2.0);
    (exponent * (b / (s * s)).ln()).exp()
}

/// Worst-case boundary certainty `Π` for the geometry.
pub fn pi_closed_form<T: Scalar>(geom: &CapGeometry<T>) -> T {
    if geom.saturated() {
        return T::one();
    }
    let half = geom.psi / T::lit(2.0);
    if geom.d == 2 {
        return (half / geom.phi).min(T::one());
    }
    let (d, phi) = (geom.d, geom.phi);
    let f = |t: T| normalized_density(t, phi, d);
    let inner = quadrature::integrate(f, T::zero(), half).value;
    let outer = quadrature::integrate(f, half, phi).value;
    let total = inner + outer;
    if total <= T::zero() {
        return T::one();
    }
    (inner / total).max(T::zero()).min(T::one())
}

/// Outcome of checking a closed-form upper bound on `Π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck<T> {
    pub applicable: bool,
    pub bound: T,
    pub pi: T,
    pub holds: bool,
}

impl<T: Scalar> BoundCheck<T> {
    fn new(applicable: bool, bound: T, pi: T) -> Self {
        Self {
            applicable,
            bound,
            pi,
            holds: !applicable || pi <= bound,
        }
    }
}

/// High-cutoff regime: once `α ≥ 1 − 1/(8d)`, `Π ≤ 9ψ`.
pub fn check_high_cutoff_bound<T: Scalar>(geom: &CapGeometry<T>) -> BoundCheck<T> {
    let gate = T::one() - T::one() / (T::lit(8.0) * T::from_count(geom.d));
    BoundCheck::new(
        geom.alpha >= gate,
        T::lit(9.0) * geom.psi,
        pi_closed_form(geom),
    )
}

/// Refined regime: when `cos φ ≤ 1/(2·d^{1/4})`, `Π ≤ 6ψ(1 + √d·cos φ)`.
pub fn check_refined_bound<T: Scalar>(geom: &CapGeometry<T>) -> BoundCheck<T> {
    let d = T::from_count(geom.d);
    let cos_phi = geom.phi.cos();
    let gate = T::one() / (T::lit(2.0) * d.powf(T::lit(0.25)));
    BoundCheck::new(
        cos_phi <= gate,
        T::lit(6.0) * geom.psi * (T::one() + d.sqrt() * cos_phi),
        pi_closed_form(geom),
    )
}
