//! Worked constructions around boundary certainty: the one-dimensional
//! threshold class, a planar feature set where withholding more explanations
//! raises certainty, a skewed prior with the same effect, and an affine class
//! whose certainty never drops below one third.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::LinearModel;
use crate::scalar::{vector, Scalar};
use crate::version_space::{cap_measure, CapSampler, SphericalCap};

/// `π(x, x′)` for thresholds `t` uniform on `[x⁻, x⁺]` labelling `z ≥ t`
/// positive: `(min(x′, x⁺) − x)/(x⁺ − x⁻)`.
pub fn threshold_1d_pi<T: Scalar>(x_minus: T, x_plus: T, x: T, x_prime: T) -> Result<T> {
    if !(x_minus < x && x < x_plus && x < x_prime) {
        return domain(format!(
            "need x⁻ < x < x⁺ and x < x′, got x⁻ = {x_minus}, x = {x}, x⁺ = {x_plus}, x′ = {x_prime}"
        ));
    }
    Ok((x_prime.min(x_plus) - x) / (x_plus - x_minus))
}

/// Which of the two margin cutoffs of an [`OffSphereScenario`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cutoff {
    /// The larger cutoff `α₁` (fewer explanations).
    Alpha1,
    /// The smaller cutoff `α₂` (more explanations).
    Alpha2,
}

/// A five-point planar feature set with `w* = (1, 0)` where the version
/// space of the larger cutoff is a narrower arc yet gives a higher
/// certainty than the smaller cutoff.
///
/// Points: `x¹ = (α₁′, −α₁′ cot μ)`, `x² = (α₁′, α₁′ cot ν)`,
/// `x³ = (α₂′, −α₂′ cot γ)`, `z¹ = (r/2)(sin θ, cos θ)`,
/// `z² = (r/2)(−sin θ, cos θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffSphereScenario<T> {
    pub gamma: T,
    pub mu: T,
    pub theta: T,
    pub nu: T,
    pub alpha1_prime: T,
    pub alpha2_prime: T,
    pub alpha1: T,
    pub alpha2: T,
    pub r: T,
}

impl<T: Scalar> OffSphereScenario<T> {
    /// `α₁′ = 10, α₂′ = 5, α₁ = 7.5, α₂ = 2.5, r = 1, γ = π/16, μ = π/12,
    /// θ = π/8, ν = π/4`.
    pub fn reference() -> Self {
        let pi = T::PI();
        Self {
            gamma: pi / T::lit(16.0),
            mu: pi / T::lit(12.0),
            theta: pi / T::lit(8.0),
            nu: pi / T::lit(4.0),
            alpha1_prime: T::lit(10.0),
            alpha2_prime: T::lit(5.0),
            alpha1: T::lit(7.5),
            alpha2: T::lit(2.5),
            r: T::one(),
        }
    }

    pub fn w_star() -> Vec<T> {
        vec![T::one(), T::zero()]
    }

    /// `[x¹, x², x³, z¹, z²]`.
    pub fn points(&self) -> Vec<Vec<T>> {
        let cot = |a: T| a.cos() / a.sin();
        let half = self.r / T::lit(2.0);
        let (s, c) = self.theta.sin_cos();
        vec![
            vec![self.alpha1_prime, -self.alpha1_prime * cot(self.mu)],
            vec![self.alpha1_prime, self.alpha1_prime * cot(self.nu)],
            vec![self.alpha2_prime, -self.alpha2_prime * cot(self.gamma)],
            vec![half * s, half * c],
            vec![-half * s, half * c],
        ]
    }

    /// Indices into [`Self::points`] whose margin `|⟨w*, x⟩|` reaches the
    /// cutoff.
    pub fn explanation_indices(&self, which: Cutoff) -> Vec<usize> {
        let a = match which {
            Cutoff::Alpha1 => self.alpha1,
            Cutoff::Alpha2 => self.alpha2,
        };
        self.points()
            .iter()
            .enumerate()
            .filter(|(_, p)| p[0].abs() >= a)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        let angles_ok = z < self.gamma
            && self.gamma < self.mu
            && self.mu < self.theta
            && self.theta < self.nu
            && self.theta < T::FRAC_PI_4()
            && self.theta + self.nu < T::FRAC_PI_2();
        if !angles_ok {
            return domain("angles must satisfy 0 < γ < μ < θ < ν, θ < π/4 and θ + ν < π/2");
        }
        if !(z < self.r && self.r < self.alpha2_prime && self.alpha2_prime < self.alpha1_prime) {
            return domain("lengths must satisfy 0 < r < α₂′ < α₁′");
        }
        if !(z < self.alpha2 && self.alpha2 < self.alpha1) {
            return domain("cutoffs must satisfy 0 < α₂ < α₁");
        }
        let p = self.points();
        if !(vector::distance(&p[3], &p[4]) <= self.r) {
            return domain("z¹ and z² must be within r of each other");
        }
        if p[..3]
            .iter()
            .any(|x| !(vector::distance(x, &p[4]) > self.r))
        {
            return domain("x¹, x², x³ must be farther than r from z²");
        }
        if self.explanation_indices(Cutoff::Alpha1) != [0, 1]
            || self.explanation_indices(Cutoff::Alpha2) != [0, 1, 2]
        {
            return domain("cutoff α₁ must release {x¹, x²} and α₂ must release {x¹, x², x³}");
        }
        Ok(())
    }
}

/// Certainty of the pair `(z², z¹)` under the uniform prior on the unit
/// circle restricted to the version space at the chosen cutoff:
/// `(μ+θ)/(μ+ν)` for `α₁`, `(γ+θ)/(γ+ν)` for `α₂`.
pub fn off_sphere_pi<T: Scalar>(s: &OffSphereScenario<T>, which: Cutoff) -> Result<T> {
    s.validate()?;
    let lower = match which {
        Cutoff::Alpha1 => s.mu,
        Cutoff::Alpha2 => s.gamma,
    };
    Ok((lower + s.theta) / (lower + s.nu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewedPriorParams<T> {
    pub d: usize,
    pub alpha1: T,
    pub alpha2: T,
    pub psi: T,
}

impl<T: Scalar> Default for SkewedPriorParams<T> {
    fn default() -> Self {
        Self {
            d: 3,
            alpha1: T::lit(0.8),
            alpha2: T::lit(0.5),
            psi: T::lit(0.3),
        }
    }
}

impl<T: Scalar> SkewedPriorParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return domain(format!("dimension must be at least 3, got {}", self.d));
        }
        if !(T::zero() < self.alpha2 && self.alpha2 < self.alpha1 && self.alpha1 < T::one()) {
            return domain("cutoffs must satisfy 0 < α₂ < α₁ < 1");
        }
        if !(self.psi > T::zero() && self.alpha2.asin() > self.psi / T::lit(2.0)) {
            return domain("need ψ > 0 and arcsin α₂ > ψ/2");
        }
        Ok(())
    }

    /// `(x, x′) = ((−sin(ψ/2), cos(ψ/2), 0, …), (sin(ψ/2), cos(ψ/2), 0, …))`
    /// for `w* = e₁`.
    pub fn canonical_pair(&self) -> (Vec<T>, Vec<T>) {
        let (s, c) = (self.psi / T::lit(2.0)).sin_cos();
        let mut x = vec![T::zero(); self.d];
        let mut xp = vec![T::zero(); self.d];
        x[0] = -s;
        x[1] = c;
        xp[0] = s;
        xp[1] = c;
        (x, xp)
    }
}

/// Minimum acceptance rate of the shell-and-wedge rejection sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Draws from the skewed prior restricted to the outer cap `H_{α₁}`:
/// uniform on the inner cap `H_{α₂}` with probability equal to its share of
/// the outer cap's surface measure, otherwise uniform on the part of the
/// shell `H_{α₁} \ H_{α₂}` that labels `x` negative and `x′` positive.
/// Returns each draw with a flag marking shell draws.
pub fn sample_skewed_prior<T: Scalar>(
    params: &SkewedPriorParams<T>,
    n: usize,
    seed: u64,
) -> Result<Vec<(Vec<T>, bool)>> {
    params.validate()?;
    let d = params.d;
    let mut e1 = vec![T::zero(); d];
    e1[0] = T::one();
    let (phi1, phi2) = (params.alpha1.asin(), params.alpha2.asin());
    let outer = CapSampler::new(SphericalCap::new(e1.clone(), phi1)?);
    let inner = CapSampler::new(SphericalCap::new(e1, phi2)?);
    let p_inner = cap_measure(d, phi2) / cap_measure(d, phi1);
    let cos2 = phi2.cos();
    let (x, xp) = params.canonical_pair();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut tries, mut hits) = (0u64, 0u64);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if T::sample_unit(&mut rng) < p_inner {
            out.push((inner.draw(&mut rng), false));
            continue;
        }
        loop {
            tries += 1;
            let w = outer.draw(&mut rng);
            if w[0] < cos2 && vector::dot(&w, &x) < T::zero() && vector::dot(&w, &xp) >= T::zero() {
                hits += 1;
                out.push((w, true));
                break;
            }
            if tries >= 10_000 && (hits as f64) < MIN_ACCEPTANCE * tries as f64 {
                return Err(Error::LowAcceptance {
                    rate: hits as f64 / tries as f64,
                    floor: MIN_ACCEPTANCE,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewedPriorEstimate<T> {
    /// Estimate under the skewed prior on the outer cap.
    pub pi1_hat: T,
    pub stderr1: T,
    /// Estimate under the uniform inner cap.
    pub pi2_hat: T,
    pub stderr2: T,
    /// Share of outer-cap draws that came from the shell wedge.
    pub shell_fraction: T,
}

/// Monte Carlo certainty of the canonical pair under the prior restricted to
/// each cutoff's version space, `n` draws each.
pub fn skewed_prior_estimate<T: Scalar>(
    params: &SkewedPriorParams<T>,
    n: usize,
    seed: u64,
) -> Result<SkewedPriorEstimate<T>> {
    if n == 0 {
        return domain("sample count must be positive");
    }
    let (x, xp) = params.canonical_pair();
    let outer = sample_skewed_prior(params, n, seed)?;
    let shell = outer.iter().filter(|(_, s)| *s).count();
    let outer: Vec<LinearModel<T>> = outer
        .into_iter()
        .map(|(w, _)| LinearModel::homogeneous(w))
        .collect();

    let mut e1 = vec![T::zero(); params.d];
    e1[0] = T::one();
    let inner = CapSampler::new(SphericalCap::new(e1, params.alpha2.asin())?);
    let inner: Vec<LinearModel<T>> = inner
        .sample(n, seed.wrapping_add(1))
        .into_iter()
        .map(LinearModel::homogeneous)
        .collect();

    let (pi1_hat, stderr1) = crate::certainty::estimate_pi(&outer, &x, &xp)?;
    let (pi2_hat, stderr2) = crate::certainty::estimate_pi(&inner, &x, &xp)?;
    Ok(SkewedPriorEstimate {
        pi1_hat,
        stderr1,
        pi2_hat,
        stderr2,
        shell_fraction: T::from_count(shell) / T::from_count(n),
    })
}

/// Parameters of the mixture of homogeneous lines through the origin and
/// lines through `(0, 1)`, over the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMixtureParams<T> {
    /// `γ = arccos α ∈ (0, π/2]`.
    pub gamma: T,
    pub psi: T,
}

impl<T: Scalar> AffineMixtureParams<T> {
    pub fn from_alpha(alpha: T, psi: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha < T::one()) {
            return domain(format!("alpha must lie in [0, 1), got {alpha}"));
        }
        Ok(Self {
            gamma: alpha.acos(),
            psi,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > T::zero() && self.gamma <= T::FRAC_PI_2()) {
            return domain(format!("gamma must lie in (0, π/2], got {}", self.gamma));
        }
        if !(self.psi > T::zero() && self.psi <= T::PI()) {
            return domain(format!("psi must lie in (0, π], got {}", self.psi));
        }
        Ok(())
    }
}

/// `(2/3)·min(1, ψ/(2(π/2 − γ))) + 1/3`, and `1` at `γ = π/2`.
pub fn affine_mixture_pi<T: Scalar>(p: &AffineMixtureParams<T>) -> Result<T> {
    p.validate()?;
    let span = T::FRAC_PI_2() - p.gamma;
    if span <= T::zero() {
        return Ok(T::one());
    }
    let third = T::one() / T::lit(3.0);
    Ok(T::lit(2.0) * third * (p.psi / (T::lit(2.0) * span)).min(T::one()) + third)
}
