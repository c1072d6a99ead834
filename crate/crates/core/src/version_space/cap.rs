use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::LinearModel;
use crate::scalar::{vector, Scalar};
use crate::sphere::angle_phi;

const TABLE_SIZE: usize = 4096;

/// `{w : ‖w‖ = 1, ⟨w, center⟩ ≥ cos(half_angle)}`.
///
/// Exactly the version space of homogeneous linear classifiers when every
/// sphere point with `|⟨w*, x⟩| > α` is released, with `half_angle = arcsin α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalCap<T> {
    pub center: Vec<T>,
    pub half_angle: T,
}

fn unit_tolerance<T: Scalar>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(64.0))
}

impl<T: Scalar> SphericalCap<T> {
    pub fn new(center: Vec<T>, half_angle: T) -> Result<Self> {
        let n = vector::norm(&center);
        if (n - T::one()).abs() > unit_tolerance() {
            return Err(Error::NotNormalized {
                index: 0,
                norm: n.as_f64(),
            });
        }
        if center.len() < 2 {
            return domain("cap dimension must be at least 2");
        }
        if !(half_angle >= T::zero() && half_angle < T::FRAC_PI_2()) {
            return domain(format!("half angle must lie in [0, π/2), got {half_angle}"));
        }
        Ok(Self { center, half_angle })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, w: &[T]) -> bool {
        vector::dot(w, &self.center) >= self.half_angle.cos() - T::lit(1e-12)
    }

    /// For a unit `w` outside the cap built with cutoff `alpha`, a sphere
    /// point `x₀` with `|⟨center, x₀⟩| > alpha` that `w` misclassifies.
    ///
    /// Writing `w = √(1−β²)·center + β·w⊥` with `β > alpha`, the point is
    /// `x₀ = γ·center − √(1−γ²)·w⊥` for `γ = (alpha + β)/2`.
    pub fn separating_witness(&self, alpha: T, w: &[T]) -> Option<Vec<T>> {
        let t = vector::dot(w, &self.center);
        if t < T::zero() {
            // w* itself is released and w already misclassifies it
            return Some(self.center.clone());
        }
        let perp: Vec<T> = w
            .iter()
            .zip(&self.center)
            .map(|(&wi, &ci)| wi - t * ci)
            .collect();
        let beta = vector::norm(&perp);
        if beta <= alpha {
            return None;
        }
        let perp: Vec<T> = perp.iter().map(|&p| p / beta).collect();
        let gamma = (alpha + beta) / T::lit(2.0);
        let s = (T::one() - gamma * gamma).sqrt();
        Some(
            self.center
                .iter()
                .zip(&perp)
                .map(|(&c, &p)| gamma * c - s * p)
                .collect(),
        )
    }
}

/// Version space induced by releasing every sphere point with margin above
/// `alpha` under the unit normal `w_star`.
pub fn cap_from_alpha<T: Scalar>(w_star: &[T], alpha: T) -> Result<SphericalCap<T>> {
    SphericalCap::new(w_star.to_vec(), angle_phi(alpha)?)
}

/// Measure of the cap on the unit sphere up to the constant surface factor:
/// `∫₀^φ sin^{d−2}(θ) dθ`.
pub fn cap_measure<T: Scalar>(d: usize, half_angle: T) -> T {
    if d == 2 {
        return half_angle;
    }
    if d == 3 {
        return T::one() - half_angle.cos();
    }
    let k = T::from_count(d - 2);
    crate::quadrature::integrate(|t: T| t.sin().powf(k), T::zero(), half_angle).value
}

/// Draws exact uniform samples from a spherical cap.
///
/// The polar angle `θ` from the centre has density `∝ sin^{d−2} θ` on
/// `[0, φ]` (equivalently `t = cos θ` has density `∝ (1−t²)^{(d−3)/2}`).
/// It is drawn in closed form for `d = 2, 3` and by inverting a tabulated CDF
/// otherwise; the remaining direction is uniform on the sphere orthogonal to
/// the centre.
#[derive(Debug, Clone)]
pub struct CapSampler<T> {
    cap: SphericalCap<T>,
    cos_half: T,
    /// `(θ_i, CDF(θ_i))` on an even grid, only for `d ≥ 4`.
    table: Vec<(T, T)>,
}

impl<T: Scalar> CapSampler<T> {
    pub fn new(cap: SphericalCap<T>) -> Self {
        let d = cap.dim();
        let phi = cap.half_angle;
        let mut table = Vec::new();
        if d >= 4 && phi > T::zero() {
            // log-density relative to the rim keeps sin^{d−2} representable
            let k = T::from_count(d - 2);
            let log_rim = phi.sin().ln();
            let density = |t: T| {
                if t <= T::zero() {
                    T::zero()
                } else {
                    (k * (t.sin().ln() - log_rim)).exp()
                }
            };
            let h = phi / T::from_count(TABLE_SIZE - 1);
            table.reserve(TABLE_SIZE);
            let mut acc = T::zero();
            let mut prev = density(T::zero());
            table.push((T::zero(), T::zero()));
            for i in 1..TABLE_SIZE {
                let t = if i == TABLE_SIZE - 1 {
                    phi
                } else {
                    h * T::from_count(i)
                };
                let cur = density(t);
                // Simpson on each cell keeps the table accurate where the
                // density is steep near θ = 0 for large d
                let mid = density(t - h / T::lit(2.0));
                acc += h / T::lit(6.0) * (prev + T::lit(4.0) * mid + cur);
                table.push((t, acc));
                prev = cur;
            }
            for e in table.iter_mut() {
                e.1 /= acc;
            }
        }
        Self {
            cos_half: cap.half_angle.cos(),
            cap,
            table,
        }
    }

    pub fn cap(&self) -> &SphericalCap<T> {
        &self.cap
    }

    fn polar_angle<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> T {
        let phi = self.cap.half_angle;
        match self.cap.dim() {
            2 => (T::lit(2.0) * T::sample_unit(rng) - T::one()) * phi,
            3 => {
                let t = self.cos_half + (T::one() - self.cos_half) * T::sample_unit(rng);
                t.min(T::one()).acos()
            }
            _ => {
                let u = T::sample_unit(rng);
                let idx = self.table.partition_point(|&(_, c)| c < u).max(1);
                let (t0, c0) = self.table[idx - 1];
                let (t1, c1) = self.table[idx.min(self.table.len() - 1)];
                if c1 > c0 {
                    t0 + (t1 - t0) * (u - c0) / (c1 - c0)
                } else {
                    t0
                }
            }
        }
    }

    /// One uniform draw from the cap.
    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let c = &self.cap.center;
        if self.cap.half_angle == T::zero() {
            return c.clone();
        }
        let theta = self.polar_angle(rng);
        let u: Vec<T> = if c.len() == 2 {
            vec![-c[1], c[0]]
        } else {
            loop {
                let g: Vec<T> = (0..c.len()).map(|_| T::sample_normal(rng)).collect();
                let proj = vector::dot(&g, c);
                let perp: Vec<T> = g.iter().zip(c).map(|(&gi, &ci)| gi - proj * ci).collect();
                if let Some(p) = vector::normalized(&perp) {
                    break p;
                }
            }
        };
        let (s, co) = theta.sin_cos();
        let w: Vec<T> = c
            .iter()
            .zip(&u)
            .map(|(&ci, &ui)| co * ci + s * ui)
            .collect();
        vector::normalized(&w).unwrap_or(w)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `n` independent uniform draws from `cap`, deterministic in `seed`.
pub fn sample_cap<T: Scalar>(cap: &SphericalCap<T>, n: usize, seed: u64) -> Vec<Vec<T>> {
    CapSampler::new(cap.clone()).sample(n, seed)
}

/// Cap samples wrapped as homogeneous models.
pub fn sample_cap_models<T: Scalar>(
    cap: &SphericalCap<T>,
    n: usize,
    seed: u64,
) -> Vec<LinearModel<T>> {
    sample_cap(cap, n, seed)
        .into_iter()
        .map(LinearModel::homogeneous)
        .collect()
}
