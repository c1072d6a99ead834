use crate::error::{check_dim, domain, Error, Result};
use crate::model::LinearModel;
use crate::scalar::Scalar;

/// Gradient-descent settings for [`fit_linear`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitConfig {
    pub iters: usize,
    pub step: f64,
    /// L2 penalty on `w` (the bias is not penalised).
    pub l2: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            iters: 2000,
            step: 0.5,
            l2: 1e-3,
        }
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logistic<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Penalised logistic loss `mean ln(1 + e^{−y f(x)}) + (l2/2)‖w‖²`.
pub fn logistic_loss<T: Scalar>(
    model: &LinearModel<T>,
    points: &[Vec<T>],
    labels: &[i8],
    l2: T,
) -> T {
    let n = T::from_count(points.len());
    let data: T = points
        .iter()
        .zip(labels)
        .map(|(x, &y)| softplus(-T::lit(y as f64) * model.score(x)))
        .sum::<T>()
        / n;
    data + l2 * T::lit(0.5) * model.w.iter().map(|&v| v * v).sum::<T>()
}

/// Full-batch gradient descent on the penalised logistic loss, starting from
/// zero. Labels are `±1`.
pub fn fit_linear<T: Scalar>(
    points: &[Vec<T>],
    labels: &[i8],
    cfg: &FitConfig,
) -> Result<LinearModel<T>> {
    if points.len() != labels.len() {
        return domain(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        ));
    }
    if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return domain(format!("labels must be ±1, found {l}"));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return domain("training data needs both labels");
    }
    if !(cfg.step > 0.0) || !(cfg.l2 >= 0.0) {
        return domain("step must be positive and l2 non-negative");
    }
    let d = points[0].len();
    for p in points {
        check_dim(d, p.len())?;
    }
    let n = T::from_count(points.len());
    let (step, l2) = (T::lit(cfg.step), T::lit(cfg.l2));
    let mut model = LinearModel::new(vec![T::zero(); d], T::zero());
    let mut gw = vec![T::zero(); d];
    for it in 0..cfg.iters {
        gw.iter_mut().for_each(|g| *g = T::zero());
        let mut gb = T::zero();
        for (x, &y) in points.iter().zip(labels) {
            let y = T::lit(y as f64);
            // d/df ln(1 + e^{−y f}) = −y σ(−y f)
            let c = -y * logistic(-y * model.score(x)) / n;
            for (g, &xi) in gw.iter_mut().zip(x) {
                *g += c * xi;
            }
            gb += c;
        }
        for (w, g) in model.w.iter_mut().zip(&gw) {
            *w -= step * (*g + l2 * *w);
        }
        model.b -= step * gb;
        if !logistic_loss(&model, points, labels, l2).is_finite() {
            return Err(Error::Divergence(it));
        }
    }
    Ok(model)
}
