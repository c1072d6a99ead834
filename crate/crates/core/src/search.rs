//! Certainty-versus-omission curves and the searches for the smallest
//! omission percentile meeting a certainty target `κ`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::certainty::Metric;
use crate::error::{domain, Error, Result};
use crate::scalar::Scalar;
use crate::sphere::{pi_closed_form, CapGeometry};

/// One certainty metric as a function of the omission percentile.
/// Missing values mark grid points where no estimate exists (no boundary
/// pairs, or an infeasible or stuck sampler).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertaintyCurve<T> {
    pub grid: Vec<f64>,
    pub values: Vec<Option<T>>,
    pub stddev: Vec<Option<T>>,
    pub repeats: usize,
    pub metric: Metric,
    pub r: T,
}

impl<T: Scalar> CertaintyCurve<T> {
    /// A curve with no deviation information, mostly for tests and tables.
    pub fn from_values(grid: Vec<f64>, values: Vec<T>, metric: Metric, r: T) -> Result<Self> {
        let n = values.len();
        let curve = Self {
            grid,
            values: values.into_iter().map(Some).collect(),
            stddev: vec![Some(T::zero()); n],
            repeats: 1,
            metric,
            r,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.values.len() || self.grid.len() != self.stddev.len() {
            return domain("curve columns differ in length");
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("curve grid must be strictly ascending");
        }
        if self.grid.iter().any(|l| !(0.0..=100.0).contains(l)) {
            return domain("curve grid must lie in [0, 100]");
        }
        Ok(())
    }

    /// Grid points carrying a value, in grid order.
    fn present(&self) -> Vec<(f64, T)> {
        let skipped = self.values.iter().filter(|v| v.is_none()).count();
        if skipped > 0 {
            log::warn!("{skipped} grid point(s) without an estimate are skipped by the search");
        }
        self.grid
            .iter()
            .zip(&self.values)
            .filter_map(|(&l, v)| v.map(|v| (l, v)))
            .collect()
    }

    /// Columns `percentile,value,stddev,metric,r,repeats`; missing values as
    /// `NA`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["percentile", "value", "stddev", "metric", "r", "repeats"])?;
        for ((l, v), s) in self.grid.iter().zip(&self.values).zip(&self.stddev) {
            w.write_record([
                l.to_string(),
                na(*v),
                na(*s),
                self.metric.to_string(),
                self.r.to_string(),
                self.repeats.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<T: Scalar> CertaintyCurve<T> {
    /// Reads a curve written by [`CertaintyCurve::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut curve: Option<Self> = None;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 6 {
                return Err(Error::Parse(format!(
                    "curve row {row} has {} columns, expected 6",
                    rec.len()
                )));
            }
            let num = |c: usize| -> Result<f64> {
                rec[c].parse::<f64>().map_err(|_| {
                    Error::Parse(format!("curve row {row}: {:?} is not a number", &rec[c]))
                })
            };
            let opt = |c: usize| -> Result<Option<T>> {
                if &rec[c] == "NA" {
                    Ok(None)
                } else {
                    num(c).map(|v| Some(T::lit(v)))
                }
            };
            let metric: Metric = rec[3].parse()?;
            let r = T::lit(num(4)?);
            let repeats = rec[5].parse::<usize>().map_err(|_| {
                Error::Parse(format!("curve row {row}: bad repeat count {:?}", &rec[5]))
            })?;
            let c = curve.get_or_insert_with(|| Self {
                grid: Vec::new(),
                values: Vec::new(),
                stddev: Vec::new(),
                repeats,
                metric,
                r,
            });
            if c.metric != metric || c.r != r || c.repeats != repeats {
                return Err(Error::Parse(format!(
                    "curve row {row} mixes metric, r or repeat count"
                )));
            }
            c.grid.push(num(0)?);
            c.values.push(opt(1)?);
            c.stddev.push(opt(2)?);
        }
        let curve = curve.ok_or_else(|| Error::Parse("curve file has no rows".into()))?;
        curve.validate()?;
        Ok(curve)
    }
}

fn na<T: Scalar>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Lower-bound bisection over the grid, correct when the curve is
/// nonincreasing: `lo = 0, hi = last`; while `lo < hi`, `mid = ⌊(lo+hi)/2⌋`,
/// `hi = mid` if `value[mid] ≤ κ` else `lo = mid + 1`. Returns `grid[lo]` if
/// its value meets `κ`.
pub fn bisect_percentile<T: Scalar>(curve: &CertaintyCurve<T>, kappa: T) -> Option<f64> {
    let pts = curve.present();
    if pts.is_empty() {
        return None;
    }
    let (mut lo, mut hi) = (0, pts.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pts[mid].1 <= kappa {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    (pts[lo].1 <= kappa).then_some(pts[lo].0)
}

/// Smallest grid percentile whose value meets `κ`.
pub fn linear_scan_optimal<T: Scalar>(curve: &CertaintyCurve<T>, kappa: T) -> Option<f64> {
    curve
        .present()
        .into_iter()
        .find(|&(_, v)| v <= kappa)
        .map(|(l, _)| l)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceRow<T> {
    pub target: T,
    pub binary: Option<f64>,
    pub optimal: Option<f64>,
    /// `binary − optimal`, when both exist.
    pub difference: Option<f64>,
}

/// `n` targets evenly spaced over the attained values, inclusive; a single
/// target sits at the midpoint.
pub fn spaced_targets<T: Scalar>(curve: &CertaintyCurve<T>, n: usize) -> Vec<T> {
    let vals: Vec<T> = curve.values.iter().flatten().copied().collect();
    if vals.is_empty() || n == 0 {
        return Vec::new();
    }
    let lo = vals.iter().copied().fold(T::infinity(), T::min);
    let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
    if n == 1 {
        return vec![(lo + hi) * T::lit(0.5)];
    }
    let step = (hi - lo) / T::from_count(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + step * T::from_count(i)
            }
        })
        .collect()
}

/// Bisection against linear scan for each target.
pub fn difference_table_for<T: Scalar>(
    curve: &CertaintyCurve<T>,
    targets: &[T],
) -> Vec<DifferenceRow<T>> {
    targets
        .iter()
        .map(|&target| {
            let binary = bisect_percentile(curve, target);
            let optimal = linear_scan_optimal(curve, target);
            DifferenceRow {
                target,
                binary,
                optimal,
                difference: binary.zip(optimal).map(|(b, o)| b - o),
            }
        })
        .collect()
}

pub fn difference_table<T: Scalar>(
    curve: &CertaintyCurve<T>,
    n_targets: usize,
) -> Result<Vec<DifferenceRow<T>>> {
    if n_targets == 0 {
        return domain("need at least one target");
    }
    Ok(difference_table_for(
        curve,
        &spaced_targets(curve, n_targets),
    ))
}

/// Columns `target,binary,optimal,difference`; missing entries as `NA`.
pub fn write_difference_csv<T: Scalar, W: Write>(rows: &[DifferenceRow<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["target", "binary", "optimal", "difference"])?;
    for row in rows {
        w.write_record([
            row.target.to_string(),
            na(row.binary),
            na(row.optimal),
            na(row.difference),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Smallest margin cutoff `α` (within `tol`) whose closed-form `Π` meets
/// `κ`, by bisection on `[sin(ψ/2), 1)` where `Π` is nonincreasing.
/// `None` when even `α → 1` leaves `Π > κ`.
pub fn find_alpha_analytic<T: Scalar>(d: usize, psi: T, kappa: T, tol: T) -> Result<Option<T>> {
    if !(kappa > T::zero()) {
        return domain(format!("kappa must be positive, got {kappa}"));
    }
    if !(tol > T::zero()) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let probe = CapGeometry::from_angles(d, T::zero(), psi)?;
    let mut lo = (psi / T::lit(2.0)).sin();
    if kappa >= T::one() {
        return Ok(Some(lo));
    }
    let pi_at = |alpha: T| -> Result<T> { Ok(pi_closed_form(&probe.with_alpha(alpha)?)) };
    let mut hi = T::one() - T::epsilon().sqrt().min(tol);
    if hi <= lo || pi_at(hi)? > kappa {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = (lo + hi) * T::lit(0.5);
        if pi_at(mid)? <= kappa {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
