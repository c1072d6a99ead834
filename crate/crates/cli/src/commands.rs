//! The subcommands as library functions. Each returns a JSON summary; the
//! file-writing ones also return the paths they wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use margin_guard::boundary::{band_membership, boundary_pairs, group_composition, BoundaryConfig};
use margin_guard::counterexamples::{
    affine_mixture_pi, off_sphere_pi, skewed_prior_estimate, threshold_1d_pi, AffineMixtureParams,
    Cutoff, OffSphereScenario, SkewedPriorParams,
};
use margin_guard::explain::{fit_linear, logistic_loss, margin_distance_filter, DistancingConfig};
use margin_guard::io::{read_dataset, read_model, write_explanations, write_model, Dataset};
use margin_guard::pipeline::{certainty_curves, select_explanations};
use margin_guard::search::{
    difference_table, difference_table_for, write_difference_csv, DifferenceRow,
};
use margin_guard::sphere::{angle_phi, angle_psi, check_high_cutoff_bound, check_refined_bound};
use margin_guard::{
    find_alpha_analytic, pi_closed_form, CapGeometry, CertaintyCurve, LinearModel, Metric,
};

use crate::config::RunConfig;

/// Files produced by a command, written only after all computation is done.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.files.iter().map(|(p, _)| p.as_path()).collect()
    }

    pub fn write(&self) -> Result<()> {
        for (path, bytes) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticArgs {
    pub d: usize,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub r: Option<f64>,
    pub psi: Option<f64>,
    /// Also report the smallest cutoff meeting this certainty.
    pub kappa: Option<f64>,
    pub tol: f64,
}

/// Closed-form `Π` for a cap and band, with the two bound checks.
pub fn cmd_analytic(a: &AnalyticArgs) -> Result<Value> {
    let geom = match (a.alpha, a.phi, a.r, a.psi) {
        (Some(alpha), None, Some(r), None) => CapGeometry::from_alpha_r(a.d, alpha, r)?,
        (alpha, phi, r, psi) => {
            let phi = match (alpha, phi) {
                (Some(alpha), None) => angle_phi(alpha)?,
                (None, Some(phi)) => phi,
                _ => bail!("give exactly one of --alpha and --phi"),
            };
            let psi = match (r, psi) {
                (Some(r), None) => angle_psi(r)?,
                (None, Some(psi)) => psi,
                _ => bail!("give exactly one of --r and --psi"),
            };
            CapGeometry::from_angles(a.d, phi, psi)?
        }
    };
    let mut out = json!({
        "d": geom.d,
        "alpha": geom.alpha,
        "phi": geom.phi,
        "r": geom.r,
        "psi": geom.psi,
        "pi": pi_closed_form(&geom),
        "saturated": geom.saturated(),
        "high_cutoff_bound": check_high_cutoff_bound(&geom),
        "refined_bound": check_refined_bound(&geom),
    });
    if let Some(kappa) = a.kappa {
        out["kappa"] = json!(kappa);
        out["alpha_for_kappa"] = json!(find_alpha_analytic(geom.d, geom.psi, kappa, a.tol)?);
    }
    Ok(out)
}

/// Dataset (normalised if asked) and the model: read from `weights` or
/// fitted to the labels.
pub fn load_inputs(cfg: &RunConfig) -> Result<(Dataset<f64>, LinearModel<f64>, &'static str)> {
    let path = cfg.dataset()?;
    let mut data: Dataset<f64> =
        read_dataset(path).with_context(|| format!("reading {}", path.display()))?;
    if data.is_empty() {
        bail!("dataset {} has no rows", path.display());
    }
    if cfg.normalize {
        data.normalize_rows()?;
    }
    let (model, source) = match &cfg.weights {
        Some(w) => (
            read_model(w).with_context(|| format!("reading {}", w.display()))?,
            "weights",
        ),
        None => (fit_linear(&data.points, &data.labels, &cfg.fit)?, "fitted"),
    };
    if model.dim() != data.dim() {
        bail!(
            "model has {} weights but the dataset has {} features",
            model.dim(),
            data.dim()
        );
    }
    Ok((data, model, source))
}

fn csv_bytes(curve: &CertaintyCurve<f64>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    Ok(buf)
}

fn curve_file(dir: &Path, metric: Metric, r: f64) -> PathBuf {
    dir.join(format!("curve_{metric}_r{r}.csv"))
}

fn difference_file(dir: &Path, metric: Metric, r: f64) -> PathBuf {
    dir.join(format!("difference_{metric}_r{r}.csv"))
}

#[derive(Serialize)]
struct CurveRun<'a> {
    r: f64,
    pairs: usize,
    curves: Vec<&'a CertaintyCurve<f64>>,
}

type CurvesByRadius = Vec<(f64, Vec<CertaintyCurve<f64>>)>;

/// All selected curves for every `r`, computed from one explanation set.
fn compute_curves(cfg: &RunConfig) -> Result<(Value, CurvesByRadius)> {
    cfg.validate()?;
    let seed = cfg.seed()?;
    let (data, model, source) = load_inputs(cfg)?;
    let expl = select_explanations(&data.points, &model, &cfg.explanations, seed)?;
    let mut runs = Vec::new();
    let mut pair_counts = Vec::new();
    for &r in &cfg.r_values {
        let ccfg = cfg.curve_config(r)?;
        let mut bcfg = BoundaryConfig::new(r)?;
        bcfg.positive_flip_only = cfg.positive_flip_only;
        pair_counts.push(boundary_pairs(&data.points, &model, &bcfg)?.len());
        let curves: Vec<CertaintyCurve<f64>> =
            certainty_curves(&data.points, &model, &expl, &ccfg)?
                .into_iter()
                .filter(|c| cfg.metrics.contains(&c.metric))
                .collect();
        runs.push((r, curves));
    }
    let report = json!({
        "dataset": cfg.dataset,
        "points": data.len(),
        "dim": data.dim(),
        "model": model,
        "model_source": source,
        "explanation_method": cfg.explanations,
        "explanations": expl.len(),
        "seed": seed,
        "repeats": cfg.repeats,
        "sampler": cfg.sampler,
        "normalize": cfg.normalize,
        "runs": runs
            .iter()
            .zip(&pair_counts)
            .map(|((r, curves), &pairs)| CurveRun { r: *r, pairs, curves: curves.iter().collect() })
            .collect::<Vec<_>>(),
    });
    Ok((report, runs))
}

/// Writes `curve_<metric>_r<r>.csv` per metric and radius plus
/// `curve_report.json`.
pub fn cmd_curve(cfg: &RunConfig) -> Result<(Value, Outputs)> {
    let (report, runs) = compute_curves(cfg)?;
    let mut out = Outputs::default();
    for (r, curves) in &runs {
        for c in curves {
            out.add(curve_file(&cfg.output_dir, c.metric, *r), csv_bytes(c)?);
        }
    }
    out.add(
        cfg.output_dir.join("curve_report.json"),
        format!("{}\n", serde_json::to_string_pretty(&report)?).into_bytes(),
    );
    Ok((report, out))
}

fn targets_for(cfg: &RunConfig, curve: &CertaintyCurve<f64>) -> Result<Vec<DifferenceRow<f64>>> {
    Ok(match cfg.kappa {
        Some(k) => difference_table_for(curve, &[k]),
        None => difference_table(curve, cfg.targets)?,
    })
}

/// Difference tables (bisection against linear scan) for an existing curve
/// file, or for freshly generated curves of `metric`, which are written too.
pub fn cmd_search(
    cfg: &RunConfig,
    curve: Option<&Path>,
    metric: Metric,
) -> Result<(Value, Outputs)> {
    let mut out = Outputs::default();
    let curves: Vec<CertaintyCurve<f64>> = match curve {
        Some(p) => {
            let f =
                std::fs::File::open(p).with_context(|| format!("opening curve {}", p.display()))?;
            vec![CertaintyCurve::read_csv(f)
                .with_context(|| format!("reading curve {}", p.display()))?]
        }
        None => {
            let cfg = RunConfig {
                metrics: vec![metric],
                ..cfg.clone()
            };
            let (_, runs) = compute_curves(&cfg)?;
            let curves: Vec<_> = runs.into_iter().flat_map(|(_, c)| c).collect();
            for c in &curves {
                out.add(curve_file(&cfg.output_dir, c.metric, c.r), csv_bytes(c)?);
            }
            curves
        }
    };
    let mut tables = Vec::new();
    for c in &curves {
        let rows = targets_for(cfg, c)?;
        let mut buf = Vec::new();
        write_difference_csv(&rows, &mut buf)?;
        out.add(difference_file(&cfg.output_dir, c.metric, c.r), buf);
        tables.push(json!({ "metric": c.metric, "r": c.r, "rows": rows }));
    }
    Ok((json!({ "tables": tables }), out))
}

/// The worked constructions, with the parameters each one takes.
#[derive(Debug, Clone, Copy)]
pub enum Counterexample {
    Threshold1d {
        x_minus: f64,
        x_plus: f64,
        x: f64,
        x_prime: f64,
    },
    OffSphere(OffSphereScenario<f64>),
    SkewedPrior {
        params: SkewedPriorParams<f64>,
        n: usize,
        seed: u64,
    },
    AffineMixture(AffineMixtureParams<f64>),
}

/// Evaluates a construction and states whether its claimed inequality holds.
pub fn cmd_counterexample(c: &Counterexample) -> Result<Value> {
    Ok(match *c {
        Counterexample::Threshold1d {
            x_minus,
            x_plus,
            x,
            x_prime,
        } => json!({
            "construction": "threshold-1d",
            "x_minus": x_minus,
            "x_plus": x_plus,
            "x": x,
            "x_prime": x_prime,
            "pi": threshold_1d_pi(x_minus, x_plus, x, x_prime)?,
        }),
        Counterexample::OffSphere(s) => {
            let p1 = off_sphere_pi(&s, Cutoff::Alpha1)?;
            let p2 = off_sphere_pi(&s, Cutoff::Alpha2)?;
            json!({
                "construction": "off-sphere",
                "scenario": s,
                "points": s.points(),
                "pi_alpha1": p1,
                "pi_alpha2": p2,
                "nonmonotone": p2 < p1,
            })
        }
        Counterexample::SkewedPrior { params, n, seed } => {
            let e = skewed_prior_estimate(&params, n, seed)?;
            let combined = (e.stderr1 * e.stderr1 + e.stderr2 * e.stderr2).sqrt();
            let gap = e.pi1_hat - e.pi2_hat;
            json!({
                "construction": "skewed-prior",
                "params": params,
                "n": n,
                "seed": seed,
                "estimate": e,
                "gap": gap,
                "combined_stderr": combined,
                "pi1_exceeds_pi2": gap > 3.0 * combined,
            })
        }
        Counterexample::AffineMixture(p) => {
            let pi = affine_mixture_pi(&p)?;
            json!({
                "construction": "affine-mixture",
                "gamma": p.gamma,
                "psi": p.psi,
                "pi": pi,
                "at_least_one_third": pi >= 1.0 / 3.0,
            })
        }
    })
}

fn composition_json(c: Option<BTreeMap<String, f64>>) -> Value {
    c.map_or(Value::Null, |m| json!(m))
}

/// Group shares among boundary-pair members for each `r`, next to the
/// shares in the whole dataset. With `normalize` and a homogeneous model the
/// continuous band membership is reported as well.
pub fn cmd_audit(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    let (data, model, source) = load_inputs(cfg)?;
    let Some(groups) = &data.groups else {
        bail!("auditing needs a `group` column in the dataset");
    };
    let everyone = vec![true; data.len()];
    let unit_w = (cfg.normalize && model.is_homogeneous())
        .then(|| model.normalized())
        .transpose()?
        .map(|m| m.w);
    let mut runs = Vec::new();
    for &r in &cfg.r_values {
        let mut bcfg = BoundaryConfig::new(r)?;
        bcfg.positive_flip_only = cfg.positive_flip_only;
        let pairs = boundary_pairs(&data.points, &model, &bcfg)?;
        let flags = pairs.member_flags(data.len());
        let mut run = json!({
            "r": r,
            "pairs": pairs.len(),
            "boundary_points": flags.iter().filter(|&&f| f).count(),
            "composition": composition_json(group_composition(&flags, groups)?),
        });
        if let Some(w) = &unit_w {
            let band = band_membership(&data.points, w, r)?;
            run["band_points"] = json!(band.iter().filter(|&&f| f).count());
            run["band_composition"] = composition_json(group_composition(&band, groups)?);
        }
        runs.push(run);
    }
    Ok(json!({
        "points": data.len(),
        "model_source": source,
        "overall": composition_json(group_composition(&everyone, groups)?),
        "runs": runs,
    }))
}

/// Selects the released explanations (optionally withholding the `l`
/// percent nearest the margin) and writes them as CSV.
pub fn cmd_explain(
    cfg: &RunConfig,
    percentile: Option<f64>,
    out_path: &Path,
) -> Result<(Value, Outputs)> {
    cfg.validate()?;
    let (data, model, source) = load_inputs(cfg)?;
    let seed = cfg.seed.unwrap_or(0);
    let selected = select_explanations(&data.points, &model, &cfg.explanations, seed)?;
    let released = match percentile {
        Some(l) => margin_distance_filter(
            &selected,
            &DistancingConfig {
                l,
                per_class: cfg.per_class,
            },
        )?,
        None => selected.clone(),
    };
    let mut buf = Vec::new();
    write_explanations(&released, &mut buf)?;
    let mut out = Outputs::default();
    out.add(out_path.to_path_buf(), buf);
    Ok((
        json!({
            "method": cfg.explanations,
            "model_source": source,
            "selected": selected.len(),
            "released": released.len(),
            "percentile": percentile,
            "output": out_path,
        }),
        out,
    ))
}

/// Fits a logistic linear model and writes its weights JSON.
pub fn cmd_fit(cfg: &RunConfig, out_path: &Path) -> Result<(Value, Outputs)> {
    let cfg = RunConfig {
        weights: None,
        ..cfg.clone()
    };
    cfg.validate()?;
    let (data, model, _) = load_inputs(&cfg)?;
    let correct = data
        .points
        .iter()
        .zip(&data.labels)
        .filter(|(x, &y)| model.predict(x) == y)
        .count();
    let mut buf = Vec::new();
    write_model(&model, &mut buf)?;
    let mut out = Outputs::default();
    out.add(out_path.to_path_buf(), buf);
    Ok((
        json!({
            "model": model,
            "loss": logistic_loss(&model, &data.points, &data.labels, cfg.fit.l2),
            "training_accuracy": correct as f64 / data.len() as f64,
            "output": out_path,
        }),
        out,
    ))
}
