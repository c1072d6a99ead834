//! Command-line grammar and dispatch.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use margin_guard::counterexamples::{AffineMixtureParams, OffSphereScenario, SkewedPriorParams};
use margin_guard::pipeline::ExplanationMethod;
use margin_guard::version_space::BoundingBody;
use margin_guard::Metric;

use crate::commands::{
    cmd_analytic, cmd_audit, cmd_counterexample, cmd_curve, cmd_explain, cmd_fit, cmd_search,
    AnalyticArgs, Counterexample, Outputs,
};
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "margin-guard",
    version,
    about = "Boundary certainty of linear classifiers under released explanations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form certainty for a spherical cap and manipulation band.
    Analytic(AnalyticOpts),
    /// Certainty curves over omission percentiles.
    Curve(RunOpts),
    /// Difference tables of bisection against linear scan.
    Search {
        #[command(flatten)]
        run: RunOpts,
        /// Use an existing curve CSV instead of generating one.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Metric of the generated curve.
        #[arg(long, default_value = "max")]
        metric: Metric,
    },
    /// Worked constructions and their verdicts.
    Counterexample {
        #[command(subcommand)]
        which: CounterexampleOpts,
    },
    /// Group composition of boundary points.
    Audit(RunOpts),
    /// Prototype selection, optionally margin-distanced.
    Explain {
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        out: PathBuf,
        /// Withhold this percentage of explanations nearest the margin.
        #[arg(long)]
        percentile: Option<f64>,
    },
    /// Logistic linear model.
    Fit {
        #[command(flatten)]
        run: RunOpts,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct AnalyticOpts {
    #[arg(long)]
    pub d: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum CounterexampleOpts {
    /// Uniform thresholds on an interval.
    #[command(name = "threshold-1d")]
    Threshold1d {
        #[arg(long, allow_hyphen_values = true)]
        x_minus: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_plus: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_prime: f64,
    },
    /// Planar feature set where the larger cutoff is more certain.
    OffSphere {
        /// JSON file with scenario fields; the reference instance otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Skewed prior estimated by sampling.
    SkewedPrior {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 0.8)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha2: f64,
        #[arg(long, default_value_t = 0.3)]
        psi: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Homogeneous and affine classes mixed half and half.
    AffineMixture {
        #[arg(long, conflicts_with = "alpha")]
        gamma: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        psi: f64,
    },
}

/// Settings shared by the data commands. Every flag overrides the
/// corresponding field of `--config`.
#[derive(Debug, Default, Args)]
pub struct RunOpts {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// `all`, `k-medoid` or `mmd-critic`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Manipulation radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Omission percentiles, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Classifier samples per repeat.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub box_bound: Option<f64>,
    /// `cube` or `ball`.
    #[arg(long)]
    pub body: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Count pairs in both flip directions.
    #[arg(long)]
    pub both_directions: bool,
    /// Apply the omission percentile to all explanations rather than per class.
    #[arg(long)]
    pub pooled: bool,
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<Metric>>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub targets: Option<usize>,
    /// Scale rows onto the unit sphere.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub fit_iters: Option<usize>,
    #[arg(long)]
    pub fit_step: Option<f64>,
    #[arg(long)]
    pub fit_l2: Option<f64>,
}

fn method_k(m: &ExplanationMethod) -> Option<usize> {
    match *m {
        ExplanationMethod::All => None,
        ExplanationMethod::KMedoid { k } | ExplanationMethod::MmdCritic { k, .. } => Some(k),
    }
}

impl RunOpts {
    /// The config file (or defaults) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$field { $target = v.clone(); })*
            };
        }
        set! {
            r => c.r_values,
            grid => c.grid,
            samples => c.sampler.n,
            box_bound => c.sampler.box_bound,
            repeats => c.repeats,
            metrics => c.metrics,
            targets => c.targets,
            output_dir => c.output_dir,
            fit_iters => c.fit.iters,
            fit_step => c.fit.step,
            fit_l2 => c.fit.l2,
        }
        if self.dataset.is_some() {
            c.dataset = self.dataset.clone();
        }
        if self.weights.is_some() {
            c.weights = self.weights.clone();
        }
        if self.burn_in.is_some() {
            c.sampler.burn_in = self.burn_in;
        }
        if self.thin.is_some() {
            c.sampler.thin = self.thin;
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.kappa.is_some() {
            c.kappa = self.kappa;
        }
        if let Some(b) = &self.body {
            c.sampler.body = match b.as_str() {
                "cube" => BoundingBody::Cube,
                "ball" => BoundingBody::Ball,
                other => bail!("unknown body {other:?} (expected cube or ball)"),
            };
        }
        let k = self.k.or(method_k(&c.explanations)).unwrap_or(50);
        let bandwidth = match c.explanations {
            ExplanationMethod::MmdCritic { bandwidth, .. } => self.bandwidth.or(bandwidth),
            _ => self.bandwidth,
        };
        let method = self.method.as_deref().unwrap_or(match c.explanations {
            ExplanationMethod::All => "all",
            ExplanationMethod::KMedoid { .. } => "k-medoid",
            ExplanationMethod::MmdCritic { .. } => "mmd-critic",
        });
        c.explanations = match method {
            "all" => ExplanationMethod::All,
            "k-medoid" => ExplanationMethod::KMedoid { k },
            "mmd-critic" => ExplanationMethod::MmdCritic { k, bandwidth },
            other => bail!("unknown method {other:?} (expected all, k-medoid or mmd-critic)"),
        };
        if self.both_directions {
            c.positive_flip_only = false;
        }
        if self.pooled {
            c.per_class = false;
        }
        if self.normalize {
            c.normalize = true;
        }
        Ok(c)
    }
}

fn finish(summary: Value, out: Outputs) -> Result<Value> {
    out.write()?;
    Ok(summary)
}

/// Runs one command, writing its files; returns the JSON to print.
pub fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Analytic(a) => cmd_analytic(&AnalyticArgs {
            d: a.d,
            alpha: a.alpha,
            phi: a.phi,
            r: a.r,
            psi: a.psi,
            kappa: a.kappa,
            tol: a.tol,
        }),
        Command::Curve(run) => {
            let (report, out) = cmd_curve(&run.resolve()?)?;
            let files: Vec<_> = out
                .paths()
                .iter()
                .map(|p| p.display().to_string())
                .collect();
            finish(
                serde_json::json!({ "files": files, "explanations": report["explanations"] }),
                out,
            )
        }
        Command::Search { run, curve, metric } => {
            let (v, out) = cmd_search(&run.resolve()?, curve.as_deref(), metric)?;
            finish(v, out)
        }
        Command::Counterexample { which } => cmd_counterexample(&counterexample(which)?),
        Command::Audit(run) => cmd_audit(&run.resolve()?),
        Command::Explain {
            run,
            out,
            percentile,
        } => {
            let (v, files) = cmd_explain(&run.resolve()?, percentile, &out)?;
            finish(v, files)
        }
        Command::Fit { run, out } => {
            let (v, files) = cmd_fit(&run.resolve()?, &out)?;
            finish(v, files)
        }
    }
}

fn counterexample(which: CounterexampleOpts) -> Result<Counterexample> {
    Ok(match which {
        CounterexampleOpts::Threshold1d {
            x_minus,
            x_plus,
            x,
            x_prime,
        } => Counterexample::Threshold1d {
            x_minus,
            x_plus,
            x,
            x_prime,
        },
        CounterexampleOpts::OffSphere { scenario } => Counterexample::OffSphere(match scenario {
            Some(p) => {
                serde_json::from_str::<OffSphereScenario<f64>>(&std::fs::read_to_string(p)?)?
            }
            None => OffSphereScenario::reference(),
        }),
        CounterexampleOpts::SkewedPrior {
            d,
            alpha1,
            alpha2,
            psi,
            n,
            seed,
        } => Counterexample::SkewedPrior {
            params: SkewedPriorParams {
                d,
                alpha1,
                alpha2,
                psi,
            },
            n,
            seed,
        },
        CounterexampleOpts::AffineMixture { gamma, alpha, psi } => {
            Counterexample::AffineMixture(match (gamma, alpha) {
                (Some(gamma), None) => AffineMixtureParams { gamma, psi },
                (None, Some(alpha)) => AffineMixtureParams::from_alpha(alpha, psi)?,
                _ => bail!("give exactly one of --gamma and --alpha"),
            })
        }
    })
}
