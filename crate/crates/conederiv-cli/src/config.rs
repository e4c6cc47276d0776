//! Experiment configuration: JSON schema, validation, and flag merging.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use conederiv::{EstimatorOptions, PiecewisePath, ScaleSchedule};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Estimate,
    Chain,
    Path,
    Suite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorChoice {
    Tangential,
    Directional,
    Both,
}

/// Partial overrides of [`EstimatorOptions`]; unspecified fields keep their
/// defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionOverrides {
    pub tol_abs: Option<f64>,
    pub slack: Option<f64>,
    pub refit_drift: Option<f64>,
    pub divergence_factor: Option<f64>,
    pub divergence_run: Option<usize>,
    pub cap: Option<f64>,
    pub noise_floor: Option<f64>,
    pub compose_tol: Option<f64>,
    pub n_dirs: Option<usize>,
    pub n_apertures: Option<usize>,
    pub n_radii: Option<usize>,
    pub n_perp: Option<usize>,
    pub min_survivor_frac: Option<f64>,
}

impl OptionOverrides {
    pub fn apply(&self, mut opts: EstimatorOptions) -> EstimatorOptions {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    opts.$field = v;
                }
            };
        }
        set!(tol_abs);
        set!(slack);
        set!(refit_drift);
        set!(divergence_factor);
        set!(divergence_run);
        set!(cap);
        set!(noise_floor);
        set!(compose_tol);
        set!(n_dirs);
        set!(n_apertures);
        set!(n_radii);
        set!(n_perp);
        set!(min_survivor_frac);
        opts
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub delta0: Option<f64>,
    pub theta0: Option<f64>,
    pub rho: Option<f64>,
    pub levels: Option<usize>,
}

/// One experiment as read from a config file. Flags override these fields.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    pub fixture: Option<String>,
    pub estimator: Option<EstimatorChoice>,
    /// Override of the fixture's expected verdict for pass/fail scoring.
    pub expect: Option<String>,
    pub pair: Option<String>,
    pub path: Option<PiecewisePath>,
    pub path_file: Option<PathBuf>,
    pub schedule: Option<ScheduleConfig>,
    pub options: Option<OptionOverrides>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }
}

/// Flag values shared by every experiment subcommand.
#[derive(Clone, Debug, Default)]
pub struct FlagOverrides {
    pub seed: Option<u64>,
    pub delta0: Option<f64>,
    pub theta0: Option<f64>,
    pub rho: Option<f64>,
    pub levels: Option<usize>,
    pub tol_abs: Option<f64>,
}

/// A fully validated experiment: everything the runner needs.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub kind: Kind,
    pub fixture: Option<String>,
    pub estimator: EstimatorChoice,
    pub expect: Option<String>,
    pub pair: Option<String>,
    pub path: Option<PiecewisePath>,
    pub schedule: ScaleSchedule,
    pub options: EstimatorOptions,
    pub output: Option<PathBuf>,
    /// The resolved configuration re-serialized for embedding in reports.
    pub echo: serde_json::Value,
}

pub fn resolve(
    kind: Kind,
    config: Option<ExperimentConfig>,
    flags: &FlagOverrides,
) -> Result<ResolvedConfig> {
    let cfg = config.unwrap_or_default();
    if let Some(k) = cfg.kind {
        if k != kind {
            bail!("config kind {k:?} does not match the subcommand");
        }
    }
    let sched_cfg = cfg.schedule.clone().unwrap_or_default();
    let default = ScaleSchedule::default();
    let schedule = ScaleSchedule::new(
        flags.delta0.or(sched_cfg.delta0).unwrap_or(default.delta0()),
        flags.theta0.or(sched_cfg.theta0).unwrap_or(default.theta0()),
        flags.rho.or(sched_cfg.rho).unwrap_or(default.rho()),
        flags.levels.or(sched_cfg.levels).unwrap_or(default.levels()),
    )?;
    let mut options = cfg.options.clone().unwrap_or_default().apply(EstimatorOptions::default());
    if let Some(tol) = flags.tol_abs {
        options.tol_abs = tol;
    }
    options.seed = flags.seed.or(cfg.seed).unwrap_or(0);

    let path = match (&cfg.path, &cfg.path_file) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(file)) => {
            let text = std::fs::read_to_string(file)
                .with_context(|| format!("reading path file {}", file.display()))?;
            Some(serde_json::from_str(&text)
                .with_context(|| format!("parsing path file {}", file.display()))?)
        }
        (None, None) => None,
    };

    match kind {
        Kind::Estimate if cfg.fixture.is_none() => bail!("estimate requires a fixture name"),
        Kind::Chain if cfg.pair.is_none() => bail!("chain requires a pair name"),
        Kind::Path if path.is_none() => bail!("path requires inline path data or a path file"),
        _ => {}
    }
    if let Some(expect) = &cfg.expect {
        if !["Differentiable", "Divergent", "Inconclusive"].contains(&expect.as_str()) {
            bail!("unknown expected verdict '{expect}'");
        }
    }

    let resolved = ResolvedConfig {
        kind,
        fixture: cfg.fixture.clone(),
        estimator: cfg.estimator.unwrap_or(EstimatorChoice::Both),
        expect: cfg.expect.clone(),
        pair: cfg.pair.clone(),
        path,
        schedule,
        options,
        output: cfg.output.clone(),
        echo: serde_json::Value::Null,
    };
    let echo = serde_json::json!({
        "kind": kind,
        "fixture": resolved.fixture,
        "estimator": resolved.estimator,
        "expect": resolved.expect,
        "pair": resolved.pair,
        "path": resolved.path,
        "schedule": resolved.schedule,
        "seed": resolved.options.seed,
    });
    Ok(ResolvedConfig { echo, ..resolved })
}
