use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use illposed::{MeasureConfig, SchemeKind};
use serde::Deserialize;

use crate::CliError;

pub const REF_POINTS_ENV: &str = "ILLPOSED_REF_POINTS";

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum AlphaValue {
    Fixed(f64),
    Rule(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseFile {
    delta: f64,
    #[serde(default)]
    seed: u64,
}

/// The JSON configuration document. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    scheme: Option<OneOrMany<String>>,
    n: Option<OneOrMany<usize>>,
    alpha: Option<AlphaValue>,
    noise: Option<NoiseFile>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    ref_points: Option<usize>,
    inner_factor: Option<usize>,
}

/// Flags shared by every command; they override the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem id (`rank1-sine`, `rank3-decay`, `green-m<m>`, `zero-data`).
    #[arg(long)]
    pub problem: Option<String>,
    /// Comma-separated scheme names, or `all`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Comma-separated, increasing discretization sizes.
    #[arg(long)]
    pub n: Option<String>,
    /// A fixed regularization parameter, or `eps` for `α = ε_n`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Noise level `δ_n` in the discrete norm.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolved configuration. `None` means "not given" so that `verify` can
/// fall back to its default grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub schemes: Option<Vec<SchemeKind>>,
    pub n_list: Option<Vec<usize>>,
    /// `None` is the rule `α = ε_n`.
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub measure: MeasureConfig,
}

fn parse_schemes(names: &[String]) -> Result<Vec<SchemeKind>, CliError> {
    if names.len() == 1 && names[0] == "all" {
        return Ok(SchemeKind::defaults().to_vec());
    }
    names
        .iter()
        .map(|s| {
            s.trim()
                .parse::<SchemeKind>()
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect()
}

fn parse_alpha(value: AlphaValue) -> Result<Option<f64>, CliError> {
    match value {
        AlphaValue::Fixed(a) if a.is_finite() && a > 0.0 => Ok(Some(a)),
        AlphaValue::Fixed(a) => Err(CliError::Usage(format!("alpha must be positive, got {a}"))),
        AlphaValue::Rule(r) if r == "eps" => Ok(None),
        AlphaValue::Rule(r) => r
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("alpha must be a number or `eps`, got `{r}`")))
            .and_then(|a| parse_alpha(AlphaValue::Fixed(a))),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        Self::merge(file, args, std::env::var(REF_POINTS_ENV).ok())
    }

    fn merge(file: FileConfig, args: &CommonArgs, env_ref_points: Option<String>) -> Result<Self, CliError> {
        let schemes = match (&args.scheme, file.scheme) {
            (Some(flag), _) => Some(parse_schemes(&split_list(flag))?),
            (None, Some(list)) => Some(parse_schemes(&list.into_vec())?),
            (None, None) => None,
        };
        let n_list = match (&args.n, file.n) {
            (Some(flag), _) => Some(
                split_list(flag)
                    .iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .map_err(|_| CliError::Usage(format!("invalid n `{s}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            (None, Some(list)) => Some(list.into_vec()),
            (None, None) => None,
        };
        let alpha = match (&args.alpha, file.alpha) {
            (Some(flag), _) => parse_alpha(AlphaValue::Rule(flag.clone()))?,
            (None, Some(value)) => parse_alpha(value)?,
            (None, None) => None,
        };
        let delta = args.delta.or(file.noise.as_ref().map(|n| n.delta));
        let seed = args.seed.or(file.noise.as_ref().map(|n| n.seed)).or(file.seed);

        let mut measure = MeasureConfig::default();
        if let Some(r) = file.ref_points {
            measure.ref_points = r;
        }
        if let Some(f) = file.inner_factor {
            measure.inner_factor = f;
        }
        if let Some(raw) = env_ref_points {
            measure.ref_points = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{REF_POINTS_ENV} must be an integer, got `{raw}`")))?;
        }

        let config = RunConfig {
            problem: args.problem.clone().or(file.problem),
            schemes,
            n_list,
            alpha,
            delta,
            seed,
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            measure,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(ns) = &self.n_list {
            if ns.is_empty() {
                return Err(CliError::Usage("n list is empty".into()));
            }
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Usage(format!("n list must be increasing, got {ns:?}")));
            }
            let max = ns[ns.len() - 1];
            if self.measure.ref_points < 4 * max {
                return Err(CliError::Usage(format!(
                    "ref_points = {} is below 4·max(n) = {}",
                    self.measure.ref_points,
                    4 * max
                )));
            }
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(CliError::Usage(format!(
                    "delta must be finite and non-negative, got {d}"
                )));
            }
        }
        if self.measure.inner_factor == 0 {
            return Err(CliError::Usage("inner_factor must be positive".into()));
        }
        Ok(())
    }

    pub fn require_problem(&self) -> Result<&str, CliError> {
        self.problem
            .as_deref()
            .ok_or_else(|| CliError::Usage("a problem id is required (--problem)".into()))
    }

    pub fn require_n_list(&self) -> Result<&[usize], CliError> {
        self.n_list
            .as_deref()
            .ok_or_else(|| CliError::Usage("at least one n is required (--n)".into()))
    }

    pub fn schemes_or_default(&self) -> Vec<SchemeKind> {
        self.schemes.clone().unwrap_or_else(|| vec![SchemeKind::COLLOCATION])
    }
}
