use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{ClusterLayout, ModelParams};
use crate::solvers::{default_lambda, LambdaMode, Method, SolverConfig};

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "k",
    "q",
    "p",
    "p_grid",
    "lambda_mode",
    "lambda",
    "trials",
    "base_seed",
    "method",
    "region_size_mode",
    "region_size",
    "max_iter",
    "tol",
    "samples",
    "workers",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSelection {
    Blind,
    Intelligent,
    Both,
}

impl MethodSelection {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSelection::Blind => vec![Method::Blind],
            MethodSelection::Intelligent => vec![Method::Intelligent],
            MethodSelection::Both => vec![Method::Blind, Method::Intelligent],
        }
    }
}

impl FromStr for MethodSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blind" => Ok(MethodSelection::Blind),
            "intelligent" => Ok(MethodSelection::Intelligent),
            "both" => Ok(MethodSelection::Both),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected blind, intelligent or both)"
            ))),
        }
    }
}

impl From<Method> for MethodSelection {
    fn from(m: Method) -> Self {
        match m {
            Method::Blind => MethodSelection::Blind,
            Method::Intelligent => MethodSelection::Intelligent,
        }
    }
}

/// Where the intelligent program gets the region size `|R| = sum k_i^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegionSizeMode {
    /// Taken from the planted layout.
    Planted,
    /// Given explicitly by the `region_size` key.
    Explicit(f64),
    /// Not available; the intelligent program cannot run.
    None,
}

impl RegionSizeMode {
    /// The region size for `layout`, or an error explaining that the
    /// intelligent program needs it.
    pub fn resolve(self, layout: Option<&ClusterLayout>) -> Result<f64> {
        match (self, layout) {
            (RegionSizeMode::Explicit(v), _) => Ok(v),
            (RegionSizeMode::Planted, Some(layout)) => Ok(layout.region_size() as f64),
            (RegionSizeMode::Planted, None) => Err(Error::Config(
                "region_size_mode = planted, but no planted clusters are known for this graph".into(),
            )),
            (RegionSizeMode::None, _) => Err(Error::Config(
                "the intelligent method needs the size of the planted region |R| = sum of k_i^2 as side \
                 information; set `region_size_mode = planted` or `region_size_mode = explicit` with \
                 `region_size = <value>`"
                    .into(),
            )),
        }
    }
}

/// A parsed configuration file. Every key is optional at this level; the
/// accessors report which keys a given task needs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub source: String,
    pub n: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub q: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub p_grid: Option<Vec<f64>>,
    pub lambda_mode: Option<LambdaMode>,
    pub lambda: Option<f64>,
    pub trials: Option<usize>,
    pub base_seed: Option<u64>,
    pub method: Option<MethodSelection>,
    pub region_size_mode: Option<String>,
    pub region_size: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

fn parse_scalar<T: FromStr>(source: &str, line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::parse(
            source,
            line,
            format!("cannot parse `{value}` as the value of `{key}`"),
        )
    })
}

fn parse_list<T: FromStr>(source: &str, line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(Error::parse(
            source,
            line,
            format!("empty item in the list for `{key}`"),
        ));
    }
    items
        .iter()
        .map(|item| parse_scalar(source, line, key, item))
        .collect()
}

/// Parses `key = value` lines. `#` starts a comment, blank lines are
/// skipped, lists are comma-separated, and unknown or repeated keys are
/// errors reported as `source:line: message`.
pub fn parse_config(text: &str, source: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        source: source.to_string(),
        ..RunConfig::default()
    };
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::parse(source, line, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KNOWN_KEYS.iter().find(|&&k| k == key) else {
            return Err(Error::parse(source, line, format!("unknown key `{key}`")));
        };
        if seen.contains(&known) {
            return Err(Error::parse(
                source,
                line,
                format!("key `{key}` appears twice"),
            ));
        }
        seen.push(known);
        if value.is_empty() {
            return Err(Error::parse(
                source,
                line,
                format!("missing value for `{key}`"),
            ));
        }
        let at = |e: Error| match e {
            Error::Config(msg) => Error::parse(source, line, msg),
            other => other,
        };
        match known {
            "n" => cfg.n = Some(parse_scalar(source, line, key, value)?),
            "k" => cfg.k = Some(parse_list(source, line, key, value)?),
            "q" => cfg.q = Some(parse_scalar(source, line, key, value)?),
            "p" => cfg.p = Some(parse_list(source, line, key, value)?),
            "p_grid" => cfg.p_grid = Some(parse_list(source, line, key, value)?),
            "lambda_mode" => cfg.lambda_mode = Some(value.parse().map_err(at)?),
            "lambda" => cfg.lambda = Some(parse_scalar(source, line, key, value)?),
            "trials" => cfg.trials = Some(parse_scalar(source, line, key, value)?),
            "base_seed" => cfg.base_seed = Some(parse_scalar(source, line, key, value)?),
            "method" => cfg.method = Some(value.parse().map_err(at)?),
            "region_size_mode" => {
                if !matches!(value, "planted" | "explicit" | "none") {
                    return Err(Error::parse(
                        source,
                        line,
                        format!("unknown region_size_mode `{value}` (expected planted, explicit or none)"),
                    ));
                }
                cfg.region_size_mode = Some(value.to_string());
            }
            "region_size" => cfg.region_size = Some(parse_scalar(source, line, key, value)?),
            "max_iter" => cfg.max_iter = Some(parse_scalar(source, line, key, value)?),
            "tol" => cfg.tol = Some(parse_scalar(source, line, key, value)?),
            "samples" => cfg.samples = Some(parse_scalar(source, line, key, value)?),
            "workers" => cfg.workers = Some(parse_scalar(source, line, key, value)?),
            "output" => cfg.output = Some(PathBuf::from(value)),
            _ => unreachable!("every known key is handled"),
        }
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

impl RunConfig {
    fn missing(&self, key: &str) -> Error {
        Error::Config(format!(
            "{}: missing required key `{key}`",
            self.source_label()
        ))
    }

    fn source_label(&self) -> &str {
        if self.source.is_empty() {
            "config"
        } else {
            &self.source
        }
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| self.missing("n"))
    }

    /// Contiguous clusters of sizes `k` starting at node 0.
    pub fn layout(&self) -> Result<ClusterLayout> {
        let n = self.require_n()?;
        let k = self.k.as_ref().ok_or_else(|| self.missing("k"))?;
        ClusterLayout::contiguous(n, k)
    }

    /// Model parameters for a single point; a one-element `p` applies to
    /// every cluster.
    pub fn params(&self) -> Result<ModelParams> {
        let p = self.p.as_ref().ok_or_else(|| self.missing("p"))?;
        self.params_at(p)
    }

    pub(crate) fn params_at(&self, p: &[f64]) -> Result<ModelParams> {
        let q = self.q.ok_or_else(|| self.missing("q"))?;
        let t = self.k.as_ref().map_or(p.len(), Vec::len);
        let p = match p.len() {
            1 => vec![p[0]; t],
            len if len == t => p.to_vec(),
            len => {
                return Err(Error::Config(format!(
                    "{}: `p` has {len} values for {t} clusters",
                    self.source_label()
                )))
            }
        };
        ModelParams::new(p, q)
    }

    /// The explicit `lambda`, else the rule from `lambda_mode`, else
    /// `default_mode`.
    pub fn lambda_for(&self, n: usize, default_mode: LambdaMode) -> f64 {
        self.lambda
            .unwrap_or_else(|| default_lambda(n, self.lambda_mode.unwrap_or(default_mode)))
    }

    pub fn solver_config(&self, lambda: f64) -> SolverConfig {
        let mut cfg = SolverConfig::new(lambda);
        if let Some(tol) = self.tol {
            cfg = cfg.with_tolerance(tol);
        }
        if let Some(max_iter) = self.max_iter {
            cfg = cfg.with_max_iter(max_iter);
        }
        cfg
    }

    pub fn region_size_mode(&self) -> Result<RegionSizeMode> {
        match self.region_size_mode.as_deref() {
            None | Some("none") => Ok(RegionSizeMode::None),
            Some("planted") => Ok(RegionSizeMode::Planted),
            Some("explicit") => self
                .region_size
                .map(RegionSizeMode::Explicit)
                .ok_or_else(|| self.missing("region_size")),
            Some(other) => Err(Error::Config(format!("unknown region_size_mode `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "\
# two clusters
n = 64
k = 28, 28
q = 0.15
p_grid = 0.5, 0.55, 0.6   # trailing comment
lambda_mode = simulation
trials = 20
base_seed = 7
method = both
region_size_mode = planted
";

    #[test]
    fn parses_documented_keys() {
        let cfg = parse_config(FIG1, "fig1.cfg").unwrap();
        assert_eq!(cfg.n, Some(64));
        assert_eq!(cfg.k, Some(vec![28, 28]));
        assert_eq!(cfg.p_grid, Some(vec![0.5, 0.55, 0.6]));
        assert_eq!(cfg.lambda_mode, Some(LambdaMode::Simulation));
        assert_eq!(cfg.method, Some(MethodSelection::Both));
        assert_eq!(cfg.region_size_mode().unwrap(), RegionSizeMode::Planted);
        assert_eq!(cfg.lambda_for(64, LambdaMode::BlindTheorem), 0.125);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_config("n = 4\nbogus = 1\n", "x.cfg").unwrap_err();
        assert_eq!(err.to_string(), "x.cfg:2: unknown key `bogus`");
        let err = parse_config("n = 4\n\nk = 2,,3\n", "x.cfg").unwrap_err();
        assert_eq!(err.to_string(), "x.cfg:3: empty item in the list for `k`");
        let err = parse_config("n 4\n", "x.cfg").unwrap_err();
        assert_eq!(err.to_string(), "x.cfg:1: expected `key = value`");
        let err = parse_config("n = 4\nn = 5\n", "x.cfg").unwrap_err();
        assert_eq!(err.to_string(), "x.cfg:2: key `n` appears twice");
        let err = parse_config("method = greedy\n", "x.cfg").unwrap_err();
        assert!(err
            .to_string()
            .starts_with("x.cfg:1: unknown method `greedy`"));
        let err = parse_config("q = lots\n", "x.cfg").unwrap_err();
        assert_eq!(
            err.to_string(),
            "x.cfg:1: cannot parse `lots` as the value of `q`"
        );
    }

    #[test]
    fn region_size_requirements() {
        let cfg = parse_config("n = 10\n", "c").unwrap();
        let err = cfg.region_size_mode().unwrap().resolve(None).unwrap_err();
        assert!(err.to_string().contains("side information"));
        let cfg = parse_config("region_size_mode = explicit\n", "c").unwrap();
        assert!(cfg.region_size_mode().is_err());
        let cfg = parse_config("region_size_mode = explicit\nregion_size = 50\n", "c").unwrap();
        assert_eq!(cfg.region_size_mode().unwrap().resolve(None).unwrap(), 50.0);
    }

    #[test]
    fn single_p_is_broadcast() {
        let cfg = parse_config("n = 10\nk = 3, 4\nq = 0.1\np = 0.7\n", "c").unwrap();
        assert_eq!(cfg.params().unwrap().p, vec![0.7, 0.7]);
        let cfg = parse_config("n = 10\nk = 3, 4\nq = 0.1\np = 0.7, 0.8, 0.9\n", "c").unwrap();
        assert!(cfg.params().is_err());
    }
}
