use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::DEFAULT_SWEEP_BUDGET;
use crate::model::{LatticeRegion, Site};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    Exact,
    Mc,
    #[default]
    Auto,
}

/// Where the shifted block sits in each square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockSpec {
    /// A `side`×`side` block around the center site.
    Center { side: usize },
    /// Fixed lower-left corner.
    At { origin: Site, side: usize },
}

/// A `key = value` experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `square:<n>` or `sites:<path>`; used when `n_list` is empty.
    pub region: Option<String>,
    pub base_dir: PathBuf,
    pub betas: Vec<f64>,
    pub v: f64,
    pub n_list: Vec<usize>,
    pub replicas: usize,
    pub seed: u64,
    pub engine: EngineMode,
    pub h: Option<f64>,
    pub block: Option<BlockSpec>,
    pub out_dir: PathBuf,
    /// Paired CFTP samples per replica in Monte Carlo mode.
    pub mc_samples: usize,
    pub budget: u64,
    pub svg: bool,
    /// Record wall time; off by default so outputs are byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            region: None,
            base_dir: PathBuf::from("."),
            betas: vec![1.0],
            v: 1.0,
            n_list: Vec::new(),
            replicas: 100,
            seed: 0,
            engine: EngineMode::Auto,
            h: None,
            block: None,
            out_dir: PathBuf::from("out"),
            mc_samples: 1000,
            budget: DEFAULT_SWEEP_BUDGET,
            svg: false,
            timing: false,
        }
    }
}

fn parse_beta(s: &str) -> Option<f64> {
    match s {
        "inf" | "infinity" | "∞" => Some(f64::INFINITY),
        _ => s.parse().ok().filter(|b: &f64| *b >= 0.0 && b.is_finite()),
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(item).collect()
}

fn parse_block(s: &str) -> Option<BlockSpec> {
    if let Some(side) = s.strip_prefix("center:") {
        return side.trim().parse().ok().filter(|&n: &usize| n > 0).map(|side| BlockSpec::Center { side });
    }
    let parts = list(s, |t| t.parse::<i64>().ok())?;
    match parts[..] {
        [x, y, side] if side > 0 => Some(BlockSpec::At { origin: Site::new(x as i32, y as i32), side: side as usize }),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Parses `text`; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = Self { base_dir: base_dir.to_path_buf(), ..Self::default() };
        let mut out_dir = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || err(format!("invalid value `{value}` for `{key}`"));
            match key {
                "region" => cfg.region = Some(value.to_string()),
                "beta" => cfg.betas = list(value, parse_beta).filter(|l| !l.is_empty()).ok_or_else(bad)?,
                "v" => cfg.v = value.parse().ok().filter(|v: &f64| *v > 0.0 && v.is_finite()).ok_or_else(bad)?,
                "n_list" => cfg.n_list = list(value, |t| t.parse().ok()).ok_or_else(bad)?,
                "replicas" => cfg.replicas = value.parse().ok().filter(|&r: &usize| r > 0).ok_or_else(bad)?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "engine" => {
                    cfg.engine = match value {
                        "exact" => EngineMode::Exact,
                        "mc" => EngineMode::Mc,
                        "auto" => EngineMode::Auto,
                        _ => return Err(bad()),
                    }
                }
                "h" => cfg.h = Some(value.parse().ok().filter(|h: &f64| h.is_finite() && *h > 0.0).ok_or_else(bad)?),
                "block" => cfg.block = Some(parse_block(value).ok_or_else(bad)?),
                "out_dir" => out_dir = Some(PathBuf::from(value)),
                "mc_samples" => cfg.mc_samples = value.parse().ok().filter(|&r: &usize| r > 1).ok_or_else(bad)?,
                "budget" => cfg.budget = value.parse().ok().filter(|&b: &u64| b > 0).ok_or_else(bad)?,
                "svg" => cfg.svg = parse_bool(value).ok_or_else(bad)?,
                "timing" => cfg.timing = parse_bool(value).ok_or_else(bad)?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.out_dir = base_dir.join(out_dir.unwrap_or_else(|| PathBuf::from("out")));
        if let Some(&n) = cfg.n_list.iter().find(|&&n| n < 3) {
            return Err(Error::Config { line: 0, message: format!("n_list entries must be ≥ 3, got {n}") });
        }
        match (&cfg.region, cfg.n_list.is_empty()) {
            (None, true) => return Err(Error::Config { line: 0, message: "one of `region` or `n_list` is required".into() }),
            (Some(_), false) => return Err(Error::Config { line: 0, message: "`region` and `n_list` are mutually exclusive".into() }),
            _ => {}
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Regions of the sweep: nested squares centred on the origin for each
    /// n, or the single configured region.
    pub fn regions(&self) -> Result<Vec<(usize, LatticeRegion)>> {
        if self.n_list.is_empty() {
            let region = LatticeRegion::parse_spec(self.region.as_deref().unwrap_or_default(), &self.base_dir)?;
            let n = region.square_side().unwrap_or(region.len());
            return Ok(vec![(n, region)]);
        }
        self.n_list.iter().map(|&n| Ok((n, nested_square(n)?))).collect()
    }
}

/// The n×n square with lower-left corner −⌊(n−1)/2⌋·(1, 1). Its center site
/// is the origin for every n, so the squares are nested.
pub fn nested_square(n: usize) -> Result<LatticeRegion> {
    let offset = -(((n.max(1) - 1) / 2) as i32);
    LatticeRegion::square_at(Site::new(offset, offset), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# decay run\nn_list = 4, 8,12\nbeta = 0.5, 1, inf\nv = 2\nreplicas = 20\nseed = 7\nengine = exact\n\
                    block = center:2\nh = 0.25\nout_dir = results\nmc_samples = 50\nbudget = 1024\nsvg = true\ntiming = no\n";
        let cfg = ExperimentConfig::parse(text, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.n_list, vec![4, 8, 12]);
        assert_eq!(cfg.betas, vec![0.5, 1.0, f64::INFINITY]);
        assert_eq!((cfg.v, cfg.replicas, cfg.seed, cfg.engine), (2.0, 20, 7, EngineMode::Exact));
        assert_eq!(cfg.block, Some(BlockSpec::Center { side: 2 }));
        assert_eq!(cfg.h, Some(0.25));
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x/results"));
        assert!(cfg.svg && !cfg.timing);
        assert_eq!((cfg.mc_samples, cfg.budget), (50, 1024));
    }

    #[test]
    fn rejects_bad_lines() {
        let base = Path::new(".");
        assert!(matches!(ExperimentConfig::parse("n_list = 4\nfoo = 1\n", base), Err(Error::Config { line: 2, .. })));
        assert!(matches!(ExperimentConfig::parse("n_list = 4\nengine = gpu\n", base), Err(Error::Config { line: 2, .. })));
        assert!(ExperimentConfig::parse("n_list = 2, 4\n", base).is_err());
        assert!(ExperimentConfig::parse("beta = 1\n", base).is_err());
        assert!(ExperimentConfig::parse("region = square:3\nn_list = 4\n", base).is_err());
        assert!(ExperimentConfig::parse("region = square:3\nbeta = -1\n", base).is_err());
        assert!(ExperimentConfig::parse("region = square:3\nblock = 1,2\n", base).is_err());
    }

    #[test]
    fn nested_squares_share_their_center() {
        for n in [3, 4, 7, 8, 16] {
            let region = nested_square(n).unwrap();
            assert_eq!(region.center(), Site::new(0, 0), "n = {n}");
        }
        let small = nested_square(4).unwrap();
        let big = nested_square(8).unwrap();
        assert!(small.sites().iter().all(|&s| big.contains(s)));
    }
}
