use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::inference::{DEFAULT_CI_LEVEL, Method, NoiseMode};

/// Training-set seeds for the fixed predictors `f1`, `f2`, `f3`.
pub const TRAINING_SEEDS: [u64; 3] = [0x5EED_0001, 0x5EED_0002, 0x5EED_0003];

pub const MIN_N_LAB: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    /// Predictors trained once and reused by every replicate.
    FixedFhat,
    /// A fresh training set and predictor in every replicate.
    RetrainPerReplicate,
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed_fhat" | "fixed" => Ok(Design::FixedFhat),
            "retrain_per_replicate" | "retrain" => Ok(Design::RetrainPerReplicate),
            other => Err(Error::InvalidConfig(format!(
                "unknown design {other:?} (expected fixed_fhat or retrain_per_replicate)"
            ))),
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Design::FixedFhat => "fixed_fhat",
            Design::RetrainPerReplicate => "retrain_per_replicate",
        })
    }
}

/// A predictor slot in the fixed design: a trained model `f{k}` or the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FhatId {
    Trained(usize),
    Oracle,
}

impl FhatId {
    pub fn label(self) -> String {
        match self {
            FhatId::Trained(k) => format!("f{k}"),
            FhatId::Oracle => "oracle".into(),
        }
    }
}

impl FromStr for FhatId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "oracle" {
            return Ok(FhatId::Oracle);
        }
        s.strip_prefix('f')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| (1..=TRAINING_SEEDS.len()).contains(&k))
            .map(FhatId::Trained)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown predictor {s:?} (expected f1, f2, f3 or oracle)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design: Design,
    pub beta1_star: f64,
    /// `(n_lab, n_unlab)` cells.
    pub n_grid: Vec<(usize, usize)>,
    pub n_train: usize,
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub bootstrap_b: usize,
    pub ci_level: f64,
    pub master_seed: u64,
    /// Predictors for the fixed design; ignored when retraining.
    pub fhat_ids: Vec<FhatId>,
    pub noise_mode: NoiseMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            design: Design::FixedFhat,
            beta1_star: 0.0,
            n_grid: default_grid(),
            n_train: 300,
            replicates: 1000,
            methods: Method::STUDY.to_vec(),
            bootstrap_b: 100,
            ci_level: DEFAULT_CI_LEVEL,
            master_seed: 1,
            fhat_ids: vec![
                FhatId::Trained(1),
                FhatId::Trained(2),
                FhatId::Trained(3),
                FhatId::Oracle,
            ],
            noise_mode: NoiseMode::Gaussian,
        }
    }
}

/// `(300, 300)` followed by `(m / 10, m)` for `m` in 3000, 10000, 30000.
pub fn default_grid() -> Vec<(usize, usize)> {
    vec![(300, 300), (300, 3000), (1000, 10000), (3000, 30000)]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("sample-size grid is empty".into());
        }
        for &(n_lab, n_unlab) in &self.n_grid {
            if n_lab < MIN_N_LAB {
                return bad(format!("n_lab = {n_lab} is below {MIN_N_LAB}"));
            }
            if n_unlab < 3 {
                return bad(format!("n_unlab = {n_unlab} is below 3"));
            }
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if self.methods.contains(&Method::WangBootstrapNonparametric) && self.bootstrap_b < 2 {
            return bad("nonparametric bootstrap needs bootstrap_b >= 2".into());
        }
        if self.methods.iter().any(|m| m.is_bootstrap()) && self.bootstrap_b == 0 {
            return bad("bootstrap_b must be at least 1".into());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return bad(format!("ci_level {} not in (0, 1)", self.ci_level));
        }
        if !self.beta1_star.is_finite() {
            return bad("beta1 must be finite".into());
        }
        if self.n_train < crate::smoother::MIN_POINTS.max(30) {
            return bad(format!("n_train = {} is below 30", self.n_train));
        }
        if self.design == Design::FixedFhat && self.fhat_ids.is_empty() {
            return bad("fixed design needs at least one predictor".into());
        }
        Ok(())
    }

    /// Predictor labels in output order.
    pub fn fhat_labels(&self) -> Vec<String> {
        match self.design {
            Design::FixedFhat => self.fhat_ids.iter().map(|f| f.label()).collect(),
            Design::RetrainPerReplicate => vec!["retrained".into()],
        }
    }

    /// Apply one `key = value` setting. Keys mirror the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "design" => self.design = value.parse()?,
            "beta1" => self.beta1_star = parse_num(&key, value)?,
            "n-lab" => self.set_grid(Some(parse_list(&key, value)?), None)?,
            "n-unlab" => self.set_grid(None, Some(parse_list(&key, value)?))?,
            "n-train" => self.n_train = parse_num(&key, value)?,
            "replicates" => self.replicates = parse_num(&key, value)?,
            "methods" => self.methods = parse_methods(value)?,
            "bootstrap-b" => self.bootstrap_b = parse_num(&key, value)?,
            "seed" => self.master_seed = parse_num(&key, value)?,
            "fhat" => {
                self.fhat_ids = split_list(value)
                    .map(str::parse)
                    .collect::<Result<Vec<FhatId>>>()?
            }
            "ci-level" => self.ci_level = parse_num(&key, value)?,
            "noise-mode" => {
                self.noise_mode = match value {
                    "gaussian" => NoiseMode::Gaussian,
                    "resample" => NoiseMode::Resample,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "unknown noise mode {other:?} (expected gaussian or resample)"
                        )));
                    }
                }
            }
            other => return Err(Error::InvalidConfig(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Replace one side of the grid. A single value on either side pairs with
    /// every entry of the other; otherwise lengths must match.
    pub fn set_grid(&mut self, labs: Option<Vec<usize>>, unlabs: Option<Vec<usize>>) -> Result<()> {
        let current = |pick: fn(&(usize, usize)) -> usize| {
            let mut v: Vec<usize> = self.n_grid.iter().map(pick).collect();
            if v.windows(2).all(|w| w[0] == w[1]) {
                v.truncate(1);
            }
            v
        };
        let labs = labs.unwrap_or_else(|| current(|c| c.0));
        let unlabs = unlabs.unwrap_or_else(|| current(|c| c.1));
        self.n_grid = match (labs.len(), unlabs.len()) {
            (a, b) if a == b => labs.into_iter().zip(unlabs).collect(),
            (1, _) => unlabs.iter().map(|&u| (labs[0], u)).collect(),
            (_, 1) => labs.iter().map(|&l| (l, unlabs[0])).collect(),
            (a, b) => {
                return Err(Error::InvalidConfig(format!(
                    "n-lab has {a} entries but n-unlab has {b}"
                )));
            }
        };
        Ok(())
    }

    /// Parse a simple `key = value` text file (`#` starts a comment).
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        let mut labs = None;
        let mut unlabs = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            let at_line = |e: Error| Error::InvalidConfig(format!("line {}: {e}", lineno + 1));
            match k.trim().replace('_', "-").as_str() {
                "n-lab" => labs = Some(parse_list("n-lab", v).map_err(at_line)?),
                "n-unlab" => unlabs = Some(parse_list("n-unlab", v).map_err(at_line)?),
                _ => self.set(k, v).map_err(at_line)?,
            }
        }
        if labs.is_some() || unlabs.is_some() {
            self.set_grid(labs, unlabs)?;
        }
        Ok(())
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

pub fn parse_methods(value: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for m in split_list(value) {
        let m: Method = m.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty method list".into()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

pub(crate) fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    split_list(value).map(|v| parse_num(key, v)).collect()
}
