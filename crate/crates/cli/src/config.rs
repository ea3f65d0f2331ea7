//! JSON run configuration.
//!
//! ```json
//! {
//!   "mode": "korobov",
//!   "base": 2,
//!   "alpha": 2,
//!   "m_list": [10, 12],
//!   "s_list": [10, 20, 50],
//!   "weights": "j^-3",
//!   "reduction": "floor(3/2*log2(j))",
//!   "algorithm": "fast",
//!   "lambdas": [1.0, 0.75]
//! }
//! ```
//!
//! `weights` is a rule string, a list of product weights, or
//! `{"general": [{"subset": [1, 2], "gamma": 0.5}, …]}` /
//! `{"general_file": "path.json"}` for general weights. `reduction` is a rule
//! string or an explicit list of exponents.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use redcbc::{
    GeneralWeights, ReductionSchedule, ReductionSpec, SpaceParams, WeightRule, Weights,
};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Korobov,
    Polynomial,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Korobov => "korobov",
            Mode::Polynomial => "polynomial",
        })
    }
}

impl Mode {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "korobov" => Some(Mode::Korobov),
            "polynomial" => Some(Mode::Polynomial),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Fast,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Naive => "naive",
            Algorithm::Fast => "fast",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetWeight {
    pub subset: Vec<usize>,
    pub gamma: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Rule(String),
    List(Vec<f64>),
    General {
        general: Vec<SubsetWeight>,
    },
    GeneralFile {
        general_file: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ReductionInput {
    Rule(String),
    List(Vec<u32>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Mode,
    pub base: u64,
    pub alpha: f64,
    pub m: Option<u32>,
    pub m_list: Option<Vec<u32>>,
    pub s: Option<usize>,
    pub s_list: Option<Vec<usize>>,
    pub weights: WeightsSpec,
    #[serde(default)]
    pub reduction: Option<ReductionInput>,
    #[serde(default)]
    pub algorithm: Option<Algorithm>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub vector_file: Option<PathBuf>,
    #[serde(default)]
    pub report_file: Option<PathBuf>,
    #[serde(default)]
    pub table_file: Option<PathBuf>,
}

/// Weights resolved from the configuration; general weights are loaded once.
#[derive(Clone, Debug)]
pub enum WeightSource {
    Rule(String, WeightRule),
    List(Vec<f64>),
    General(Vec<(Vec<usize>, f64)>),
}

impl WeightSource {
    pub fn weights(&self, s: usize) -> Result<Weights, Failure> {
        match self {
            WeightSource::Rule(_, rule) => Ok(Weights::product(rule.weights(s))?),
            WeightSource::List(list) => {
                if list.len() < s {
                    return Err(Failure::Config(format!(
                        "weights list has {} entries, s = {s}",
                        list.len()
                    )));
                }
                Ok(Weights::product(list[..s].to_vec())?)
            }
            WeightSource::General(entries) => {
                let dim = entries
                    .iter()
                    .flat_map(|(u, _)| u.iter().copied())
                    .max()
                    .unwrap_or(0)
                    .max(s);
                Ok(Weights::General(GeneralWeights::new(dim, entries)?))
            }
        }
    }

    /// Text written after `# weights` in vector files.
    pub fn describe(&self, s: usize) -> String {
        match self {
            WeightSource::Rule(text, _) => {
                format!("rule {}", text.split_whitespace().collect::<String>())
            }
            WeightSource::List(list) => {
                let items: Vec<String> = list.iter().take(s).map(|g| format!("{g:e}")).collect();
                format!("list {}", items.join(" "))
            }
            WeightSource::General(entries) => {
                let items: Vec<String> = entries
                    .iter()
                    .map(|(u, g)| {
                        let idx: Vec<String> = u.iter().map(|j| j.to_string()).collect();
                        format!("{}:{g:e}", idx.join(","))
                    })
                    .collect();
                format!("general {}", items.join(" "))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub base: u64,
    pub alpha: f64,
    pub m_list: Vec<u32>,
    pub s_list: Vec<usize>,
    pub weights: WeightSource,
    pub reduction: ReductionSpec,
    pub algorithm: Algorithm,
    pub lambdas: Vec<f64>,
    pub vector_file: PathBuf,
    pub report_file: PathBuf,
    pub table_file: PathBuf,
}

fn one_or_list<T: Copy>(name: &str, one: Option<T>, list: Option<Vec<T>>) -> Result<Vec<T>, Failure> {
    match (one, list) {
        (Some(_), Some(_)) => Err(Failure::Config(format!(
            "give either {name} or {name}_list, not both"
        ))),
        (Some(v), None) => Ok(vec![v]),
        (None, Some(l)) => Ok(l),
        (None, None) => Err(Failure::Config(format!("missing {name} or {name}_list"))),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Self::from_raw(raw, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_raw(raw: RawConfig, config_dir: &Path) -> Result<Self, Failure> {
        let m_list = one_or_list("m", raw.m, raw.m_list)?;
        let s_list = one_or_list("s", raw.s, raw.s_list)?;
        if let Some(&s) = s_list.iter().find(|&&s| s == 0) {
            return Err(Failure::Config(format!("s = {s}: dimension must be positive")));
        }
        let weights = match raw.weights {
            WeightsSpec::Rule(text) => {
                let rule = WeightRule::parse(&text)?;
                WeightSource::Rule(text, rule)
            }
            WeightsSpec::List(list) => {
                Weights::product(list.clone())?;
                WeightSource::List(list)
            }
            WeightsSpec::General { general } => WeightSource::General(
                general.into_iter().map(|e| (e.subset, e.gamma)).collect(),
            ),
            WeightsSpec::GeneralFile { general_file } => {
                let path = config_dir.join(general_file);
                let text = fs::read_to_string(&path).map_err(|e| {
                    Failure::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                let entries: Vec<SubsetWeight> = serde_json::from_str(&text)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                WeightSource::General(entries.into_iter().map(|e| (e.subset, e.gamma)).collect())
            }
        };
        let reduction = match raw.reduction {
            None => ReductionSpec::parse("zero")?,
            Some(ReductionInput::Rule(text)) => ReductionSpec::parse(&text)?,
            Some(ReductionInput::List(list)) => ReductionSpec::Explicit(list),
        };
        let lambdas = raw.lambdas.unwrap_or_else(|| vec![1.0]);
        let config = Self {
            mode: raw.mode,
            base: raw.base,
            alpha: raw.alpha,
            m_list,
            s_list,
            weights,
            reduction,
            algorithm: raw.algorithm.unwrap_or(Algorithm::Fast),
            lambdas,
            vector_file: raw.vector_file.unwrap_or_else(|| "vector.txt".into()),
            report_file: raw.report_file.unwrap_or_else(|| "report.json".into()),
            table_file: raw.table_file.unwrap_or_else(|| "table.csv".into()),
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks every grid cell against the library invariants without running it.
    pub fn validate(&self) -> Result<(), Failure> {
        for &lambda in &self.lambdas {
            if !(lambda > 1.0 / self.alpha && lambda <= 1.0) {
                return Err(Failure::Config(format!(
                    "lambda = {lambda} outside (1/alpha, 1]"
                )));
            }
        }
        for &m in &self.m_list {
            let params = self.params(m)?;
            for &s in &self.s_list {
                self.weights.weights(s)?;
                ReductionSchedule::from_spec(&self.reduction, s, &params)?;
            }
        }
        Ok(())
    }

    pub fn params(&self, m: u32) -> Result<SpaceParams, Failure> {
        let params = SpaceParams::new(self.base, m, self.alpha)?;
        if self.mode == Mode::Korobov && params.even_alpha().is_none() {
            return Err(redcbc::CbcError::UnsupportedSmoothness(self.alpha).into());
        }
        Ok(params)
    }

    pub fn single_cell(&self) -> Result<(u32, usize), Failure> {
        match (self.m_list.as_slice(), self.s_list.as_slice()) {
            ([m], [s]) => Ok((*m, *s)),
            _ => Err(Failure::Config(
                "construct needs exactly one m and one s".into(),
            )),
        }
    }
}
