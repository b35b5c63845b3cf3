use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_energy::{Evaluator, McmcParams};
use crate::hj::InitialCondition;
use crate::model::{ModelFile, PriorSpec};

/// Which family of priors, and hence which limit `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Case {
    /// Independent coordinates with discrete priors.
    Iid { prior: PriorSpec },
    /// Uniform on the spheres of radius `√m` and `√n`.
    Spherical,
}

impl Case {
    pub fn prior(&self) -> PriorSpec {
        match self {
            Case::Iid { prior } => prior.clone(),
            Case::Spherical => PriorSpec::spherical(),
        }
    }

    pub fn initial_condition(&self, alpha: f64) -> InitialCondition {
        match self {
            Case::Iid { prior } => InitialCondition::Iid {
                prior: prior.clone(),
                alpha,
            },
            Case::Spherical => InitialCondition::Spherical { alpha },
        }
    }
}

fn default_points() -> usize {
    17
}
fn default_domain_points() -> usize {
    9
}
fn default_disorder() -> usize {
    200
}
fn default_dual() -> usize {
    crate::hj::hopf::DEFAULT_DUAL_POINTS
}
fn default_primal() -> usize {
    crate::hj::hopf::DEFAULT_PRIMAL_POINTS
}

/// A convergence run over `n_list` on the cube `[0, M]³`.
///
/// ```json
/// { "case": { "kind": "iid", "prior": { "x": { "kind": "iid_discrete",
///     "atoms": [[-1, 0.5], [1, 0.5]] }, "y": { ... } } },
///   "alpha": 1.0, "m_bound": 1.0, "n_list": [4, 6, 8, 10], "seed": 1 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case: Case,
    pub alpha: f64,
    /// The side `M` of the cube.
    pub m_bound: f64,
    pub n_list: Vec<usize>,
    /// Points per axis of the cube.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Points per axis of the enlarged cube used for `K` and `L` in the bound.
    #[serde(default = "default_domain_points")]
    pub domain_points: usize,
    #[serde(default = "default_disorder")]
    pub n_disorder: usize,
    /// Pair each disorder draw with its noise-negated twin. `n_disorder`
    /// still counts independent draws, so the work doubles.
    #[serde(default)]
    pub antithetic: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub evaluator: Evaluator,
    #[serde(default)]
    pub mcmc: McmcParams,
    #[serde(default = "default_dual")]
    pub dual_points: usize,
    #[serde(default = "default_primal")]
    pub primal_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the case, `α`, `M` and the sizes.
    pub fn new(case: Case, alpha: f64, m_bound: f64, n_list: Vec<usize>) -> Self {
        ExperimentConfig {
            case,
            alpha,
            m_bound,
            n_list,
            points: default_points(),
            domain_points: default_domain_points(),
            n_disorder: default_disorder(),
            antithetic: false,
            seed: 0,
            evaluator: Evaluator::Auto,
            mcmc: McmcParams::default(),
            dual_points: default_dual(),
            primal_points: default_primal(),
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The prior of a model file as an i.i.d. case.
    pub fn iid_case_from_file(path: &Path) -> Result<Case> {
        let file = ModelFile::from_json(&std::fs::read_to_string(path)?)?;
        Ok(Case::Iid {
            prior: file.prior_spec(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.m_bound >= 0.0 && self.m_bound.is_finite()) {
            return bad(format!("M must be nonnegative, got {}", self.m_bound));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("n_list must be positive and strictly increasing, got {:?}", self.n_list));
        }
        if self.points < 2 || self.domain_points < 2 {
            return bad("grids need at least 2 points per axis".into());
        }
        if self.n_disorder < 2 {
            return bad("n_disorder must be at least 2".into());
        }
        self.mcmc.validate()?;
        let prior = self.case.prior();
        prior.validate()?;
        if let Case::Iid { prior } = &self.case {
            if !prior.is_discrete() {
                return bad("the i.i.d. case needs discrete priors".into());
            }
        }
        Ok(())
    }

    /// Hash of every setting that affects the numbers.
    pub fn hash(&self) -> String {
        let numeric = ExperimentConfig {
            output_dir: None,
            ..self.clone()
        };
        crate::grid::config_hash(&numeric)
    }
}
