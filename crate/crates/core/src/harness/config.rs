use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryConfig, FeedbackKind, FeedbackModel, Purity, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::learner::{LearnerKind, LearningRate, VARIATIONAL_MAX_QUBITS};
use crate::loss::{LossFunction, LossKind};

/// Learning-rate setting as written in a config file: a number or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSetting {
    Fixed(f64),
    Named(String),
}

impl Default for EtaSetting {
    fn default() -> Self {
        EtaSetting::Named("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    #[serde(default)]
    pub eta: EtaSetting,
    /// Bound on ‖E_t‖₂ used by the automatic rate; defaults to √M.
    #[serde(default)]
    pub lambda: Option<f64>,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    20_000
}
fn default_purity() -> Purity {
    Purity::Pure
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub loss: LossKind,
    #[serde(default = "default_purity")]
    pub target: Purity,
    /// Score every prefix against its own hindsight optimum (T oracle solves).
    #[serde(default)]
    pub prefix_oracle: bool,
    #[serde(default = "default_tol")]
    pub oracle_tol: f64,
    #[serde(default = "default_max_iter")]
    pub oracle_max_iter: usize,
    pub learner: LearnerConfig,
    pub adversary: AdversaryConfig,
    pub feedback: FeedbackModel,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn loss_function(&self) -> LossFunction {
        LossFunction::new(self.loss)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("n_qubits must lie in 1..={MAX_QUBITS}, got {}", self.n_qubits)));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.oracle_tol > 0.0) || self.oracle_max_iter == 0 {
            return Err(Error::Config("oracle_tol and oracle_max_iter must be positive".into()));
        }
        if self.learner.kind.is_doubling() && self.loss != LossKind::L2 {
            return Err(Error::Config("the doubling trick requires loss = \"l2\"".into()));
        }
        if self.learner.kind == LearnerKind::RftlTsallis2Variational && self.n_qubits > VARIATIONAL_MAX_QUBITS {
            return Err(Error::Config(format!(
                "the variational learner supports n_qubits ≤ {VARIATIONAL_MAX_QUBITS}"
            )));
        }
        if let Some(l) = self.learner.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be positive, got {l}")));
            }
        }
        self.adversary.validate(self.dim())?;
        self.feedback.validate()?;
        self.learning_rate().and_then(|r| r.resolve(self.learner.kind, self.n_qubits))?;
        Ok(())
    }

    /// λ for the automatic rate: explicit, or √M with M the rank limit (d if
    /// unlimited).
    pub fn lambda(&self) -> f64 {
        self.learner
            .lambda
            .unwrap_or_else(|| (self.adversary.rank_limit.unwrap_or(self.dim()) as f64).sqrt())
    }

    pub fn learning_rate(&self) -> Result<LearningRate> {
        match &self.learner.eta {
            EtaSetting::Fixed(eta) => Ok(LearningRate::Fixed(*eta)),
            EtaSetting::Named(s) if s == "auto" => Ok(LearningRate::Auto {
                horizon: self.horizon,
                lipschitz: self.loss_function().lipschitz,
                lambda: self.lambda(),
            }),
            EtaSetting::Named(s) => Err(Error::Config(format!("eta must be a number or \"auto\", got {s:?}"))),
        }
    }

    /// A worst-case, exact-feedback, L2 configuration for `kind`.
    pub fn standard(kind: LearnerKind, n_qubits: usize, horizon: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            n_qubits,
            horizon,
            trials,
            master_seed,
            loss: LossKind::L2,
            target: Purity::Pure,
            prefix_oracle: false,
            oracle_tol: default_tol(),
            oracle_max_iter: default_max_iter(),
            learner: LearnerConfig { kind, eta: EtaSetting::default(), lambda: None },
            adversary: AdversaryConfig::worst_case(None),
            feedback: FeedbackModel::exact(),
        }
    }

    pub fn is_realizable(&self) -> bool {
        self.feedback.kind == FeedbackKind::Exact
    }
}
