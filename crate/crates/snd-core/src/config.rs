//! Flat JSON model configuration accepted by the CLI.

use crate::grounddist::{
    GroundDistError, IccParams, LtcParams, ModelAgnosticParams, ModelParams, Quantization,
};
use crate::snd::{BankPolicy, SndConfig};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown model {0:?} (expected agnostic, icc, or ltc)")]
    UnknownModel(String),
    #[error(transparent)]
    BadParams(#[from] GroundDistError),
}

/// One flat object covering the model choice, its parameters, and the
/// quantization: `{"model": "agnostic"|"icc"|"ltc", "c_friendly": ...,
/// "epsilon": ..., "scale": ..., "cap": ...}`. Unset fields keep their
/// defaults.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfigFile {
    pub model: String,
    pub c_friendly: u32,
    pub c_neutral: u32,
    pub c_adverse: u32,
    pub use_comm: bool,
    pub use_adoption: bool,
    pub epsilon: Option<f64>,
    pub default_p: f64,
    pub default_d: f64,
    pub default_w: Option<f64>,
    pub default_theta: f64,
    pub scale: f64,
    pub cap: i64,
    /// Per-bin bank distance; derived from the network when absent.
    pub gamma: Option<i64>,
    pub symmetric: bool,
    pub dense_limit: usize,
}

impl Default for ModelConfigFile {
    fn default() -> Self {
        let agnostic = ModelAgnosticParams::default();
        let icc = IccParams::default();
        let ltc = LtcParams::default();
        let quant = Quantization::default();
        ModelConfigFile {
            model: "agnostic".into(),
            c_friendly: agnostic.c_friendly,
            c_neutral: agnostic.c_neutral,
            c_adverse: agnostic.c_adverse,
            use_comm: agnostic.use_comm,
            use_adoption: agnostic.use_adoption,
            epsilon: None,
            default_p: icc.default_p,
            default_d: icc.default_d,
            default_w: ltc.default_w,
            default_theta: ltc.default_theta,
            scale: quant.scale,
            cap: quant.cost_cap,
            gamma: None,
            symmetric: true,
            dense_limit: SndConfig::default().dense_limit,
        }
    }
}

impl ModelConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Resolve into a validated distance configuration.
    pub fn to_snd_config(&self) -> Result<SndConfig, ConfigError> {
        let model = match self.model.as_str() {
            "agnostic" => ModelParams::Agnostic(ModelAgnosticParams {
                c_friendly: self.c_friendly,
                c_neutral: self.c_neutral,
                c_adverse: self.c_adverse,
                use_comm: self.use_comm,
                use_adoption: self.use_adoption,
            }),
            "icc" => ModelParams::Icc(IccParams {
                epsilon: self.epsilon.unwrap_or(IccParams::default().epsilon),
                default_p: self.default_p,
                default_d: self.default_d,
            }),
            "ltc" => ModelParams::Ltc(LtcParams {
                epsilon: self.epsilon.unwrap_or(LtcParams::default().epsilon),
                default_w: self.default_w,
                default_theta: self.default_theta,
            }),
            other => return Err(ConfigError::UnknownModel(other.to_string())),
        };
        model.validate()?;
        let quant = Quantization { scale: self.scale, cost_cap: self.cap };
        quant.validate()?;
        Ok(SndConfig {
            model,
            quant,
            bank_policy: BankPolicy::PerBin { gamma: self.gamma },
            symmetric: self.symmetric,
            dense_limit: self.dense_limit,
        })
    }
}
