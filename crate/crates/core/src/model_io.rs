//! JSON envelope for fitted models.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holt_winters::HwFit;
use crate::sarimax::FittedModel;

pub const VERSION: &str = concat!("trafficcast ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", content = "model")]
pub enum SavedModel {
    #[serde(rename = "sarimax")]
    Sarimax(FittedModel),
    #[serde(rename = "holt_winters_additive")]
    HoltWinters(HwFit),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub version: String,
    #[serde(flatten)]
    pub model: SavedModel,
}

impl ModelEnvelope {
    pub fn new(model: SavedModel) -> Self {
        Self {
            version: VERSION.to_string(),
            model,
        }
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read(r: impl Read) -> Result<Self> {
        let env: Self = serde_json::from_reader(r)?;
        if !env.version.starts_with("trafficcast ") {
            return Err(Error::InvalidParameter(format!("unrecognised model version {:?}", env.version)));
        }
        Ok(env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holt_winters::{HwParams, HwState};
    use crate::sarimax::{ModelOrder, SarimaxParams, SeasonalOrder};

    #[test]
    fn sarimax_round_trip_is_bit_exact() {
        let m = FittedModel {
            order: ModelOrder::new(2, 1, 1).unwrap(),
            seasonal: SeasonalOrder::new(1, 0, 1, 24).unwrap(),
            params: SarimaxParams {
                phi: vec![0.1 + 0.2, -1.0 / 3.0],
                theta: vec![std::f64::consts::PI / 7.0],
                seasonal_phi: vec![1e-300],
                seasonal_theta: vec![-0.999_999_999_999_9],
                beta: vec![2.0f64.sqrt()],
                mean: None,
                sigma2: 5e-324,
            },
            exog_names: vec!["weekend".into()],
            loglik: -1234.567_890_123_456_7,
            aic: 2481.135_780_246_913,
            n_obs_effective: 999,
            converged: true,
            evaluations: 321,
            timed_out: false,
        };
        let env = ModelEnvelope::new(SavedModel::Sarimax(m));
        let mut buf = Vec::new();
        env.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"model_type\": \"sarimax\""));
        let back = ModelEnvelope::read(buf.as_slice()).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn holt_winters_tag() {
        let env = ModelEnvelope::new(SavedModel::HoltWinters(HwFit {
            params: HwParams::new(0.3, 0.1, 0.2, 4).unwrap(),
            state: HwState {
                level: 1.0,
                trend: 0.1,
                seasonals: vec![0.0, 1.0, 0.0, -1.0],
                t: 8,
            },
            sse: 0.25,
        }));
        let text = serde_json::to_string(&env).unwrap();
        assert!(text.contains("holt_winters_additive"));
        assert_eq!(serde_json::from_str::<ModelEnvelope>(&text).unwrap(), env);
    }
}
