use anyhow::{bail, Context, Result};
use capt_core::dsp::MfccConfig;
use capt_core::protocol::TrainConfig;

/// Feature and training settings after `key=value` overrides.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub mfcc: MfccConfig,
    pub train: TrainConfig,
}

impl Settings {
    pub fn from_overrides(overrides: &[String]) -> Result<Self> {
        let mut s = Settings::default();
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .with_context(|| format!("override '{item}' is not key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !s.mfcc.set(key, value)? && !s.train.set(key, value)? {
                bail!("unknown config key '{key}'");
            }
        }
        s.mfcc.validate()?;
        s.train.validate()?;
        Ok(s)
    }
}
