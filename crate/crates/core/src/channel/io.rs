//! JSON document for channel realizations.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DDChannel, DDPath};
use crate::error::{Error, Result};

pub const CHANNEL_SCHEMA: &str = "ddest.channel/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub tau: f64,
    pub nu: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub schema: String,
    #[serde(rename = "tau_D")]
    pub tau_d: f64,
    #[serde(rename = "nu_D")]
    pub nu_d: f64,
    pub seed: Option<u64>,
    pub paths: Vec<PathRecord>,
}

impl From<&DDChannel> for ChannelDocument {
    fn from(ch: &DDChannel) -> Self {
        Self {
            schema: CHANNEL_SCHEMA.to_string(),
            tau_d: ch.delay_spread(),
            nu_d: ch.doppler_spread(),
            seed: ch.seed(),
            paths: ch
                .paths()
                .iter()
                .map(|p| PathRecord { tau: p.delay, nu: p.doppler, re: p.gain.re, im: p.gain.im })
                .collect(),
        }
    }
}

impl TryFrom<ChannelDocument> for DDChannel {
    type Error = Error;

    fn try_from(doc: ChannelDocument) -> Result<Self> {
        if doc.schema != CHANNEL_SCHEMA {
            return Err(Error::SchemaMismatch { expected: CHANNEL_SCHEMA.into(), found: doc.schema });
        }
        let paths = doc
            .paths
            .iter()
            .map(|p| DDPath { delay: p.tau, doppler: p.nu, gain: Complex64::new(p.re, p.im) })
            .collect();
        Ok(DDChannel::new(paths, doc.tau_d, doc.nu_d)?.with_seed(doc.seed))
    }
}

impl DDChannel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ChannelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
