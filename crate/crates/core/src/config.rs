//! Run configuration, read from a TOML file.
//!
//! Every key is optional; missing keys take the Starlink shell defaults. A
//! minimal file overriding a few values:
//!
//! ```toml
//! duration_s = 600
//!
//! [constellation]
//! phase_factor = 5
//!
//! [topology]
//! lisl_range_km = 1700.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::constellation::ConstellationConfig;
use crate::error::{Error, Result};
use crate::experiment::{self, Scenario};
use crate::topology::TopologyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub duration_s: u64,
    pub slot_s: u64,
    /// Where `run` writes its files. Not echoed into outputs.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub constants: PhysicalConstants,
    pub constellation: ConstellationConfig,
    pub topology: TopologyParams,
    pub scenarios: Vec<Scenario>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            duration_s: 3600,
            slot_s: 1,
            output_dir: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
            constants: PhysicalConstants::default(),
            constellation: ConstellationConfig::default(),
            topology: TopologyParams::default(),
            scenarios: experiment::builtin_scenarios(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Read { path: path.to_owned(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.constellation.validate()?;
        self.topology.validate()?;
        experiment::slot_count(self.duration_s, self.slot_s)?;
        if self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("no scenarios configured".into()));
        }
        let mut names: Vec<String> = self.scenarios.iter().map(Scenario::file_stem).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("scenario names must map to distinct file names".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::InvalidConfig("at least one output format is required".into()));
        }
        Ok(())
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name || s.file_stem() == name)
            .ok_or_else(|| Error::InvalidInput(format!("no scenario named {name:?}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serialises to TOML")
    }
}
