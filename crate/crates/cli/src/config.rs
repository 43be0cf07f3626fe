//! Sweep configuration files.
//!
//! A config is TOML with one `[[sweep]]` table per curve family. Keys mirror
//! [`SweepSpec`]:
//!
//! ```toml
//! [[sweep]]
//! kind = "pd_vs_snr"
//! u = 5
//! a_values = [0.75, 1.0, 1.5, 2.0]
//! pf_fixed = 0.1
//! snr_db_range = { start = -10.0, stop = 30.0, step = 0.5 }
//!
//! [[sweep]]
//! kind = "comp_roc"
//! u = 5
//! a_values = [1.0, 2.0]
//! snr_db_fixed = 10.0
//! pf_grid = { start = 0.001, stop = 0.999, points = 50 }   # or a list
//! engine = "simulate"
//! trials = 100000
//! seed = 7
//! ```

use edsense::sweep::SweepSpec;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub sweep: Vec<SweepSpec>,
}

impl SweepConfig {
    /// Parses and validates a config. Parse errors carry the TOML line and
    /// column; validation errors name the offending sweep and field.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("{origin}: {e}")))?;
        if cfg.sweep.is_empty() {
            return Err(CliError::Usage(format!("{origin}: no [[sweep]] sections")));
        }
        for (i, spec) in cfg.sweep.iter().enumerate() {
            spec.grid()
                .map_err(|e| CliError::Usage(format!("{origin}: sweep #{}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }
}
