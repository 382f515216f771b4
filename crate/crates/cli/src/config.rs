//! Optional JSON config file. Keys mirror the long flag names with `_`
//! in place of `-`; flags given on the command line win.

use std::path::Path;

use serde::Deserialize;

use brdf_core::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub resolution: Option<usize>,
    pub truncation: Option<f64>,
    pub no_postprocess: Option<bool>,
    pub smooth_iters: Option<usize>,
    pub simplify: Option<f64>,
    pub fit_threshold: Option<f64>,
    pub endpoint_weight: Option<f64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })
    }
}
