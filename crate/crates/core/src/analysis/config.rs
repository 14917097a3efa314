use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circle_map::MapSpec;
use crate::energy::{ClassifierConfig, ConditionTag};
use crate::error::{check_lambda, Error, Result};
use crate::{energy, logkernel, poisson};

pub const DEFAULT_LAMBDAS: [f64; 4] = [-0.5, 0.0, 1.0, 2.0];
pub const DEFAULT_DYADIC_LEVELS: u32 = 14;
pub const DEFAULT_DISK_LEVELS: u32 = 10;
pub const DEFAULT_DIRECT_RESOLUTION: usize = 512;

/// Everything that determines the content of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub map: MapSpec,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Truncation level for (iii)-dyadic, (iv) and (v).
    #[serde(default = "default_dyadic_levels")]
    pub dyadic_levels: u32,
    /// Truncation level for (i) and (ii).
    #[serde(default = "default_disk_levels")]
    pub disk_levels: u32,
    #[serde(default = "default_boundary_nodes")]
    pub boundary_nodes: usize,
    #[serde(default = "default_cell_order")]
    pub cell_order: usize,
    /// Source-grid size for (iii)-direct.
    #[serde(default = "default_direct_resolution")]
    pub direct_resolution: usize,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<ConditionTag>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    /// Worker threads; results do not depend on it, so it is not echoed.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
}

fn default_lambdas() -> Vec<f64> {
    DEFAULT_LAMBDAS.to_vec()
}
fn default_dyadic_levels() -> u32 {
    DEFAULT_DYADIC_LEVELS
}
fn default_disk_levels() -> u32 {
    DEFAULT_DISK_LEVELS
}
fn default_boundary_nodes() -> usize {
    poisson::DEFAULT_BOUNDARY_NODES
}
fn default_cell_order() -> usize {
    poisson::DEFAULT_CELL_ORDER
}
fn default_direct_resolution() -> usize {
    DEFAULT_DIRECT_RESOLUTION
}
fn default_conditions() -> Vec<ConditionTag> {
    ConditionTag::ALL.to_vec()
}

impl AnalysisConfig {
    pub fn new(map: MapSpec) -> Self {
        Self {
            map,
            lambdas: default_lambdas(),
            dyadic_levels: DEFAULT_DYADIC_LEVELS,
            disk_levels: DEFAULT_DISK_LEVELS,
            boundary_nodes: poisson::DEFAULT_BOUNDARY_NODES,
            cell_order: poisson::DEFAULT_CELL_ORDER,
            direct_resolution: DEFAULT_DIRECT_RESOLUTION,
            conditions: default_conditions(),
            classifier: ClassifierConfig::default(),
            threads: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.map.to_map()?;
        if self.lambdas.is_empty() {
            return Err(Error::Config("lambda list is empty".into()));
        }
        for &l in &self.lambdas {
            check_lambda("AnalysisConfig", l)?;
        }
        if self.conditions.is_empty() {
            return Err(Error::Config("condition set is empty".into()));
        }
        let mut seen = self.conditions.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.conditions.len() {
            return Err(Error::Config("condition set has duplicates".into()));
        }
        let needs = |c: ConditionTag| self.conditions.contains(&c);
        if needs(ConditionTag::Iv) || needs(ConditionTag::V) {
            check_range("dyadic_levels", self.dyadic_levels, 1, energy::MAX_DYADIC_LEVEL)?;
        }
        if needs(ConditionTag::IiiDyadic) {
            check_range("dyadic_levels", self.dyadic_levels, 2, logkernel::MAX_DYADIC_LEVEL)?;
        }
        if needs(ConditionTag::I) || needs(ConditionTag::Ii) {
            check_range("disk_levels", self.disk_levels, 1, poisson::MAX_DISK_LEVEL)?;
            if !(16..=1 << 22).contains(&self.boundary_nodes) {
                return Err(Error::Config(format!("boundary_nodes = {} outside [16, 2^22]", self.boundary_nodes)));
            }
            if !(1..=16).contains(&self.cell_order) {
                return Err(Error::Config(format!("cell_order = {} outside [1, 16]", self.cell_order)));
            }
        }
        if needs(ConditionTag::IiiDirect)
            && !(logkernel::MIN_DIRECT_RESOLUTION..=logkernel::MAX_DIRECT_RESOLUTION).contains(&self.direct_resolution)
        {
            return Err(Error::Config(format!(
                "direct_resolution = {} outside [{}, {}]",
                self.direct_resolution,
                logkernel::MIN_DIRECT_RESOLUTION,
                logkernel::MAX_DIRECT_RESOLUTION
            )));
        }
        if !(self.classifier.slope_epsilon >= 0.0) || self.classifier.min_levels < 2 {
            return Err(Error::Config("classifier needs slope_epsilon >= 0 and min_levels >= 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        Ok(())
    }
}

fn check_range(name: &str, v: u32, lo: u32, hi: u32) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}
