use super::{Network, PvPlant};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Default power-factor slope, |q| <= 0.33 p (power factor 0.95).
pub const DEFAULT_XI: f64 = 0.33;

/// One PV plant to attach, already in per-unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PvSpec {
    /// Bus number as written in the case file.
    pub bus: usize,
    pub s_rated: f64,
    pub p_capacity: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPv {
    pub bus: usize,
    pub s_rated_kva: f64,
    pub p_capacity_kw: f64,
    pub xi: Option<f64>,
}

/// Scenario overlay file:
///
/// ```toml
/// name = "case33-feeder-ends"
/// case = "../case33.m"   # relative to the scenario file
/// load_scale = 0.4
/// xi = 0.33
///
/// [[pv]]
/// bus = 18
/// s_rated_kva = 660
/// p_capacity_kw = 600
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub case: Option<String>,
    #[serde(default = "one")]
    pub load_scale: f64,
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default)]
    pub pv: Vec<ScenarioPv>,
    #[serde(skip)]
    pub source_dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn default_xi() -> f64 {
    DEFAULT_XI
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            msg: e.message().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut s = Self::from_toml(&std::fs::read_to_string(path)?)?;
        s.source_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    /// Path of the referenced case file, resolved against the scenario file.
    pub fn case_path(&self) -> Option<PathBuf> {
        let case = self.case.as_ref()?;
        Some(match &self.source_dir {
            Some(dir) => dir.join(case),
            None => PathBuf::from(case),
        })
    }

    /// Converts the kVA/kW entries to per-unit on the network base.
    pub fn pv_specs(&self, net: &Network) -> Vec<PvSpec> {
        self.pv
            .iter()
            .map(|p| PvSpec {
                bus: p.bus,
                s_rated: net.kw_to_pu(p.s_rated_kva),
                p_capacity: net.kw_to_pu(p.p_capacity_kw),
                xi: p.xi.unwrap_or(self.xi),
            })
            .collect()
    }

    /// Reads the referenced case file and applies the overlay to it.
    pub fn load_network(&self) -> Result<Network> {
        let path = self
            .case_path()
            .ok_or_else(|| Error::Config(format!("scenario '{}' names no case file", self.name)))?;
        self.apply(&super::read_matpower(path)?)
    }

    pub fn apply(&self, net: &Network) -> Result<Network> {
        let mut out = apply_scenario(net, &self.pv_specs(net), self.load_scale)?;
        if !self.name.is_empty() {
            out.name = self.name.clone();
        }
        Ok(out)
    }
}

/// Returns a copy of `net` with PV plants attached and nominal loads scaled.
pub fn apply_scenario(net: &Network, pv_spec: &[PvSpec], load_scale: f64) -> Result<Network> {
    if !(load_scale >= 0.0) || !load_scale.is_finite() {
        return Err(Error::Config(format!("load_scale must be finite and >= 0, got {load_scale}")));
    }
    let mut out = net.clone();
    for ld in &mut out.loads {
        ld.p_nom *= load_scale;
        ld.q_nom *= load_scale;
    }
    let mut next_id = out.pv_plants.iter().map(|p| p.id).max().unwrap_or(0) + 1;
    for spec in pv_spec {
        let bus = net
            .bus_by_id(spec.bus)
            .ok_or_else(|| Error::Validation(format!("PV bus {} not found", spec.bus)))?;
        if !(spec.s_rated > 0.0) {
            return Err(Error::Validation(format!("PV on bus {} needs s_rated > 0", spec.bus)));
        }
        if out.pv_plants.iter().any(|p| p.bus == bus) {
            return Err(Error::Validation(format!(
                "bus {} already hosts a PV plant",
                spec.bus
            )));
        }
        out.pv_plants.push(PvPlant {
            id: next_id,
            bus,
            s_rated: spec.s_rated,
            p_capacity: spec.p_capacity,
            xi: spec.xi,
        });
        next_id += 1;
    }
    out.validate()?;
    Ok(out)
}
