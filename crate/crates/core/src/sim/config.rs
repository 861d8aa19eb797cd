use super::profiles::{synth_profiles, Profiles};
use crate::dispatch::{DispatchConfig, Objective, Variant};
use crate::error::{Error, Result};
use crate::grid::{read_matpower, Network, Scenario};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Run description, loadable from TOML. Every field mirrors a command-line
/// flag; flags override the file.
///
/// ```toml
/// scenario = "data/scenarios/case33.toml"
/// profiles = "synth:7"
/// objective = "curt"
/// variant = "F1P0"
/// w = 0.0
/// days = 7
/// out = "out/case33"
///
/// [dispatch]
/// v_max = 1.05
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    /// `synth:<seed>` or a `step,pv_norm,load_norm` CSV path.
    pub profiles: String,
    pub dt_minutes: u32,
    pub objective: Objective,
    pub variant: Variant,
    pub w: f64,
    pub days: usize,
    pub out: PathBuf,
    pub weights: Vec<f64>,
    pub variants: Vec<Variant>,
    pub dump_lp: bool,
    pub dump_sensitivities: bool,
    pub dispatch: DispatchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: None,
            scenario: None,
            profiles: "synth:42".into(),
            dt_minutes: 15,
            objective: Objective::Curtailment,
            variant: Variant::Unfair,
            w: 0.0,
            days: 7,
            out: PathBuf::from("out"),
            weights: Vec::new(),
            variants: Variant::SWEEP.to_vec(),
            dump_lp: false,
            dump_sensitivities: false,
            dispatch: DispatchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            msg: e.message().to_string(),
        })
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut c = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.case, &mut c.scenario].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if !c.profiles.starts_with("synth:") && Path::new(&c.profiles).is_relative() {
            c.profiles = dir.join(&c.profiles).to_string_lossy().into_owned();
        }
        Ok(c)
    }

    /// Dispatch settings with the objective and variant applied.
    pub fn dispatch_config(&self) -> DispatchConfig {
        let mut d = self.dispatch.clone();
        d.objective = self.objective;
        d.dt_hours = self.dt_minutes as f64 / 60.0;
        d.with_variant(self.variant, self.w)
    }

    /// Case file with the scenario overlay applied. An explicit case
    /// replaces the one the scenario names.
    pub fn network(&self) -> Result<Network> {
        match (&self.case, &self.scenario) {
            (Some(case), Some(sc)) => Scenario::load(sc)?.apply(&read_matpower(case)?),
            (None, Some(sc)) => Scenario::load(sc)?.load_network(),
            (Some(case), None) => read_matpower(case),
            (None, None) => Err(Error::Config("need a case file or a scenario".into())),
        }
    }

    pub fn load_profiles(&self) -> Result<Profiles> {
        match self.profiles.strip_prefix("synth:") {
            Some(seed) => {
                let seed = seed
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad synthetic profile seed '{seed}'")))?;
                synth_profiles(self.days, self.dt_minutes, seed)
            }
            None => Profiles::read_csv(&self.profiles, self.dt_minutes)?.truncated(self.days),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_defaults() {
        let c = RunConfig::from_toml(
            "profiles = \"synth:3\"\nobjective = \"bill\"\nvariant = \"F1P1\"\nw = 0.2\ndays = 1\n[dispatch]\nv_max = 1.04\n",
        )
        .unwrap();
        assert_eq!(c.objective, Objective::Bill);
        let d = c.dispatch_config();
        assert!(d.feedback && d.past_aware);
        assert_eq!(d.w, 0.2);
        assert_eq!(d.v_max, 1.04);
        assert_eq!(d.v_min, 0.95);
        assert_eq!(c.load_profiles().unwrap().len(), 96);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml("dayz = 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(RunConfig::from_toml("variant = \"F2P0\"\n").is_err());
    }
}
