use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Normalized PV (MPP) and demand traces. Per-node values are these times
/// the node's nominal PV capacity or load.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profiles {
    pub dt_minutes: u32,
    pub days: usize,
    pub pv_norm: Vec<f64>,
    pub load_norm: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    step: usize,
    pv_norm: f64,
    load_norm: f64,
}

fn check_dt(dt_minutes: u32) -> Result<usize> {
    if dt_minutes == 0 || 1440 % dt_minutes != 0 {
        return Err(Error::Config(format!("dt of {dt_minutes} min does not divide a day")));
    }
    Ok((1440 / dt_minutes) as usize)
}

impl Profiles {
    pub fn steps_per_day(&self) -> usize {
        (1440 / self.dt_minutes) as usize
    }

    pub fn len(&self) -> usize {
        self.pv_norm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pv_norm.is_empty()
    }

    pub fn dt_hours(&self) -> f64 {
        self.dt_minutes as f64 / 60.0
    }

    pub fn validate(&self) -> Result<()> {
        let spd = check_dt(self.dt_minutes)?;
        let n = self.days * spd;
        if self.days == 0 {
            return Err(Error::Config("profiles cover no full day".into()));
        }
        for v in [&self.pv_norm, &self.load_norm] {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, got: v.len() });
            }
            if let Some(bad) = v.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
                return Err(Error::Config(format!("profile value {bad} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// First `days` days.
    pub fn truncated(&self, days: usize) -> Result<Profiles> {
        if days == 0 || days > self.days {
            return Err(Error::Config(format!("need {days} days of profiles, have {}", self.days)));
        }
        let n = days * self.steps_per_day();
        Ok(Profiles {
            dt_minutes: self.dt_minutes,
            days,
            pv_norm: self.pv_norm[..n].to_vec(),
            load_norm: self.load_norm[..n].to_vec(),
        })
    }

    /// Reads a `step,pv_norm,load_norm` CSV; whole days only.
    pub fn read_csv(path: impl AsRef<Path>, dt_minutes: u32) -> Result<Profiles> {
        let spd = check_dt(dt_minutes)?;
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["step", "pv_norm", "load_norm"] {
            return Err(Error::Parse { line: 1, msg: "profiles header must be step,pv_norm,load_norm".into() });
        }
        let mut pv_norm = Vec::new();
        let mut load_norm = Vec::new();
        for (k, row) in rdr.deserialize::<ProfileRow>().enumerate() {
            let row = row?;
            if row.step != k {
                return Err(Error::Parse { line: k + 2, msg: format!("expected step {k}, got {}", row.step) });
            }
            pv_norm.push(row.pv_norm);
            load_norm.push(row.load_norm);
        }
        if pv_norm.is_empty() || pv_norm.len() % spd != 0 {
            return Err(Error::Config(format!("{} profile rows is not a whole number of days", pv_norm.len())));
        }
        let p = Profiles { dt_minutes, days: pv_norm.len() / spd, pv_norm, load_norm };
        p.validate()?;
        Ok(p)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (step, (&pv_norm, &load_norm)) in self.pv_norm.iter().zip(&self.load_norm).enumerate() {
            w.serialize(ProfileRow { step, pv_norm, load_norm })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First-order autoregressive noise, smooth at the step scale.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, sigma: f64) -> Vec<f64> {
    let mut x = 0.0;
    let innov = sigma * (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            x = phi * x + innov * (rng.gen::<f64>() * 2.0 - 1.0) * 3f64.sqrt();
            x
        })
        .collect()
}

/// Synthetic sunny, low-demand days: a clear-sky half-sine PV day between
/// 06:00 and 18:30 and a two-peak demand curve whose peak stays below half
/// the PV peak, both with multiplicative AR(1) noise. Deterministic per seed.
pub fn synth_profiles(days: usize, dt_minutes: u32, seed: u64) -> Result<Profiles> {
    let spd = check_dt(dt_minutes)?;
    if days == 0 {
        return Err(Error::Config("days must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = days * spd;
    let pv_noise = ar1(&mut rng, n, 0.85, 0.04);
    let load_noise = ar1(&mut rng, n, 0.9, 0.05);
    let (rise, set) = (6.0, 18.5);
    let mut pv_norm = Vec::with_capacity(n);
    let mut load_norm = Vec::with_capacity(n);
    for k in 0..n {
        // evaluate at the middle of the step
        let hour = ((k % spd) as f64 + 0.5) * dt_minutes as f64 / 60.0;
        let sun = if hour > rise && hour < set { (PI * (hour - rise) / (set - rise)).sin() } else { 0.0 };
        pv_norm.push((0.97 * sun * (1.0 + pv_noise[k])).clamp(0.0, 1.0));
        let bump = |mu: f64, sd: f64| (-0.5 * ((hour - mu) / sd).powi(2)).exp();
        let shape = 0.45 + 0.35 * bump(7.5, 1.2) + 0.55 * bump(19.5, 1.8);
        load_norm.push(shape * (1.0 + load_noise[k]));
    }
    // cap the demand peak at 45 % of the PV peak
    let pv_peak = pv_norm.iter().cloned().fold(0.0, f64::max);
    let load_peak = load_norm.iter().cloned().fold(0.0, f64::max);
    let scale = 0.45 * pv_peak / load_peak;
    for v in &mut load_norm {
        *v = (*v * scale).clamp(0.0, 1.0);
    }
    Ok(Profiles { dt_minutes, days, pv_norm, load_norm })
}
