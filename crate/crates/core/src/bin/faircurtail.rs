use clap::{Args, Parser, Subcommand};
use faircurtail::dispatch::{Objective, Variant};
use faircurtail::sim::output::{write_run_outputs, write_sweep_outputs};
use faircurtail::sim::{pareto_sweep, run_simulation, RunConfig, SimOptions};
use faircurtail::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "faircurtail", version, about = "Fairness-aware PV curtailment simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One closed-loop simulation.
    Run(Common),
    /// One simulation per (variant, w) pair.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated fairness weights.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Comma-separated variants (default: F0P0,F0P1,F1P0,F1P1).
        #[arg(long, value_delimiter = ',')]
        variants: Option<Vec<Variant>>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with defaults for every flag below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// MATPOWER case file.
    #[arg(long)]
    case: Option<PathBuf>,
    /// Scenario overlay (PV placement, load scaling).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// `synth:<seed>` or a step,pv_norm,load_norm CSV.
    #[arg(long)]
    profiles: Option<String>,
    #[arg(long)]
    dt_minutes: Option<u32>,
    /// bill | curt
    #[arg(long)]
    objective: Option<Objective>,
    /// unfair | F0P0 | F0P1 | F1P0 | F1P1
    #[arg(long)]
    variant: Option<Variant>,
    /// Fairness weight.
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    days: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every step's LP to <out>/debug.
    #[arg(long)]
    dump_lp: bool,
    /// Write every step's sensitivity matrices to <out>/debug.
    #[arg(long)]
    dump_sensitivities: bool,
}

impl Common {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        c.case = self.case.or(c.case);
        c.scenario = self.scenario.or(c.scenario);
        c.profiles = self.profiles.unwrap_or(c.profiles);
        c.dt_minutes = self.dt_minutes.unwrap_or(c.dt_minutes);
        c.objective = self.objective.unwrap_or(c.objective);
        c.variant = self.variant.unwrap_or(c.variant);
        c.w = self.w.unwrap_or(c.w);
        c.days = self.days.unwrap_or(c.days);
        c.out = self.out.unwrap_or(c.out);
        c.dump_lp |= self.dump_lp;
        c.dump_sensitivities |= self.dump_sensitivities;
        Ok(c)
    }
}

fn options(c: &RunConfig) -> SimOptions {
    SimOptions {
        dump_dir: (c.dump_lp || c.dump_sensitivities).then(|| c.out.join("debug")),
        dump_lp: c.dump_lp,
        dump_sensitivities: c.dump_sensitivities,
        ..Default::default()
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run(common) => {
            let c = common.resolve()?;
            let net = c.network()?;
            let profiles = c.load_profiles()?;
            let report = run_simulation(&net, &c.dispatch_config(), &profiles, &options(&c), c.variant.label())?;
            write_run_outputs(&c.out, &report, &c)?;
            for m in &report.day_metrics {
                println!(
                    "day {}: curtailment {:.2}%  JFI {:.4}  Gini {:.4}",
                    m.day, m.curtail_pct, m.jfi, m.gini
                );
            }
            println!(
                "AC max within v_max + slack in {:.2}% of steps; outputs in {}",
                100.0 * report.ac_within_slack,
                c.out.display()
            );
        }
        Cmd::Sweep { common, weights, variants } => {
            let mut c = common.resolve()?;
            c.weights = weights.unwrap_or(c.weights);
            c.variants = variants.unwrap_or(c.variants);
            if c.weights.is_empty() {
                return Err(Error::Config("sweep needs --weights or `weights` in the config".into()));
            }
            let net = c.network()?;
            let profiles = c.load_profiles()?;
            let rows = pareto_sweep(&net, &c.dispatch_config(), &profiles, &options(&c), &c.variants, &c.weights)?;
            write_sweep_outputs(&c.out, &rows, &c)?;
            for r in &rows {
                match (r.last(), &r.error) {
                    (_, Some(e)) => println!("{} w={}: failed: {e}", r.variant, r.w),
                    (Some(m), None) => println!(
                        "{} w={}: curtailment {:.2}%  JFI {:.4}  Gini {:.4}",
                        r.variant, r.w, m.curtail_pct, m.jfi, m.gini
                    ),
                    (None, None) => println!("{} w={}: no metrics", r.variant, r.w),
                }
            }
            println!("outputs in {}", c.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Step { state, .. } = &e {
                eprintln!("{state}");
            }
            ExitCode::FAILURE
        }
    }
}
