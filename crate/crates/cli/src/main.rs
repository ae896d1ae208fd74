use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use basmin::experiment::{run_sweep, summarize, SweepRow};
use basmin::output::{sig6, write_file, write_sessions_csv, write_summary_csv, write_sweep_csv};
use basmin::scenario::{
    load_scenario, load_sweep, profiles_toml, ScenarioConfig, SweepParam, SweepSpec,
};
use basmin::{builtin_profiles, SchemeKind};

#[derive(Parser)]
#[command(
    name = "basmin",
    version,
    about = "Utility-based bandwidth allocation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario with one scheme.
    Run {
        /// Scenario file (TOML). Without it, the built-in defaults are used.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        scheme: Option<SchemeKind>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a parameter sweep over schemes and seeds.
    Sweep {
        /// Sweep file (TOML).
        #[arg(
            long,
            conflicts_with = "experiment",
            required_unless_present = "experiment"
        )]
        spec: Option<PathBuf>,
        /// Built-in experiment: worth_vs_capacity, connworth_vs_rate or
        /// utilization_vs_rate.
        #[arg(long)]
        experiment: Option<String>,
        /// Restrict the sweep to one scheme.
        #[arg(long)]
        scheme: Option<SchemeKind>,
        #[arg(long)]
        replications: Option<u32>,
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the built-in traffic profiles.
    Profiles {
        /// Emit a scenario fragment instead of a table.
        #[arg(long)]
        toml: bool,
    },
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    /// Greedy increment size, Mbps.
    #[arg(long)]
    delta: Option<f64>,
    /// Trunk-reservation RT utility threshold.
    #[arg(long)]
    eta: Option<f64>,
    /// Total capacity, Mbps.
    #[arg(long)]
    capacity: Option<f64>,
    /// Arrival rate multiplier.
    #[arg(long = "rate-mult")]
    rate_mult: Option<f64>,
}

impl Overrides {
    fn apply(&self, config: &mut ScenarioConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(delta) = self.delta {
            config.params.basmin.delta = delta;
        }
        if let Some(eta) = self.eta {
            config.params.trunk.eta = eta;
        }
        if let Some(c) = self.capacity {
            if !(c.is_finite() && c > 0.0) {
                bail!("--capacity must be positive, got {c}");
            }
            config.set_total_capacity(c);
        }
        if let Some(m) = self.rate_mult {
            config.rate_multiplier = m;
        }
        config.validate()?;
        Ok(())
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_file(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn run_one(
    scenario: Option<PathBuf>,
    scheme: Option<SchemeKind>,
    overrides: Overrides,
    out: PathBuf,
) -> Result<()> {
    let mut config = match scenario {
        Some(path) => {
            load_scenario(&path).with_context(|| format!("loading {}", path.display()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(kind) = scheme {
        config.scheme = kind;
    }
    overrides.apply(&mut config)?;

    let report = basmin::run(&config)?;
    let row = SweepRow::from_report(
        SweepParam::ArrivalRateMultiplier.as_str(),
        config.rate_multiplier,
        &report,
    );
    write(&out.join("scenario.toml"), config.to_toml().as_bytes())?;
    write(
        &out.join("sweep.csv"),
        &write_sweep_csv(Vec::new(), &[row])?,
    )?;
    write(
        &out.join("sessions.csv"),
        &write_sessions_csv(Vec::new(), &report.sessions)?,
    )?;

    println!("scheme                  {}", report.scheme);
    println!("seed                    {}", report.seed);
    println!("events                  {}", report.events);
    println!(
        "time_avg_total_worth    {}",
        sig6(report.time_avg_total_worth)
    );
    println!(
        "mean_connection_worth   {}",
        sig6(report.mean_connection_worth)
    );
    println!(
        "mean_link_utilization   {}",
        sig6(report.mean_link_utilization)
    );
    let t = report.totals;
    println!(
        "sessions                offered {} accepted {} rejected {} preempted {} completed {}",
        t.offered, t.accepted, t.rejected, t.preempted, t.completed
    );
    println!("output                  {}", out.display());
    Ok(())
}

struct SweepArgs {
    spec: Option<PathBuf>,
    experiment: Option<String>,
    scheme: Option<SchemeKind>,
    replications: Option<u32>,
    horizon: Option<f64>,
    overrides: Overrides,
    out: PathBuf,
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut spec = match (args.spec, args.experiment) {
        (Some(path), _) => {
            load_sweep(&path).with_context(|| format!("loading {}", path.display()))?
        }
        (None, Some(name)) => SweepSpec::builtin(&name)?,
        (None, None) => bail!("either --spec or --experiment is required"),
    };
    if let Some(kind) = args.scheme {
        spec.schemes = vec![kind];
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    if let Some(h) = args.horizon {
        spec.base.horizon_s = h;
        spec.base.warmup_s = 0.1 * h;
    }
    args.overrides.apply(&mut spec.base)?;
    spec.validate()?;

    let rows = run_sweep(&spec)?;
    let summary = summarize(&rows);
    let out = args.out;
    write(&out.join("scenario.toml"), spec.base.to_toml().as_bytes())?;
    write(&out.join("sweep.csv"), &write_sweep_csv(Vec::new(), &rows)?)?;
    write(
        &out.join("summary.csv"),
        &write_summary_csv(Vec::new(), &summary)?,
    )?;

    println!(
        "{} ({} over {} values, {} runs)",
        spec.name,
        spec.param,
        spec.values.len(),
        rows.len()
    );
    println!(
        "{:<22} {:>10} {:>12} {:>12} {:>12}",
        "scheme",
        spec.param.as_str().split('_').next_back().unwrap_or(""),
        "worth",
        "conn_worth",
        "utilization"
    );
    for s in &summary {
        println!(
            "{:<22} {:>10} {:>12} {:>12} {:>12}",
            s.scheme.as_str(),
            sig6(s.value),
            sig6(s.time_avg_total_worth.mean),
            sig6(s.mean_connection_worth.mean),
            sig6(s.mean_link_utilization.mean)
        );
    }
    println!("output {}", out.display());
    Ok(())
}

fn profiles(as_toml: bool) -> Result<()> {
    let all = builtin_profiles();
    if as_toml {
        print!("{}", profiles_toml(&all));
        return Ok(());
    }
    println!(
        "{:<3} {:<34} {:<14} {:>3} {:>9} {:>9} {:>14}",
        "id", "label", "class", "i", "b_min", "b_max", "volume_mbit"
    );
    for p in &all {
        println!(
            "{:<3} {:<34} {:<14} {:>3} {:>9} {:>9} {:>14}",
            p.id,
            p.label,
            p.class().as_str(),
            p.priority.level(),
            sig6(p.utility.b_min()),
            sig6(p.utility.b_max()),
            format!("{}-{}", sig6(p.volume_mbit[0]), sig6(p.volume_mbit[1]))
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            scheme,
            overrides,
            out,
        } => run_one(scenario, scheme, overrides, out),
        Command::Sweep {
            spec,
            experiment,
            scheme,
            replications,
            horizon,
            overrides,
            out,
        } => sweep(SweepArgs {
            spec,
            experiment,
            scheme,
            replications,
            horizon,
            overrides,
            out,
        }),
        Command::Profiles { toml } => profiles(toml),
    }
}
