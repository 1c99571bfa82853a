use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use conemcf::acceptance::{self, CRITERIA};
use conemcf::driver::{self, AUDIT_FILE};
use conemcf::io::read_timeseries;
use conemcf::{parse_config, AuditReport, StepControl};

/// Mean curvature flow of spacelike graphs in convex cones of Minkowski space.
#[derive(Parser)]
#[command(name = "conemcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the flow described by a config file and audit the run.
    Run(RunArgs),
    /// Execute the acceptance suite.
    Verify {
        /// Criterion numbers to run (all when omitted).
        criteria: Vec<u8>,
    },
    /// Print the exact expanding solution sqrt(k^2 + 2nt) at snapshot times.
    Homothetic {
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the audit from a time series file.
    Report {
        timeseries: PathBuf,
        /// Directory for audit.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Sets both Nr and Ntheta.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    axisymmetric: bool,
}

fn print_audit(report: &AuditReport) {
    for c in &report.checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!("{verdict:4} {:18} worst margin {:+.3e} at t = {}  ({})", c.name, c.worst_margin, c.at_t, c.detail);
    }
    if let Some(f) = &report.j_fit {
        println!(
            "J fit: 1/max J = log({:.3e} + 2nt) / {:.4e}, R^2 = {:.4} over {} samples",
            f.b, f.a, f.r_squared, f.samples
        );
    }
    println!("audit {}", if report.passed { "passed" } else { "FAILED" });
}

fn run(args: &RunArgs) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = parse_config(&text)?;
    if let Some(t) = args.t_end {
        cfg.time.t_end = t;
    }
    if let Some(r) = args.resolution {
        cfg.mesh.nr = r;
        cfg.mesh.ntheta = r;
    }
    if args.axisymmetric {
        cfg.mesh.axisymmetric = true;
    }
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let outcome = driver::run(&cfg, Some(&out))?;
    println!(
        "{} snapshots, {} steps, {} rejected; outputs in {}",
        outcome.records.len(),
        outcome.steps,
        outcome.rejections,
        out.display()
    );
    print_audit(&outcome.audit);
    Ok(outcome.audit.passed)
}

fn verify(criteria: &[u8]) -> anyhow::Result<bool> {
    for id in criteria {
        if !CRITERIA.iter().any(|(i, _)| i == id) {
            bail!("no acceptance criterion {id}; valid numbers are 1 to {}", CRITERIA.len());
        }
    }
    let mut all = true;
    for (id, _) in CRITERIA {
        if criteria.is_empty() || criteria.contains(&id) {
            let out = acceptance::evaluate(id);
            println!("{out}");
            all &= out.passed;
        }
    }
    Ok(all)
}

fn homothetic(k: f64, n: usize, t_end: f64, out: Option<&Path>) -> anyhow::Result<bool> {
    let ctl = StepControl {
        t_end,
        ..StepControl::default()
    };
    let mut times = vec![0.0];
    times.extend(ctl.snapshot_times());
    let mut text = String::from("t,u\n");
    for (t, u) in driver::homothetic_trajectory(k, n, &times)? {
        text.push_str(&format!("{t:.16e},{u:.16e}\n"));
    }
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn report(timeseries: &Path, out: Option<&Path>) -> anyhow::Result<bool> {
    let records = read_timeseries(timeseries).with_context(|| format!("reading {}", timeseries.display()))?;
    let report = conemcf::diagnostics::audit(&records)?;
    print_audit(&report);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        driver::write_json(&dir.join(AUDIT_FILE), &report)?;
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Verify { criteria } => verify(criteria),
        Command::Homothetic { k, n, t_end, out } => homothetic(*k, *n, *t_end, out.as_deref()),
        Command::Report { timeseries, out } => report(timeseries, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
