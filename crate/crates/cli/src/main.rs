use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use credit_basis::hedging::HedgeSchedule;
use credit_basis::io::{fmt_bp, fmt_num, fmt_pct, RunConfig};
use credit_basis::run::{self, CurveInput, HedgeMode, Replication};
use credit_basis::{Error, Result};

/// Bond-implied CDS curves, staggered CDS hedges and CDS-bond basis reports.
#[derive(Parser, Debug)]
#[command(name = "credit-basis", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bootstrap a hazard curve from CDS quotes or bonds.
    Curve {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = From::Bonds)]
        from: From,
    },
    /// Bond-implied CDS term structure and Z-spread comparison.
    Bcds {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Hedge schedule for one bond.
    Hedge {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        bond: String,
        #[arg(long, value_enum, default_value_t = Mode::Forward)]
        mode: Mode,
    },
    /// Curve, systematic and full basis reports.
    Basis {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Forward CDS strip on the embedded 8% premium bond example.
    #[command(name = "replicate-fig2a")]
    ReplicateFig2a {
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Spot CDS pairs on the embedded 8% premium bond example.
    #[command(name = "replicate-fig2b")]
    ReplicateFig2b {
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum From {
    Cds,
    Bonds,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Forward,
    Pairs,
    Coarse,
}

/// Config file plus per-field overrides; flags win over file values.
#[derive(Args, Debug)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    discount_curve: Option<String>,
    #[arg(long)]
    bonds: Option<String>,
    #[arg(long)]
    cds_quotes: Option<String>,
    #[arg(long)]
    hazard_curve: Option<String>,
    #[arg(long)]
    recovery: Option<String>,
    #[arg(long)]
    coupon_recovery: Option<String>,
    #[arg(long)]
    frequency: Option<String>,
    #[arg(long)]
    grid_step: Option<String>,
    #[arg(long)]
    refinement: Option<String>,
    /// Fill missing market tenors by linear interpolation.
    #[arg(long)]
    interpolate: bool,
    #[arg(long)]
    output_dir: Option<String>,
    /// Comma-separated report tenors in years.
    #[arg(long)]
    tenors: Option<String>,
    /// Comma-separated add-on maturities for the coarse hedge.
    #[arg(long)]
    candidates: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("discount_curve", &self.discount_curve),
            ("bonds", &self.bonds),
            ("cds_quotes", &self.cds_quotes),
            ("hazard_curve", &self.hazard_curve),
            ("recovery", &self.recovery),
            ("coupon_recovery", &self.coupon_recovery),
            ("frequency", &self.frequency),
            ("grid_step", &self.grid_step),
            ("refinement", &self.refinement),
            ("output_dir", &self.output_dir),
            ("tenors", &self.tenors),
            ("candidates", &self.candidates),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).map_err(Error::Usage)?;
            }
        }
        if self.interpolate {
            cfg.interpolate = true;
        }
        Ok(cfg)
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn print_schedule(s: &HedgeSchedule) {
    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "term", "fwd_bcds", "price", "notional", "prot_cf", "rfc", "cf_diff", "px_diff"
    );
    for r in &s.rows {
        let o = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
        println!(
            "{:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
            fmt_num(r.term),
            fmt_bp(r.fwd_bcds),
            fmt_pct(r.fwd_price),
            o(r.hedge_notional, fmt_num),
            o(r.protection_cf, fmt_bp),
            o(r.rfc, fmt_bp),
            o(r.cf_diff, fmt_bp),
            fmt_bp(r.price_diff),
        );
    }
    println!(
        "max |cf_diff| = {} bp, max |price_diff| = {} bp",
        fmt_bp(s.max_abs_cf_diff()),
        fmt_bp(s.max_abs_price_diff())
    );
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Curve { run, from } => {
            let input = match from {
                From::Cds => CurveInput::Cds,
                From::Bonds => CurveInput::Bonds,
            };
            print_files(&run::run_curve(&run.config()?, input)?);
        }
        Command::Bcds { run } => print_files(&run::run_bcds(&run.config()?)?),
        Command::Hedge { run, bond, mode } => {
            let mode = match mode {
                Mode::Forward => HedgeMode::Forward,
                Mode::Pairs => HedgeMode::Pairs,
                Mode::Coarse => HedgeMode::Coarse,
            };
            let out = run::run_hedge(&run.config()?, &bond, mode)?;
            print_files(&out.files);
        }
        Command::Basis { run } => print_files(&run::run_basis(&run.config()?)?.files),
        Command::ReplicateFig2a { output_dir } => {
            let out = run::run_replication(&output_dir, Replication::ForwardStrip)?;
            print_schedule(&out.schedule);
            print_files(&out.files);
        }
        Command::ReplicateFig2b { output_dir } => {
            let out = run::run_replication(&output_dir, Replication::SpotPairs)?;
            print_schedule(&out.schedule);
            print_files(&out.files);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
