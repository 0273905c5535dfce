use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twoscale_cli::artifacts::write_json;
use twoscale_cli::config::ModeSelection;
use twoscale_cli::pipeline::{complexity, format_complexity, verification_error, RunReport};
use twoscale_cli::verify::format_table;
use twoscale_cli::{CliError, Pipeline, RunConfig};

#[derive(Parser)]
#[command(name = "twoscale", version, about = "Two-time-scale battery aging and renewal pipeline")]
struct Cli {
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides `threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Use artifacts produced under a different config.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit netload and battery-price laws.
    Fit,
    /// Intraday resource and price tables per periodicity class.
    Intraday,
    /// Slow-scale value functions for both decompositions.
    Bellman,
    /// Monte Carlo replay of the policies.
    Simulate {
        #[arg(long, value_enum)]
        mode: Option<ModeSelection>,
        #[arg(long)]
        scenarios: Option<usize>,
        /// Also write every simulated trajectory.
        #[arg(long)]
        trajectories: bool,
    },
    /// Bounds at x0, gaps and monotonicity checks.
    Report,
    /// Oracle property table on seeded tiny instances.
    Verify {
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Operation counts of brute force versus the decompositions.
    Complexity {
        #[arg(long = "D")]
        d: u64,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "I")]
        i: u64,
    },
    /// fit, intraday, bellman, simulate and report.
    All {
        #[arg(long, value_enum)]
        mode: Option<ModeSelection>,
        #[arg(long)]
        scenarios: Option<usize>,
    },
    /// Write the effective configuration as JSON.
    InitConfig {
        path: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    match &cli.command {
        Command::Simulate { mode, scenarios, .. } | Command::All { mode, scenarios } => {
            if let Some(m) = mode {
                cfg.simulate.mode = *m;
            }
            if let Some(n) = scenarios {
                cfg.simulate.scenarios = *n;
            }
        }
        Command::Verify { instances: Some(n) } => cfg.verify.instances = *n,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_report(r: &RunReport) {
    println!("x0 = {:?}", r.x0);
    println!("lower (price)     {:.2}", r.lower_x0);
    println!("upper (resource)  {:.2}", r.upper_x0);
    println!("gap at x0         {:.3}%", 100.0 * r.gap_at_x0);
    println!("max relative gap  {:.3e}", r.max_rel_gap);
    println!("sandwich violations {}", r.sandwich_violations);
    println!(
        "monotonicity violations: price {}, resource {}",
        r.monotone_violations_price, r.monotone_violations_resource
    );
    for s in &r.simulations {
        println!(
            "simulation {:<8} mean {:.2} +- {:.2} over {} scenarios, {:.2} renewals per scenario",
            s.mode.name(),
            s.mean_cost,
            s.std_error,
            s.scenarios,
            s.mean_renewals
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Complexity { d, m, i } = cli.command {
        let c = complexity(d, m, i)?;
        print!("{}", format_complexity(d, m, i, &c));
        return Ok(());
    }
    let cfg = load_config(&cli)?;
    if let Command::InitConfig { path } = &cli.command {
        return write_json(path, &cfg);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let out = cfg.out_dir.clone();
    let pipeline = Pipeline::new(cfg, out)?.force(cli.force);
    pool.install(|| match cli.command {
        Command::Fit => {
            let fit = pipeline.fit()?;
            println!(
                "fitted {} classes x {} slots, {} daily price laws",
                fit.classes.num_classes(),
                fit.netload.slots(),
                fit.price_laws.len()
            );
            Ok(())
        }
        Command::Intraday => {
            let (r, p) = pipeline.intraday()?;
            println!("intraday tables: {} resource, {} price", r.len(), p.len());
            Ok(())
        }
        Command::Bellman => {
            let (lower, upper) = pipeline.bellman()?;
            println!("value functions for {} days per decomposition", lower.num_days().max(upper.num_days()) + 1);
            Ok(())
        }
        Command::Simulate { trajectories, .. } => {
            let pipeline = pipeline.trajectories(trajectories);
            for o in pipeline.simulate(pipeline.config().simulate.mode)? {
                let s = &o.stats.summary;
                println!(
                    "{:<8} mean {:.2} +- {:.2}, lower bound {:.2}, admissibility violations {}",
                    o.kind.name(),
                    s.mean_cost,
                    s.std_error,
                    o.stats.lower_bound_x0,
                    s.diagnostics.admissibility_violations
                );
            }
            Ok(())
        }
        Command::Report => {
            let r = pipeline.report()?;
            print_report(&r);
            if r.sandwich_violations > 0 || r.monotone_violations_price > 0 || r.monotone_violations_resource > 0 {
                return Err(CliError::Verification("bounds are not sandwiched or not monotone".into()));
            }
            Ok(())
        }
        Command::Verify { .. } => {
            let rows = pipeline.verify()?;
            print!("{}", format_table(&rows));
            verification_error(&rows).map_or(Ok(()), Err)
        }
        Command::All { .. } => {
            let r = pipeline.run_all()?;
            print_report(&r);
            Ok(())
        }
        Command::Complexity { .. } | Command::InitConfig { .. } => unreachable!("handled above"),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
