use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::info;

use vpdg::config::parse_config;
use vpdg::dispersion::solve_landau_root;
use vpdg::recurrence::{predict_vs_measure, write_report};
use vpdg::runner::{execute, thread_count, with_threads, THREADS_ENV};
use vpdg::scenarios::Scenario;
use vpdg::BasisSpec;

#[derive(Parser)]
#[command(name = "vpdg", version, about = "Discontinuous-Galerkin Vlasov-Poisson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by an INI config file.
    Run { config: PathBuf },
    /// Landau root of the Maxwellian dielectric function.
    Dispersion {
        #[arg(long)]
        k: f64,
    },
    /// Measure the recurrence time of free streaming and compare it with
    /// the prediction; writes recurrence_report.csv.
    Recurrence {
        /// q0..q3 or p0..p3
        #[arg(long)]
        basis: String,
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 40)]
        nx: usize,
        #[arg(long, default_value_t = 40)]
        nv: usize,
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
}

fn parse_basis(s: &str) -> anyhow::Result<BasisSpec> {
    let s = s.to_ascii_lowercase();
    let (family, degree) = s.split_at(1.min(s.len()));
    let degree: usize = degree
        .parse()
        .with_context(|| format!("basis `{s}`: expected q<degree> or p<degree>"))?;
    Ok(match family {
        "q" => BasisSpec::tensor(degree)?,
        "p" => BasisSpec::total_degree(degree)?,
        _ => bail!("basis `{s}`: family must be q or p"),
    })
}

fn env_threads() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("{THREADS_ENV} must be a positive integer, got `{v}`"),
        },
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
            // fail on a malformed VPDG_THREADS before any output is written
            thread_count(&cfg)?;
            let summary = execute(&cfg)?;
            info!("{} steps, outputs in {}", summary.steps, summary.directory.display());
            if let Some(tr) = summary.measured_tr {
                println!("measured_tr,{tr:.10}");
            }
        }
        Command::Dispersion { k } => {
            let root = solve_landau_root(k)?;
            println!("k,omega,gamma,residual");
            println!("{},{:.12},{:.12},{:.3e}", root.k, root.omega, root.gamma, root.residual);
        }
        Command::Recurrence {
            basis,
            scenario,
            nx,
            nv,
            output,
        } => {
            let spec = parse_basis(&basis)?;
            let sc = Scenario::by_name(&scenario)?;
            let cmp = with_threads(env_threads()?, || predict_vs_measure(&sc, &spec, nx, nv))??;
            std::fs::create_dir_all(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            let path = output.join("recurrence_report.csv");
            write_report(&path, &cmp.rows)?;
            println!("basis,scenario,predicted_tr,measured_tr,relative_error");
            println!(
                "{},{},{:.14},{:.14},{:.3e}",
                spec.label(),
                sc.name,
                cmp.predicted,
                cmp.measured,
                cmp.relative_error
            );
            info!("report written to {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
