use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cmtwist::output::Format;
use cmtwist::twistsim::DEFAULT_STRATUM_CAP;
use cmtwist::{FieldParams, Flavor};

mod commands;
mod config;

use config::RawConfig;

#[derive(Parser)]
#[command(
    name = "cmtwist",
    version,
    about = "Selmer rank model for p-th twists of CM abelian varieties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// csv, json or table
    #[arg(long, default_value = "table")]
    format: String,
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// sym or uni
    #[arg(long, default_value = "sym")]
    flavor: String,
}

impl FieldArgs {
    fn field(&self) -> Result<FieldParams> {
        let flavor: Flavor = self.flavor.parse()?;
        Ok(FieldParams::new(self.p, flavor)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// D(0), odd mass and mean rank for sym/uni over a list of primes
    Table {
        #[arg(long, value_delimiter = ',', default_values_t = commands::TABLE_PRIMES)]
        p: Vec<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// D(r) for r <= rmax
    Dist {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 10)]
        rmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Moments of D and their direct sums
    Moments {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Density and rank bounds
    Bounds {
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// sym, uni, or both when omitted
        #[arg(long)]
        flavor: Option<String>,
        /// degree [K:Q] for the average-rank bound
        #[arg(long, default_value_t = 1)]
        degk: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo run of the twisting process
    Simulate {
        /// key = value config document; flags override its entries
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        flavor: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// notfd:<r> or fd
        #[arg(long)]
        shift: Option<String>,
        /// Chebotarev error scale, or `exact`
        #[arg(long)]
        y: Option<String>,
        /// closed or micro
        #[arg(long)]
        step: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Isotropic lines of the local hyperbolic plane
    Isotropic {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fan ladder levels and stratum size ratios over doublings of X
    Ladder {
        #[arg(long, default_value_t = 10.0)]
        x: f64,
        #[arg(long, default_value_t = 2.0)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        doublings: usize,
        /// largest norm materialized in the place model
        #[arg(long, default_value_t = 100_000.0)]
        horizon: f64,
        #[arg(long, default_value_t = DEFAULT_STRATUM_CAP)]
        cap: u128,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn emit(text: &str, out: &OutputArgs) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table { p, out } => {
            let format: Format = out.format.parse()?;
            let rec = commands::table(&p)?;
            let text = match format {
                Format::Table => commands::render_table_grid(&rec)?,
                other => rec.render(other),
            };
            emit(&text, &out)
        }
        Command::Dist { field, rmax, out } => {
            let format: Format = out.format.parse()?;
            emit(&commands::dist(field.field()?, rmax)?.render(format), &out)
        }
        Command::Moments { field, out } => {
            let format: Format = out.format.parse()?;
            emit(&commands::moments(field.field()?)?.render(format), &out)
        }
        Command::Bounds {
            p,
            flavor,
            degk,
            out,
        } => {
            let format: Format = out.format.parse()?;
            let flavors = match flavor {
                Some(f) => vec![f.parse::<Flavor>()?],
                None => vec![Flavor::Symplectic, Flavor::Unitary],
            };
            emit(&commands::bounds(p, &flavors, degk)?.render(format), &out)
        }
        Command::Simulate {
            config,
            p,
            flavor,
            n,
            k,
            samples,
            seed,
            shift,
            y,
            step,
            threads,
            out,
        } => {
            let format: Format = out.format.parse()?;
            let mut raw = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    RawConfig::parse(&text).with_context(|| path.display().to_string())?
                }
                None => RawConfig::default(),
            };
            let overrides = [
                ("p", p.map(|v| v.to_string())),
                ("flavor", flavor),
                ("n", n.map(|v| v.to_string())),
                ("k", k.map(|v| v.to_string())),
                ("samples", samples.map(|v| v.to_string())),
                ("seed", seed.map(|v| v.to_string())),
                ("shift", shift),
                ("y", y),
                ("step", step),
                ("threads", threads.map(|v| v.to_string())),
            ];
            for (key, value) in overrides {
                if let Some(value) = value {
                    raw.set(key, value);
                }
            }
            let sim = raw.to_sim_config()?;
            let rec = match raw.threads()? {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()?
                    .install(|| commands::simulate(&sim))?,
                None => commands::simulate(&sim)?,
            };
            emit(&rec.render(format), &out)
        }
        Command::Isotropic { field, n, out } => {
            let format: Format = out.format.parse()?;
            emit(
                &commands::isotropic(field.field()?, n)?.render(format),
                &out,
            )
        }
        Command::Ladder {
            x,
            exponent,
            k,
            density,
            seed,
            doublings,
            horizon,
            cap,
            out,
        } => {
            let format: Format = out.format.parse()?;
            let args = commands::LadderArgs {
                x,
                exponent,
                k,
                density,
                seed,
                doublings,
                horizon,
                cap,
            };
            emit(&commands::ladder(&args)?.render(format), &out)
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
