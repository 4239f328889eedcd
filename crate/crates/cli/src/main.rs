use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use superstable::report::{
    cmd_class_x, cmd_counts, cmd_ladder, cmd_largest_roots, cmd_remark1, cmd_verify,
    exit_code, render, Artifact, Format, Output, RunConfig, Session, CACHE_ENV, EXIT_IO,
};
use superstable::{Execution, Precision, Tolerances};

/// Superstable parameters of f_c(x) = 1 - c x^2.
#[derive(Debug, Parser)]
#[command(name = "superstable", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Family name: quadratic or quadratic-restricted.
    #[arg(long, global = true, default_value = "quadratic")]
    family: String,

    /// Target bracket width.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_width: f64,

    /// Residual accepted as a root.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_residual: f64,

    /// Largest n for which Phi_n is expanded exactly.
    #[arg(long, global = true, default_value_t = 12)]
    exact_limit: u32,

    /// Scan grid density (also the class-x sample count).
    #[arg(long, global = true, default_value_t = 1 << 14)]
    grid: usize,

    /// Orbit arithmetic.
    #[arg(long, global = true, default_value = "auto",
          value_parser = ["auto", "binary64", "double-double"])]
    precision: String,

    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[arg(long, global = true, default_value = "txt",
          value_parser = ["json", "csv", "txt", "svg"])]
    format: String,

    /// Root cache file.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache: Option<PathBuf>,

    /// Output directory; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Omit the generation timestamp from JSON metadata.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rightmost roots c_n* for n up to --n-max.
    LargestRoots {
        #[arg(long, default_value_t = 14)]
        n_max: u32,
    },
    /// Ladders inside the windows [c_k*, c_{k+1}*].
    Ladder {
        #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
        k: Vec<u32>,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// a(k,m), N_n and alpha_k tables; --k is the largest k.
    Counts {
        #[arg(long, default_value_t = 10)]
        k: u32,
        #[arg(long, default_value_t = 40)]
        n_max: u32,
    },
    /// Exact Sturm counts and polynomial identity checks.
    Verify {
        #[arg(long, default_value_t = 10)]
        n_max: u32,
    },
    /// The chain c_4 < c_6 < ... < c_5 between c_2* and c_3*.
    Remark1 {
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Numerical evidence for the class conditions on the family.
    ClassX {
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
}

impl Cli {
    fn config(&self) -> superstable::Result<RunConfig> {
        let precision = match self.precision.as_str() {
            "binary64" => Precision::Binary64,
            "double-double" => Precision::DoubleDouble,
            _ => Precision::Auto,
        };
        let defaults = RunConfig::default();
        Ok(RunConfig {
            family: self.family.clone(),
            tol: Tolerances {
                width: self.tol_width,
                residual: self.tol_residual,
                ..Tolerances::default()
            },
            exact_limit: self.exact_limit,
            certify_limit: defaults.certify_limit.min(self.exact_limit),
            numeric_limit: defaults.numeric_limit.max(self.exact_limit),
            grid_points: self.grid,
            precision,
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            out_dir: self.out.clone(),
            cache_path: self.cache.clone(),
        })
    }
}

fn run(cli: &Cli) -> superstable::Result<i32> {
    let format: Format = cli.format.parse()?;
    let config = cli.config()?;
    let mut session = Session::open(config)?;
    let output = match cli.command {
        Command::LargestRoots { n_max } => Output::LargestRoots(cmd_largest_roots(&session, n_max)?),
        Command::Ladder { ref k, n_max } => Output::Ladder(cmd_ladder(&session, k, n_max)?),
        Command::Counts { k, n_max } => Output::Counts(cmd_counts(&session, k, n_max)?),
        Command::Verify { n_max } => Output::Verify(cmd_verify(&session, n_max)?),
        Command::Remark1 { n_max } => Output::Remark1(cmd_remark1(&session, n_max)?),
        Command::ClassX { n_max } => Output::ClassX(cmd_class_x(&session, cli.grid, n_max)?),
    };
    session.persist()?;

    let stamp = (!cli.no_timestamp).then(timestamp);
    let artifacts = render(&output, format, &session.config, stamp.as_deref())?;
    emit(&artifacts, cli.out.as_ref())?;

    if let Output::Verify(v) = &output {
        if let Some(c) = v.first_failure() {
            eprintln!("verify: first failing check: {}", c.name);
        }
    }
    Ok(output.exit_status())
}

fn timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Single writer for every artifact of a run.
fn emit(artifacts: &[Artifact], out: Option<&PathBuf>) -> superstable::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for a in artifacts {
                fs::write(dir.join(&a.name), &a.contents)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for a in artifacts {
                if artifacts.len() > 1 {
                    writeln!(stdout, "# {}", a.name)?;
                }
                stdout.write_all(a.contents.as_bytes())?;
            }
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_IO as u8))
}
