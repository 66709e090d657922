use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bulkspin::algebra::{write_dump, Basis, StructureTable, FULL_TABLE_MAX_NUCLEI};
use bulkspin::pipeline::{self, VerifyReport};
use bulkspin::{Error, RunConfig};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

/// Largest system the `algebra` command will dump; the line count grows as 16^n.
const DUMP_MAX_NUCLEI: usize = 6;
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "bulkspin", version, about = "Classical bulk spin-dynamics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the commutator structure table of the n-spin product-operator basis.
    Algebra {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a configured pulse program and write trajectory, FID and spectrum.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the classical run against the density-matrix reference.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Free-evolution horizon in seconds after the configured sequence.
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

enum Failure {
    Core(Error),
    Input(String),
    Io(PathBuf, io::Error),
    Verification { deviation: f64, tolerance: f64 },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_input_error() => 2,
            Failure::Core(_) => 3,
            Failure::Input(_) => 2,
            Failure::Io(..) => 1,
            Failure::Verification { .. } => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Input(msg) => f.write_str(msg),
            Failure::Io(path, e) => write!(f, "{}: {e}", path.display()),
            Failure::Verification { deviation, tolerance } => {
                write!(f, "verification failed: deviation {deviation:e} exceeds tolerance {tolerance:e}")
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Algebra { n, out } => cmd_algebra(n, &out),
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Verify {
            config,
            horizon,
            samples,
            tolerance,
        } => cmd_verify(&config, horizon, samples, tolerance),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn header(config_hash: Option<&str>) -> String {
    match config_hash {
        Some(h) => format!("# bulkspin {VERSION} config_sha256={h}\n"),
        None => format!("# bulkspin {VERSION}\n"),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn cmd_algebra(n: usize, out: &Path) -> Outcome {
    if n > DUMP_MAX_NUCLEI {
        return Err(Failure::Input(format!(
            "algebra dump supports at most {DUMP_MAX_NUCLEI} nuclei, got {n}"
        )));
    }
    let basis = Basis::new(n)?;
    let len = basis.len();
    let mut buf = header(None).into_bytes();
    let lines = if n <= FULL_TABLE_MAX_NUCLEI {
        let table = StructureTable::from_basis(basis)?;
        table.write_dump(&mut buf).expect("writing to memory");
        table.nonzero_count()
    } else {
        write_dump(&basis, &mut buf).expect("writing to memory")
    };
    write_file(out, &buf)?;
    println!("basis={len}");
    println!("nonzero={lines}");
    Ok(())
}

fn load_config(path: &Path) -> Result<(RunConfig, String), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let hash: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let cfg = RunConfig::from_json(&text)?;
    Ok((cfg, hash))
}

fn cmd_simulate(config: &Path, out: &Path) -> Outcome {
    let (cfg, hash) = load_config(config)?;
    let result = pipeline::simulate(&cfg)?;
    fs::create_dir_all(out).map_err(|e| Failure::Io(out.to_owned(), e))?;
    let head = header(Some(&hash));

    let mut buf = head.clone().into_bytes();
    result.trajectory.write_csv(&mut buf).expect("writing to memory");
    write_file(&out.join("trajectory.csv"), &buf)?;
    println!("snapshots={}", result.trajectory.len());

    let (Some(fid), Some(spec)) = (&result.fid, &result.spectrum) else {
        eprintln!("note: sequence has no acquire event; no FID or spectrum written");
        return Ok(());
    };
    let mut buf = head.clone().into_bytes();
    fid.write_csv(&mut buf).expect("writing to memory");
    write_file(&out.join("fid.csv"), &buf)?;

    let mut buf = head.into_bytes();
    spec.write_csv(&mut buf).expect("writing to memory");
    write_file(&out.join("spectrum.csv"), &buf)?;

    let peaks = serde_json::json!({
        "generator": format!("bulkspin {VERSION}"),
        "config_sha256": hash,
        "peaks": spec.peaks,
    });
    let mut text = serde_json::to_string_pretty(&peaks).expect("peaks serialize");
    text.push('\n');
    write_file(&out.join("peaks.json"), text.as_bytes())?;
    println!("fid_points={}", fid.len());
    println!("peaks={}", spec.peaks.len());
    Ok(())
}

fn print_report(report: &VerifyReport, tolerance: f64) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "max_deviation={:e}", report.max_deviation)?;
    writeln!(out, "tolerance={tolerance:e}")?;
    writeln!(out, "snapshots={}", report.snapshots)?;
    writeln!(out, "initial_min_eigenvalue={:e}", report.initial_min_eigenvalue)?;
    writeln!(out, "worst observables:")?;
    for (name, d) in report.per_observable.iter().take(10) {
        writeln!(out, "  {name} {d:e}")?;
    }
    Ok(())
}

fn cmd_verify(config: &Path, horizon: f64, samples: usize, tolerance: f64) -> Outcome {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Failure::Input(format!("tolerance must be positive, got {tolerance}")));
    }
    let (cfg, _) = load_config(config)?;
    let report = pipeline::verify(&cfg, horizon, samples)?;
    if report.initial_min_eigenvalue < -1e-12 {
        eprintln!(
            "warning: initial state is not a physical density matrix (min eigenvalue {:e})",
            report.initial_min_eigenvalue
        );
    }
    print_report(&report, tolerance).map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))?;
    if report.max_deviation > tolerance || report.max_deviation.is_nan() {
        return Err(Failure::Verification {
            deviation: report.max_deviation,
            tolerance,
        });
    }
    println!("PASS");
    Ok(())
}
