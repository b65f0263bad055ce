use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ris_sim::commands::{self, Attachment};
use ris_sim::pattern::{pattern, pattern_svg};
use ris_sim::schema::{read_document, DeployFile, PatternFile, ScenarioFile};
use ris_sim::sweep::run_sweep;
use ris_sim::{exit, tables, CsvOptions, SimError, Table};

#[derive(Parser)]
#[command(name = "ris", version, about = "Multi-hop RIS link simulator")]
struct Cli {
    /// Worker threads for sweeps and solver restarts [default: CPU count]
    #[arg(long, global = true, env = "RIS_JOBS")]
    jobs: Option<usize>,
    /// Omit the `#` timestamp line from CSV output
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Configure and evaluate one scenario
    Simulate {
        file: PathBuf,
        /// Directory for results.csv plus per-board phase and codebook CSVs
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario's [sweep] section, one row per point
    Sweep {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a radiation-pattern cut
    Pattern {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a line plot
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Half-power beamwidth of a uniform linear array
    Hpbw {
        #[arg(long)]
        units: usize,
        /// Unit spacing in metres [default: half a wavelength]
        #[arg(long)]
        spacing: Option<f64>,
        /// Beam elevation in degrees
        #[arg(long, allow_hyphen_values = true)]
        theta2: f64,
        /// Carrier frequency in hertz
        #[arg(long, default_value_t = 3.4e9)]
        freq: f64,
    },
    /// Optimal board distance or size
    DeployOpt {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-hop phase-configuration report
    BeamOpt {
        file: PathBuf,
        /// Directory for beam.csv plus per-board phase and codebook CSVs
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a published table with difference columns
    TableRepro {
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Table1,
    Table2,
}

fn write_table(t: &Table, out: Option<&Path>, opts: CsvOptions) -> Result<(), SimError> {
    match out {
        Some(p) => {
            let f = fs::File::create(p).map_err(|e| SimError::io(p, e))?;
            t.write(io::BufWriter::new(f), opts).map_err(|e| SimError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            t.write(&mut lock, opts).and_then(|_| lock.flush()).map_err(|e| SimError::io(Path::new("stdout"), e))
        }
    }
}

/// Main table to `dir/main` (or stdout) and attachments beside it.
fn write_bundle(main: &str, t: &Table, extra: &[Attachment], dir: Option<&Path>, opts: CsvOptions) -> Result<(), SimError> {
    let Some(dir) = dir else {
        return write_table(t, None, opts);
    };
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    write_table(t, Some(&dir.join(main)), opts)?;
    for a in extra {
        write_table(&a.table, Some(&dir.join(&a.name)), opts)?;
    }
    Ok(())
}

fn name(p: &Path) -> String {
    p.display().to_string()
}

fn run(cli: Cli) -> Result<i32, SimError> {
    let opts = CsvOptions { timestamp: !cli.no_timestamp };
    match cli.command {
        Command::Simulate { file, out } => {
            let doc: ScenarioFile = read_document(&file)?;
            let o = commands::simulate(&doc, &name(&file))?;
            write_bundle("results.csv", &o.results, &o.attachments, out.as_deref(), opts)?;
            Ok(o.code())
        }
        Command::BeamOpt { file, out } => {
            let doc: ScenarioFile = read_document(&file)?;
            let o = commands::beam_opt(&doc, &name(&file))?;
            write_bundle("beam.csv", &o.results, &o.attachments, out.as_deref(), opts)?;
            Ok(o.code())
        }
        Command::Sweep { file, out } => {
            let doc: ScenarioFile = read_document(&file)?;
            let o = run_sweep(&doc, &name(&file))?;
            write_table(&o.table, out.as_deref(), opts)?;
            Ok(o.code)
        }
        Command::Pattern { file, out, svg } => {
            let doc: PatternFile = read_document(&file)?;
            let o = pattern(&doc, &name(&file))?;
            write_table(&o.table, out.as_deref(), opts)?;
            if let Some(p) = svg {
                fs::write(&p, pattern_svg(&o, &name(&file))).map_err(|e| SimError::io(&p, e))?;
            }
            Ok(match &o.solver {
                Some(s) if !s.converged => exit::NOT_CONVERGED,
                _ => exit::OK,
            })
        }
        Command::Hpbw { units, spacing, theta2, freq } => {
            let (t, code) = commands::hpbw(units, spacing, theta2, freq)?;
            write_table(&t, None, opts)?;
            Ok(code)
        }
        Command::DeployOpt { file, out } => {
            let doc: DeployFile = read_document(&file)?;
            write_table(&commands::deploy_opt(&doc, &name(&file))?, out.as_deref(), opts)?;
            Ok(exit::OK)
        }
        Command::TableRepro { which, out } => {
            let t = match which {
                Which::Table1 => tables::table1()?,
                Which::Table2 => tables::table2()?,
            };
            write_table(&t, out.as_deref(), opts)?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(exit::PARSE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(exit::FAILURE as u8);
        }
    }
    match run(cli) {
        Ok(code) => {
            if code == exit::NOT_CONVERGED {
                eprintln!("warning: max-min solver did not converge; best-found output written");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
