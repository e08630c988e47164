use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use plnc_core::fadespace::{
    count_nonremovable, count_removable, count_removable_total, enumerate_subspaces, FadeError,
};
use plnc_core::latin::{
    cartesian_product, extract_rectangle, format_fixture, parse_fixture, removed_keys,
    verify_fixture_set, xor_map, Isotopy, LatinError,
};
use plnc_core::maplib::{
    generate_library, load, save, sufficient_generator_count, GenOptions, MapError, MapLibrary,
};
use plnc_core::psk::PskError;
use plnc_core::relaysim::{
    parse_snr_range, pivot_ber, run_sim, write_csv, ChannelModel, Scheme, Shortlist, SimConfig,
    SimError, StopRule,
};
use plnc_core::{Execution, PskParams, SystemDims};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Psk(#[from] PskError),
    #[error(transparent)]
    Fade(#[from] FadeError),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "plnc",
    version,
    about = "Adaptive network-coding maps for two-way MIMO relaying"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct System {
    /// PSK order (2, 4, 8, ...)
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Antennas at node A
    #[arg(long, default_value_t = 1)]
    na: usize,
    /// Antennas at node B
    #[arg(long, default_value_t = 1)]
    nb: usize,
}

impl System {
    fn params(&self) -> Result<PskParams> {
        Ok(PskParams::from_order(self.m)?)
    }

    fn dims(&self, nr: usize) -> Result<SystemDims> {
        Ok(SystemDims::new(self.na, self.nb, nr)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// List every non-trivial singular fade subspace with its class
    Enumerate {
        #[command(flatten)]
        sys: System,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form subspace counts
    Count {
        #[command(flatten)]
        sys: System,
        /// Restrict to removable subspaces with this support size
        #[arg(long)]
        k: Option<usize>,
    },
    /// Build a map library covering every removable subspace
    Genmaps {
        #[command(flatten)]
        sys: System,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a captioned grid directory or a stored library
    Verify {
        /// Directory holding captions.txt and one grid per caption
        #[arg(long, conflicts_with = "lib")]
        maps: Option<PathBuf>,
        #[arg(long)]
        lib: Option<PathBuf>,
        /// Expected PSK order of every grid
        #[arg(long)]
        m: Option<usize>,
    },
    /// Print the XOR map of an n x n system with the subspaces it removes
    Xor {
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Antennas per node
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a transform to a grid file
    Transform {
        /// Grid file to transform
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        transpose: bool,
        /// Antenna permutation at A, e.g. 1,0
        #[arg(long, value_delimiter = ',')]
        sigma_a: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        sigma_b: Option<Vec<usize>>,
        /// Per-antenna phase shifts at A
        #[arg(long, value_delimiter = ',')]
        shift_a: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        shift_b: Option<Vec<usize>>,
        /// Keep the rectangle for nA x nB antennas
        #[arg(long, num_args = 2, value_names = ["NA", "NB"])]
        extract: Option<Vec<usize>>,
        /// Cartesian product with this grid as the outer factor
        #[arg(long)]
        product: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo BER of the relay link
    Simulate {
        #[command(flatten)]
        sys: System,
        /// Relay antennas
        #[arg(long, default_value_t = 1)]
        nr: usize,
        /// rayleigh or rician:<K dB>
        #[arg(long, default_value = "rayleigh")]
        model: ChannelModel,
        /// start:step:stop in dB
        #[arg(long, default_value = "0:5:30")]
        snr: String,
        /// Comma-separated: adaptive, xor
        #[arg(long, value_delimiter = ',', default_value = "adaptive,xor")]
        scheme: Vec<Scheme>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Map library; generated in memory when absent
        #[arg(long)]
        lib: Option<PathBuf>,
        /// Frame cap per SNR point
        #[arg(long, default_value_t = 10_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 100)]
        min_errors: u64,
        /// all, or the number of nearest subspaces whose maps are evaluated
        #[arg(long, default_value = "all")]
        shortlist: Shortlist,
        /// Run on the calling thread only
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pivot a simulate CSV into one column per scheme
    Plotdata {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        scheme: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            }),
    }
}

fn library_for(sys: &System, lib: Option<&Path>) -> Result<MapLibrary> {
    let params = sys.params()?;
    let lib = match lib {
        Some(path) => load(path)?,
        None => generate_library(params, &sys.dims(1)?, &GenOptions::from_env())?,
    };
    Ok(lib)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enumerate { sys, out } => {
            let all = enumerate_subspaces(sys.params()?, &sys.dims(1)?, Execution::default())?;
            let text: String = all
                .iter()
                .map(|(key, class)| format!("{key}\t{class}\n"))
                .collect();
            emit(out.as_deref(), &text)
        }
        Command::Count { sys, k } => {
            let (params, dims) = (sys.params()?, sys.dims(1)?);
            let line = match k {
                None => format!(
                    "nonremovable={} removable={}\n",
                    count_nonremovable(params, &dims)?,
                    count_removable_total(params, &dims)?
                ),
                Some(k) => {
                    let mut line =
                        format!("k={k} removable={}", count_removable(params, &dims, k)?);
                    if dims.na == 2 && dims.nb == 2 && (2..=4).contains(&k) {
                        line += &format!(" generators={}", sufficient_generator_count(params, k)?);
                    }
                    line + "\n"
                }
            };
            emit(None, &line)
        }
        Command::Genmaps { sys, out } => {
            let lib = generate_library(sys.params()?, &sys.dims(1)?, &GenOptions::from_env())?;
            save(&lib, &out)?;
            emit(
                None,
                &format!("maps={} covered={}\n", lib.len(), lib.coverage().len()),
            )
        }
        Command::Verify { maps, lib, m } => match (maps, lib) {
            (Some(dir), None) => {
                let report = verify_fixture_set(&dir, m)?;
                let mut text = String::new();
                for c in &report.checks {
                    if !c.latin {
                        text += &format!("{}: not Latin\n", c.name);
                    }
                    for key in &c.failed {
                        text += &format!("{}: does not remove {key}\n", c.name);
                    }
                }
                let n = report.checks.len();
                let noun = if report
                    .checks
                    .iter()
                    .all(|c| c.fixture.rect.rows() == c.fixture.rect.cols())
                {
                    "squares"
                } else {
                    "grids"
                };
                if report.passed() {
                    text += &format!("{n} {noun}, all Latin, all captioned removals hold\n");
                    emit(None, &text)
                } else {
                    io::stderr().write_all(text.as_bytes()).ok();
                    Err(CliError::Failed(format!("{n} {noun} checked, some fail")))
                }
            }
            (None, Some(path)) => {
                let lib = load(&path)?;
                if let Some(m) = m.filter(|&m| m != lib.params().order()) {
                    return Err(CliError::Usage(format!(
                        "library is for M={}, not M={m}",
                        lib.params().order()
                    )));
                }
                emit(
                    None,
                    &format!(
                        "{} maps, every removable subspace covered ({})\n",
                        lib.len(),
                        lib.coverage().len()
                    ),
                )
            }
            _ => Err(CliError::Usage(
                "give exactly one of --maps or --lib".into(),
            )),
        },
        Command::Xor { m, n, out } => {
            let params = PskParams::from_order(m)?;
            let rect = xor_map(params, n)?;
            let mut text = format_fixture(params, &rect)?;
            let keys = removed_keys(params, &rect)?;
            text += &format!("# removes {} subspaces\n", keys.len());
            for key in keys {
                text += &format!("# {key}\n");
            }
            emit(out.as_deref(), &text)
        }
        Command::Transform {
            input,
            transpose,
            sigma_a,
            sigma_b,
            shift_a,
            shift_b,
            extract,
            product,
            out,
        } => {
            let fixture = parse_fixture(&read(&input)?)?;
            let params = fixture.params;
            let isotopic = transpose
                || sigma_a.is_some()
                || sigma_b.is_some()
                || shift_a.is_some()
                || shift_b.is_some();
            let ops = [isotopic, extract.is_some(), product.is_some()]
                .iter()
                .filter(|&&x| x)
                .count();
            if ops != 1 {
                return Err(CliError::Usage(
                    "choose one of: isotopy flags, --extract, --product".into(),
                ));
            }
            let rect = if let Some(ex) = extract {
                extract_rectangle(params, &fixture.rect, &SystemDims::new(ex[0], ex[1], 1)?)?
            } else if let Some(outer) = product {
                let outer = parse_fixture(&read(&outer)?)?;
                if outer.params != params {
                    return Err(CliError::Usage("both grids must use the same M".into()));
                }
                cartesian_product(&fixture.rect, &outer.rect)?
            } else {
                let n = fixture.dims.na;
                let id = Isotopy::identity(n);
                let iso = Isotopy {
                    transpose,
                    sigma_a: sigma_a.unwrap_or(id.sigma_a),
                    sigma_b: sigma_b.unwrap_or(id.sigma_b),
                    shift_a: shift_a.unwrap_or(id.shift_a),
                    shift_b: shift_b.unwrap_or(id.shift_b),
                };
                iso.apply(params, &fixture.rect)?
            };
            emit(out.as_deref(), &format_fixture(params, &rect)?)
        }
        Command::Simulate {
            sys,
            nr,
            model,
            snr,
            scheme,
            seed,
            lib,
            trials,
            min_errors,
            shortlist,
            sequential,
            out,
        } => {
            let params = sys.params()?;
            let dims = sys.dims(nr)?;
            let snr_db = parse_snr_range(&snr)?;
            let library = if scheme.contains(&Scheme::Adaptive) {
                Some(library_for(&sys, lib.as_deref())?)
            } else {
                None
            };
            let mut records = Vec::new();
            for s in scheme {
                let mut cfg = SimConfig::new(params, dims, s);
                cfg.snr_db = snr_db.clone();
                cfg.model = model;
                cfg.seed = seed;
                cfg.shortlist = shortlist;
                cfg.stop = StopRule {
                    min_trials: StopRule::default().min_trials.min(trials),
                    min_errors,
                    max_trials: trials,
                };
                if sequential {
                    cfg.exec = Execution::Sequential;
                }
                records.extend(run_sim(&cfg, library.as_ref())?);
            }
            emit(out.as_deref(), &write_csv(&records))
        }
        Command::Plotdata { input, scheme, out } => emit(
            out.as_deref(),
            &pivot_ber(&read(&input)?, scheme.as_deref())?,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            e.print().ok();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
