//! Command-line front end for the channel-lab simulator.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad config, failed
//! selector verification, I/O), 2 when a simulation breaks an invariant.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use channel_lab::config::validate_config_in;
use channel_lab::metrics::{run_sweep, StabilityTable, SweepError};
use channel_lab::protocols::interleaved_omegas;
use channel_lab::selectors::{
    exact_enumeration_count, generate_selector_random, load_families, verify_selector_exact,
    verify_selector_sampled, RandomSelectorParams, Verification, ENUMERATION_LIMIT,
};
use channel_lab::{derive_stream, run_simulation, ProtocolConfig, SelectorFamily, SimConfig};

pub mod output;
pub mod sweep;

pub use output::{csv_string, emit_csv, format_g, write_csv, CsvError, CsvRow, HEADER};
pub use sweep::SweepFile;

pub const SEED_ENV: &str = "CHANNEL_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "channel-lab", version, about = "Contention resolution on restrained multiple-access channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write a CSV row.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter grid; rows go to --out, the stability table to stdout.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Selector families.
    #[command(subcommand)]
    Selector(SelectorCommand),
}

#[derive(Debug, Subcommand)]
pub enum SelectorCommand {
    /// Generate a random k-light selector (or one per level with --levels).
    Gen(GenArgs),
    /// Check the hitting property of every family in a file.
    Verify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, required_unless_present = "levels")]
    pub omega: Option<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// One family for every omega = 2^i used by the interleaved protocol.
    #[arg(long, conflicts_with = "omega")]
    pub levels: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 4.0)]
    pub c: f64,
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Invariant(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Invariant(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

/// Parses `argv` (including the program name) and runs the command, writing
/// to the process's stdout and stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    dispatch_to(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Input(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(None),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn config_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Run { config, seed, out: path } => run(&config, seed, path.as_deref(), out),
        Command::Sweep { config, out: path, jobs } => sweep(&config, &path, jobs, out),
        Command::Selector(SelectorCommand::Gen(args)) => selector_gen(&args, out),
        Command::Selector(SelectorCommand::Verify { family, exact, samples, seed }) => {
            selector_verify(&family, exact, samples, seed, out, err)
        }
    }
}

fn run(config: &Path, seed: Option<u64>, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let mut raw = SimConfig::from_json(&read(config)?).map_err(|e| input(format!("{}: {e}", config.display())))?;
    raw.seed = match (seed, raw.seed) {
        (Some(s), _) => Some(s),
        (None, Some(s)) => Some(s),
        (None, None) => env_seed()?,
    };
    let cfg = validate_config_in(&raw, config_dir(config)).map_err(input)?;
    let result = run_simulation(&cfg).map_err(|e| Failure::Invariant(format!("{cfg}: {e}")))?;
    let rows = [CsvRow::new(&cfg, &result)];
    write_rows(&rows, path, out)
}

fn write_rows(rows: &[CsvRow], path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let written = match path {
        Some(p) => emit_csv(rows, p),
        None => write_csv(rows, &mut *out),
    };
    written.map_err(|e| match e {
        CsvError::Conservation { .. } => Failure::Invariant(e.to_string()),
        _ => input(e),
    })
}

fn sweep(config: &Path, path: &Path, jobs: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let file = SweepFile::from_json(&read(config)?).map_err(|e| input(format!("{}: {e}", config.display())))?;
    let mut spec = file.spec(env_seed()?).map_err(Failure::Input)?;
    // Relative selector paths in the base config resolve next to the sweep file.
    for p in std::iter::once(&mut spec.base.protocol).chain(spec.protocols.iter_mut()) {
        if let ProtocolConfig::Interleaved { selector_file: Some(f), .. } = p {
            if f.is_relative() {
                *f = config_dir(config).join(&*f);
            }
        }
    }
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let (cells, table) = run_sweep(&spec, jobs).map_err(|e| match e {
        SweepError::Simulation { .. } => Failure::Invariant(e.to_string()),
        _ => input(e),
    })?;
    let rows: Vec<CsvRow> = cells.iter().map(|c| CsvRow::new(&c.config, &c.result)).collect();
    write_rows(&rows, Some(path), out)?;
    out.write_all(render_table(&table).as_bytes()).map_err(input)
}

/// Plain-text stability table: one line per (protocol, n).
pub fn render_table(table: &StabilityTable) -> String {
    let mut s = format!("# delta = {}\nprotocol\tn\tboundary\tnon_monotone\tmean_avg_max\n", format_g(table.delta));
    for e in &table.entries {
        let boundary = e.boundary.map_or("none".to_owned(), format_g);
        let means: Vec<String> = e.means.iter().map(|&(r, m)| format!("{}:{}", format_g(r), format_g(m))).collect();
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}", e.protocol, e.n, boundary, e.non_monotone, means.join(" "));
    }
    s
}

fn selector_gen(args: &GenArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let n = args.n;
    if n < 2 {
        return Err(input("n out of range: expected >= 2"));
    }
    if args.k < 1 {
        return Err(input("k out of range: expected >= 1"));
    }
    if args.c.is_nan() || args.c <= 0.0 || args.trials < 1 {
        return Err(input("c and trials must be positive"));
    }
    let omegas = match args.omega {
        Some(w) if (2..=n).contains(&w) => vec![w],
        Some(_) => return Err(input("omega out of range: expected 2..=n")),
        None => interleaved_omegas(n),
    };
    let seed = args.seed.or(env_seed()?).unwrap_or(0);
    let params = RandomSelectorParams { c: args.c, trials: args.trials, ..RandomSelectorParams::default() };
    let mut families = Vec::new();
    for omega in omegas {
        let mut rng = derive_stream(seed, &format!("selector.{n}.{omega}.{}", args.k));
        let f = generate_selector_random(n, omega, args.k, params, &mut rng)
            .map_err(|e| input(format!("omega={omega}: {e}")))?;
        let _ = writeln!(out, "n={n} omega={omega} k={}: {} sets, largest {}", args.k, f.len(), f.max_set_size());
        families.push(f);
    }
    let json = if args.levels { serde_json::to_string_pretty(&families) } else { serde_json::to_string_pretty(&families[0]) };
    std::fs::write(&args.out, json.map_err(input)? + "\n").map_err(|e| input(format!("{}: {e}", args.out.display())))
}

fn selector_verify(
    path: &Path,
    exact: bool,
    samples: Option<usize>,
    seed: Option<u64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let families = load_families(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let seed = seed.or(env_seed()?).unwrap_or(0);
    let mut failed = 0;
    for (i, f) in families.iter().enumerate() {
        f.check().map_err(|e| input(format!("family {i}: {e}")))?;
        let feasible = f.n <= 64 && exact_enumeration_count(f.n, f.omega) <= ENUMERATION_LIMIT;
        let use_exact = exact || (samples.is_none() && feasible);
        let line = if use_exact {
            match verify_selector_exact(f, f.n, f.omega).map_err(|e| input(format!("family {i}: {e}")))? {
                Verification::Ok => "ok (exact)".to_owned(),
                Verification::Counterexample(x) => {
                    failed += 1;
                    format!("FAILED (exact): counterexample {x:?}")
                }
            }
        } else {
            let m = samples.unwrap_or(10_000);
            if m == 0 {
                return Err(input("samples out of range: expected >= 1"));
            }
            let mut rng = derive_stream(seed, &format!("verify.{i}"));
            let fraction = verify_selector_sampled(f, f.n, f.omega, m, &mut rng);
            if fraction > 0.0 {
                failed += 1;
                format!("FAILED (sampled, {m}): failure fraction {}", format_g(fraction))
            } else {
                format!("ok (sampled, {m})")
            }
        };
        let _ = writeln!(out, "{} {line}", describe(i, f));
    }
    if failed > 0 {
        let _ = writeln!(err, "{failed} of {} families failed", families.len());
        return Err(Failure::Input(format!("{}: selector verification failed", path.display())));
    }
    Ok(())
}

fn describe(i: usize, f: &SelectorFamily) -> String {
    format!("family {i} (n={}, omega={}, k={}, {} sets):", f.n, f.omega, f.k, f.len())
}
