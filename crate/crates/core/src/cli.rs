//! The `bsync` command line.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bits::{count_executions, is_bit_decomposable, BitsError};
use crate::calculus::{validate, CalculusError, Execution, ProcessTerm};
use crate::ctlgraph::{has_deadlock, to_dot, to_edge_list, ControlGraph, CtgError};
use crate::oracles::bench::{bench_run, BenchError, BenchSpec, Instance};
use crate::oracles::{brute_force_extensions, brute_force_sampler, count_by_downsets, mcmc_sampler, OracleError};
use crate::random::seeded;
use crate::sampler::{sample_execution, SamplerError};
use crate::subclasses::{
    fj_count, fj_sample, gen_arch, gen_fork_join, is_arch, is_fork_join, is_promise_process, sp_tree,
    sp_tree_of_graph, SPTree, SubclassError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEADLOCK: i32 = 3;
pub const EXIT_INAPPLICABLE: i32 = 4;
pub const EXIT_RESOURCE: i32 = 5;
pub const EXIT_DISAGREEMENT: i32 = 6;

/// Stack for the thread that runs a command; terms and trees are deep.
pub const MAIN_STACK: usize = 1 << 30;

#[derive(Parser, Debug)]
#[command(name = "bsync", version, about = "Count and sample executions of barrier-synchronization processes")]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true, env = "BSYNC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a process term.
    Parse {
        file: PathBuf,
        /// Print the syntax tree instead of the normalized text.
        #[arg(long)]
        ast: bool,
    },
    /// Build the control graph and report deadlocks.
    Ctg {
        file: PathBuf,
        /// Write Graphviz output here (`-` for stdout) instead of the edge list.
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
    /// Count executions.
    Count {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CountMethod::Bits)]
        method: CountMethod,
    },
    /// Draw executions, one per line.
    Sample {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = SampleMethod::Bits)]
        method: SampleMethod,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Chain steps before the first draw (mcmc only; default 50·n²).
        #[arg(long)]
        burn_in: Option<usize>,
        /// Chain steps between draws (mcmc only; default 10·n²).
        #[arg(long)]
        thin: Option<usize>,
    },
    /// Report which subclasses a process belongs to.
    Classify { file: PathBuf },
    /// Print a random process of a subclass.
    Gen {
        #[arg(long, value_enum)]
        class: GenClass,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        promises: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a benchmark described by a JSON spec.
    Bench {
        spec: PathBuf,
        /// Write the JSON report here; the text table always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CountMethod {
    Bits,
    Fj,
    Bruteforce,
    Downsets,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SampleMethod {
    Bits,
    Fj,
    Bruteforce,
    Mcmc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenClass {
    Fj,
    Arch,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

impl From<CalculusError> for Failure {
    fn from(e: CalculusError) -> Self {
        let code = match e {
            CalculusError::LimitExceeded(_) => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        };
        fail(code, e)
    }
}

impl From<CtgError> for Failure {
    fn from(e: CtgError) -> Self {
        let code = match e {
            CtgError::DeadlockedGraph(_) | CtgError::CyclicInput => EXIT_DEADLOCK,
            CtgError::TooLarge(..) => EXIT_RESOURCE,
            _ => EXIT_INPUT,
        };
        fail(code, e)
    }
}

impl From<BitsError> for Failure {
    fn from(e: BitsError) -> Self {
        match e {
            BitsError::DeadlockedGraph(names) => CtgError::DeadlockedGraph(names).into(),
            other => fail(EXIT_RESOURCE, other),
        }
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Bits(b) => b.into(),
            other => fail(EXIT_RESOURCE, other),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::DeadlockedGraph => EXIT_DEADLOCK,
            _ => EXIT_RESOURCE,
        };
        fail(code, e)
    }
}

impl From<SubclassError> for Failure {
    fn from(e: SubclassError) -> Self {
        match e {
            SubclassError::Graph(g) => g.into(),
            SubclassError::InvalidParameters(_) => fail(EXIT_USAGE, e),
            other => fail(EXIT_INAPPLICABLE, other),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        let code = match &e {
            BenchError::Process(_, c) => Failure::from(c.clone()).code,
            BenchError::Graph(_, g) => Failure::from(g.clone()).code,
            _ => EXIT_INPUT,
        };
        fail(code, e)
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    Ok(Instance::read(path)?)
}

fn load_process(path: &Path) -> Result<ProcessTerm, Failure> {
    match load(path)? {
        Instance::Process(p) => Ok(p),
        Instance::Graph(_) => Err(fail(EXIT_INAPPLICABLE, "this command needs a process term, not an edge list")),
    }
}

/// The graph of an input, failing with the deadlock code when it has one.
fn live_graph(inst: &Instance) -> Result<ControlGraph, Failure> {
    let g = inst.graph()?;
    if has_deadlock(&g) {
        return Err(CtgError::DeadlockedGraph(g.residual_barriers()).into());
    }
    Ok(g)
}

/// Series-parallel shape of a process or a DAG.
fn shape(inst: &Instance) -> Result<SPTree, Failure> {
    match inst {
        Instance::Process(p) => Ok(sp_tree(p)?),
        Instance::Graph(g) => {
            let g = live_graph(&Instance::Graph(g.clone()))?;
            Ok(sp_tree_of_graph(&g.transitive_reduction())?)
        }
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| fail(EXIT_RESOURCE, e);
    match cmd {
        Command::Parse { file, ast } => {
            let p = load_process(&file)?;
            let report = validate(&p)?;
            if ast {
                writeln!(out, "{p:#?}").map_err(io)?;
            } else {
                writeln!(out, "{p}").map_err(io)?;
            }
            eprintln!("actions: {}", report.labels.len());
            if !report.unused_barriers.is_empty() {
                let names: Vec<String> = report.unused_barriers.iter().map(|b| b.to_string()).collect();
                eprintln!("warning: barriers never waited on: {}", names.join(", "));
            }
        }
        Command::Ctg { file, dot } => {
            let g = load(&file)?.graph()?;
            match dot {
                Some(path) if path.as_os_str() == "-" => write!(out, "{}", to_dot(&g)).map_err(io)?,
                Some(path) => std::fs::write(&path, to_dot(&g)).map_err(io)?,
                None => write!(out, "{}", to_edge_list(&g)).map_err(io)?,
            }
            if has_deadlock(&g) {
                return Err(CtgError::DeadlockedGraph(g.residual_barriers()).into());
            }
            eprintln!("deadlock-free: {} vertices, {} edges", g.len(), g.num_edges());
        }
        Command::Count { file, method } => {
            let inst = load(&file)?;
            let count = match method {
                CountMethod::Fj => fj_count(&shape(&inst)?),
                CountMethod::Bits => count_executions(&live_graph(&inst)?)?,
                CountMethod::Bruteforce => brute_force_extensions(&live_graph(&inst)?)?.len().into(),
                CountMethod::Downsets => count_by_downsets(&live_graph(&inst)?, 1 << 24)?,
            };
            writeln!(out, "{count}").map_err(io)?;
        }
        Command::Sample {
            file,
            method,
            count,
            seed,
            burn_in,
            thin,
        } => {
            let inst = load(&file)?;
            let draws: Vec<Execution> = match method {
                SampleMethod::Fj => {
                    let t = shape(&inst)?;
                    let mut rng = seeded(seed);
                    (0..count).map(|_| fj_sample(&t, &mut rng)).collect()
                }
                SampleMethod::Bits => sample_execution(&live_graph(&inst)?, count, seed)?,
                SampleMethod::Bruteforce => brute_force_sampler(&live_graph(&inst)?, count, seed)?,
                SampleMethod::Mcmc => {
                    let g = live_graph(&inst)?;
                    let n2 = g.len() * g.len();
                    mcmc_sampler(&g, count, burn_in.unwrap_or(50 * n2), thin.unwrap_or(10 * n2), seed)?
                }
            };
            for e in draws {
                writeln!(out, "{e}").map_err(io)?;
            }
        }
        Command::Classify { file } => {
            let inst = load(&file)?;
            if let Instance::Process(p) = &inst {
                let promise = is_promise_process(p);
                writeln!(out, "fork-join: {}", yes(is_fork_join(p))).map_err(io)?;
                writeln!(out, "promise: {}", yes(promise)).map_err(io)?;
                writeln!(out, "arch: {}", yes(promise && is_arch(p).unwrap_or(false))).map_err(io)?;
            }
            let g = inst.graph()?;
            let deadlock = has_deadlock(&g);
            writeln!(out, "deadlock: {}", yes(deadlock)).map_err(io)?;
            if !deadlock {
                writeln!(out, "series-parallel: {}", yes(sp_tree_of_graph(&g.transitive_reduction()).is_ok()))
                    .map_err(io)?;
                writeln!(out, "bit-decomposable: {}", yes(is_bit_decomposable(&g)?)).map_err(io)?;
            }
        }
        Command::Gen {
            class,
            size,
            promises,
            seed,
        } => {
            let mut rng = seeded(seed);
            let p = match class {
                GenClass::Fj => gen_fork_join(size, &mut rng)?,
                GenClass::Arch => gen_arch(size, promises, &mut rng)?,
            };
            writeln!(out, "{p}").map_err(io)?;
        }
        Command::Bench { spec, out: report_path } => {
            let text = std::fs::read_to_string(&spec).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", spec.display())))?;
            let spec = BenchSpec::from_json(&text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", spec.display())))?;
            let report = bench_run(&spec)?;
            if let Some(path) = report_path {
                std::fs::write(&path, report.to_json()).map_err(io)?;
            }
            write!(out, "{}", report.to_table()).map_err(io)?;
            if report.disagreements > 0 {
                return Err(fail(
                    EXIT_DISAGREEMENT,
                    format!("{} instance(s) with disagreeing counts", report.disagreements),
                ));
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parse `argv` (program name first), run the command with `out` as
/// stdout and return the exit code. Diagnostics go to stderr.
pub fn run_with_output<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // Fails only when a pool already exists, e.g. in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .stack_size(256 << 20)
            .build_global();
    }
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("bsync: {}", f.message);
            f.code
        }
    }
}

/// [`run_with_output`] on the process's stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = run_with_output(argv, &mut lock);
    let _ = lock.flush();
    code
}
