//! Benchmark harness: generate instances, count them with several methods,
//! cross-check the counts and time everything.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    brute_force_extensions_with, chi_square_uniformity, count_by_downsets, BruteForceLimits,
    OracleError,
};
use crate::bits::{count_executions_with, BitsError, Limits, Strategy};
use crate::calculus::{parse_process, validate, CalculusError, ProcessTerm};
use crate::ctlgraph::{build_ctg, has_deadlock, parse_edge_list, ControlGraph, CtgError};
use crate::random::seeded;
use crate::sampler::Sampler;
use crate::subclasses::{fj_count, gen_arch, gen_fork_join, is_fork_join, sp_tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bits,
    Fj,
    Bruteforce,
    Downsets,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bits => "bits",
            Method::Fj => "fj",
            Method::Bruteforce => "bruteforce",
            Method::Downsets => "downsets",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum InstanceSpec {
    Fj { sizes: Vec<usize> },
    Arch { sizes: Vec<usize>, promises: usize },
    /// A process term or an edge list read from disk.
    File { path: PathBuf },
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_timeout() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub instances: Vec<InstanceSpec>,
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Per cell, in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Draws of the BITS sampler per instance; 0 skips sampling.
    #[serde(default)]
    pub sample_draws: usize,
}

impl BenchSpec {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Done { count: String, seconds: f64 },
    Timeout { seconds: f64 },
    ResourceLimit { message: String, seconds: f64 },
    Inapplicable { message: String },
    Failed { message: String },
}

impl Cell {
    fn count(&self) -> Option<&str> {
        match self {
            Cell::Done { count, .. } => Some(count),
            _ => None,
        }
    }

    fn short(&self) -> String {
        match self {
            Cell::Done { seconds, .. } => format!("{seconds:.3}s"),
            Cell::Timeout { .. } => "timeout".into(),
            Cell::ResourceLimit { .. } => "limit".into(),
            Cell::Inapplicable { .. } => "n/a".into(),
            Cell::Failed { .. } => "error".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub draws: usize,
    pub seconds: f64,
    /// Every draw was a linear extension of the instance.
    pub all_valid: bool,
    /// Only when the extensions were few enough to enumerate.
    pub chi_square: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub class: String,
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub promises: Option<usize>,
    pub seed: u64,
    /// Agreed count, when at least one method finished.
    pub count: Option<String>,
    pub cells: BTreeMap<Method, Cell>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub methods: Vec<Method>,
    pub rows: Vec<BenchRow>,
    pub disagreements: usize,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}", path = .0.display(), source = .1)]
    Io(PathBuf, std::io::Error),
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Process(PathBuf, CalculusError),
    #[error("{path}: {err}", path = .0.display(), err = .1)]
    Graph(PathBuf, CtgError),
    #[error("invalid bench spec: {0}")]
    Spec(String),
}

/// An input to count: a process term or a bare DAG.
#[derive(Debug, Clone)]
pub enum Instance {
    Process(ProcessTerm),
    Graph(ControlGraph),
}

impl Instance {
    /// `.dag`, `.poset` and `.edges` files are edge lists; anything else is
    /// a process term.
    pub fn read(path: &std::path::Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.into(), e))?;
        if is_edge_list_path(path) {
            parse_edge_list(&text)
                .map(Instance::Graph)
                .map_err(|e| BenchError::Graph(path.into(), e))
        } else {
            let bad = |e| BenchError::Process(path.into(), e);
            let p = parse_process(&text).map_err(bad)?;
            validate(&p).map_err(bad)?;
            Ok(Instance::Process(p))
        }
    }

    pub fn graph(&self) -> Result<ControlGraph, CtgError> {
        match self {
            Instance::Process(p) => build_ctg(p),
            Instance::Graph(g) => Ok(g.clone()),
        }
    }
}

pub fn is_edge_list_path(path: &std::path::Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("dag" | "poset" | "edges")
    )
}

/// Instances are enumerated before anything runs so that reports come out
/// in spec order whatever the scheduling.
struct Job {
    class: String,
    size: usize,
    promises: Option<usize>,
    seed: u64,
    instance: Result<Instance, String>,
}

fn instance_seed(seed: u64, size: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(size as u64)
}

fn jobs(spec: &BenchSpec) -> Result<Vec<Job>, BenchError> {
    let mut out = Vec::new();
    for inst in &spec.instances {
        match inst {
            InstanceSpec::Fj { sizes } => {
                for &size in sizes {
                    for &seed in &spec.seeds {
                        let p = gen_fork_join(size, &mut seeded(instance_seed(seed, size)))
                            .map_err(|e| BenchError::Spec(e.to_string()))?;
                        out.push(Job {
                            class: "fj".into(),
                            size,
                            promises: None,
                            seed,
                            instance: Ok(Instance::Process(p)),
                        });
                    }
                }
            }
            InstanceSpec::Arch { sizes, promises } => {
                for &size in sizes {
                    for &seed in &spec.seeds {
                        let p = gen_arch(size, *promises, &mut seeded(instance_seed(seed, size)))
                            .map_err(|e| BenchError::Spec(e.to_string()))?;
                        out.push(Job {
                            class: "arch".into(),
                            size,
                            promises: Some(*promises),
                            seed,
                            instance: Ok(Instance::Process(p)),
                        });
                    }
                }
            }
            InstanceSpec::File { path } => {
                let instance = Instance::read(path).map_err(|e| e.to_string());
                let size = match &instance {
                    Ok(Instance::Process(p)) => p.size(),
                    Ok(Instance::Graph(g)) => g.len(),
                    Err(_) => 0,
                };
                out.push(Job {
                    class: path.display().to_string(),
                    size,
                    promises: None,
                    seed: 0,
                    instance,
                });
            }
        }
    }
    Ok(out)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Caps that keep the exhaustive oracles within a desk machine's memory.
const BENCH_BRUTE_FORCE: BruteForceLimits = BruteForceLimits {
    max_vertices: 64,
    max_extensions: 1_000_000,
};
const BENCH_MAX_DOWNSETS: usize = 1 << 22;

fn run_cell(method: Method, inst: &Instance, graph: &Result<ControlGraph, CtgError>, timeout: Duration) -> Cell {
    let start = Instant::now();
    let graph = match (method, graph) {
        (Method::Fj, _) => None,
        (_, Ok(g)) => Some(g),
        (_, Err(CtgError::TooLarge(..))) => {
            return Cell::ResourceLimit {
                message: graph.as_ref().unwrap_err().to_string(),
                seconds: 0.0,
            }
        }
        (_, Err(e)) => return Cell::Failed { message: e.to_string() },
    };
    let elapsed = || secs(start.elapsed());
    match method {
        Method::Fj => {
            let Instance::Process(p) = inst else {
                return Cell::Inapplicable {
                    message: "not a process term".into(),
                };
            };
            if !is_fork_join(p) {
                return Cell::Inapplicable {
                    message: "not fork-join".into(),
                };
            }
            match sp_tree(p) {
                Ok(t) => Cell::Done {
                    count: fj_count(&t).to_string(),
                    seconds: elapsed(),
                },
                Err(e) => Cell::Inapplicable { message: e.to_string() },
            }
        }
        Method::Bits => {
            let limits = Limits {
                deadline: Some(start + timeout),
                ..Limits::default()
            };
            match count_executions_with(graph.expect("graph"), Strategy::Default, limits) {
                Ok(c) => Cell::Done {
                    count: c.to_string(),
                    seconds: elapsed(),
                },
                Err(BitsError::Timeout) => Cell::Timeout { seconds: elapsed() },
                Err(e @ BitsError::TooManyLeaves(_)) => Cell::ResourceLimit {
                    message: e.to_string(),
                    seconds: elapsed(),
                },
                Err(e) => Cell::Failed { message: e.to_string() },
            }
        }
        Method::Bruteforce | Method::Downsets => {
            let g = graph.expect("graph");
            let counted = if method == Method::Bruteforce {
                brute_force_extensions_with(g, BENCH_BRUTE_FORCE).map(|v| v.len().to_string())
            } else {
                count_by_downsets(g, BENCH_MAX_DOWNSETS).map(|c| c.to_string())
            };
            match counted {
                Ok(count) => Cell::Done {
                    count,
                    seconds: elapsed(),
                },
                Err(
                    e @ (OracleError::TooManyVertices(..)
                    | OracleError::TooManyExtensions(_)
                    | OracleError::TooManyStates(..)),
                ) => Cell::ResourceLimit {
                    message: e.to_string(),
                    seconds: elapsed(),
                },
                Err(e) => Cell::Failed { message: e.to_string() },
            }
        }
    }
}

fn run_sampler(g: &ControlGraph, draws: usize, seed: u64) -> Option<SamplerStats> {
    if has_deadlock(g) {
        return None;
    }
    let start = Instant::now();
    let sampler = Sampler::new(g).ok()?;
    let mut rng = seeded(seed);
    let samples: Vec<_> = (0..draws).map_while(|_| sampler.sample(&mut rng).ok()).collect();
    let seconds = secs(start.elapsed());
    let all_valid = samples.len() == draws && samples.iter().all(|e| g.is_linear_extension(e));
    let support = brute_force_extensions_with(
        g,
        BruteForceLimits {
            max_vertices: 64,
            max_extensions: 100_000,
        },
    )
    .ok();
    let test = support.and_then(|s| chi_square_uniformity(&samples, &s).ok());
    Some(SamplerStats {
        draws,
        seconds,
        all_valid,
        chi_square: test.map(|t| t.0),
        p_value: test.map(|t| t.1),
    })
}

fn run_job(job: Job, spec: &BenchSpec) -> BenchRow {
    let timeout = Duration::from_secs_f64(spec.timeout_secs.max(0.0));
    let mut cells = BTreeMap::new();
    let mut sampler = None;
    match &job.instance {
        Ok(inst) => {
            let graph = inst.graph();
            for &m in &spec.methods {
                cells.insert(m, run_cell(m, inst, &graph, timeout));
            }
            if spec.sample_draws > 0 {
                if let Ok(g) = &graph {
                    sampler = run_sampler(g, spec.sample_draws, job.seed);
                }
            }
        }
        Err(message) => {
            for &m in &spec.methods {
                cells.insert(m, Cell::Failed { message: message.clone() });
            }
        }
    }
    let counts: Vec<&str> = cells.values().filter_map(Cell::count).collect();
    let agree = counts.windows(2).all(|w| w[0] == w[1]);
    BenchRow {
        class: job.class,
        size: job.size,
        promises: job.promises,
        seed: job.seed,
        count: agree.then(|| counts.first().map(|c| c.to_string())).flatten(),
        cells,
        agree,
        sampler,
    }
}

/// Stack for worker threads; generated terms nest deeply.
const WORKER_STACK: usize = 256 << 20;

/// Run every method on every instance. Instances run in parallel; per-cell
/// failures and timeouts are recorded in the report.
pub fn bench_run(spec: &BenchSpec) -> Result<BenchReport, BenchError> {
    if spec.methods.is_empty() {
        return Err(BenchError::Spec("no methods".into()));
    }
    if !(spec.timeout_secs >= 0.0) {
        return Err(BenchError::Spec("timeout must be non-negative".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(rayon::current_num_threads())
        .stack_size(WORKER_STACK)
        .build()
        .map_err(|e| BenchError::Spec(e.to_string()))?;
    let todo = jobs(spec)?;
    let rows: Vec<BenchRow> = pool.install(|| todo.into_par_iter().map(|j| run_job(j, spec)).collect());
    let disagreements = rows.iter().filter(|r| !r.agree).count();
    Ok(BenchReport {
        methods: spec.methods.clone(),
        rows,
        disagreements,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per instance with aligned columns.
    pub fn to_table(&self) -> String {
        let mut header = vec!["class".to_string(), "size".into(), "seed".into(), "count".into()];
        header.extend(self.methods.iter().map(|m| m.name().to_string()));
        header.push("chi2 p".into());
        header.push("agree".into());
        let mut lines = vec![header];
        for r in &self.rows {
            let size = match r.promises {
                Some(k) => format!("{}:{k}", r.size),
                None => r.size.to_string(),
            };
            let mut line = vec![
                r.class.clone(),
                size,
                r.seed.to_string(),
                r.count.clone().unwrap_or_else(|| "-".into()),
            ];
            line.extend(self.methods.iter().map(|m| r.cells.get(m).map_or("-".into(), Cell::short)));
            line.push(
                r.sampler
                    .as_ref()
                    .and_then(|s| s.p_value)
                    .map_or("-".into(), |p| format!("{p:.3}")),
            );
            line.push(if r.agree { "yes" } else { "NO" }.into());
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let cols: Vec<String> = l
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cols.join("  ").trim_end());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> BenchSpec {
        BenchSpec::from_json(json).unwrap()
    }

    #[test]
    fn fork_join_methods_agree() {
        let s = spec(r#"{"instances":[{"class":"fj","sizes":[10,30]}],
                         "methods":["fj","bits","bruteforce","downsets"],"seeds":[1,2]}"#);
        let r = bench_run(&s).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.disagreements, 0);
        for row in &r.rows {
            assert!(matches!(row.cells[&Method::Fj], Cell::Done { .. }));
            assert!(matches!(row.cells[&Method::Bits], Cell::Done { .. }));
            assert!(row.count.is_some());
        }
    }

    #[test]
    fn arch_methods_agree() {
        let s = spec(r#"{"instances":[{"class":"arch","sizes":[10],"promises":2}],
                         "methods":["bits","bruteforce","fj"],"sample_draws":2000}"#);
        let r = bench_run(&s).unwrap();
        let row = &r.rows[0];
        assert!(row.agree);
        assert!(matches!(row.cells[&Method::Bruteforce], Cell::Done { .. }));
        let stats = row.sampler.as_ref().unwrap();
        assert!(stats.all_valid);
        assert!(r.to_table().lines().count() == 2);
    }

    #[test]
    fn zero_timeout_is_recorded() {
        let s = spec(r#"{"instances":[{"class":"fj","sizes":[40]}],"methods":["bits","fj"],
                         "timeout_secs":0}"#);
        let r = bench_run(&s).unwrap();
        assert!(matches!(r.rows[0].cells[&Method::Bits], Cell::Timeout { .. }));
        assert!(r.rows[0].agree);
    }

    #[test]
    fn report_round_trips() {
        let s = spec(r#"{"instances":[{"class":"fj","sizes":[5]}],"methods":["fj","bits"]}"#);
        let r = bench_run(&s).unwrap();
        let back: BenchReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.rows[0].count, r.rows[0].count);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(BenchSpec::from_json(r#"{"instances":[],"methods":["magic"]}"#).is_err());
        let s = spec(r#"{"instances":[{"class":"fj","sizes":[0]}],"methods":["fj"]}"#);
        assert!(matches!(bench_run(&s), Err(BenchError::Spec(_))));
    }
}
