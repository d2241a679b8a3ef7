//! Syntactic subclasses.
//!
//! Fork-join processes are series-parallel and count in linear time.
//! Promise processes have a single main thread that spawns one-shot helper
//! threads and joins them later; arch processes join only after every spawn.

mod forkjoin;
mod promise;

use thiserror::Error;

use crate::ctlgraph::CtgError;

pub use forkjoin::{
    fj_count, fj_sample, gen_fork_join, is_fork_join, sp_tree, sp_tree_of_graph, SPTree,
    UNIFORM_GEN_LIMIT,
};
pub use promise::{gen_arch, is_arch, is_promise_process, main_thread, MainEvent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubclassError {
    #[error("the process is not fork-join")]
    NotForkJoin,
    #[error("the causal order is not series-parallel")]
    NotSeriesParallel,
    #[error("the process is not a promise process")]
    NotPromise,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Graph(#[from] CtgError),
}
