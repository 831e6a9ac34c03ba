//! Simulated network: a logical-time bus, attackers, scenarios and the
//! property matrix built from them.

pub mod adversary;
pub mod bus;
pub mod report;
pub mod scenario;
pub mod session;
pub mod world;

pub use adversary::{
    Absent, Adversary, AdversaryKind, Capture, ChallengeReuse, Eavesdropper, FakeNetwork,
    RogueServing, Tamperer,
};
pub use bus::{Bus, Envelope, FaultSchedule, Tap};
pub use report::{run_matrix, run_matrix_with, Cell, MatrixReport, MatrixRow};
pub use scenario::{run_scenario, Scenario, ScenarioConfig, ScenarioOutcome, SessionVerdicts};
pub use session::{check_network, home_network_key, issue_vector, run_session, SessionConfig};
pub use world::{happy_path, network_for, run_happy_batch, RunRecord, Side, World, WorldConfig};

/// How independent jobs (scenarios, seeded runs) are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is on, otherwise the same as `Sequential`.
    #[default]
    Parallel,
}

/// Order-preserving map over independent jobs.
pub(crate) fn map_with<T, R, F>(items: Vec<T>, exec: Execution, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.into_par_iter().map(f).collect()
        }
        _ => items.into_iter().map(f).collect(),
    }
}

pub(crate) fn par_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    map_with(items, Execution::Parallel, f)
}
