//! PDDL front end: parsing, grounding, relaxed reachability, mutexes and the
//! grounded JSON format.

pub mod format;
pub mod ground;
pub mod mutex;
pub mod pddl;
pub mod reachability;

pub use format::{load_ground_task, save_ground_task, GroundBundle};
pub use ground::{ground, ground_with_limits, GroundingLimits};
pub use mutex::{compute_mutexes, MutexTable};
pub use pddl::{parse_pddl, LiftedTask};
pub use reachability::{compute_reachable_actions, ReachableActions};

use crate::error::Result;
use crate::strips::LoadReport;

/// Parse, ground and analyse a domain/problem pair in one go.
pub fn ground_pddl(domain: &str, problem: &str) -> Result<(GroundBundle, LoadReport)> {
    let lifted = parse_pddl(domain, problem)?;
    let (task, report) = ground(&lifted)?;
    let reachable = compute_reachable_actions(&task);
    let mutexes = compute_mutexes(&task, &reachable);
    Ok((
        GroundBundle {
            task,
            mutexes,
            reachable,
        },
        report,
    ))
}
