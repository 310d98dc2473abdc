//! The switchable plasticity mechanisms acting on a [`GrowableNet`](crate::net::GrowableNet).

pub mod config;
pub mod ewc;
pub mod gating;
pub mod growth;
pub mod hebbian;
pub mod importance;
pub mod pruning;
pub mod replay;
pub mod routing;

pub use config::{EwcMode, Flags, GrowthParams, Hyper, Mechanism, MechanismConfig};
pub use ewc::FisherStore;
pub use gating::{apply_gating, GateFactors};
pub use growth::{maybe_grow, GrowthController, GrowthDecision};
pub use hebbian::hebbian_update;
pub use importance::{apply_freeze_scaling, freeze_task, update_importance};
pub use pruning::{prune_and_regenerate, PruneReport};
pub use replay::{replay_step, ReplayBuffer, TaskMemory};
pub use routing::{route_by_similarity, RoutingDecision};
