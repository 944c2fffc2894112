//! Infra-Bayesian beliefs and agents for small stateless decision problems.
//!
//! Beliefs are finite sets of affine measures ([`AMeasure`]) over a compressed
//! [`worldmodels::WorldModel`]. They are evaluated by their worst-case point,
//! conditioned with [`update::condition`], and acted on by the maximin agents
//! in [`agents`].

pub mod agents;
pub mod environments;
pub mod error;
pub mod inframeasure;
pub mod rng;
pub mod update;
pub mod worldmodels;

pub use agents::{
    Agent, BanditAgent, BanditEvaluator, EvaluationOrder, Evaluator, Flavor, NewcombAgent,
    NewcombEvaluator, Policy, PolicyGrid,
};
pub use error::{Error, Result};
pub use inframeasure::{AMeasure, Infradistribution, PruneMode, TIE_TOLERANCE};
pub use update::{
    condition, raw_update, renormalize, update_infra, ObservationEvent, DEGENERACY_TOLERANCE,
};
