//! Bi-objective scheduling for distributed flow shops: makespan and carbon
//! emissions, with a knowledge-driven memetic algorithm and baselines.

pub mod baselines;
pub mod encoding;
pub mod kdma;
pub mod metrics;
pub mod model;
