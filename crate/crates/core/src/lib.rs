//! Heilbronn triangle problem in the unit square: models, relaxations,
//! spatial branch-and-bound and exact verification of optimal point sets.

pub mod bnb;
pub mod bounds;
pub mod corpus;
pub mod exact;
pub mod geometry;
pub mod heuristic;
pub mod model;
pub mod relax;
pub mod structure;
