//! Concrete branching reactive bisimilarity for CCSP with time-outs.

pub mod term;
pub mod lts;
pub mod semantics;
pub mod encoding;
pub mod equiv;
pub mod modal;
pub mod par;
pub mod fuzz;
