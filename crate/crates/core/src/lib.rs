//! Compiler from deterministic two-counter machines to two-clock weighted
//! timed games with non-negative integer weights, plus an exact-arithmetic
//! engine to replay strategies on the result and check its cost identities.

pub mod compiler;
pub mod gadgets;
pub mod machine;
pub mod model;
pub mod par;
pub mod rational;
pub mod strategy;
pub mod verify;
