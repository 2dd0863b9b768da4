//! GOAL agents: beliefs, declarative goals, conditional actions executed under
//! weakly fair scheduling, and verification of their Hoare and temporal
//! properties.

pub mod agent_program;
pub mod capabilities;
pub mod executor;
pub mod mental_state;
pub mod oracle;
pub mod prop_logic;
pub mod report;
pub mod shopping;
pub mod syntax;
pub mod universe;
pub mod verifier;
