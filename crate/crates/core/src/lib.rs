//! Slotted-time simulation of uplink channel access in a single-AP network
//! with hidden terminals, classical CSMA/CA baselines, and multi-agent PPO
//! agents that learn to share the channel.

pub mod agent;
pub mod baseline;
pub mod bss;
pub mod eval;
pub mod experiment;
pub mod ledger;
pub mod medium;
pub mod metrics;
pub mod neural;
pub mod observation;
pub mod oracle;
pub mod reward;
pub mod topology;
pub mod trainer;
