//! Scenario runner and verification suite for the workbench: a registry of
//! deterministic experiments, a TOML-configured CLI, and the pinned
//! verification criteria.

pub mod artifacts;
pub mod config;
pub mod runner;
pub mod scenarios;
pub mod verify;
