//! Scenario execution: resolve the configuration, run, write the run
//! record, and surface scenario-local check failures in the exit code.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Result};

use crate::artifacts::write_json;
use crate::config::{ConfigError, ParamValue, ResolvedConfig, RunConfigFile, RunRecord};
use crate::scenarios::{find, RunContext};

pub struct RunRequest {
    pub scenario: String,
    pub config_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plots: bool,
}

pub const DEFAULT_SEED: u64 = 42;
pub const OUT_ENV_VAR: &str = "COUNTERFACT_OUT";

pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn execute(request: &RunRequest) -> Result<RunRecord, ConfigError> {
    let scenario = find(&request.scenario)
        .ok_or_else(|| ConfigError::UnknownScenario(request.scenario.clone()))?;
    let file = match &request.config_file {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    if let Some(name) = &file.scenario {
        if *name != request.scenario {
            return Err(ConfigError::Parse(format!(
                "config file names scenario `{name}`, command line says `{}`",
                request.scenario
            )));
        }
    }
    let seed = request.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let params: BTreeMap<String, ParamValue> = file.params;
    let config = ResolvedConfig::resolve(&request.scenario, &(scenario.schema)(), &params, seed)?;
    let out_dir = request
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| default_out_root().join(&request.scenario));
    std::fs::create_dir_all(&out_dir).map_err(|e| ConfigError::Io(e.to_string()))?;
    let started = Instant::now();
    let ctx = RunContext {
        config: &config,
        out_dir: &out_dir,
        plots: request.plots,
    };
    let output = (scenario.run)(&ctx).map_err(|e| ConfigError::Io(e.to_string()))?;
    let record = RunRecord {
        scenario: request.scenario.clone(),
        config_hash: config.config_hash(),
        seed,
        artifacts: output
            .artifacts
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect(),
        wall_time_ms: started.elapsed().as_millis(),
        checks_passed: output.checks_passed,
    };
    write_json(&out_dir.join("run_record.json"), &record)
        .map_err(|e| ConfigError::Io(e.to_string()))?;
    println!("{}: {}", request.scenario, output.summary);
    Ok(record)
}

/// Run a scenario with explicit params into a directory; used by tests.
pub fn run_into(
    scenario_name: &str,
    params: &BTreeMap<String, ParamValue>,
    seed: u64,
    out_dir: &Path,
) -> Result<RunRecord> {
    let scenario = find(scenario_name).ok_or_else(|| anyhow!("unknown scenario"))?;
    let config = ResolvedConfig::resolve(scenario_name, &(scenario.schema)(), params, seed)?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let ctx = RunContext {
        config: &config,
        out_dir,
        plots: false,
    };
    let output = (scenario.run)(&ctx)?;
    Ok(RunRecord {
        scenario: scenario_name.to_string(),
        config_hash: config.config_hash(),
        seed,
        artifacts: output
            .artifacts
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect(),
        wall_time_ms: started.elapsed().as_millis(),
        checks_passed: output.checks_passed,
    })
}
