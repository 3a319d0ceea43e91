//! Batch experiment runner: config validation, dispatch and artifact output.

mod experiments;
mod schema;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub use experiments::{find, Experiment, Outputs, RunContext, REGISTRY};
pub use schema::{Limit, ParamKind, ParamSpec, Params};

use crate::error::{ConfigViolation, Error, Result};
use schema::{suggest, violation};

const TOP_LEVEL: [&str; 5] = ["experiment", "parameters", "seed", "trials", "output_dir"];
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_OUTPUT_DIR: &str = "qsense-out";
const MAX_TRIALS: u64 = 100_000_000;

/// A fully validated run request.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: Params,
    pub seed: u64,
    pub trials: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Normalized echo with every default filled in.
    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "parameters": self.params.to_json(),
            "seed": self.seed,
            "trials": self.trials,
            "output_dir": self.output_dir.to_string_lossy(),
        })
    }

    fn context(&self) -> RunContext {
        RunContext { seed: self.seed, trials: self.trials }
    }
}

/// Parses and validates a JSON config, reporting every violation at once.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig> {
    validate_value(&serde_json::from_str(raw)?)
}

pub fn validate_value(doc: &Value) -> Result<ExperimentConfig> {
    let Some(obj) = doc.as_object() else {
        return Err(Error::Config(vec![violation("$", "config must be a JSON object".into())]));
    };
    let mut out: Vec<ConfigViolation> = Vec::new();
    for key in obj.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            let mut msg = "unknown key".to_owned();
            if let Some(best) = suggest(key, TOP_LEVEL.iter().copied()) {
                msg.push_str(&format!("; did you mean \"{best}\"?"));
            }
            out.push(violation(key, msg));
        }
    }
    let seed = match obj.get("seed") {
        None => DEFAULT_SEED,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            out.push(violation("seed", format!("expected a non-negative integer, got {v}")));
            DEFAULT_SEED
        }),
    };
    let trials = match obj.get("trials") {
        None => DEFAULT_TRIALS,
        Some(v) => match v.as_u64() {
            Some(t) if (1..=MAX_TRIALS).contains(&t) => t as usize,
            _ => {
                out.push(violation("trials", format!("expected an integer in 1..={MAX_TRIALS}, got {v}")));
                DEFAULT_TRIALS
            }
        },
    };
    let output_dir = match obj.get("output_dir") {
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
        Some(Value::String(s)) if !s.is_empty() => PathBuf::from(s),
        Some(v) => {
            out.push(violation("output_dir", format!("expected a non-empty path string, got {v}")));
            PathBuf::from(DEFAULT_OUTPUT_DIR)
        }
    };
    let empty = Map::new();
    let raw_params = match obj.get("parameters") {
        None => &empty,
        Some(Value::Object(m)) => m,
        Some(v) => {
            out.push(violation("parameters", format!("expected an object, got {v}")));
            &empty
        }
    };
    let name = match obj.get("experiment") {
        Some(Value::String(s)) => Some(s.as_str()),
        Some(v) => {
            out.push(violation("experiment", format!("expected a string, got {v}")));
            None
        }
        None => {
            out.push(violation("experiment", "required key is missing".into()));
            None
        }
    };
    let mut params = None;
    match name.map(|n| (n, find(n))) {
        Some((_, Some(exp))) => {
            let p = Params::validate(raw_params, &(exp.params)(), &mut out);
            (exp.check)(&p, &mut out);
            params = Some(p);
        }
        Some((n, None)) => {
            let mut msg = format!("unknown experiment \"{n}\"");
            if let Some(best) = suggest(n, REGISTRY.iter().map(|e| e.name)) {
                msg.push_str(&format!("; did you mean \"{best}\"?"));
            }
            out.push(violation("experiment", msg));
        }
        None => {}
    }
    match (out.is_empty(), params, name) {
        (true, Some(params), Some(name)) => {
            Ok(ExperimentConfig { experiment: name.to_owned(), params, seed, trials, output_dir })
        }
        _ => Err(Error::Config(out)),
    }
}

/// Runs an experiment in memory; the files are returned, not written.
pub fn execute(config: &ExperimentConfig) -> Result<Outputs> {
    let exp = find(&config.experiment).ok_or_else(|| Error::Argument(format!("unknown experiment {}", config.experiment)))?;
    (exp.run)(&config.params, &config.context())
}

/// What a completed run left on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub output_dir: PathBuf,
    /// File names written, manifest last.
    pub files: Vec<String>,
    pub summary: Value,
    pub wall_clock_s: f64,
}

fn summary_document(config: &ExperimentConfig, outputs: &Outputs) -> Value {
    json!({
        "experiment": config.experiment,
        "seed": config.seed,
        "trials": config.trials,
        "results": Value::Object(outputs.summary.clone()),
    })
}

fn to_pretty(v: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Runs the experiment and writes `<name>.csv` (plus any extra data files),
/// `summary.json` and `manifest.json` into the output directory.
///
/// Everything is first written to a staging directory inside the output
/// directory and moved into place only after the run succeeded, the
/// manifest last. On failure the staging directory is removed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let started = Instant::now();
    let outputs = execute(config)?;
    let summary = summary_document(config, &outputs);
    let mut files = outputs.files.clone();
    files.push(("summary.json".into(), to_pretty(&summary)?));
    let checksums: Map<String, Value> =
        files.iter().map(|(name, bytes)| (name.clone(), json!(hex::encode(Sha256::digest(bytes))))).collect();
    let wall_clock_s = started.elapsed().as_secs_f64();
    let manifest = json!({
        "toolkit": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.to_json(),
        "seed": config.seed,
        "wall_clock_s": wall_clock_s,
        "outputs": Value::Object(checksums),
    });
    files.push(("manifest.json".into(), to_pretty(&manifest)?));
    commit(&config.output_dir, &files)?;
    Ok(RunReport {
        output_dir: config.output_dir.clone(),
        files: files.into_iter().map(|(n, _)| n).collect(),
        summary,
        wall_clock_s,
    })
}

fn commit(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let staging = dir.join(format!(".qsense-staging-{}", std::process::id()));
    let result = (|| -> Result<()> {
        fs::create_dir_all(&staging)?;
        for (name, bytes) in files {
            fs::write(staging.join(name), bytes)?;
        }
        for (name, _) in files {
            fs::rename(staging.join(name), dir.join(name))?;
        }
        Ok(())
    })();
    let cleanup = fs::remove_dir_all(&staging);
    result?;
    cleanup.map_err(Error::from)
}

/// Registry listing with the parameter schema of every experiment.
pub fn list_experiments() -> Value {
    let experiments: Vec<Value> = REGISTRY
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "description": e.description,
                "outputs": e.outputs.iter().copied().chain(["summary.json", "manifest.json"]).collect::<Vec<_>>(),
                "parameters": (e.params)().iter().map(ParamSpec::describe).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "config": {
            "experiment": {"type": "string", "required": true},
            "parameters": {"type": "object", "required": false},
            "seed": {"type": "integer", "required": false, "default": DEFAULT_SEED},
            "trials": {"type": "integer", "required": false, "default": DEFAULT_TRIALS, "minimum": 1, "maximum": MAX_TRIALS},
            "output_dir": {"type": "string", "required": false, "default": DEFAULT_OUTPUT_DIR},
        },
        "experiments": experiments,
    })
}

/// Sizes the global thread pool from `QSENSE_THREADS` when it is set.
pub fn configure_threads_from_env() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var("QSENSE_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| Error::Argument(format!("QSENSE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Argument(format!("cannot size the thread pool: {e}")))?;
    Ok(Some(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ramsey_is_accepted() {
        let c = validate_config(r#"{"experiment": "ramsey", "parameters": {"omega0": 6.0}}"#).unwrap();
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert_eq!(c.params.f64("t_max").unwrap(), 1.0);
    }

    #[test]
    fn negative_tau_reports_its_path() {
        let raw = r#"{"experiment": "multipulse", "parameters": {"tau": [1e-3, 2e-3, -1e-3], "f_ac": 500, "v": 1}}"#;
        match validate_config(raw) {
            Err(Error::Config(v)) => assert!(v.iter().any(|x| x.path == "parameters.tau[2]"), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_parameter_gets_a_suggestion() {
        match validate_config(r#"{"experiment": "ramsey", "parameters": {"omega_zero": 6.0}}"#) {
            Err(Error::Config(v)) => {
                assert!(v.iter().any(|x| x.path == "parameters.omega_zero" && x.message.contains("\"omega0\"")), "{v:?}");
                assert!(v.iter().any(|x| x.path == "parameters.omega0"), "{v:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_problems_are_reported_together() {
        let raw = r#"{"experiment": "rabi", "sed": 3, "trials": 0, "parameters": {"omega1": -1, "t_min": 2, "t_max": 1}}"#;
        let Err(Error::Config(v)) = validate_config(raw) else { panic!() };
        let paths: Vec<&str> = v.iter().map(|x| x.path.as_str()).collect();
        for p in ["sed", "trials", "parameters.omega1", "parameters.t_max"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
        assert!(v.iter().any(|x| x.path == "sed" && x.message.contains("\"seed\"")));
    }

    #[test]
    fn unknown_experiment_and_parse_errors() {
        let Err(Error::Config(v)) = validate_config(r#"{"experiment": "ramsy"}"#) else { panic!() };
        assert!(v[0].message.contains("\"ramsey\""));
        assert!(matches!(validate_config("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn listing_covers_the_registry() {
        let l = list_experiments();
        let names: Vec<&str> = l["experiments"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
        assert_eq!(names.len(), 14);
        let allan = l["experiments"].as_array().unwrap().iter().find(|e| e["name"] == "allan").unwrap();
        assert!(allan["parameters"].as_array().unwrap().iter().any(|p| p["name"] == "t_s"));
        assert!(serde_json::from_str::<Value>(&l.to_string()).is_ok());
    }

    #[test]
    fn failed_runs_leave_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        // static signal: no spectral peak, so the estimate fails at run time
        let raw = json!({
            "experiment": "continuous_sampling",
            "output_dir": out,
            "parameters": {"f_signal": 0.0, "v": 0.0, "t_sense": 0.1, "t_s": 1e-3, "duration": 0.1, "shots": 1},
        });
        let cfg = validate_value(&raw).unwrap();
        assert!(run_experiment(&cfg).is_err());
        assert!(!out.exists() || fs::read_dir(&out).unwrap().count() == 0);
    }

    #[test]
    fn run_writes_outputs_with_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let raw = json!({
            "experiment": "ramsey", "trials": 50, "seed": 4, "output_dir": dir.path(),
            "parameters": {"omega0": 6.0, "points": 5},
        });
        let report = run_experiment(&validate_value(&raw).unwrap()).unwrap();
        assert_eq!(report.files, ["ramsey.csv", "summary.json", "manifest.json"]);
        let manifest: Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
        let csv = fs::read(dir.path().join("ramsey.csv")).unwrap();
        assert_eq!(manifest["outputs"]["ramsey.csv"], json!(hex::encode(Sha256::digest(&csv))));
        assert!(String::from_utf8(csv).unwrap().starts_with("t_s,p_hat,sigma_p,p_analytic\n"));
        assert_eq!(manifest["config"]["parameters"]["t_min"], json!(0.0));
    }
}
