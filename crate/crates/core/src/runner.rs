//! Config files, run directories, summaries and parameter sweeps.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blowup::{check_hypotheses, detect, BlowupVerdict, Hypothesis};
use crate::energetics::EnergyLedger;
use crate::error::{Error, Result};
use crate::history::{well_parts, WellClass};
use crate::integrator::{run_scenario, HistorySpec, RunOptions, RunOutput, Scenario, ScenarioConfig, Termination};
use crate::kernel::KernelFamily;
use crate::wellconst::WellConstants;

const TOP_KEYS: &[&str] = &[
    "m",
    "p",
    "dt",
    "t_end",
    "cfl_safety",
    "seed",
    "dim3_semantics",
    "output_every",
    "memory_stride",
    "s_cap",
    "fit_window",
    "grid",
    "kernel",
    "history",
];

/// Removes every key that the schema does not know and reports it as
/// `section.key`, so the remaining document can still be checked.
fn strip_unknown_keys(doc: &mut toml::Table) -> Vec<String> {
    let text = |v: Option<&toml::Value>, key: &str| {
        v.and_then(|t| t.get(key))
            .and_then(|x| x.as_str())
            .unwrap_or("")
            .to_string()
    };
    let family = text(doc.get("kernel"), "family");
    let kind = text(doc.get("history"), "kind");
    let profile = text(doc.get("history"), "profile");
    let kernel_keys: &[&str] = match family.as_str() {
        "exponential" => &["family", "mu0", "c"],
        "polynomial" => &["family", "c", "r"],
        _ => &[],
    };
    let history_keys: Vec<&str> = match (kind.as_str(), profile.as_str()) {
        ("template", "bump") => vec!["kind", "amplitude", "modes", "profile", "spacing", "support"],
        ("template", "exp_ramp") => vec!["kind", "amplitude", "modes", "profile", "spacing", "rate", "support"],
        ("template", _) => vec!["kind", "amplitude", "modes", "profile", "spacing"],
        ("table", _) => vec!["kind", "path", "extension", "spacing"],
        _ => vec![],
    };
    let mut out = Vec::new();
    let mut strip = |prefix: &str, table: &mut toml::Table, allowed: &[&str]| {
        table.retain(|key, _| {
            let known = allowed.contains(&key.as_ref());
            if !known {
                out.push(format!("unknown key `{prefix}{key}`"));
            }
            known
        });
    };
    strip("", doc, TOP_KEYS);
    let sections: [(&str, &[&str]); 3] = [
        ("grid", &["extents", "n"]),
        ("kernel", kernel_keys),
        ("history", &history_keys),
    ];
    for (name, allowed) in sections {
        // An unrecognised family or kind is left to the deserialiser.
        if allowed.is_empty() {
            continue;
        }
        if let Some(toml::Value::Table(t)) = doc.get_mut(name) {
            strip(&format!("{name}."), t, allowed);
        }
    }
    out
}

/// Parses and validates a config, listing every problem at once. A relative
/// history table path is resolved against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
    let mut errors = strip_unknown_keys(&mut doc);
    let parsed: std::result::Result<ScenarioConfig, _> = toml::Value::Table(doc).try_into();
    let mut config = match parsed {
        Ok(c) => c,
        Err(e) => {
            errors.push(e.message().to_string());
            return Err(Error::Config(errors));
        }
    };
    if let (HistorySpec::Table { path, .. }, Some(base)) = (&mut config.history, base_dir) {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    match config.validate() {
        Ok(_) if errors.is_empty() => Ok(config),
        Ok(_) => Err(Error::Config(errors)),
        Err(Error::Config(more)) => {
            errors.extend(more);
            Err(Error::Config(errors))
        }
        Err(e) => Err(e),
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text, path.parent())
}

/// Canonical TOML text of a config; equal configs give equal text.
pub fn config_to_toml(config: &ScenarioConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Config(vec![format!("cannot serialise config: {e}")]))
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    let text = config_to_toml(config)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// Output root: `$VISCOWAVE_OUT` or `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os("VISCOWAVE_OUT").map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}

/// Summary JSON written next to the ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub config_hash: String,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "scriptE0")]
    pub script_e0: f64,
    #[serde(rename = "E_final")]
    pub e_final: f64,
    pub t_final: f64,
    pub steps: u64,
    pub dt: f64,
    pub termination: Termination,
    pub classification_at_0: WellClass,
    pub constants: WellConstants,
    pub blowup: BlowupVerdict,
    pub controller: crate::integrator::ControllerLog,
    pub max_truncation_tail: f64,
    pub warnings: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// A simulation with everything needed to persist it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub output: RunOutput,
    pub summary: RunSummary,
}

/// Paths of a persisted run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPaths {
    pub dir: PathBuf,
    pub config: PathBuf,
    pub ledger: PathBuf,
    pub summary: PathBuf,
}

/// Runs a config and gathers the constants, initial classification and
/// blow-up verdict.
pub fn execute(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunRecord> {
    let start = Instant::now();
    let scn = Scenario::build(config)?;
    let constants = WellConstants::compute(&scn.grid, config.p, scn.kernel.k0())?;
    let class = well_parts(&scn.grid, &scn.kernel, &scn.history, config.p)?.classify(constants.d);
    let output = run_scenario(&scn, opts)?;
    let row0 = *output.ledger.first().expect("ledger has its initial row");
    let last = *output.ledger.last().expect("ledger has its initial row");
    let hypothesis = check_hypotheses(config.m, &constants, &row0, class);
    let blowup = detect(&output.ledger, &output.controller, hypothesis);
    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config)?,
        e0: row0.e,
        script_e0: row0.script_e,
        e_final: last.e,
        t_final: last.t,
        steps: output.steps,
        dt: scn.dt,
        termination: output.termination,
        classification_at_0: class,
        constants,
        blowup,
        controller: output.controller,
        max_truncation_tail: output.max_truncation_tail,
        warnings: output.warnings.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(RunRecord {
        config: config.clone(),
        output,
        summary,
    })
}

const HISTORY_TABLE: &str = "history.csv";

/// Writes `config.toml`, `ledger.csv` and `summary.json` into
/// `root/<config hash>`. A tabulated history is copied alongside as
/// `history.csv` so the directory can be re-run on its own. An existing
/// directory is only replaced with `force`.
pub fn persist(record: &RunRecord, root: &Path, force: bool) -> Result<RunPaths> {
    let dir = root.join(&record.summary.config_hash);
    if dir.exists() {
        if !force {
            return Err(Error::AlreadyExists(dir.display().to_string()));
        }
        fs::remove_dir_all(&dir)?;
    }
    fs::create_dir_all(&dir)?;
    let paths = RunPaths {
        config: dir.join("config.toml"),
        ledger: dir.join("ledger.csv"),
        summary: dir.join("summary.json"),
        dir,
    };
    let mut stored = record.config.clone();
    if let HistorySpec::Table { path, .. } = &mut stored.history {
        fs::copy(&*path, paths.dir.join(HISTORY_TABLE))?;
        *path = PathBuf::from(HISTORY_TABLE);
    }
    fs::write(&paths.config, config_to_toml(&stored)?)?;
    record.output.ledger.write_csv(fs::File::create(&paths.ledger)?)?;
    fs::write(&paths.summary, serde_json::to_string_pretty(&record.summary)?)?;
    Ok(paths)
}

pub fn read_ledger(path: &Path) -> Result<EnergyLedger> {
    EnergyLedger::read_csv(fs::File::open(path)?)
}

/// Parses `exp:MU0:C` or `poly:C:R`.
pub fn parse_kernel(spec: &str) -> Result<KernelFamily> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Config(vec![format!("bad number `{s}` in kernel spec `{spec}`")]))
    };
    match parts.as_slice() {
        ["exp", a, b] => Ok(KernelFamily::Exponential {
            mu0: num(a)?,
            c: num(b)?,
        }),
        ["poly", a, b] => Ok(KernelFamily::Polynomial { c: num(a)?, r: num(b)? }),
        _ => Err(Error::Config(vec![format!(
            "kernel spec `{spec}` must look like exp:MU0:C or poly:C:R"
        )])),
    }
}

/// Parses `1d:L:N` or `2d:LX:LY:NX:NY`; lengths accept `pi` and `k*pi`.
pub fn parse_grid(spec: &str) -> Result<crate::integrator::GridSpec> {
    let bad = || Error::Config(vec![format!("grid spec `{spec}` must look like 1d:L:N or 2d:LX:LY:NX:NY")]);
    let length = |s: &str| -> Result<f64> {
        let s = s.trim().to_ascii_lowercase();
        if s == "pi" {
            return Ok(std::f64::consts::PI);
        }
        if let Some(k) = s.strip_suffix("*pi").or_else(|| s.strip_suffix("pi")) {
            return k.parse::<f64>().map(|k| k * std::f64::consts::PI).map_err(|_| bad());
        }
        s.parse().map_err(|_| bad())
    };
    let count = |s: &str| -> Result<usize> { s.trim().parse().map_err(|_| bad()) };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["1d", l, n] => Ok(crate::integrator::GridSpec {
            extents: vec![length(l)?],
            n: vec![count(n)?],
        }),
        ["2d", lx, ly, nx, ny] => Ok(crate::integrator::GridSpec {
            extents: vec![length(lx)?, length(ly)?],
            n: vec![count(nx)?, count(ny)?],
        }),
        _ => Err(bad()),
    }
}

/// Label used in sweep tables.
pub fn kernel_label(k: &KernelFamily) -> String {
    match *k {
        KernelFamily::Exponential { mu0, c } => format!("exp:{mu0}:{c}"),
        KernelFamily::Polynomial { c, r } => format!("poly:{c}:{r}"),
    }
}

/// One line of a sweep verdict table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub amplitude_factor: f64,
    pub m: f64,
    pub kernel: String,
    pub class_at_0: Option<WellClass>,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub d: f64,
    pub hypothesis: Option<Hypothesis>,
    pub status: String,
    pub blowup: bool,
    #[serde(rename = "E_final")]
    pub e_final: f64,
    pub run_dir: Option<String>,
}

/// Runs the amplitude x m x kernel product of a base config in parallel.
/// Results come back in the input order regardless of scheduling. With
/// `persist_root`, every run also gets its own run directory there.
pub fn sweep(
    base: &ScenarioConfig,
    amplitude_factors: &[f64],
    ms: &[f64],
    kernels: &[KernelFamily],
    persist_root: Option<(&Path, bool)>,
) -> Vec<SweepRow> {
    let mut jobs = Vec::new();
    for k in kernels {
        for &m in ms {
            for &a in amplitude_factors {
                jobs.push((a, m, *k));
            }
        }
    }
    jobs.par_iter()
        .map(|&(a, m, k)| {
            let mut cfg = base.clone();
            cfg.history = cfg.history.amplitude_scaled(a);
            cfg.m = m;
            cfg.kernel = k;
            let outcome = execute(&cfg, &RunOptions::default()).and_then(|rec| {
                let dir = match persist_root {
                    Some((root, force)) => Some(persist(&rec, root, force)?.dir.display().to_string()),
                    None => None,
                };
                Ok((rec, dir))
            });
            match outcome {
                Ok((rec, run_dir)) => SweepRow {
                    amplitude_factor: a,
                    m,
                    kernel: kernel_label(&k),
                    class_at_0: Some(rec.summary.classification_at_0),
                    e0: rec.summary.e0,
                    d: rec.summary.constants.d,
                    hypothesis: Some(rec.summary.blowup.hypothesis),
                    status: status_label(&rec.summary.termination),
                    blowup: rec.summary.blowup.fired,
                    e_final: rec.summary.e_final,
                    run_dir,
                },
                Err(e) => SweepRow {
                    amplitude_factor: a,
                    m,
                    kernel: kernel_label(&k),
                    class_at_0: None,
                    e0: f64::NAN,
                    d: f64::NAN,
                    hypothesis: None,
                    status: format!("error: {e}"),
                    blowup: false,
                    e_final: f64::NAN,
                    run_dir: None,
                },
            }
        })
        .collect()
}

pub fn status_label(t: &Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::BlowupSuspected { t, .. } => format!("blowup@{t:.6}"),
        Termination::Unstable { t, .. } => format!("unstable@{t:.6}"),
    }
}

/// Writes a sweep table as CSV.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "amplitude_factor",
        "m",
        "kernel",
        "class_at_0",
        "E0",
        "d",
        "hypothesis",
        "status",
        "blowup",
        "E_final",
        "run_dir",
    ])?;
    for r in rows {
        w.write_record([
            r.amplitude_factor.to_string(),
            r.m.to_string(),
            r.kernel.clone(),
            r.class_at_0.map_or("-".into(), |c| format!("{c:?}")),
            format!("{:.16e}", r.e0),
            format!("{:.16e}", r.d),
            r.hypothesis.map_or("-".into(), |h| format!("{h:?}")),
            r.status.clone(),
            r.blowup.to_string(),
            format!("{:.16e}", r.e_final),
            r.run_dir.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Distinct ledger texts produced by running `config` `times` times.
pub fn replay_ledgers(config: &ScenarioConfig, times: usize) -> Result<BTreeSet<String>> {
    (0..times)
        .map(|_| crate::integrator::run(config, &RunOptions::default())?.ledger.to_csv_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
m = 1.0
p = 3.0
dt = 0.005
t_end = 1.0

[grid]
extents = [3.141592653589793]
n = [100]

[kernel]
family = "exponential"
mu0 = 1.0
c = 1.0

[history]
kind = "template"
amplitude = 0.5
modes = [1]
profile = "bump"
support = 1.0
"#;

    #[test]
    fn minimal_config_loads_and_round_trips() {
        let cfg = parse_config(MINIMAL, None).unwrap();
        assert_eq!(cfg.cfl_safety, 0.5);
        let text = config_to_toml(&cfg).unwrap();
        assert_eq!(parse_config(&text, None).unwrap(), cfg);
        assert_eq!(config_hash(&cfg).unwrap().len(), 64);
    }

    #[test]
    fn all_problems_listed() {
        let text = MINIMAL.replace("m = 1.0", "m = 0.5\nbogus = 1").replace("n = [100]", "n = [100]\nwidth = 2");
        match parse_config(&text, None) {
            Err(Error::Config(list)) => {
                assert!(list.iter().any(|e| e.contains("bogus")), "{list:?}");
                assert!(list.iter().any(|e| e.contains("grid.width")), "{list:?}");
                assert!(list.iter().any(|e| e.contains("m must be")), "{list:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn three_dimensional_constraints() {
        let text = MINIMAL.replace("p = 3.0", "p = 5.5\ndim3_semantics = true");
        let err = parse_config(&text, None).unwrap_err();
        assert!(err.to_string().contains("p(m+1)/m = 11"), "{err}");
    }

    #[test]
    fn cli_specs() {
        assert_eq!(
            parse_kernel("exp:1:1").unwrap(),
            KernelFamily::Exponential { mu0: 1.0, c: 1.0 }
        );
        assert_eq!(parse_kernel("poly:1:1.5").unwrap(), KernelFamily::Polynomial { c: 1.0, r: 1.5 });
        assert!(parse_kernel("gauss:1").is_err());
        let g = parse_grid("1d:pi:200").unwrap();
        assert_eq!((g.extents[0], g.n[0]), (std::f64::consts::PI, 200));
        let g = parse_grid("2d:1:2pi:10:20").unwrap();
        assert_eq!(g.extents[1], 2.0 * std::f64::consts::PI);
        assert!(parse_grid("3d:1:1:1").is_err());
    }
}
