use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::ArmSummary;
use super::RunError;

/// A finished arm read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedArm {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub summary: ArmSummary,
}

pub fn load_arm(dir: &Path) -> Result<LoadedArm, RunError> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| RunError::Io(format!("{}: {e}", p.display())))
    };
    let config = ExperimentConfig::from_toml(&read("config.toml")?)?;
    let summary: ArmSummary = serde_json::from_str(&read("summary.json")?)
        .map_err(|e| RunError::Io(format!("{}: {e}", dir.join("summary.json").display())))?;
    Ok(LoadedArm { dir: dir.to_path_buf(), config, summary })
}

/// Arm directories under `dir`: the directory itself if it is an arm,
/// otherwise its immediate subdirectories that are, in name order.
pub fn expand(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    if dir.join("summary.json").is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries = fs::read_dir(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    let mut arms: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.json").is_file())
        .collect();
    arms.sort();
    if arms.is_empty() {
        return Err(RunError::Io(format!("{}: no finished runs found", dir.display())));
    }
    Ok(arms)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
}

impl Spread {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 { (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, std }
    }
}

/// Seed statistics of one arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmRow {
    pub name: String,
    pub topology: String,
    pub agent: String,
    pub seeds: usize,
    pub normalized_fairness: Spread,
    pub bss_throughput: Spread,
    pub pcr: Spread,
    pub delay_ms: Spread,
    pub jitter_ms: Spread,
    /// Relative change of mean normalized fairness against the reference arm, in percent.
    pub fairness_gain_pct: Option<f64>,
}

impl ArmRow {
    fn from_summary(s: &ArmSummary) -> Self {
        let pick = |f: &dyn Fn(&crate::metrics::EvalReport) -> f64| {
            Spread::of(&s.seeds.iter().map(|r| f(&r.evaluation.report)).collect::<Vec<_>>())
        };
        Self {
            name: s.name.clone(),
            topology: s.topology.clone(),
            agent: s.agent.name().into(),
            seeds: s.seeds.len(),
            normalized_fairness: pick(&|r| r.normalized_fairness),
            bss_throughput: pick(&|r| r.bss_throughput),
            pcr: Spread::of(&s.seeds.iter().filter_map(|r| r.evaluation.report.pcr).collect::<Vec<_>>()),
            delay_ms: pick(&|r| r.delay_ms),
            jitter_ms: pick(&|r| r.jitter_ms),
            fairness_gain_pct: None,
        }
    }
}

/// Arms grouped by topology; the first arm of each group is the reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub groups: Vec<Vec<ArmRow>>,
}

/// Loads every arm under `dirs` and lines them up. Arms on the same topology
/// must share their simulation settings.
pub fn compare(dirs: &[PathBuf]) -> Result<Comparison, RunError> {
    let mut arms = Vec::new();
    for d in dirs {
        for a in expand(d)? {
            arms.push(load_arm(&a)?);
        }
    }
    let mut groups: Vec<Vec<LoadedArm>> = Vec::new();
    for arm in arms {
        match groups.iter_mut().find(|g| g[0].summary.topology == arm.summary.topology) {
            Some(g) => {
                let first = &g[0];
                if first.config.sim != arm.config.sim || first.config.fairness != arm.config.fairness {
                    return Err(RunError::Incompatible(format!(
                        "{} and {} use different simulation or fairness settings",
                        first.dir.display(),
                        arm.dir.display()
                    )));
                }
                if first.config.eval.window != arm.config.eval.window {
                    return Err(RunError::Incompatible(format!(
                        "{} and {} use different evaluation windows",
                        first.dir.display(),
                        arm.dir.display()
                    )));
                }
                g.push(arm);
            }
            None => groups.push(vec![arm]),
        }
    }
    let groups = groups
        .iter()
        .map(|g| {
            let mut rows: Vec<ArmRow> = g.iter().map(|a| ArmRow::from_summary(&a.summary)).collect();
            let reference = rows[0].normalized_fairness.mean;
            for row in rows.iter_mut().skip(1) {
                if reference.abs() > 1e-12 {
                    row.fairness_gain_pct = Some((row.normalized_fairness.mean - reference) / reference.abs() * 100.0);
                }
            }
            rows
        })
        .collect();
    Ok(Comparison { groups })
}

fn cell(s: Spread, digits: usize) -> String {
    if s.mean.is_nan() {
        "-".into()
    } else {
        format!("{:.*} ± {:.*}", digits, s.mean, digits, s.std)
    }
}

fn delta(a: Spread, reference: Spread, digits: usize) -> String {
    if a.mean.is_nan() || reference.mean.is_nan() {
        "-".into()
    } else {
        format!("{:+.*}", digits, a.mean - reference.mean)
    }
}

impl Comparison {
    /// Plain-text table, one block per topology.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for group in &self.groups {
            let reference = &group[0];
            let _ = writeln!(out, "topology {} (reference: {})", reference.topology, reference.name);
            let _ = writeln!(
                out,
                "{:<22} {:<18} {:>5} {:>17} {:>9} {:>17} {:>17} {:>17} {:>17} {:>9}",
                "arm", "agent", "seeds", "norm. fairness", "Δ", "throughput", "pcr", "delay ms", "jitter ms", "gain %"
            );
            for row in group {
                let gain = row.fairness_gain_pct.map(|g| format!("{g:+.1}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{:<22} {:<18} {:>5} {:>17} {:>9} {:>17} {:>17} {:>17} {:>17} {:>9}",
                    row.name,
                    row.agent,
                    row.seeds,
                    cell(row.normalized_fairness, 3),
                    delta(row.normalized_fairness, reference.normalized_fairness, 3),
                    cell(row.bss_throughput, 3),
                    cell(row.pcr, 3),
                    cell(row.delay_ms, 2),
                    cell(row.jitter_ms, 2),
                    gain,
                );
            }
            out.push('\n');
        }
        out
    }
}
