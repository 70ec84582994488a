//! Plain-text curve files for plotting tools (gnuplot, numpy.loadtxt).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::experiment::{sanitise, ResultRecord};
use crate::summary::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Cycle index against the per-run fitness of each cycle, one column
    /// per seed. Runs that stopped early are padded with `nan`.
    FitnessTrajectory,
    /// Problem size against mean evaluations-to-optimum over successful
    /// runs, one file per algorithm.
    EvaluationScaling,
}

fn group_by<K: Ord>(
    records: &[ResultRecord],
    key: impl Fn(&ResultRecord) -> K,
) -> BTreeMap<K, Vec<&ResultRecord>> {
    let mut map: BTreeMap<K, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        map.entry(key(r)).or_default().push(r);
    }
    map
}

pub fn trajectory_text(group: &[&ResultRecord]) -> Result<String> {
    if let Some(r) = group.iter().find(|r| r.fitness_series.is_empty()) {
        return Err(HarnessError::Data(format!(
            "{} seed {} has no fitness series",
            r.algorithm, r.seed
        )));
    }
    let len = group.iter().map(|r| r.fitness_series.len()).max().unwrap_or(0);
    let mut out = String::from("# cycle");
    for r in group {
        let _ = write!(out, " seed{}", r.seed);
    }
    out.push('\n');
    for i in 0..len {
        let _ = write!(out, "{i}");
        for r in group {
            match r.fitness_series.get(i) {
                Some(f) => {
                    let _ = write!(out, " {f}");
                }
                None => out.push_str(" nan"),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Rows are `(size, mean evaluations, successes, runs)`; sizes with no
/// successful run are left out.
pub fn scaling_points(group: &[&ResultRecord]) -> Vec<(usize, f64, usize, usize)> {
    group_by_ref(group, |r| r.size)
        .into_iter()
        .filter_map(|(size, runs)| {
            let evals: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.evaluations_to_optimum.map(|e| e as f64))
                .collect();
            mean(&evals).map(|m| (size, m, evals.len(), runs.len()))
        })
        .collect()
}

fn group_by_ref<'a, K: Ord>(
    records: &[&'a ResultRecord],
    key: impl Fn(&ResultRecord) -> K,
) -> BTreeMap<K, Vec<&'a ResultRecord>> {
    let mut map: BTreeMap<K, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        map.entry(key(r)).or_default().push(*r);
    }
    map
}

/// Writes curve files into `out_dir` and returns their paths.
pub fn emit_curves(records: &[ResultRecord], kind: CurveKind, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(HarnessError::Data("no result records to plot".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    match kind {
        CurveKind::FitnessTrajectory => {
            for ((experiment, algorithm), group) in
                group_by(records, |r| (r.experiment.clone(), r.algorithm.clone()))
            {
                let path = out_dir.join(format!(
                    "{}_{}_trajectory.txt",
                    sanitise(&experiment),
                    sanitise(&algorithm)
                ));
                let text = trajectory_text(&group)?;
                std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
                written.push(path);
            }
        }
        CurveKind::EvaluationScaling => {
            for (algorithm, group) in group_by(records, |r| (r.problem.clone(), r.algorithm.clone())) {
                let mut text = String::from("# size mean_evaluations_to_optimum successes runs\n");
                for (size, m, ok, n) in scaling_points(&group) {
                    let _ = writeln!(text, "{size} {m} {ok} {n}");
                }
                let path = out_dir.join(format!(
                    "{}_{}_scaling.txt",
                    sanitise(&algorithm.0),
                    sanitise(&algorithm.1)
                ));
                std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
