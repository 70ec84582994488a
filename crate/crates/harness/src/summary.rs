//! Per-algorithm aggregates over result records.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::experiment::ResultRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub algorithm: String,
    pub problem: String,
    pub size: usize,
    pub runs: usize,
    pub mean_best_fitness: f64,
    pub median_best_fitness: f64,
    pub success_rate: f64,
    /// Mean over successful runs only.
    pub mean_evaluations_to_optimum: Option<f64>,
    pub mean_cycles_to_optimum: Option<f64>,
    /// TSP only: mean of `100 * (cost - optimum) / optimum` over runs.
    pub mean_percent_above_optimum: Option<f64>,
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// One row per (experiment, algorithm, problem, size), sorted by that key.
pub fn summarise(records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(HarnessError::Data("no result records to summarise".into()));
    }
    let mut groups: BTreeMap<(String, String, String, usize), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.experiment.clone(), r.algorithm.clone(), r.problem.clone(), r.size))
            .or_default()
            .push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((experiment, algorithm, problem, size), group)| {
            let best: Vec<f64> = group.iter().map(|r| r.best_fitness).collect();
            let evals: Vec<f64> = group
                .iter()
                .filter_map(|r| r.evaluations_to_optimum.map(|e| e as f64))
                .collect();
            let cycles: Vec<f64> = group
                .iter()
                .filter_map(|r| r.cycles_to_optimum.map(|c| c as f64))
                .collect();
            let percent = if problem == "tsp" {
                let above: Option<Vec<f64>> = group
                    .iter()
                    .map(|r| r.optimum_fitness.map(|o| percent_above_fitness(r.best_fitness, o)))
                    .collect();
                above.and_then(|v| mean(&v))
            } else {
                None
            };
            SummaryRow {
                runs: group.len(),
                mean_best_fitness: mean(&best).unwrap_or(f64::NAN),
                median_best_fitness: median(&best).unwrap_or(f64::NAN),
                success_rate: evals.len() as f64 / group.len() as f64,
                mean_evaluations_to_optimum: mean(&evals),
                mean_cycles_to_optimum: mean(&cycles),
                mean_percent_above_optimum: percent,
                experiment,
                algorithm,
                problem,
                size,
            }
        })
        .collect())
}

/// Fitness is negated tour cost.
fn percent_above_fitness(best_fitness: f64, optimum_fitness: f64) -> f64 {
    deepopt::tsp::percent_above(-best_fitness, -optimum_fitness)
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Data(e.to_string()))
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let text = summary_csv(rows)?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alg: &str, seed: u64, best: f64, evals: Option<u64>) -> ResultRecord {
        ResultRecord {
            experiment: "e".into(),
            algorithm: alg.into(),
            problem: "htop".into(),
            size: 32,
            seed,
            fitness_series: vec![best],
            best_fitness: best,
            best_solution: vec![],
            optimum_fitness: Some(15.0),
            evaluations_to_optimum: evals,
            cycles_to_optimum: evals.map(|_| 1),
            total_evaluations: 100,
            wall_time_secs: seed as f64,
        }
    }

    #[test]
    fn empty_is_an_error() {
        assert!(summarise(&[]).is_err());
    }

    #[test]
    fn success_mean_uses_successes_only() {
        let rows = summarise(&[
            rec("DO3", 0, 15.0, Some(100)),
            rec("DO3", 1, 13.0, None),
            rec("DO3", 2, 15.0, Some(300)),
            rec("DO0", 0, 11.0, None),
        ])
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].algorithm, "DO0");
        assert_eq!(rows[0].mean_evaluations_to_optimum, None);
        let r = &rows[1];
        assert_eq!(r.runs, 3);
        assert!((r.success_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.mean_evaluations_to_optimum, Some(200.0));
        assert_eq!(r.median_best_fitness, 15.0);
    }

    #[test]
    fn csv_ignores_wall_time() {
        let a = summary_csv(&summarise(&[rec("DO3", 0, 15.0, Some(10))]).unwrap()).unwrap();
        let mut r = rec("DO3", 0, 15.0, Some(10));
        r.wall_time_secs = 99.0;
        let b = summary_csv(&summarise(&[r]).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("experiment,algorithm,problem,size,runs"));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
