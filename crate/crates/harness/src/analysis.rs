//! Post-hoc measurements: move scale per depth and log-log slopes.

use deepopt::engine::{MoveEvent, RunObserver};
use deepopt::Decision;
use std::collections::BTreeMap;

/// Counts, per variation depth, how many accepted fitness-changing moves
/// alter at least two variables inside one aligned block.
#[derive(Debug, Clone, Default)]
pub struct MoveScaleObserver {
    block: usize,
    /// depth -> (accepted non-neutral moves, of which multi-variable in a block)
    counts: BTreeMap<usize, (u64, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveScale {
    pub depth: usize,
    pub moves: u64,
    pub block_moves: u64,
}

impl MoveScale {
    pub fn fraction(&self) -> f64 {
        if self.moves == 0 {
            0.0
        } else {
            self.block_moves as f64 / self.moves as f64
        }
    }
}

impl MoveScaleObserver {
    pub fn new(block: usize) -> Self {
        assert!(block > 0, "block size must be positive");
        Self {
            block,
            ..Self::default()
        }
    }

    pub fn by_depth(&self) -> Vec<MoveScale> {
        self.counts
            .iter()
            .map(|(&depth, &(moves, block_moves))| MoveScale {
                depth,
                moves,
                block_moves,
            })
            .collect()
    }

    /// True when some aligned block has two or more differing positions.
    pub fn changes_within_block(&self, a: &[u8], b: &[u8]) -> bool {
        a.chunks(self.block)
            .zip(b.chunks(self.block))
            .any(|(x, y)| x.iter().zip(y).filter(|(p, q)| p != q).count() >= 2)
    }
}

impl RunObserver<Vec<u8>> for MoveScaleObserver {
    fn on_move(&mut self, _cycle: usize, event: &MoveEvent<'_, Vec<u8>>) {
        if event.decision != Decision::Keep || event.candidate.fitness == event.parent.fitness {
            return;
        }
        let multi = self.changes_within_block(&event.parent.solution, &event.candidate.solution);
        let entry = self.counts.entry(event.parent.active_depth).or_default();
        entry.0 += 1;
        entry.1 += multi as u64;
    }
}

/// Least-squares slope of `ln y` against `ln x`. Needs two or more
/// distinct positive `x` and positive `y`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 || logs.len() != points.len() {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
