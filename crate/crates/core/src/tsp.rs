//! Travelling salesman support: TSPLIB ingestion, the connection-matrix
//! encoding used by the autoencoder, tour interpretation and the classic
//! swap / insert / 2-opt restart hill climbers.

use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    name: String,
    size: usize,
    /// Row-major `size x size`; the diagonal is zeroed and never used.
    distance: Vec<f64>,
    symmetric: bool,
    start: usize,
    known_optimum: Option<f64>,
}

impl TspInstance {
    pub fn from_matrix(name: impl Into<String>, size: usize, mut distance: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidConfig(format!("TSP needs at least 2 locations, got {size}")));
        }
        if distance.len() != size * size {
            return Err(Error::LengthMismatch {
                expected: size * size,
                got: distance.len(),
            });
        }
        if let Some(bad) = distance.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::InvalidConfig(format!("invalid distance {bad}")));
        }
        for i in 0..size {
            distance[i * size + i] = 0.0;
        }
        let symmetric = (0..size).all(|i| (0..i).all(|j| distance[i * size + j] == distance[j * size + i]));
        Ok(Self {
            name: name.into(),
            size,
            distance,
            symmetric,
            start: 0,
            known_optimum: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn with_start(mut self, start: usize) -> Result<Self> {
        if start >= self.size {
            return Err(Error::InvalidConfig(format!("start {start} out of range")));
        }
        self.start = start;
        Ok(self)
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn with_known_optimum(mut self, optimum: Option<f64>) -> Self {
        self.known_optimum = optimum;
        self
    }

    #[inline]
    pub fn distance(&self, from: usize, to: usize) -> f64 {
        self.distance[from * self.size + to]
    }

    /// Closed-tour cost; the order must be a permutation of `0..size`.
    pub fn tour_cost(&self, order: &[usize]) -> Result<f64> {
        check_permutation(order, self.size)?;
        Ok(self.cost_unchecked(order))
    }

    fn cost_unchecked(&self, order: &[usize]) -> f64 {
        let closing = self.distance(order[order.len() - 1], order[0]);
        order.windows(2).map(|w| self.distance(w[0], w[1])).sum::<f64>() + closing
    }

    /// `+1` at `(i, j)` when `j` directly follows `i` in the closed tour,
    /// `-1` everywhere else. Row-major, `size^2` entries.
    pub fn encode_tour(&self, order: &[usize]) -> Vec<f64> {
        let n = self.size;
        let mut out = vec![-1.0; n * n];
        for (k, &from) in order.iter().enumerate() {
            let to = order[(k + 1) % n];
            out[from * n + to] = 1.0;
        }
        out
    }

    /// Builds a tour from a continuous connection matrix: start somewhere
    /// uniformly at random, repeatedly follow the strongest positive
    /// connection to an unvisited location (ties to the lowest index), fall
    /// back to a uniformly random unvisited location when none is positive,
    /// then rotate so the tour begins at the defined start.
    pub fn interpret_connections<R: Rng + ?Sized>(&self, decoded: &[f64], rng: &mut R) -> Vec<usize> {
        let n = self.size;
        assert_eq!(decoded.len(), n * n, "connection vector length");
        // Kept in ascending order so random picks are reproducible.
        let mut valid: Vec<usize> = (0..n).collect();
        let first = valid.remove(rng.gen_range(0..n));
        let mut tour = Vec::with_capacity(n);
        tour.push(first);
        while !valid.is_empty() {
            let row = &decoded[tour[tour.len() - 1] * n..][..n];
            let mut best_pos = 0;
            for (pos, &loc) in valid.iter().enumerate().skip(1) {
                if row[loc] > row[valid[best_pos]] {
                    best_pos = pos;
                }
            }
            let pos = if row[valid[best_pos]] > 0.0 {
                best_pos
            } else {
                rng.gen_range(0..valid.len())
            };
            tour.push(valid.remove(pos));
        }
        let shift = tour.iter().position(|&l| l == self.start).expect("start visited");
        tour.rotate_left(shift);
        tour
    }

    /// Rotates a tour so it begins at the defined start location.
    pub fn normalise(&self, order: &[usize]) -> Vec<usize> {
        let mut out = order.to_vec();
        if let Some(shift) = out.iter().position(|&l| l == self.start) {
            out.rotate_left(shift);
        }
        out
    }

    pub fn random_tour<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.shuffle(rng);
        order
    }
}

pub fn check_permutation(order: &[usize], size: usize) -> Result<()> {
    if order.len() != size {
        return Err(Error::NotPermutation(size));
    }
    let mut seen = vec![false; size];
    for &l in order {
        if l >= size || std::mem::replace(&mut seen[l], true) {
            return Err(Error::NotPermutation(size));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    pub fn new(instance: &TspInstance, order: Vec<usize>) -> Result<Self> {
        let cost = instance.tour_cost(&order)?;
        Ok(Self { order, cost })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Swap,
    Insert,
    TwoOpt,
}

impl MoveKind {
    pub const ALL: [MoveKind; 3] = [MoveKind::Swap, MoveKind::Insert, MoveKind::TwoOpt];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Swap => "swap",
            MoveKind::Insert => "insert",
            MoveKind::TwoOpt => "2-opt",
        }
    }

    pub fn apply<R: Rng + ?Sized>(self, order: &[usize], rng: &mut R) -> Result<Vec<usize>> {
        match self {
            MoveKind::Swap => swap_move(order, rng),
            MoveKind::Insert => insert_move(order, rng),
            MoveKind::TwoOpt => two_opt_move(order, rng),
        }
    }
}

impl FromStr for MoveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swap" => Ok(MoveKind::Swap),
            "insert" => Ok(MoveKind::Insert),
            "2-opt" | "2opt" | "two_opt" | "two-opt" => Ok(MoveKind::TwoOpt),
            other => Err(Error::InvalidConfig(format!("unknown move kind {other:?}"))),
        }
    }
}

fn check_moveable(order: &[usize]) -> Result<()> {
    if order.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "moves need at least 3 locations, got {}",
            order.len()
        )));
    }
    Ok(())
}

fn two_distinct<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

pub fn swap_at(order: &[usize], a: usize, b: usize) -> Vec<usize> {
    let mut out = order.to_vec();
    out.swap(a, b);
    out
}

/// Removes the location at `from` and reinserts it so it ends up at `to`.
pub fn insert_at(order: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut out = order.to_vec();
    let loc = out.remove(from);
    out.insert(to, loc);
    out
}

/// Reverses positions `i..=j` (`i <= j`), replacing edges
/// `(order[i-1], order[i])` and `(order[j], order[j+1])`.
pub fn two_opt_at(order: &[usize], i: usize, j: usize) -> Vec<usize> {
    let mut out = order.to_vec();
    out[i..=j].reverse();
    out
}

pub fn swap_move<R: Rng + ?Sized>(order: &[usize], rng: &mut R) -> Result<Vec<usize>> {
    check_moveable(order)?;
    let (a, b) = two_distinct(order.len(), rng);
    Ok(swap_at(order, a, b))
}

pub fn insert_move<R: Rng + ?Sized>(order: &[usize], rng: &mut R) -> Result<Vec<usize>> {
    check_moveable(order)?;
    let (from, to) = two_distinct(order.len(), rng);
    Ok(insert_at(order, from, to))
}

pub fn two_opt_move<R: Rng + ?Sized>(order: &[usize], rng: &mut R) -> Result<Vec<usize>> {
    check_moveable(order)?;
    let (a, b) = two_distinct(order.len(), rng);
    Ok(two_opt_at(order, a.min(b), a.max(b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillClimbResult {
    pub best: Tour,
    /// Best cost reached by each trial, in trial order.
    pub trial_costs: Vec<f64>,
}

/// Independent greedy trials from uniformly random tours. A proposal is
/// kept when it does not increase the cost.
pub fn restart_hill_climb<R: Rng + ?Sized>(
    instance: &TspInstance,
    kind: MoveKind,
    trials: usize,
    steps: usize,
    rng: &mut R,
) -> Result<HillClimbResult> {
    if trials == 0 {
        return Err(Error::ZeroSize { what: "trial count" });
    }
    let mut best: Option<Tour> = None;
    let mut trial_costs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut order = instance.random_tour(rng);
        let mut cost = instance.cost_unchecked(&order);
        for _ in 0..steps {
            let candidate = kind.apply(&order, rng)?;
            let c = instance.cost_unchecked(&candidate);
            if c <= cost {
                order = candidate;
                cost = c;
            }
        }
        trial_costs.push(cost);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Tour {
                order: instance.normalise(&order),
                cost,
            });
        }
    }
    Ok(HillClimbResult {
        best: best.expect("at least one trial"),
        trial_costs,
    })
}

/// Percentage by which `cost` exceeds `optimum`.
pub fn percent_above(cost: f64, optimum: f64) -> f64 {
    100.0 * (cost - optimum) / optimum
}

/// The TSP as seen by the search engine: solutions are tours normalised to
/// the defined start, fitness is negated cost, and the naive move is
/// configurable (location insert by default).
#[derive(Debug, Clone)]
pub struct TspProblem {
    instance: TspInstance,
    naive_move: MoveKind,
}

impl TspProblem {
    pub fn new(instance: TspInstance) -> Result<Self> {
        if instance.size() < 3 {
            return Err(Error::InvalidConfig("TSP search needs at least 3 locations".into()));
        }
        Ok(Self {
            instance,
            naive_move: MoveKind::Insert,
        })
    }

    pub fn with_naive_move(mut self, kind: MoveKind) -> Self {
        self.naive_move = kind;
        self
    }

    pub fn instance(&self) -> &TspInstance {
        &self.instance
    }
}

impl Problem for TspProblem {
    type Solution = Vec<usize>;

    fn visible_size(&self) -> usize {
        self.instance.size * self.instance.size
    }

    fn fitness(&self, solution: &Vec<usize>) -> f64 {
        -self.instance.cost_unchecked(solution)
    }

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let order = self.instance.random_tour(rng);
        self.instance.normalise(&order)
    }

    fn naive_variation<R: Rng + ?Sized>(&self, solution: &Vec<usize>, rng: &mut R) -> Vec<usize> {
        let moved = self
            .naive_move
            .apply(solution, rng)
            .expect("size checked at construction");
        self.instance.normalise(&moved)
    }

    fn interpret<R: Rng + ?Sized>(&self, decoded: &[f64], rng: &mut R) -> Vec<usize> {
        self.instance.interpret_connections(decoded, rng)
    }

    fn encode_solution(&self, solution: &Vec<usize>) -> Vec<f64> {
        self.instance.encode_tour(solution)
    }

    fn target_fitness(&self) -> Option<f64> {
        self.instance.known_optimum.map(|o| -o)
    }
}

/// Parses an optima registry: one `name value` pair per line. Blank lines
/// and lines starting with `#` are skipped.
pub fn parse_optima_registry(text: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected `name value`, got {line:?}"),
            });
        };
        let value: f64 = value.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad optimum value {value:?}"),
        })?;
        out.insert(name.to_owned(), value);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightFormat {
    FullMatrix,
    UpperRow,
    LowerDiagRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightType {
    Euc2d,
    Explicit,
}

fn unsupported(keyword: &str, value: &str) -> Error {
    Error::Unsupported {
        keyword: keyword.to_owned(),
        value: value.to_owned(),
    }
}

/// TSPLIB `nint` of the Euclidean distance.
fn euc_2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    (d + 0.5).floor()
}

/// Parses the supported TSPLIB subset: `TYPE` TSP or ATSP, `EDGE_WEIGHT_TYPE`
/// EUC_2D or EXPLICIT with `EDGE_WEIGHT_FORMAT` FULL_MATRIX, UPPER_ROW or
/// LOWER_DIAG_ROW.
pub fn parse_tsplib(text: &str) -> Result<TspInstance> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<WeightType> = None;
    let mut weight_format: Option<WeightFormat> = None;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        Header,
        Coords,
        Weights,
    }
    let mut section = Section::Header;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let first_char = line.chars().next().expect("non-empty");
        if section != Section::Header && (first_char.is_ascii_digit() || first_char == '-' || first_char == '.') {
            let numbers = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad number {t:?}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            match section {
                Section::Coords => {
                    if numbers.len() != 3 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected `index x y`".into(),
                        });
                    }
                    let expected = coords.len() + 1;
                    if numbers[0] != expected as f64 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected node {expected}, got {}", numbers[0]),
                        });
                    }
                    coords.push((numbers[1], numbers[2]));
                }
                Section::Weights => weights.extend(numbers),
                Section::Header => unreachable!(),
            }
            continue;
        }

        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, ""),
        };
        match key {
            "NAME" => name = value.to_owned(),
            "COMMENT" | "DISPLAY_DATA_TYPE" => {}
            "TYPE" => {
                let kind = value.split_whitespace().next().unwrap_or("");
                if kind != "TSP" && kind != "ATSP" {
                    return Err(unsupported(key, value));
                }
            }
            "DIMENSION" => {
                dimension = Some(value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad DIMENSION {value:?}"),
                })?)
            }
            "EDGE_WEIGHT_TYPE" => {
                weight_type = Some(match value {
                    "EUC_2D" => WeightType::Euc2d,
                    "EXPLICIT" => WeightType::Explicit,
                    _ => return Err(unsupported(key, value)),
                })
            }
            "EDGE_WEIGHT_FORMAT" => {
                weight_format = Some(match value {
                    "FULL_MATRIX" => WeightFormat::FullMatrix,
                    "UPPER_ROW" => WeightFormat::UpperRow,
                    "LOWER_DIAG_ROW" => WeightFormat::LowerDiagRow,
                    _ => return Err(unsupported(key, value)),
                })
            }
            "NODE_COORD_SECTION" => section = Section::Coords,
            "EDGE_WEIGHT_SECTION" => section = Section::Weights,
            _ => return Err(unsupported("keyword", key)),
        }
    }

    let n = dimension.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing DIMENSION".into(),
    })?;
    let matrix = match weight_type {
        Some(WeightType::Euc2d) => {
            if coords.len() != n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("DIMENSION {n} but {} coordinates", coords.len()),
                });
            }
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = euc_2d(coords[i], coords[j]);
                }
            }
            m
        }
        Some(WeightType::Explicit) => {
            let format = weight_format.ok_or_else(|| Error::Parse {
                line: 0,
                msg: "EXPLICIT weights without EDGE_WEIGHT_FORMAT".into(),
            })?;
            explicit_matrix(n, format, &weights)?
        }
        None => {
            return Err(Error::Parse {
                line: 0,
                msg: "missing EDGE_WEIGHT_TYPE".into(),
            })
        }
    };
    TspInstance::from_matrix(name, n, matrix)
}

fn explicit_matrix(n: usize, format: WeightFormat, values: &[f64]) -> Result<Vec<f64>> {
    let expected = match format {
        WeightFormat::FullMatrix => n * n,
        WeightFormat::UpperRow => n * (n - 1) / 2,
        WeightFormat::LowerDiagRow => n * (n + 1) / 2,
    };
    if values.len() != expected {
        return Err(Error::Parse {
            line: 0,
            msg: format!("DIMENSION {n} needs {expected} edge weights, found {}", values.len()),
        });
    }
    let mut m = vec![0.0; n * n];
    let mut it = values.iter().copied();
    match format {
        WeightFormat::FullMatrix => m.copy_from_slice(values),
        WeightFormat::UpperRow => {
            for i in 0..n {
                for j in i + 1..n {
                    let v = it.next().expect("count checked");
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
        }
        WeightFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    let v = it.next().expect("count checked");
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TRIANGLE: &str = "NAME: tri\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 0\n3 0 4\nEOF\n";

    fn triangle() -> TspInstance {
        parse_tsplib(TRIANGLE).unwrap()
    }

    #[test]
    fn euclidean_triangle() {
        let t = triangle();
        assert_eq!(t.size(), 3);
        assert_eq!(t.distance(0, 1), 3.0);
        assert_eq!(t.distance(0, 2), 4.0);
        assert_eq!(t.distance(1, 2), 5.0);
        assert!(t.is_symmetric());
        for order in [[0, 1, 2], [2, 1, 0], [1, 0, 2]] {
            assert_eq!(t.tour_cost(&order).unwrap(), 12.0);
        }
    }

    #[test]
    fn tsplib_rounding() {
        assert_eq!(euc_2d((0.0, 0.0), (1.0, 1.0)), 1.0);
        assert_eq!(euc_2d((0.0, 0.0), (1.5, 2.0)), 3.0); // 2.5 rounds up
    }

    #[test]
    fn asymmetric_two_cycle() {
        let t = TspInstance::from_matrix("toy", 2, vec![0.0, 1.0, 9.0, 0.0]).unwrap();
        assert!(!t.is_symmetric());
        assert_eq!(t.tour_cost(&[0, 1]).unwrap(), 10.0);
        assert_eq!(t.tour_cost(&[1, 0]).unwrap(), 10.0);
    }

    #[test]
    fn non_permutation_rejected() {
        let t = triangle();
        assert!(t.tour_cost(&[0, 0, 1]).is_err());
        assert!(t.tour_cost(&[0, 1]).is_err());
        assert!(t.tour_cost(&[0, 1, 3]).is_err());
    }

    #[test]
    fn explicit_formats_agree() {
        let full = "NAME: f\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 3\n2 3 0\nEOF\n";
        let upper = "NAME: u\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 2\n3\nEOF\n";
        let lower = "NAME: l\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: LOWER_DIAG_ROW\nEDGE_WEIGHT_SECTION\n0 1 0 2 3 0\nEOF\n";
        let a = parse_tsplib(full).unwrap();
        let b = parse_tsplib(upper).unwrap();
        let c = parse_tsplib(lower).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.distance(i, j), b.distance(i, j));
                assert_eq!(a.distance(i, j), c.distance(i, j));
            }
        }
    }

    #[test]
    fn atsp_diagonal_ignored() {
        let text = "NAME: a\nTYPE: ATSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n9999 1 2\n5 9999 3\n2 3 9999\nEOF\n";
        let t = parse_tsplib(text).unwrap();
        assert!(!t.is_symmetric());
        assert_eq!(t.distance(1, 1), 0.0);
        assert_eq!(t.tour_cost(&[0, 1, 2]).unwrap(), 1.0 + 3.0 + 2.0);
    }

    #[test]
    fn parse_errors_name_keyword() {
        let geo = TRIANGLE.replace("EUC_2D", "GEO");
        match parse_tsplib(&geo) {
            Err(Error::Unsupported { keyword, value }) => {
                assert_eq!(keyword, "EDGE_WEIGHT_TYPE");
                assert_eq!(value, "GEO");
            }
            other => panic!("unexpected {other:?}"),
        }
        let cvrp = TRIANGLE.replace("TYPE: TSP", "TYPE: CVRP");
        assert!(matches!(parse_tsplib(&cvrp), Err(Error::Unsupported { .. })));
        let extra = TRIANGLE.replace("NODE_COORD_SECTION", "DEMAND_SECTION");
        assert!(matches!(parse_tsplib(&extra), Err(Error::Unsupported { .. })));
        let short = TRIANGLE.replace("DIMENSION: 3", "DIMENSION: 4");
        assert!(matches!(parse_tsplib(&short), Err(Error::Parse { .. })));
        let fmt = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_DIAG_ROW\nEDGE_WEIGHT_SECTION\n0 1 2 0 3 0\nEOF\n";
        assert!(matches!(parse_tsplib(fmt), Err(Error::Unsupported { .. })));
        let count = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 2\nEOF\n";
        assert!(matches!(parse_tsplib(count), Err(Error::Parse { .. })));
    }

    #[test]
    fn encode_positives() {
        let t = triangle();
        let e = t.encode_tour(&[0, 1, 2]);
        let positives: Vec<(usize, usize)> = (0..9).filter(|&k| e[k] > 0.0).map(|k| (k / 3, k % 3)).collect();
        assert_eq!(positives, vec![(0, 1), (1, 2), (2, 0)]);
    }

    #[test]
    fn interpret_tie_and_preference() {
        let t = TspInstance::from_matrix("four", 4, vec![1.0; 16]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Every row prefers 2 and 3 equally over 1; ties go to the lower index.
        let mut v = vec![-1.0; 16];
        for (row, col, x) in [(0, 1, 0.2), (0, 2, 0.9), (0, 3, 0.9), (2, 1, 0.5), (1, 3, 0.5), (3, 0, 0.5)] {
            v[row * 4 + col] = x;
        }
        for _ in 0..20 {
            let tour = t.interpret_connections(&v, &mut rng);
            assert_eq!(tour[0], 0);
            check_permutation(&tour, 4).unwrap();
            // Whenever 0 is not last-visited, its successor is 2.
            let pos0 = tour.iter().position(|&l| l == 0).unwrap();
            assert_eq!(tour[(pos0 + 1) % 4], 2, "{tour:?}");
        }
    }

    #[test]
    fn interpret_all_negative_is_random_feasible() {
        let t = TspInstance::from_matrix("five", 5, vec![1.0; 25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = vec![-0.5; 25];
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let tour = t.interpret_connections(&v, &mut rng);
            check_permutation(&tour, 5).unwrap();
            assert_eq!(tour[0], 0);
            seen.insert(tour);
        }
        // 4! = 24 distinct orders starting at 0.
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn move_examples() {
        let o = [0, 1, 2, 3];
        assert_eq!(swap_at(&o, 1, 3), vec![0, 3, 2, 1]);
        assert_eq!(insert_at(&o, 0, 2), vec![1, 2, 0, 3]);
        assert_eq!(two_opt_at(&o, 1, 2), vec![0, 2, 1, 3]);
    }

    #[test]
    fn degenerate_moves_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in MoveKind::ALL {
            assert!(kind.apply(&[0, 1], &mut rng).is_err());
            let out = kind.apply(&[0, 1, 2], &mut rng).unwrap();
            check_permutation(&out, 3).unwrap();
        }
    }

    #[test]
    fn move_kind_names() {
        for kind in MoveKind::ALL {
            assert_eq!(kind.name().parse::<MoveKind>().unwrap(), kind);
        }
        assert!("3-opt".parse::<MoveKind>().is_err());
    }

    #[test]
    fn three_city_climb_is_optimal() {
        let t = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in MoveKind::ALL {
            let r = restart_hill_climb(&t, kind, 1, 5, &mut rng).unwrap();
            assert_eq!(r.best.cost, 12.0);
            assert_eq!(r.trial_costs.len(), 1);
        }
        assert!(restart_hill_climb(&t, MoveKind::Swap, 0, 5, &mut rng).is_err());
    }

    #[test]
    fn registry_parsing() {
        let r = parse_optima_registry("# comment\nfr26 937\n\nst70 675\n").unwrap();
        assert_eq!(r["fr26"], 937.0);
        assert_eq!(r.len(), 2);
        assert!(parse_optima_registry("fr26\n").is_err());
        assert!(parse_optima_registry("fr26 x\n").is_err());
    }
}
