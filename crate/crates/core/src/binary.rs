//! Binary benchmark problems: HTOP and MC_parity.
//!
//! Solutions are bit strings stored as `Vec<u8>` holding 0 or 1. The network
//! sees bit 1 as +1.0 and bit 0 as -1.0.

use rand::Rng;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::problem::Problem;

pub type Bits = Vec<u8>;

/// Sign threshold at zero: strictly positive becomes 1, everything else 0.
pub fn binary_interpret(x: &[f64]) -> Bits {
    x.iter().map(|&v| u8::from(v > 0.0)).collect()
}

pub fn encode_bits(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b == 1 { 1.0 } else { -1.0 }).collect()
}

fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Bits {
    (0..n).map(|_| rng.gen_range(0..=1u8)).collect()
}

fn flip_one<R: Rng + ?Sized>(bits: &[u8], rng: &mut R) -> Bits {
    let mut out = bits.to_vec();
    let i = rng.gen_range(0..out.len());
    out[i] ^= 1;
    out
}

/// A symbol of an HTOP level string. Levels above the first may carry
/// `Null`, which poisons every block containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TernarySymbol {
    Zero,
    One,
    Null,
}

impl From<u8> for TernarySymbol {
    fn from(b: u8) -> Self {
        if b == 0 {
            TernarySymbol::Zero
        } else {
            TernarySymbol::One
        }
    }
}

/// Position of the single `One` in a null-free one-hot block.
fn one_hot_index(block: &[TernarySymbol; 4]) -> Option<usize> {
    let mut hot = None;
    for (i, s) in block.iter().enumerate() {
        match s {
            TernarySymbol::Null => return None,
            TernarySymbol::One if hot.is_some() => return None,
            TernarySymbol::One => hot = Some(i),
            TernarySymbol::Zero => {}
        }
    }
    hot
}

/// 1000 -> 00, 0100 -> 01, 0010 -> 10, 0001 -> 11; anything else -> null null.
pub fn htop_transform(block: &[TernarySymbol; 4]) -> [TernarySymbol; 2] {
    use TernarySymbol::*;
    match one_hot_index(block) {
        Some(0) => [Zero, Zero],
        Some(1) => [Zero, One],
        Some(2) => [One, Zero],
        Some(3) => [One, One],
        _ => [Null, Null],
    }
}

/// Inverse of [`htop_transform`] on satisfied blocks.
fn htop_expand(pair: [TernarySymbol; 2]) -> [u8; 4] {
    use TernarySymbol::*;
    match pair {
        [Zero, Zero] => [1, 0, 0, 0],
        [Zero, One] => [0, 1, 0, 0],
        [One, Zero] => [0, 0, 1, 0],
        [One, One] => [0, 0, 0, 1],
        _ => unreachable!("null symbols have no preimage"),
    }
}

pub fn htop_block_fitness(block: &[TernarySymbol; 4]) -> u32 {
    u32::from(one_hot_index(block).is_some())
}

/// How satisfied blocks are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HtopWeighting {
    /// Every satisfied block scores 1.
    #[default]
    Unweighted,
    /// A satisfied block scores the number of visible bits beneath it.
    BySpan,
}

/// Hierarchical Transformation Optimisation Problem with block width 4 and
/// reduction ratio 2. Those two constants are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HtopInstance {
    size: usize,
    levels: usize,
    weighting: HtopWeighting,
}

impl HtopInstance {
    pub const BLOCK: usize = 4;
    pub const REDUCTION: usize = 2;

    pub fn new(size: usize) -> Result<Self> {
        Self::with_weighting(size, HtopWeighting::Unweighted)
    }

    pub fn with_weighting(size: usize, weighting: HtopWeighting) -> Result<Self> {
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "HTOP size must be a power of two and at least 8, got {size}"
            )));
        }
        Ok(Self {
            size,
            levels: size.trailing_zeros() as usize - 1,
            weighting,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn weighting(&self) -> HtopWeighting {
        self.weighting
    }

    /// Score of any global optimum.
    pub fn max_fitness(&self) -> f64 {
        let mut total = 0;
        let mut blocks = self.size / Self::BLOCK;
        let mut span = Self::BLOCK;
        while blocks >= 1 {
            total += match self.weighting {
                HtopWeighting::Unweighted => blocks,
                HtopWeighting::BySpan => blocks * span,
            };
            blocks /= Self::REDUCTION;
            span *= Self::REDUCTION;
        }
        total as f64
    }

    pub fn fitness(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.size {
            return Err(Error::LengthMismatch {
                expected: self.size,
                got: x.len(),
            });
        }
        Ok(self.score(x))
    }

    fn score(&self, x: &[u8]) -> f64 {
        let mut level: Vec<TernarySymbol> = x.iter().map(|&b| b.into()).collect();
        let mut span = Self::BLOCK;
        let mut total = 0usize;
        while level.len() >= Self::BLOCK {
            let mut next = Vec::with_capacity(level.len() / Self::REDUCTION);
            for chunk in level.chunks_exact(Self::BLOCK) {
                let block: &[TernarySymbol; 4] = chunk.try_into().expect("chunk of 4");
                let hit = htop_block_fitness(block) as usize;
                total += match self.weighting {
                    HtopWeighting::Unweighted => hit,
                    HtopWeighting::BySpan => hit * span,
                };
                next.extend(htop_transform(block));
            }
            level = next;
            span *= Self::REDUCTION;
        }
        total as f64
    }

    /// The four global optima, built top-down by expanding each one-hot top
    /// block through the inverse transformation.
    pub fn global_optima(&self) -> Vec<Bits> {
        (0..4)
            .map(|hot| {
                let mut level: Vec<u8> = (0..4).map(|i| u8::from(i == hot)).collect();
                while level.len() < self.size {
                    level = level
                        .chunks_exact(2)
                        .flat_map(|pair| htop_expand([pair[0].into(), pair[1].into()]))
                        .collect();
                }
                level
            })
            .collect()
    }
}

impl Problem for HtopInstance {
    type Solution = Bits;

    fn visible_size(&self) -> usize {
        self.size
    }

    fn fitness(&self, solution: &Bits) -> f64 {
        self.score(solution)
    }

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Bits {
        random_bits(self.size, rng)
    }

    fn naive_variation<R: Rng + ?Sized>(&self, solution: &Bits, rng: &mut R) -> Bits {
        flip_one(solution, rng)
    }

    fn interpret<R: Rng + ?Sized>(&self, decoded: &[f64], _rng: &mut R) -> Bits {
        binary_interpret(decoded)
    }

    fn encode_solution(&self, solution: &Bits) -> Vec<f64> {
        encode_bits(solution)
    }

    fn target_fitness(&self) -> Option<f64> {
        Some(self.max_fitness())
    }
}

/// Parity Modular Constraint problem: `modules` groups of `module_size`
/// bits. A module scores 1 when its bit sum is odd; on top of that every
/// distinct odd-parity pattern contributes `coupling * count^2`, where
/// `count` is the number of modules holding exactly that pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParityInstance {
    modules: usize,
    module_size: usize,
    coupling: f64,
}

impl McParityInstance {
    pub const DEFAULT_MODULE_SIZE: usize = 4;
    pub const DEFAULT_COUPLING: f64 = 1e-4;

    pub fn new(modules: usize, module_size: usize, coupling: f64) -> Result<Self> {
        if modules == 0 {
            return Err(Error::ZeroSize { what: "module count" });
        }
        if module_size == 0 || module_size > 64 {
            return Err(Error::InvalidConfig(format!(
                "module size must be in 1..=64, got {module_size}"
            )));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "coupling must be positive, got {coupling}"
            )));
        }
        Ok(Self {
            modules,
            module_size,
            coupling,
        })
    }

    /// `size` bits split into modules of four with the default coupling.
    pub fn with_size(size: usize) -> Result<Self> {
        if !size.is_multiple_of(Self::DEFAULT_MODULE_SIZE) {
            return Err(Error::InvalidConfig(format!(
                "MC_parity size {size} is not a multiple of {}",
                Self::DEFAULT_MODULE_SIZE
            )));
        }
        Self::new(size / Self::DEFAULT_MODULE_SIZE, Self::DEFAULT_MODULE_SIZE, Self::DEFAULT_COUPLING)
    }

    pub fn modules(&self) -> usize {
        self.modules
    }

    pub fn module_size(&self) -> usize {
        self.module_size
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn size(&self) -> usize {
        self.modules * self.module_size
    }

    /// All modules share one odd-parity pattern.
    pub fn max_fitness(&self) -> f64 {
        let m = self.modules as u64;
        self.modules as f64 + self.coupling * (m * m) as f64
    }

    pub fn fitness(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.size() {
            return Err(Error::LengthMismatch {
                expected: self.size(),
                got: x.len(),
            });
        }
        Ok(self.score(x))
    }

    fn score(&self, x: &[u8]) -> f64 {
        let mut odd = 0u64;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for module in x.chunks_exact(self.module_size) {
            let ones = module.iter().filter(|&&b| b == 1).count();
            if ones % 2 == 1 {
                odd += 1;
                let pattern = module.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
                *counts.entry(pattern).or_default() += 1;
            }
        }
        let between: u64 = counts.values().map(|c| c * c).sum();
        odd as f64 + self.coupling * between as f64
    }
}

impl Problem for McParityInstance {
    type Solution = Bits;

    fn visible_size(&self) -> usize {
        self.size()
    }

    fn fitness(&self, solution: &Bits) -> f64 {
        self.score(solution)
    }

    fn random_solution<R: Rng + ?Sized>(&self, rng: &mut R) -> Bits {
        random_bits(self.size(), rng)
    }

    fn naive_variation<R: Rng + ?Sized>(&self, solution: &Bits, rng: &mut R) -> Bits {
        flip_one(solution, rng)
    }

    fn interpret<R: Rng + ?Sized>(&self, decoded: &[f64], _rng: &mut R) -> Bits {
        binary_interpret(decoded)
    }

    fn encode_solution(&self, solution: &Bits) -> Vec<f64> {
        encode_bits(solution)
    }

    fn target_fitness(&self) -> Option<f64> {
        Some(self.max_fitness())
    }
}

/// Largest string length [`brute_force_oracle`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exhaustive search over all `2^n` bit strings. Returns the maximum fitness
/// and every string attaining it, in lexicographic order.
pub fn brute_force_oracle<F>(fitness: F, n: usize) -> Result<(f64, Vec<Bits>)>
where
    F: Fn(&[u8]) -> f64,
{
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    let mut bits = vec![0u8; n];
    for code in 0u64..(1u64 << n) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((code >> (n - 1 - i)) & 1) as u8;
        }
        let f = fitness(&bits);
        if f > best {
            best = f;
            argmax.clear();
            argmax.push(bits.clone());
        } else if f == best {
            argmax.push(bits.clone());
        }
    }
    Ok((best, argmax))
}
