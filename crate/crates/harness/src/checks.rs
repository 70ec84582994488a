//! Fitness exactness checks and brute-force oracles behind the
//! `verify-fitness` and `oracle` subcommands.

use deepopt::binary::{
    brute_force_oracle, htop_transform, Bits, HtopInstance, McParityInstance, TernarySymbol,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub label: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

fn symbols(s: &str) -> [TernarySymbol; 4] {
    let mut out = [TernarySymbol::Null; 4];
    for (o, c) in out.iter_mut().zip(s.chars()) {
        *o = match c {
            '0' => TernarySymbol::Zero,
            '1' => TernarySymbol::One,
            _ => TernarySymbol::Null,
        };
    }
    out
}

fn show(symbols: &[TernarySymbol]) -> String {
    symbols
        .iter()
        .map(|s| match s {
            TernarySymbol::Zero => '0',
            TernarySymbol::One => '1',
            TernarySymbol::Null => '-',
        })
        .collect()
}

pub fn parse_bits(s: &str) -> Bits {
    s.bytes().filter(|b| *b == b'0' || *b == b'1').map(|b| b - b'0').collect()
}

/// The HTOP transformation rows (every input outside the one-hot codes
/// maps to null) and the four worked MC_parity examples.
pub fn verify_fitness() -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    let transform_rows = [
        ("1000", "00"),
        ("0100", "01"),
        ("0010", "10"),
        ("0001", "11"),
        ("0000", "--"),
    ];
    for (input, expected) in transform_rows {
        let got = show(&htop_transform(&symbols(input)));
        lines.push(CheckLine {
            label: format!("htop t({input})"),
            expected: expected.to_owned(),
            pass: got == expected,
            got,
        });
    }
    // "Otherwise" covers every non-one-hot block, nulls included.
    let otherwise_ok = (0u8..81).all(|code| {
        let mut block = [TernarySymbol::Zero; 4];
        let mut c = code;
        for b in block.iter_mut() {
            *b = match c % 3 {
                0 => TernarySymbol::Zero,
                1 => TernarySymbol::One,
                _ => TernarySymbol::Null,
            };
            c /= 3;
        }
        let one_hot = block.iter().filter(|s| **s == TernarySymbol::One).count() == 1
            && block.iter().all(|s| *s != TernarySymbol::Null);
        one_hot || htop_transform(&block) == [TernarySymbol::Null; 2]
    });
    lines.push(CheckLine {
        label: "htop t(otherwise), all 77 blocks".into(),
        expected: "--".into(),
        got: if otherwise_ok { "--".into() } else { "mismatch".into() },
        pass: otherwise_ok,
    });

    let mc = McParityInstance::new(4, 4, 1e-4)?;
    let rows = [
        ("1000 0100 1101 0000", 3.0003),
        ("1000 1000 1101 1101", 4.0008),
        ("1000 1000 1000 1101", 4.0010),
        ("1000 1000 1000 1000", 4.0016),
    ];
    for (x, expected) in rows {
        let f = mc.fitness(&parse_bits(x))?;
        lines.push(CheckLine {
            label: format!("mc_parity F({x})"),
            expected: format!("{expected:.4}"),
            got: format!("{f:.12}"),
            pass: (f - expected).abs() <= 1e-12,
        });
    }
    Ok(lines)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub problem: String,
    pub size: usize,
    pub max_fitness: f64,
    pub argmax: Vec<Bits>,
    /// Closed-form maximum and optimum set agree with enumeration.
    pub consistent: bool,
}

/// Exhaustive search, compared with the closed-form optimum:
/// `htop` against [`HtopInstance::global_optima`], `mc_parity` (module size 4)
/// against `m + p m^2` and `2^(n-1)` argmax strings.
pub fn oracle(problem: &str, size: usize) -> Result<OracleReport> {
    let (max_fitness, argmax, consistent) = match problem {
        "htop" => {
            let h = HtopInstance::new(size)?;
            let (best, argmax) = brute_force_oracle(|x| h.fitness(x).unwrap_or(f64::NEG_INFINITY), size)?;
            let mut expected = h.global_optima();
            expected.sort();
            let ok = best == h.max_fitness() && argmax == expected;
            (best, argmax, ok)
        }
        "mc_parity" | "mcparity" => {
            let m = McParityInstance::with_size(size)?;
            let (best, argmax) = brute_force_oracle(|x| m.fitness(x).unwrap_or(f64::NEG_INFINITY), size)?;
            let types = 1usize << (m.module_size() - 1);
            let ok = (best - m.max_fitness()).abs() < 1e-12 && argmax.len() == types;
            (best, argmax, ok)
        }
        other => {
            return Err(HarnessError::Config(format!(
                "unknown problem {other:?} (expected htop or mc_parity)"
            )))
        }
    };
    Ok(OracleReport {
        problem: problem.to_owned(),
        size,
        max_fitness,
        argmax,
        consistent,
    })
}
