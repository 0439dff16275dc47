//! Random plans and random plan-like text for parser checks.

use std::collections::BTreeMap;

use rand::Rng as _;
use tsr_core::plan::{Expr, Plan, Step};
use tsr_core::rng::Rng;

pub const ANOMALY_PROGRAM: &str = "```python
NORM_SCORE = AnomalDetOP(data=NORM_VAL)

THRES = calibrateThreshOP(data=NORM_SCORE)

TEST_SCORE = AnomalDetOP(data=VAL)

FINAL_RESULT = convertBinaryOP(data=TEST_SCORE, threshold=THRES)
```
";

const IDENT_START: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
const IDENT_REST: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";

pub fn ident(rng: &mut Rng) -> String {
    let mut s = String::new();
    s.push(IDENT_START[rng.random_range(0..IDENT_START.len())] as char);
    for _ in 0..rng.random_range(0..10) {
        s.push(IDENT_REST[rng.random_range(0..IDENT_REST.len())] as char);
    }
    s
}

fn text(rng: &mut Rng) -> String {
    (0..rng.random_range(0..12))
        .map(|_| match rng.random_range(0..6) {
            0 => ['"', '\\', '\n', '\t', '\'', '#'][rng.random_range(0..6)],
            _ => char::from_u32(rng.random_range(0x20..0x2FFF)).unwrap_or('x'),
        })
        .collect()
}

pub fn expr(rng: &mut Rng, depth: usize) -> Expr {
    match rng.random_range(0..if depth < 3 { 6 } else { 5 }) {
        0 => Expr::Ident(ident(rng)),
        1 => Expr::Number(rng.random_range(-1e6..1e6)),
        2 => Expr::Number(f64::from_bits(rng.random::<u64>() & !(0x7FF << 52)) * 1e300),
        3 => Expr::Str(text(rng)),
        4 => Expr::Placeholder(ident(rng)),
        _ => Expr::List((0..rng.random_range(0..4)).map(|_| expr(rng, depth + 1)).collect()),
    }
}

pub fn plan(rng: &mut Rng) -> Plan {
    let steps = (0..rng.random_range(1..6))
        .map(|_| {
            let args: BTreeMap<String, Expr> =
                (0..rng.random_range(0..4)).map(|_| (ident(rng), expr(rng, 0))).collect();
            Step {
                target: ident(rng),
                op: ident(rng),
                args,
                line: 0,
            }
        })
        .collect();
    Plan { steps }
}

const TOKENS: &[&str] = &[
    "X", "FINAL_RESULT", "VAL", " = ", "=", "(", ")", ",", "[", "]", "{", "}", "\"", "'", "\\",
    "data=", "threshold=", "forecastOP", "AnomalDetOP", "1", "-2.5e3", "1e999", ".", "+", "#",
    "\n", "```", " ", "\t", "é", "\u{0}", "=>", "[[[[", "x=", "'a\\q'",
];

/// Token soup mixed with arbitrary characters.
pub fn fuzz_input(rng: &mut Rng) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(0..40) {
        if rng.random_bool(0.8) {
            s.push_str(TOKENS[rng.random_range(0..TOKENS.len())]);
        } else {
            s.push(char::from_u32(rng.random_range(0..0x3000)).unwrap_or('?'));
        }
    }
    s
}
