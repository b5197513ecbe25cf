//! Line-oriented configuration format. See `docs/config.md` for the grammar.

use num_traits::Signed;

use super::{Angle, BlockKind, Modulus, RawSystem, SpectralBlock, SpectralSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{parse_rational, ArithmeticMode, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum SystemInput {
    Spec(SpectralSpec),
    Matrix(RawSystem),
}

impl SystemInput {
    pub fn dimension(&self) -> usize {
        match self {
            SystemInput::Spec(s) => s.dimension(),
            SystemInput::Matrix(m) => m.dimension(),
        }
    }

    /// Canonical configuration text; parsing it yields the same input.
    pub fn to_config_text(&self) -> String {
        match self {
            SystemInput::Spec(s) => s.to_config_text(),
            SystemInput::Matrix(m) => m.to_config_text(),
        }
    }

    /// The concrete system: the matrix itself, or the block-diagonal
    /// realization of a spectral description.
    pub fn system(&self) -> RawSystem {
        match self {
            SystemInput::Spec(s) => s.realize(),
            SystemInput::Matrix(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInput {
    pub input: SystemInput,
    pub warnings: Vec<String>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

/// Parses a configuration document into a validated input model.
pub fn parse_spec(text: &str) -> Result<ParsedInput> {
    let mut blocks = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut u: Option<Vec<Rational>> = None;
    let mut mode: Option<ArithmeticMode> = None;
    let mut warnings = Vec::new();
    let mut first_matrix_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        match keyword {
            "block" => blocks.push(parse_block(line_no, &rest, &mut warnings)?),
            "row" => {
                if first_matrix_line == 0 {
                    first_matrix_line = line_no;
                }
                rows.push(parse_numbers(line_no, "row", &rest)?);
            }
            "u" => {
                if u.is_some() {
                    return Err(err(line_no, "key `u` given twice"));
                }
                if first_matrix_line == 0 {
                    first_matrix_line = line_no;
                }
                u = Some(parse_numbers(line_no, "u", &rest)?);
            }
            "mode" => {
                mode = Some(match rest.as_slice() {
                    ["exact"] => ArithmeticMode::Exact,
                    ["float"] => ArithmeticMode::Float,
                    _ => return Err(err(line_no, "key `mode` expects `exact` or `float`")),
                })
            }
            other => return Err(err(line_no, format!("unknown key `{other}`"))),
        }
    }

    let has_matrix = !rows.is_empty() || u.is_some();
    let input = match (blocks.is_empty(), has_matrix) {
        (false, true) => {
            return Err(err(
                first_matrix_line,
                "key `row`/`u`: a document holds either `block` lines or a matrix, not both",
            ))
        }
        (true, false) => return Err(err(1, "no `block` lines and no matrix")),
        (false, false) => {
            let spec = SpectralSpec::exact(blocks).map_err(|e| err(0, format!("key `block`: {e}")))?;
            SystemInput::Spec(spec)
        }
        (true, true) => {
            let u = u.ok_or_else(|| err(first_matrix_line, "key `u` is missing"))?;
            if rows.is_empty() {
                return Err(err(first_matrix_line, "key `row` is missing"));
            }
            let matrix =
                Matrix::from_rows(rows).map_err(|e| err(first_matrix_line, format!("key `row`: {e}")))?;
            let sys = RawSystem::new(matrix, u, mode.unwrap_or(ArithmeticMode::Exact))
                .map_err(|e| err(first_matrix_line, format!("key `row`: {e}")))?;
            SystemInput::Matrix(sys)
        }
    };
    Ok(ParsedInput { input, warnings })
}

fn parse_numbers(line: usize, key: &str, items: &[&str]) -> Result<Vec<Rational>> {
    if items.is_empty() {
        return Err(err(line, format!("key `{key}` has no entries")));
    }
    items
        .iter()
        .map(|t| parse_rational(t).map_err(|e| err(line, format!("key `{key}`: {e}"))))
        .collect()
}

fn parse_block(line: usize, items: &[&str], warnings: &mut Vec<String>) -> Result<SpectralBlock> {
    let (kind, params) = items
        .split_first()
        .ok_or_else(|| err(line, "key `block` needs a kind"))?;
    if !matches!(*kind, "real" | "jordan" | "rotation") {
        return Err(err(line, format!("key `block`: unknown kind `{kind}`")));
    }
    let mut value: Option<Rational> = None;
    let mut size: Option<usize> = None;
    let mut angle: Option<Angle> = None;
    for item in params {
        let (key, val) = item
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected key=value, found `{item}`")))?;
        match key {
            "k" | "r" | "modulus" => {
                value = Some(parse_rational(val).map_err(|e| err(line, format!("key `{key}`: {e}")))?)
            }
            "size" => {
                size = Some(
                    val.parse()
                        .map_err(|_| err(line, format!("key `size`: invalid integer `{val}`")))?,
                )
            }
            "angle" => angle = Some(parse_angle(line, val, warnings)?),
            other => return Err(err(line, format!("unknown key `{other}`"))),
        }
    }
    let value = value.ok_or_else(|| err(line, "key `k` (modulus) is missing"))?;
    let check = |r: Result<SpectralBlock>, key: &str| r.map_err(|e| err(line, format!("key `{key}`: {e}")));
    match *kind {
        "real" => {
            if angle.is_some() || size.is_some() {
                return Err(err(line, "key `angle`/`size` not allowed for a real block"));
            }
            check(SpectralBlock::real(value), "k")
        }
        "jordan" => {
            let size = size.ok_or_else(|| err(line, "key `size` is missing"))?;
            if angle.is_some() && value.is_negative() {
                return Err(err(line, "key `k`: complex jordan blocks take a positive modulus"));
            }
            let kind = BlockKind::Jordan {
                size,
                negative: value.is_negative(),
                angle,
            };
            check(SpectralBlock::new(kind, Modulus::Exact(value.abs())), "k")
        }
        "rotation" => {
            let angle = angle.ok_or_else(|| err(line, "key `angle` is missing"))?;
            if size.is_some() {
                return Err(err(line, "key `size` not allowed for a rotation block"));
            }
            if value.is_negative() {
                return Err(err(line, "key `r`: modulus must be positive"));
            }
            check(SpectralBlock::rotation(value, angle), "r")
        }
        other => Err(err(line, format!("key `block`: unknown kind `{other}`"))),
    }
}

fn parse_angle(line: usize, text: &str, warnings: &mut Vec<String>) -> Result<Angle> {
    if let Some(rad) = text.strip_prefix("irrational:") {
        let theta: f64 = rad
            .parse()
            .map_err(|_| err(line, format!("key `angle`: invalid radians `{rad}`")))?;
        let a = Angle::Irrational(theta);
        super::check_angle(&a).map_err(|e| err(line, format!("key `angle`: {e}")))?;
        return Ok(a);
    }
    let frac = text
        .strip_suffix("pi")
        .map(|s| s.trim_end_matches('*'))
        .ok_or_else(|| err(line, format!("key `angle`: expected `p/s pi`, found `{text}`")))?;
    let (p, s) = frac
        .split_once('/')
        .ok_or_else(|| err(line, format!("key `angle`: expected `p/s pi`, found `{text}`")))?;
    let (p, s): (u64, u64) = match (p.parse(), s.parse()) {
        (Ok(p), Ok(s)) => (p, s),
        _ => return Err(err(line, format!("key `angle`: invalid fraction `{frac}`"))),
    };
    if s == 0 {
        return Err(err(line, "key `angle`: zero denominator"));
    }
    let g = num_integer::gcd(p, s);
    let (rp, rs) = (p / g.max(1), s / g.max(1));
    if g > 1 {
        warnings.push(format!(
            "line {line}: angle {p}/{s}pi reduced to {rp}/{rs}pi"
        ));
    }
    Angle::rational_pi(rp, rs).map_err(|e| err(line, format!("key `angle`: {e}")))
}
