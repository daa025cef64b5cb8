//! TOML configuration schemas and their translation into core types.

use std::collections::BTreeSet;
use std::path::Path;

use num_rational::Rational64;
use serde::Deserialize;

use latstat_core::pointset::{IrrationalCoord, PointConfig, Shift};
use latstat_core::window::{CongruenceWindow, LocalCondition, TailFamily};

use crate::error::CliError;

/// Window specification file.
///
/// ```toml
/// dimension = 2
/// family = "primitive"        # primitive | kfree | custom | trivial
/// exact_tail = false
/// primes = [2, 3, 5]          # truncation prime set (family windows)
/// exponents = [2, 2]          # kfree only; 0 leaves a coordinate free
///
/// [[condition]]               # custom only
/// prime = 2
/// exponent = 1
/// mode = "exclude-zero-vector"   # or "kfree" (+ exponents) or "residues"
/// residues = [[0, 1], [1, 0], [1, 1]]
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub dimension: usize,
    pub family: String,
    #[serde(default)]
    pub exact_tail: bool,
    #[serde(default)]
    pub primes: Vec<u64>,
    #[serde(default)]
    pub exponents: Vec<u32>,
    #[serde(default)]
    pub condition: Vec<ConditionSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub prime: u64,
    #[serde(default = "one")]
    pub exponent: u32,
    pub mode: String,
    #[serde(default)]
    pub exponents: Vec<u32>,
    #[serde(default)]
    pub residues: Vec<Vec<u64>>,
}

fn one() -> u32 {
    1
}

impl WindowSpec {
    pub fn build(&self) -> Result<CongruenceWindow, CliError> {
        let d = self.dimension;
        let kfree_exponents = || -> Vec<Option<u32>> {
            self.exponents
                .iter()
                .map(|&k| (k > 0).then_some(k))
                .collect()
        };
        let window = match self.family.as_str() {
            "trivial" => {
                if self.exact_tail {
                    return Err(CliError::Config(
                        "trivial window has no exact tail form".into(),
                    ));
                }
                CongruenceWindow::trivial(d)?
            }
            "primitive" => {
                if self.exact_tail {
                    if !self.primes.is_empty() {
                        return Err(CliError::Config(
                            "exact_tail windows take no truncation primes; \
                             set exact_tail = false for the truncated form"
                                .into(),
                        ));
                    }
                    CongruenceWindow::primitive_exact(d)?
                } else {
                    CongruenceWindow::primitive(d, &self.primes)?
                }
            }
            "kfree" => {
                if self.exponents.len() != d {
                    return Err(CliError::Config(
                        "kfree windows need one exponent per coordinate (0 = free)".into(),
                    ));
                }
                if self.exact_tail {
                    CongruenceWindow::kfree_exact(d, kfree_exponents())?
                } else {
                    CongruenceWindow::kfree(d, kfree_exponents(), &self.primes)?
                }
            }
            "custom" => {
                if self.exact_tail {
                    // Custom congruence data has no all-prime product form.
                    return Err(CliError::Config(
                        "no closed form: exact_tail is only supported for the \
                         primitive and kfree families"
                            .into(),
                    ));
                }
                let conditions = self
                    .condition
                    .iter()
                    .map(|c| c.build())
                    .collect::<Result<Vec<_>, _>>()?;
                CongruenceWindow::custom(d, conditions)?
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown window family '{other}' (expected primitive, kfree, custom or trivial)"
                )))
            }
        };
        Ok(window)
    }

    /// The family's exact all-prime form, for truncation-excess comparisons.
    pub fn tail_family(&self) -> Option<TailFamily> {
        match self.family.as_str() {
            "primitive" => Some(TailFamily::Primitive),
            "kfree" => Some(TailFamily::KFree {
                exponents: self
                    .exponents
                    .iter()
                    .map(|&k| (k > 0).then_some(k))
                    .collect(),
            }),
            _ => None,
        }
    }
}

impl ConditionSpec {
    fn build(&self) -> Result<LocalCondition, CliError> {
        match self.mode.as_str() {
            "exclude-zero-vector" => Ok(LocalCondition::exclude_zero_vector(
                self.prime,
                self.exponent,
            )),
            "kfree" => Ok(LocalCondition::kfree(
                self.prime,
                self.exponents
                    .iter()
                    .map(|&k| (k > 0).then_some(k))
                    .collect(),
            )),
            "residues" => {
                let accepted: BTreeSet<Vec<u64>> = self.residues.iter().cloned().collect();
                Ok(LocalCondition::explicit(
                    self.prime,
                    self.exponent,
                    accepted,
                ))
            }
            other => Err(CliError::Config(format!(
                "unknown condition mode '{other}' at p = {}",
                self.prime
            ))),
        }
    }
}

/// Point-set configuration file for gen / gaps / dirs / fpl.
///
/// ```toml
/// dimension = 2
/// T = 500.0
/// c = 0.0
/// exclude_origin = true
/// shift = ["1/2", "1/2"]          # or ["sqrt(2)", "sqrt(3)"], or numbers
/// shift_kind = "rational"         # rational | irrational
/// q = ["sqrt(2)/10", "sqrt(3)/10"]  # fpl start point (optional)
///
/// [window]
/// family = "primitive"
/// exact_tail = true
/// ```
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub dimension: usize,
    #[serde(rename = "T")]
    pub radius: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "default_true")]
    pub exclude_origin: bool,
    pub shift: Vec<ShiftEntry>,
    pub shift_kind: String,
    #[serde(default)]
    pub basis: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub q: Option<Vec<ShiftEntry>>,
    pub window: WindowSpec,
}

fn default_true() -> bool {
    true
}

/// A coordinate given either as a TOML number or as an expression string
/// ("a/b", "sqrt(n)", "sqrt(n)/m", decimal).
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ShiftEntry {
    Number(f64),
    Expr(String),
}

impl ShiftEntry {
    pub fn as_f64(&self) -> Result<f64, CliError> {
        match self {
            ShiftEntry::Number(x) => Ok(*x),
            ShiftEntry::Expr(s) => Ok(parse_real_expr(s)?.1),
        }
    }

    fn label(&self) -> String {
        match self {
            ShiftEntry::Number(x) => format!("{x:.17e}"),
            ShiftEntry::Expr(s) => s.clone(),
        }
    }

    fn as_rational(&self) -> Result<Rational64, CliError> {
        match self {
            ShiftEntry::Number(x) => decimal_to_rational(*x),
            ShiftEntry::Expr(s) => parse_rational_expr(s),
        }
    }
}

/// "sqrt(n)" / "sqrt(n)/m" / "a/b" / decimal -> (label, value).
fn parse_real_expr(s: &str) -> Result<(String, f64), CliError> {
    let t = s.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let value = if let Some(rest) = t.strip_prefix("sqrt(") {
        let (inner, tail) = rest
            .split_once(')')
            .ok_or_else(|| CliError::Config(format!("unclosed sqrt in '{s}'")))?;
        let n: f64 = inner
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad sqrt argument in '{s}'")))?;
        let base = n.sqrt();
        match tail.trim() {
            "" => base,
            div => {
                let m: f64 = div
                    .strip_prefix('/')
                    .and_then(|m| m.trim().parse().ok())
                    .ok_or_else(|| CliError::Config(format!("bad divisor in '{s}'")))?;
                base / m
            }
        }
    } else if let Some((a, b)) = t.split_once('/') {
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad numerator in '{s}'")))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad denominator in '{s}'")))?;
        a / b
    } else {
        t.parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad number '{s}'")))?
    };
    Ok((s.trim().to_string(), if neg { -value } else { value }))
}

fn parse_rational_expr(s: &str) -> Result<Rational64, CliError> {
    let t = s.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a: i64 = a
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad numerator in '{s}'")))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad denominator in '{s}'")))?;
        if b == 0 {
            return Err(CliError::Config(format!("zero denominator in '{s}'")));
        }
        return Ok(Rational64::new(a, b));
    }
    if let Ok(n) = t.parse::<i64>() {
        return Ok(Rational64::new(n, 1));
    }
    let x: f64 = t
        .parse()
        .map_err(|_| CliError::Config(format!("bad rational '{s}'")))?;
    decimal_to_rational(x)
}

/// Exact rational from a decimal literal (scaled by a power of ten).
fn decimal_to_rational(x: f64) -> Result<Rational64, CliError> {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return Ok(Rational64::new(x as i64, 1));
    }
    let text = format!("{x}");
    let Some((int, frac)) = text.split_once('.') else {
        return Err(CliError::Config(format!(
            "cannot express {x} as a rational"
        )));
    };
    if frac.len() > 12 {
        return Err(CliError::Config(format!(
            "decimal {x} has too many digits for an exact rational; \
             write it as 'a/b' or tag the shift irrational"
        )));
    }
    let denom = 10i64.pow(frac.len() as u32);
    let numer: i64 = format!("{int}{frac}")
        .parse()
        .map_err(|_| CliError::Config(format!("cannot express {x} as a rational")))?;
    Ok(Rational64::new(numer, denom))
}

impl PointSpec {
    pub fn build(&self) -> Result<PointConfig, CliError> {
        let shift = self.build_shift()?;
        let window = self.window.build()?;
        let mut cfg = PointConfig::new(window, shift, self.c, self.radius)?;
        cfg.exclude_origin = self.exclude_origin;
        if let Some(basis) = &self.basis {
            cfg = cfg.with_basis(basis.clone())?;
        }
        Ok(cfg)
    }

    pub fn build_shift(&self) -> Result<Shift, CliError> {
        match self.shift_kind.as_str() {
            "rational" => {
                let components = self
                    .shift
                    .iter()
                    .map(|e| e.as_rational())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Shift::Rational(components))
            }
            "irrational" => {
                let components = self
                    .shift
                    .iter()
                    .map(|e| {
                        Ok(IrrationalCoord {
                            label: e.label(),
                            value: e.as_f64()?,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(Shift::Irrational(components))
            }
            other => Err(CliError::Config(format!(
                "shift_kind must be 'rational' or 'irrational', got '{other}'"
            ))),
        }
    }

    /// The fpl start point q (defaults to a generic irrational point).
    pub fn start_point(&self) -> Result<Vec<f64>, CliError> {
        match &self.q {
            Some(entries) => entries.iter().map(|e| e.as_f64()).collect(),
            None => Ok((0..self.dimension)
                .map(|i| ((i + 2) as f64).sqrt() / 10.0)
                .collect()),
        }
    }
}

pub fn load_window_spec(path: &Path) -> Result<WindowSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_point_spec(path: &Path) -> Result<PointSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// "a/b,c/d" or "irrational" for the limit-mc shift flag.
pub fn parse_shift_mode(s: &str) -> Result<latstat_core::homogeneous::ShiftMode, CliError> {
    use latstat_core::homogeneous::ShiftMode;
    if s.trim() == "irrational" {
        return Ok(ShiftMode::Irrational);
    }
    let components = s
        .split(',')
        .map(parse_rational_expr)
        .collect::<Result<Vec<_>, _>>()?;
    if components.len() != 2 {
        return Err(CliError::Config(format!(
            "rational shift needs two components, got '{s}'"
        )));
    }
    Ok(ShiftMode::Rational(components))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_expressions() {
        assert_eq!(parse_real_expr("1/2").unwrap().1, 0.5);
        assert_eq!(parse_real_expr("sqrt(2)").unwrap().1, 2f64.sqrt());
        assert_eq!(parse_real_expr("sqrt(3)/10").unwrap().1, 3f64.sqrt() / 10.0);
        assert_eq!(parse_real_expr("-sqrt(2)").unwrap().1, -(2f64.sqrt()));
        assert_eq!(parse_real_expr("0.25").unwrap().1, 0.25);
        assert!(parse_real_expr("sqrt(2").is_err());

        assert_eq!(parse_rational_expr("1/2").unwrap(), Rational64::new(1, 2));
        assert_eq!(parse_rational_expr("-3/4").unwrap(), Rational64::new(-3, 4));
        assert_eq!(parse_rational_expr("7").unwrap(), Rational64::new(7, 1));
        assert_eq!(parse_rational_expr("0.25").unwrap(), Rational64::new(1, 4));
    }

    #[test]
    fn window_spec_round_trips() {
        let spec: WindowSpec =
            toml::from_str("dimension = 2\nfamily = \"primitive\"\nprimes = [2, 3, 5]\n").unwrap();
        let w = spec.build().unwrap();
        assert_eq!(w.level(), 30);

        let spec: WindowSpec = toml::from_str(
            "dimension = 2\nfamily = \"kfree\"\nexact_tail = true\nexponents = [2, 2]\n",
        )
        .unwrap();
        assert!(spec.build().unwrap().has_exact_tail());

        let spec: WindowSpec = toml::from_str(
            "dimension = 2\nfamily = \"custom\"\n\n[[condition]]\nprime = 3\nmode = \"residues\"\nresidues = [[0, 1], [1, 2]]\n",
        )
        .unwrap();
        let w = spec.build().unwrap();
        assert_eq!(w.level(), 3);
        assert!(w.contains(&[3, 4]));
        assert!(!w.contains(&[1, 1]));
    }

    #[test]
    fn custom_exact_tail_has_no_closed_form() {
        let spec: WindowSpec =
            toml::from_str("dimension = 2\nfamily = \"custom\"\nexact_tail = true\n").unwrap();
        let err = spec.build().unwrap_err();
        assert!(err.to_string().contains("no closed form"), "{err}");
    }

    #[test]
    fn point_spec_builds() {
        let spec: PointSpec = toml::from_str(concat!(
            "dimension = 2\nT = 10.0\nc = 0.0\n",
            "shift = [\"1/2\", \"1/2\"]\nshift_kind = \"rational\"\n",
            "[window]\ndimension = 2\nfamily = \"primitive\"\nexact_tail = true\n",
        ))
        .unwrap();
        let cfg = spec.build().unwrap();
        assert_eq!(cfg.dimension, 2);
        assert!(cfg.shift.is_rational());
        assert_eq!(spec.start_point().unwrap().len(), 2);
    }

    #[test]
    fn shift_mode_parsing() {
        use latstat_core::homogeneous::ShiftMode;
        assert!(matches!(
            parse_shift_mode("irrational").unwrap(),
            ShiftMode::Irrational
        ));
        match parse_shift_mode("1/2,1/2").unwrap() {
            ShiftMode::Rational(v) => assert_eq!(v, vec![Rational64::new(1, 2); 2]),
            other => panic!("{other:?}"),
        }
        assert!(parse_shift_mode("1/2").is_err());
    }
}
