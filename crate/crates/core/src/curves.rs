//! Sampled bound curves and their CSV form.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a curve
//! is a deterministic byte stream for fixed arguments.

use serde::{Deserialize, Serialize};

use crate::bounds::{s_max_quantum, s_max_quantum_fac, BoundBranch, Mode};
use crate::error::{domain_err, validation_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Curve {
    /// `S_max(G, P)` for no-signalling models.
    Ns,
    /// `S_max(G, P)` with factorizable settings.
    Fac,
    /// Quantum optimum over biased-settings games at largest setting probability `P`.
    Quantum,
    /// Quantum optimum with factorizable settings.
    QuantumFac,
    /// Guessing-probability bound `G(S, P)` at fixed `S`.
    GOfP,
}

impl Curve {
    pub fn as_str(&self) -> &'static str {
        match self {
            Curve::Ns => "ns",
            Curve::Fac => "fac",
            Curve::Quantum => "quantum",
            Curve::QuantumFac => "quantum-fac",
            Curve::GOfP => "g-of-p",
        }
    }

    pub fn csv_header(&self) -> &'static str {
        match self {
            Curve::GOfP => "P,G,branch",
            _ => "P,value,branch",
        }
    }
}

impl std::str::FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ns" => Ok(Curve::Ns),
            "fac" => Ok(Curve::Fac),
            "quantum" => Ok(Curve::Quantum),
            "quantum-fac" => Ok(Curve::QuantumFac),
            "g-of-p" => Ok(Curve::GOfP),
            other => Err(validation_err!("unknown curve {other:?}")),
        }
    }
}

/// What to do when a sampled `P` falls outside the formula's domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OnDomainError {
    /// Fail the whole request.
    #[default]
    Reject,
    /// Emit a `NaN,domain-error` row and continue.
    Row,
}

impl std::str::FromStr for OnDomainError {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(OnDomainError::Reject),
            "row" => Ok(OnDomainError::Row),
            other => Err(validation_err!(
                "unknown domain-error policy {other:?}; expected reject or row"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSpec {
    pub curve: Curve,
    /// Guessing probability for the `ns` and `fac` curves.
    pub g: f64,
    /// Observed CHSH value for `g-of-p`.
    pub s: f64,
    /// Adversary class for `g-of-p`.
    pub mode: Mode,
    pub p_min: f64,
    pub p_max: f64,
    pub steps: usize,
}

/// One sampled point. `s` is set for the CHSH curves, `g` for `g-of-p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub branch: String,
}

impl CurveRecord {
    pub fn value(&self) -> f64 {
        self.s.or(self.g).unwrap_or(f64::NAN)
    }
}

/// `steps` evenly spaced values from `p_min` to `p_max`, both included.
pub fn p_grid(p_min: f64, p_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(validation_err!("steps must be at least 1"));
    }
    if !(p_min.is_finite() && p_max.is_finite()) || p_max < p_min {
        return Err(validation_err!("invalid range [{p_min}, {p_max}]"));
    }
    if steps == 1 {
        return Ok(vec![p_min]);
    }
    let span = p_max - p_min;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                p_max
            } else {
                p_min + span * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

fn point(spec: &CurveSpec, p: f64) -> Result<CurveRecord> {
    let s_point = |(v, b): (f64, BoundBranch)| CurveRecord {
        p,
        s: Some(v),
        g: None,
        branch: b.to_string(),
    };
    match spec.curve {
        Curve::Ns => Mode::Ns.s_max(spec.g, p).map(s_point),
        Curve::Fac => Mode::Fac.s_max(spec.g, p).map(s_point),
        Curve::Quantum => s_max_quantum(p).map(s_point),
        Curve::QuantumFac => s_max_quantum_fac(p).map(|v| s_point((v, BoundBranch::Quantum))),
        Curve::GOfP => {
            let g = spec.mode.g_bound(spec.s, p)?;
            let branch = if g < 1.0 {
                BoundBranch::ClosedForm
            } else {
                BoundBranch::Deterministic
            };
            Ok(CurveRecord {
                p,
                s: None,
                g: Some(g),
                branch: branch.to_string(),
            })
        }
    }
}

/// Samples the requested closed form over the `P` grid.
pub fn bound_curve(spec: &CurveSpec, on_error: OnDomainError) -> Result<Vec<CurveRecord>> {
    let grid = p_grid(spec.p_min, spec.p_max, spec.steps)?;
    grid.into_iter()
        .map(|p| match point(spec, p) {
            Ok(r) => Ok(r),
            Err(e @ Error::Domain(_)) => match on_error {
                OnDomainError::Reject => Err(e),
                OnDomainError::Row => Ok(CurveRecord {
                    p,
                    s: None,
                    g: None,
                    branch: "domain-error".into(),
                }),
            },
            Err(e) => Err(e),
        })
        .collect()
}

pub fn curve_csv(curve: Curve, records: &[CurveRecord]) -> String {
    let mut out = String::from(curve.csv_header());
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.p, r.value(), r.branch));
    }
    out
}

/// Parses `P,value,branch` or `P,G,branch` rows back into `(P, value, branch)`.
pub fn parse_curve_csv(text: &str) -> Result<Vec<(f64, f64, String)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("P,value,branch") | Some("P,G,branch") => {}
        other => return Err(Error::Serialization(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                return Err(Error::Serialization(format!("row {}: expected 3 fields", i + 1)));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Serialization(format!("row {}: {e}", i + 1)))
            };
            Ok((num(f[0])?, num(f[1])?, f[2].to_string()))
        })
        .collect()
}

/// Parses a decimal or a fraction `a/b`.
pub fn parse_number(text: &str) -> Result<f64> {
    let t = text.trim();
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (
                a.trim()
                    .parse()
                    .map_err(|_| domain_err!("cannot parse {t:?} as a number"))?,
                b.trim()
                    .parse()
                    .map_err(|_| domain_err!("cannot parse {t:?} as a number"))?,
            );
            if b == 0.0 {
                return Err(domain_err!("zero denominator in {t:?}"));
            }
            a / b
        }
        None => t.parse().map_err(|_| domain_err!("cannot parse {t:?} as a number"))?,
    };
    if !v.is_finite() {
        return Err(domain_err!("{t:?} is not finite"));
    }
    Ok(v)
}
