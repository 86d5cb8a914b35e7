use std::fmt;
use std::str::FromStr;

use crate::besov::{
    lebesgue_norm, sobolev_norm, tensor_lebesgue_norm, tensor_sobolev_norm, vector_sobolev_norm,
    DyadicDecomposition,
};
use crate::spectral::ops;

use super::snapshot::Snapshot;
use super::ExperimentError;

/// A norm requested on the command line: `l1`, `l2`, `l4`, `linf`, `hs:<s>` or
/// `besov:<s>,<p>,<r>` with `p, r ∈ {1, 2, inf}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    Lebesgue(f64),
    Sobolev(f64),
    Besov { s: f64, p: f64, r: f64 },
}

fn parse_exponent(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "infinity" => Some(f64::INFINITY),
        t => t.parse::<f64>().ok(),
    }
}

fn show_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

impl FromStr for NormSpec {
    type Err = String;
    fn from_str(spec: &str) -> Result<Self, String> {
        let s = spec.trim().to_ascii_lowercase();
        let unknown = || format!("unknown norm '{spec}' (expected l1, l2, l4, linf, hs:<s> or besov:<s>,<p>,<r>)");
        match s.as_str() {
            "l1" => return Ok(NormSpec::Lebesgue(1.0)),
            "l2" => return Ok(NormSpec::Lebesgue(2.0)),
            "l4" => return Ok(NormSpec::Lebesgue(4.0)),
            "linf" => return Ok(NormSpec::Lebesgue(f64::INFINITY)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("hs:") {
            return rest.trim().parse::<f64>().map(NormSpec::Sobolev).map_err(|_| unknown());
        }
        if let Some(rest) = s.strip_prefix("besov:") {
            let parts: Vec<_> = rest.split(',').map(parse_exponent).collect();
            if let [Some(s), Some(p), Some(r)] = parts.as_slice() {
                return Ok(NormSpec::Besov { s: *s, p: *p, r: *r });
            }
        }
        Err(unknown())
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NormSpec::Lebesgue(p) => write!(f, "L{}", show_exponent(p)),
            NormSpec::Sobolev(s) => write!(f, "H^{s}"),
            NormSpec::Besov { s, p, r } => write!(f, "B^{s}_{{{},{}}}", show_exponent(p), show_exponent(r)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormRow {
    pub field: &'static str,
    pub norm: String,
    pub value: f64,
}

/// Norms of `ω`, `u` and `τ` (pointwise Frobenius) stored in a snapshot.
/// Velocity rows are given for `L²`, `L∞` and `Hˢ`.
pub fn snapshot_norms(snap: &Snapshot, specs: &[NormSpec]) -> Result<Vec<NormRow>, ExperimentError> {
    let dec = DyadicDecomposition::new(&snap.grid);
    let u = ops::biot_savart(&snap.omega)?;
    let mut rows = Vec::new();
    for spec in specs {
        let norm = spec.to_string();
        let mut push = |field, value| {
            rows.push(NormRow {
                field,
                norm: norm.clone(),
                value,
            })
        };
        match *spec {
            NormSpec::Lebesgue(p) => {
                push("omega", lebesgue_norm(&snap.omega, p)?);
                if p == 2.0 {
                    push("u", u.l2_norm());
                } else if p.is_infinite() {
                    push("u", u.max_abs());
                }
                push("tau", tensor_lebesgue_norm(&snap.tau, p)?);
            }
            NormSpec::Sobolev(s) => {
                push("omega", sobolev_norm(&snap.omega, s));
                push("u", vector_sobolev_norm(&u, s));
                push("tau", tensor_sobolev_norm(&snap.tau, s));
            }
            NormSpec::Besov { s, p, r } => {
                push("omega", dec.besov_norm(&snap.omega, s, p, r)?);
                push("tau", dec.tensor_besov_norm(&snap.tau, s, p, r)?);
            }
        }
    }
    Ok(rows)
}

pub fn format_table(rows: &[NormRow]) -> String {
    let mut s = format!("{:<8} {:<20} {:>24}\n", "field", "norm", "value");
    for r in rows {
        s += &format!("{:<8} {:<20} {:>24.16e}\n", r.field, r.norm, r.value);
    }
    s
}
