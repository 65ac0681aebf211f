//! Wire formats: poset files, distribution files, builtin poset specs,
//! and CSV report writing.

use crdist::dist::{CheckRow, Pdf};
use crdist::poset::PosetFile;
use crdist::scalar::{rational_from_decimal_str, Rational, Scalar};
use crdist::tree::Splitter;
use crdist::{Poset, Rational as Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_err<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

/// Distribution JSON: poset is a file path or an inline poset object;
/// probabilities indexed by element id, rationals written as "p/q".
#[derive(Debug, Serialize, Deserialize)]
pub struct DistFile {
    pub poset: serde_json::Value,
    pub probs: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub tail_mass: Option<serde_json::Value>,
    #[serde(default)]
    pub upper_tail: Option<BTreeMap<String, serde_json::Value>>,
}

fn value_to_rational(v: &serde_json::Value) -> Result<Rational, InputError> {
    match v {
        serde_json::Value::String(s) => rational_from_decimal_str(s)
            .ok_or_else(|| InputError(format!("bad rational literal {s:?}"))),
        serde_json::Value::Number(n) => {
            let s = n.to_string();
            rational_from_decimal_str(&s)
                .ok_or_else(|| InputError(format!("bad numeric literal {s:?}")))
        }
        other => input_err(format!("expected rational, got {other}")),
    }
}

impl DistFile {
    pub fn load(path: &Path) -> Result<DistFile, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| InputError(format!("malformed distribution JSON: {e}")))
    }

    pub fn poset(&self, base: &Path) -> Result<Poset, InputError> {
        let file: PosetFile = match &self.poset {
            serde_json::Value::String(p) => {
                let path = base.parent().unwrap_or(Path::new(".")).join(p);
                load_poset_file(&path)?
            }
            inline => serde_json::from_value(inline.clone())
                .map_err(|e| InputError(format!("malformed inline poset: {e}")))?,
        };
        file.to_poset()
            .map_err(|e| InputError(format!("invalid poset: {e}")))
    }

    fn table<T: Scalar>(
        n: usize,
        map: &BTreeMap<String, serde_json::Value>,
    ) -> Result<Vec<T>, InputError> {
        let mut out = vec![T::zero(); n];
        let mut seen = vec![false; n];
        for (k, v) in map {
            let id: usize = k
                .parse()
                .map_err(|_| InputError(format!("bad element id {k:?}")))?;
            if id >= n {
                return input_err(format!("element id {id} out of range (n = {n})"));
            }
            out[id] = T::from_rational(&value_to_rational(v)?);
            seen[id] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return input_err(format!("probs missing element {missing}"));
        }
        Ok(out)
    }

    pub fn pdf<T: Scalar>(&self, poset: &Poset) -> Result<Pdf<T>, InputError> {
        let n = poset.n_elements();
        let probs = Self::table::<T>(n, &self.probs)?;
        let tail = match &self.tail_mass {
            Some(v) => T::from_rational(&value_to_rational(v)?),
            None => T::zero(),
        };
        let upper_tail = match &self.upper_tail {
            Some(m) => Some(Self::table::<T>(n, m)?),
            None => None,
        };
        Pdf::with_tail(probs, tail, upper_tail)
            .map_err(|e| InputError(format!("invalid distribution: {e}")))
    }
}

pub fn load_poset_file(path: &Path) -> Result<PosetFile, InputError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("malformed poset JSON: {e}")))
}

/// Builtin spec strings or a path to a poset JSON file.
pub fn resolve_poset(spec: &str) -> Result<Poset, InputError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let arg = |i: usize| -> Result<usize, InputError> {
        parts
            .get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| InputError(format!("bad builtin spec {spec:?}")))
    };
    match parts[0] {
        "chain" => Ok(crdist::catalog::chain(arg(1)?)),
        "chain-trunc" => Ok(crdist::catalog::chain_truncated(arg(1)?)),
        "antichain" => Ok(crdist::catalog::antichain(arg(1)?)),
        "kary" => Ok(crdist::catalog::kary_tree(arg(1)? as u32, arg(2)? as u32)),
        "boolean" => Ok(crdist::catalog::boolean_lattice(arg(1)?)),
        "subsets" => Ok(crdist::catalog::subsets_poset(arg(1)?, arg(2)?).0),
        "parallel" => Ok(crdist::catalog::parallel_chains(arg(1)?)),
        "nonunique" => {
            let pair = crdist::catalog::nonunique_pair(
                Rat::from_ratio(1, 2),
                arg(1)? as u32,
            )
            .map_err(|e| InputError(format!("nonunique build failed: {e}")))?;
            Ok(pair.poset)
        }
        _ => {
            let path = Path::new(spec);
            if path.exists() {
                load_poset_file(path)?
                    .to_poset()
                    .map_err(|e| InputError(format!("invalid poset: {e}")))
            } else {
                input_err(format!("unknown poset spec {spec:?}"))
            }
        }
    }
}

pub fn parse_alpha(s: &str) -> Result<Rational, InputError> {
    rational_from_decimal_str(s)
        .filter(|r| *r > Rational::zero())
        .ok_or_else(|| InputError(format!("bad rational parameter {s:?}")))
}

fn parse_weight_list(s: &str) -> Result<Vec<(i64, i64)>, InputError> {
    s.split(',')
        .map(|w| {
            let r = rational_from_decimal_str(w)
                .ok_or_else(|| InputError(format!("bad weight {w:?}")))?;
            let n: i64 = r
                .numer()
                .try_into()
                .map_err(|_| InputError(format!("weight {w:?} too large")))?;
            let d: i64 = r
                .denom()
                .try_into()
                .map_err(|_| InputError(format!("weight {w:?} too large")))?;
            Ok((n, d))
        })
        .collect()
}

pub fn parse_splitter(s: &str) -> Result<Splitter, InputError> {
    match s.split_once(':') {
        None if s == "uniform" => Ok(Splitter::Uniform),
        Some(("weighted", rest)) => Ok(Splitter::Weighted {
            weights: parse_weight_list(rest)?,
        }),
        Some(("alternating", rest)) => Ok(Splitter::DepthAlternating {
            weights: parse_weight_list(rest)?,
        }),
        Some(("seeded", rest)) => Ok(Splitter::Seeded {
            seed: rest
                .parse()
                .map_err(|_| InputError(format!("bad seed in {s:?}")))?,
        }),
        _ => input_err(format!("unknown splitter {s:?}")),
    }
}

/// Grid spec a:b:step inclusive of both ends (up to rounding).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, InputError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return input_err(format!("grid spec must be a:b:step, got {s:?}"));
    }
    let a: f64 = parts[0].parse().map_err(|_| InputError("bad grid start".into()))?;
    let b: f64 = parts[1].parse().map_err(|_| InputError("bad grid end".into()))?;
    let step: f64 = parts[2].parse().map_err(|_| InputError("bad grid step".into()))?;
    if !(step > 0.0 && a > 0.0 && b >= a && b <= 1.0) {
        return input_err(format!("grid {s:?} out of range (0, 1]"));
    }
    let mut out = Vec::new();
    let mut x = a;
    while x <= b + step * 1e-9 {
        out.push(x.min(1.0));
        x += step;
    }
    Ok(out)
}

/// CSV schema shared by all verification reports:
/// check,n,lhs,rhs,abs_err
pub fn write_check_csv(path: &Path, rows: &[CheckRow]) -> Result<(), InputError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(["check", "n", "lhs", "rhs", "abs_err"])
        .and_then(|_| {
            for r in rows {
                w.write_record([
                    r.check.clone(),
                    r.n.map(|n| n.to_string()).unwrap_or_default(),
                    format!("{:.17e}", r.lhs),
                    format!("{:.17e}", r.rhs),
                    format!("{:.17e}", r.abs_err),
                ])?;
            }
            w.flush()?;
            Ok(())
        })
        .map_err(|e| InputError(format!("csv write failed: {e}")))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), InputError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| InputError(format!("serialize failed: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))
}
