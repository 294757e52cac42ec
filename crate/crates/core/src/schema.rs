//! JSON documents for frequency systems, tori, verdicts and
//! classifications.
//!
//! Exact rationals travel as `"num/den"` strings. Reports are built as
//! `serde_json::Value` trees, whose maps are key-sorted, so equal inputs
//! give equal bytes.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classify::{Certificate, PeriodTable, TrajectoryClass};
use crate::ergodic::{CharacterIndex, ErgodicityVerdict};
use crate::error::{Error, Result};
use crate::frequency::{family_generate, ArithmeticRule, BasisSymbol, Family, FrequencySystem, FrequencyVector, Period, UNIT};
use crate::rational::{self, format_rational, parse_rational};
use crate::recurrence::ReturnRecord;
use crate::torus::{TailRule, TorusSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDoc {
    pub id: String,
    /// Decimal literal; may be omitted for the built-in `sqrt<n>` and `phi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default = "yes")]
    pub independent: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultipliersDoc {
    /// `"k"`: `n_k = k`.
    Rule(String),
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithmeticDoc {
    pub lambda0: String,
    pub n: MultipliersDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyDoc {
    Name(String),
    Arithmetic { arithmetic: ArithmeticDoc },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis: Vec<BasisDoc>,
    /// Each frequency as `[symbol, "num/den"]` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefix: Vec<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDoc>,
    /// Number of terms to generate for a generative family without a prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

fn field_err(field: &str, e: Error) -> Error {
    Error::Parse(format!("{field}: {e}"))
}

impl FamilyDoc {
    pub fn to_family(&self) -> Result<Family> {
        match self {
            FamilyDoc::Name(n) => match n.as_str() {
                "factorial" => Ok(Family::Factorial),
                "prime_ratio" => Ok(Family::PrimeRatio),
                "explicit" => Ok(Family::Explicit),
                other => Err(Error::Parse(format!(
                    "family: unknown family {other:?} (expected factorial, prime_ratio, explicit or {{\"arithmetic\": …}})"
                ))),
            },
            FamilyDoc::Arithmetic { arithmetic } => {
                let lambda0 = parse_rational(&arithmetic.lambda0).map_err(|e| field_err("family.arithmetic.lambda0", e))?;
                let rule = match &arithmetic.n {
                    MultipliersDoc::Rule(r) if r == "k" => ArithmeticRule::Index,
                    MultipliersDoc::Rule(r) => {
                        return Err(Error::Parse(format!("family.arithmetic.n: expected a list or \"k\", got {r:?}")))
                    }
                    MultipliersDoc::List(ns) => ArithmeticRule::List(ns.iter().map(|&n| BigInt::from(n)).collect()),
                };
                Ok(Family::Arithmetic { lambda0, rule })
            }
        }
    }

    pub fn from_family(f: &Family) -> Self {
        match f {
            Family::Arithmetic { lambda0, rule } => FamilyDoc::Arithmetic {
                arithmetic: ArithmeticDoc {
                    lambda0: format_rational(lambda0),
                    n: match rule {
                        ArithmeticRule::Index => MultipliersDoc::Rule("k".into()),
                        ArithmeticRule::List(ns) => {
                            MultipliersDoc::List(ns.iter().map(|n| n.try_into().unwrap_or(u64::MAX)).collect())
                        }
                    },
                },
            },
            other => FamilyDoc::Name(other.name().to_string()),
        }
    }
}

fn builtin_symbol(id: &str, independent: bool) -> Option<BasisSymbol> {
    let mut s = if id == "phi" {
        BasisSymbol::golden_ratio()
    } else {
        let n: u64 = id.strip_prefix("sqrt")?.parse().ok()?;
        let root = (n as f64).sqrt().round() as u64;
        if n < 2 || root * root == n {
            return None;
        }
        BasisSymbol::sqrt(n)
    };
    s.independence_declared = independent;
    Some(s)
}

impl SystemDoc {
    pub fn to_system(&self) -> Result<FrequencySystem> {
        let family = self.family.as_ref().map(FamilyDoc::to_family).transpose()?;
        if self.prefix.is_empty() {
            let Some(f) = &family else {
                return Err(Error::Parse("prefix: empty and no generative family given".into()));
            };
            let n = match (self.length, f) {
                (Some(n), _) => n,
                (None, Family::Arithmetic { rule: ArithmeticRule::List(ns), .. }) => ns.len(),
                _ => return Err(Error::Parse("length: required to generate a family without a prefix".into())),
            };
            return family_generate(f, n).map_err(|e| field_err("family", e));
        }
        let mut basis = Vec::new();
        for (i, b) in self.basis.iter().enumerate() {
            if b.id == UNIT {
                continue;
            }
            let sym = match &b.value {
                Some(v) => BasisSymbol::from_decimal(&b.id, v, b.independent),
                None => builtin_symbol(&b.id, b.independent)
                    .ok_or_else(|| Error::Parse(format!("no built-in value for symbol {:?}; give a decimal value", b.id))),
            };
            basis.push(sym.map_err(|e| field_err(&format!("basis[{i}]"), e))?);
        }
        let mut prefix = Vec::with_capacity(self.prefix.len());
        for (k, terms) in self.prefix.iter().enumerate() {
            let mut coords = Vec::with_capacity(terms.len());
            for (sym, c) in terms {
                coords.push((sym.clone(), parse_rational(c).map_err(|e| field_err(&format!("prefix[{k}]"), e))?));
            }
            prefix.push(FrequencyVector::from_coords(coords));
        }
        if let Some(n) = self.length {
            if n != prefix.len() {
                return Err(Error::Parse(format!("length: {n} disagrees with the {} prefix entries", prefix.len())));
            }
        }
        FrequencySystem::new(basis, prefix, family)
    }

    pub fn from_system(sys: &FrequencySystem) -> Self {
        let basis = sys
            .basis()
            .iter()
            .filter(|b| b.id != UNIT)
            .map(|b| BasisDoc {
                id: b.id.clone(),
                value: Some(rational::to_decimal_string(&b.value, 60)),
                independent: b.independence_declared,
            })
            .collect();
        let prefix = sys
            .prefix()
            .iter()
            .map(|v| v.coords().iter().map(|(s, c)| (s.clone(), format_rational(c))).collect())
            .collect();
        Self { basis, prefix, family: sys.family().map(FamilyDoc::from_family), length: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailDoc {
    Geometric { first: f64, ratio: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusDoc {
    #[serde(default)]
    pub radii_head: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailDoc>,
}

impl TorusDoc {
    pub fn to_torus(&self) -> Result<TorusSpec> {
        let tail = self.tail.as_ref().map(|t| match *t {
            TailDoc::Geometric { first, ratio } => TailRule::Geometric { first, ratio },
            TailDoc::Zero => TailRule::Zero,
        });
        TorusSpec::new(self.radii_head.clone(), tail).map_err(|e| field_err("torus", e))
    }

    pub fn from_torus(t: &TorusSpec) -> Self {
        let tail = t.tail().map(|r| match *r {
            TailRule::Geometric { first, ratio } => TailDoc::Geometric { first, ratio },
            TailRule::Zero => TailDoc::Zero,
        });
        Self { radii_head: t.radii_head().to_vec(), tail }
    }
}

pub fn character_json(n: &CharacterIndex) -> Value {
    json!(n.pairs())
}

pub fn parse_character(v: &Value) -> Result<CharacterIndex> {
    let pairs: Vec<(usize, i64)> = serde_json::from_value(v.clone())
        .map_err(|e| Error::Parse(format!("character: expected [[k, n_k], …]: {e}")))?;
    CharacterIndex::new(pairs)
}

fn int_list(v: &[BigInt]) -> Value {
    // integers beyond i64 are emitted as strings
    Value::Array(
        v.iter()
            .map(|x| i64::try_from(x).map(Value::from).unwrap_or_else(|_| Value::String(x.to_string())))
            .collect(),
    )
}

pub fn verdict_json(v: &ErgodicityVerdict, stats: Value) -> Value {
    json!({
        "status": v.status.as_str(),
        "witness": v.witness.as_deref().map(int_list),
        "prefix_len": v.prefix_len,
        "stats": stats,
    })
}

pub fn period_json(p: &Period) -> Value {
    match p.over_two_pi() {
        Some(r) => json!({ "over_two_pi": format_rational(&r) }),
        None => json!({ "over_two_pi": null, "lambda0": p.lambda0.to_string() }),
    }
}

pub fn period_table_json(table: &PeriodTable) -> Value {
    Value::Array(
        table
            .iter()
            .map(|(n, p)| json!({ "N": n, "period_over_2pi": p.as_ref().map(period_cell) }))
            .collect(),
    )
}

/// `T/2π` as `"num/den"`, or the inverse base frequency when irrational.
pub fn period_cell(p: &Period) -> String {
    p.display()
}

pub fn class_json(c: &TrajectoryClass) -> Value {
    let certificate = match &c.certificate {
        Certificate::Period(p) => json!({ "period": period_json(p) }),
        Certificate::Dense { subset, whole_prefix_independent } => json!({
            "relation_free_subset": subset,
            "whole_prefix_independent": whole_prefix_independent,
        }),
        Certificate::UnboundedPeriods(table) => json!({
            "all_projections_periodic": true,
            "period_table": period_table_json(table),
        }),
    };
    json!({
        "class": c.kind.roman(),
        "certainty": c.certainty.as_str(),
        "certificate": certificate,
        "prefix_len": c.prefix_len,
    })
}

pub fn return_record_json(r: &ReturnRecord) -> Value {
    let hits: Vec<Value> = r
        .hits
        .iter()
        .map(|h| {
            let turns = h.time.is_exact().then(|| format_rational(&h.time.turns));
            json!({ "t": h.t, "turns": turns, "dist_upper": h.dist_upper })
        })
        .collect();
    json!({
        "epsilon": r.epsilon,
        "floor": r.floor,
        "horizon": r.horizon,
        "hits": hits,
        "methods": r.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
        "summary": r.summary(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn system_round_trip() {
        let text = r#"{
            "basis": [{"id": "sqrt2"}],
            "prefix": [[["1", "1/1"]], [["sqrt2", "1/1"]], [["1", "1"], ["sqrt2", "1/1"]]]
        }"#;
        let doc: SystemDoc = serde_json::from_str(text).unwrap();
        let sys = doc.to_system().unwrap();
        assert_eq!(sys.len(), 3);
        let again = SystemDoc::from_system(&sys).to_system().unwrap();
        assert_eq!(again.prefix(), sys.prefix());
        assert_eq!(again.relation_lattice(3).unwrap(), sys.relation_lattice(3).unwrap());
    }

    #[test]
    fn generative_families() {
        let doc: SystemDoc = serde_json::from_str(r#"{"family": "prime_ratio", "length": 3}"#).unwrap();
        let sys = doc.to_system().unwrap();
        assert_eq!(sys.value(2), ratio(13, 11));
        let doc: SystemDoc =
            serde_json::from_str(r#"{"family": {"arithmetic": {"lambda0": "1/10", "n": [15, 14]}}}"#).unwrap();
        let sys = doc.to_system().unwrap();
        assert_eq!(sys.value(1), ratio(7, 5));
        let doc: SystemDoc =
            serde_json::from_str(r#"{"family": {"arithmetic": {"lambda0": "2", "n": "k"}}, "length": 4}"#).unwrap();
        assert_eq!(doc.to_system().unwrap().value(3), int(8));
        let doc: SystemDoc = serde_json::from_str(r#"{"family": "factorial"}"#).unwrap();
        assert!(doc.to_system().is_err());
        let doc: SystemDoc = serde_json::from_str(r#"{"family": "fibonacci", "length": 2}"#).unwrap();
        assert!(doc.to_system().unwrap_err().to_string().contains("family"));
    }

    #[test]
    fn torus_documents() {
        let t: TorusDoc = serde_json::from_str(r#"{"tail": {"kind": "geometric", "first": 0.5, "ratio": 0.5}}"#).unwrap();
        assert_eq!(t.to_torus().unwrap().radius(3), Some(0.125));
        let t: TorusDoc = serde_json::from_str(r#"{"radii_head": [1, 2], "tail": {"kind": "zero"}}"#).unwrap();
        assert_eq!(t.to_torus().unwrap().dimension(), Some(2));
        assert!(serde_json::from_str::<TorusDoc>(r#"{"tail": {"kind": "cubic"}}"#).is_err());
    }

    #[test]
    fn verdict_shape() {
        let sys = FrequencySystem::from_rationals(&[int(1), int(2)]).unwrap();
        let v = crate::ergodic::ergodicity_verdict(&sys, 2).unwrap();
        let j = verdict_json(&v, json!({}));
        assert_eq!(j["status"], "NotErgodic");
        assert_eq!(j["witness"], json!([2, -1]));
        let n = parse_character(&json!([[1, 2], [2, -1]])).unwrap();
        assert_eq!(character_json(&n), json!([[1, 2], [2, -1]]));
    }
}
