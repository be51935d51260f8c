//! Canonical JSON documents for instances, solutions, generated decisions,
//! and trial reports.
//!
//! Rationals travel as strings (`"a"` or `"a/b"`, lowest terms) — never as
//! floating literals, which would silently destroy the exactness the
//! generators depend on. Serialization is canonical: fixed field order,
//! compact separators, lowest-terms rationals, one trailing newline. Parsing
//! then serializing a canonical document is the identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hardness::{
    CnfVariant, DecisionBound, GeneratedDecision, GenerationParams, ThresholdCertificate,
};
use crate::model::{
    BinaryInstance, Instance, ModelError, Selection, SubsetInstance, TailDistribution, ValueGrid,
};
use crate::rational::{format_rational, parse_rational, Rational};

pub const INSTANCE_FORMAT: &str = "mesp-instance-v1";
pub const SOLUTION_FORMAT: &str = "mesp-solution-v1";
pub const GENERATED_FORMAT: &str = "mesp-generated-v1";
pub const TRIAL_FORMAT: &str = "mesp-trial-v1";
pub const ORACLE_FORMAT: &str = "mesp-oracle-v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerialError {
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },
    #[error("invariant violation at {locus}: {source}")]
    Invariant {
        locus: String,
        #[source]
        source: ModelError,
    },
}

impl SerialError {
    pub fn code(&self) -> &'static str {
        match self {
            SerialError::Parse { .. } => "PARSE_ERROR",
            SerialError::Invariant { .. } => "INVARIANT_VIOLATION",
        }
    }

    fn parse(locus: impl Into<String>, message: impl ToString) -> Self {
        SerialError::Parse {
            locus: locus.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub format_tag: String,
    pub kind: String,
    pub values: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[Vec<String>; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<Vec<String>>>,
}

fn parse_rational_at(text: &str, locus: &str) -> Result<Rational, SerialError> {
    parse_rational(text).map_err(|e| SerialError::parse(locus, e))
}

fn tails_at(strings: &[String], d: usize, locus: &str) -> Result<TailDistribution, SerialError> {
    let tails = strings
        .iter()
        .enumerate()
        .map(|(j, s)| parse_rational_at(s, &format!("{locus}[{j}]")))
        .collect::<Result<Vec<_>, _>>()?;
    TailDistribution::new(tails, d).map_err(|source| SerialError::Invariant {
        locus: locus.to_owned(),
        source,
    })
}

impl InstanceDocument {
    pub fn from_instance(instance: &Instance) -> Self {
        let values = instance
            .grid()
            .values()
            .iter()
            .map(format_rational)
            .collect();
        match instance {
            Instance::Binary(inst) => InstanceDocument {
                format_tag: INSTANCE_FORMAT.to_owned(),
                kind: "binary".to_owned(),
                values,
                k: None,
                pairs: Some(
                    inst.pairs()
                        .iter()
                        .map(|[a, b]| {
                            [
                                a.tails().iter().map(format_rational).collect(),
                                b.tails().iter().map(format_rational).collect(),
                            ]
                        })
                        .collect(),
                ),
                items: None,
            },
            Instance::Subset(inst) => InstanceDocument {
                format_tag: INSTANCE_FORMAT.to_owned(),
                kind: "subset".to_owned(),
                values,
                k: Some(inst.k()),
                pairs: None,
                items: Some(
                    inst.items()
                        .iter()
                        .map(|item| item.tails().iter().map(format_rational).collect())
                        .collect(),
                ),
            },
        }
    }

    pub fn into_instance(self) -> Result<Instance, SerialError> {
        if self.format_tag != INSTANCE_FORMAT {
            return Err(SerialError::parse(
                "format_tag",
                format!("expected {INSTANCE_FORMAT:?}, got {:?}", self.format_tag),
            ));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, s)| parse_rational_at(s, &format!("values[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = ValueGrid::new(values).map_err(|source| SerialError::Invariant {
            locus: "values".to_owned(),
            source,
        })?;
        let d = grid.d();
        match self.kind.as_str() {
            "binary" => {
                if self.k.is_some() || self.items.is_some() {
                    return Err(SerialError::parse(
                        "kind",
                        "binary documents carry `pairs` only",
                    ));
                }
                let pairs_doc = self
                    .pairs
                    .ok_or_else(|| SerialError::parse("pairs", "missing field"))?;
                let pairs = pairs_doc
                    .iter()
                    .enumerate()
                    .map(|(i, [a, b])| {
                        Ok([
                            tails_at(a, d, &format!("pairs[{i}][0]"))?,
                            tails_at(b, d, &format!("pairs[{i}][1]"))?,
                        ])
                    })
                    .collect::<Result<Vec<_>, SerialError>>()?;
                let instance =
                    BinaryInstance::new(grid, pairs).map_err(|source| SerialError::Invariant {
                        locus: "pairs".to_owned(),
                        source,
                    })?;
                Ok(Instance::Binary(instance))
            }
            "subset" => {
                if self.pairs.is_some() {
                    return Err(SerialError::parse(
                        "kind",
                        "subset documents carry `items` only",
                    ));
                }
                let k = self
                    .k
                    .ok_or_else(|| SerialError::parse("k", "missing field"))?;
                let items_doc = self
                    .items
                    .ok_or_else(|| SerialError::parse("items", "missing field"))?;
                let items = items_doc
                    .iter()
                    .enumerate()
                    .map(|(i, tails)| tails_at(tails, d, &format!("items[{i}]")))
                    .collect::<Result<Vec<_>, SerialError>>()?;
                let instance =
                    SubsetInstance::new(grid, items, k).map_err(|source| SerialError::Invariant {
                        locus: "items".to_owned(),
                        source,
                    })?;
                Ok(Instance::Subset(instance))
            }
            other => Err(SerialError::parse(
                "kind",
                format!("expected \"binary\" or \"subset\", got {other:?}"),
            )),
        }
    }
}

/// Parses a canonical instance document.
pub fn parse_instance(text: &str) -> Result<Instance, SerialError> {
    let doc: InstanceDocument =
        serde_json::from_str(text).map_err(|e| SerialError::parse("document", e))?;
    doc.into_instance()
}

/// Canonical serialization: compact JSON in fixed field order plus one
/// trailing newline. Byte-stable across runs and platforms.
pub fn serialize_instance(instance: &Instance) -> String {
    let doc = InstanceDocument::from_instance(instance);
    let mut text = serde_json::to_string(&doc).expect("instance documents always serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub format_tag: String,
    pub algorithm: String,
    pub objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chosen: Option<Vec<usize>>,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optima_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SolutionDocument {
    pub fn new(algorithm: &str, objective: &str, selection: &Selection, value: &Rational) -> Self {
        let (bits, chosen) = match selection {
            Selection::Bits(bits) => (Some(bits.iter().map(|&b| u8::from(b)).collect()), None),
            Selection::Choose(indices) => (None, Some(indices.clone())),
        };
        SolutionDocument {
            format_tag: SOLUTION_FORMAT.to_owned(),
            algorithm: algorithm.to_owned(),
            objective: objective.to_owned(),
            bits,
            chosen,
            value: format_rational(value),
            optima_count: None,
            epsilon: None,
            ratio_bound: None,
            note: None,
        }
    }

    pub fn selection(&self) -> Result<Selection, SerialError> {
        match (&self.bits, &self.chosen) {
            (Some(bits), None) => {
                for (i, b) in bits.iter().enumerate() {
                    if *b > 1 {
                        return Err(SerialError::parse(
                            format!("bits[{i}]"),
                            "selection bits are 0 or 1",
                        ));
                    }
                }
                Ok(Selection::Bits(bits.iter().map(|&b| b == 1).collect()))
            }
            (None, Some(chosen)) => Ok(Selection::from_indices(chosen.clone())),
            _ => Err(SerialError::parse(
                "selection",
                "exactly one of `bits` or `chosen` must be present",
            )),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string(self).expect("solution documents always serialize");
        text.push('\n');
        text
    }
}

pub fn parse_solution(text: &str) -> Result<SolutionDocument, SerialError> {
    let doc: SolutionDocument =
        serde_json::from_str(text).map_err(|e| SerialError::parse("document", e))?;
    if doc.format_tag != SOLUTION_FORMAT {
        return Err(SerialError::parse(
            "format_tag",
            format!("expected {SOLUTION_FORMAT:?}, got {:?}", doc.format_tag),
        ));
    }
    Ok(doc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub yes_upper: String,
    pub no_lower: String,
    pub certification_bits: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedDocument {
    pub format_tag: String,
    pub reduction: String,
    pub instance: InstanceDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_upper: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_lower: Option<String>,
    pub params: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDocument>,
}

impl GeneratedDocument {
    pub fn from_decision(decision: &GeneratedDecision) -> Self {
        let (reduction, params) = match &decision.params {
            GenerationParams::SubsetSum {
                z,
                target,
                m,
                gamma,
                precision,
            } => {
                let mut map = BTreeMap::new();
                map.insert(
                    "z".to_owned(),
                    z.iter()
                        .map(|zi| zi.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                );
                map.insert("target".to_owned(), target.to_string());
                map.insert("m".to_owned(), m.to_string());
                map.insert("gamma".to_owned(), format_rational(gamma));
                map.insert("precision".to_owned(), precision.to_string());
                ("subset-sum".to_owned(), map)
            }
            GenerationParams::Cnf {
                variant,
                p,
                v,
                r,
                num_vars,
                num_clauses,
            } => {
                let mut map = BTreeMap::new();
                map.insert("p".to_owned(), format_rational(p));
                map.insert("v".to_owned(), format_rational(v));
                map.insert("ratio".to_owned(), format_rational(r));
                map.insert("num_vars".to_owned(), num_vars.to_string());
                map.insert("num_clauses".to_owned(), num_clauses.to_string());
                let name = match variant {
                    CnfVariant::Binary => "cnf-binary",
                    CnfVariant::Subset => "cnf-subset",
                };
                (name.to_owned(), map)
            }
        };
        let (theta, gap_upper, gap_lower) = match &decision.bound {
            DecisionBound::Threshold(theta) => (Some(format_rational(theta)), None, None),
            DecisionBound::Gap { upper, lower } => (
                None,
                Some(format_rational(upper)),
                Some(format_rational(lower)),
            ),
        };
        GeneratedDocument {
            format_tag: GENERATED_FORMAT.to_owned(),
            reduction,
            instance: InstanceDocument::from_instance(&decision.instance),
            theta,
            gap_upper,
            gap_lower,
            params,
            certificate: decision.certificate.as_ref().map(|c| CertificateDocument {
                yes_upper: format_rational(&c.yes_upper),
                no_lower: format_rational(&c.no_lower),
                certification_bits: c.certification_bits,
            }),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string(self).expect("generated documents always serialize");
        text.push('\n');
        text
    }

    /// Rebuilds the typed decision, re-validating every embedded value.
    pub fn into_decision(self) -> Result<GeneratedDecision, SerialError> {
        let instance = self.instance.clone().into_instance()?;
        let bound = match (&self.theta, &self.gap_upper, &self.gap_lower) {
            (Some(theta), None, None) => {
                DecisionBound::Threshold(parse_rational_at(theta, "theta")?)
            }
            (None, Some(upper), Some(lower)) => DecisionBound::Gap {
                upper: parse_rational_at(upper, "gap_upper")?,
                lower: parse_rational_at(lower, "gap_lower")?,
            },
            _ => {
                return Err(SerialError::parse(
                    "theta",
                    "expected either theta or a gap pair",
                ))
            }
        };
        let get = |key: &str| -> Result<&String, SerialError> {
            self.params
                .get(key)
                .ok_or_else(|| SerialError::parse(format!("params.{key}"), "missing"))
        };
        let params = match self.reduction.as_str() {
            "subset-sum" => GenerationParams::SubsetSum {
                z: get("z")?
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u64>()
                            .map_err(|e| SerialError::parse("params.z", e))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                target: get("target")?
                    .parse()
                    .map_err(|e| SerialError::parse("params.target", e))?,
                m: get("m")?
                    .parse()
                    .map_err(|e| SerialError::parse("params.m", e))?,
                gamma: parse_rational_at(get("gamma")?, "params.gamma")?,
                precision: get("precision")?
                    .parse()
                    .map_err(|e| SerialError::parse("params.precision", e))?,
            },
            "cnf-binary" | "cnf-subset" => GenerationParams::Cnf {
                variant: if self.reduction == "cnf-binary" {
                    CnfVariant::Binary
                } else {
                    CnfVariant::Subset
                },
                p: parse_rational_at(get("p")?, "params.p")?,
                v: parse_rational_at(get("v")?, "params.v")?,
                r: parse_rational_at(get("ratio")?, "params.ratio")?,
                num_vars: get("num_vars")?
                    .parse()
                    .map_err(|e| SerialError::parse("params.num_vars", e))?,
                num_clauses: get("num_clauses")?
                    .parse()
                    .map_err(|e| SerialError::parse("params.num_clauses", e))?,
            },
            other => {
                return Err(SerialError::parse(
                    "reduction",
                    format!("unknown reduction {other:?}"),
                ))
            }
        };
        let certificate = self
            .certificate
            .map(|c| -> Result<ThresholdCertificate, SerialError> {
                Ok(ThresholdCertificate {
                    yes_upper: parse_rational_at(&c.yes_upper, "certificate.yes_upper")?,
                    no_lower: parse_rational_at(&c.no_lower, "certificate.no_lower")?,
                    certification_bits: c.certification_bits,
                })
            })
            .transpose()?;
        Ok(GeneratedDecision {
            instance,
            bound,
            params,
            certificate,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDocument {
    pub format_tag: String,
    pub aggregate: String,
    pub value: String,
}

impl OracleDocument {
    pub fn new(aggregate: &str, value: &Rational) -> Self {
        OracleDocument {
            format_tag: ORACLE_FORMAT.to_owned(),
            aggregate: aggregate.to_owned(),
            value: format_rational(value),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string(self).expect("oracle documents always serialize");
        text.push('\n');
        text
    }
}

/// Accepts either a bare instance document or a generated document with an
/// embedded instance; used by every consumer subcommand.
pub fn parse_any_instance(text: &str) -> Result<Instance, SerialError> {
    #[derive(Deserialize)]
    struct Sniff {
        format_tag: String,
    }
    let sniff: Sniff =
        serde_json::from_str(text).map_err(|e| SerialError::parse("document", e))?;
    match sniff.format_tag.as_str() {
        t if t == INSTANCE_FORMAT => parse_instance(text),
        t if t == GENERATED_FORMAT => {
            let doc: GeneratedDocument =
                serde_json::from_str(text).map_err(|e| SerialError::parse("document", e))?;
            doc.instance.into_instance()
        }
        other => Err(SerialError::parse(
            "format_tag",
            format!("unrecognized format {other:?}"),
        )),
    }
}
