//! Canonical text encodings.
//!
//! Documents are compact JSON with lexicographically sorted keys and decimal
//! integers; probabilities are `"num/den"` strings. The field modulus appears
//! once per document, never per element. Equal values always encode to equal
//! bytes.
//!
//! Databases use a line format:
//!
//! ```text
//! pir-db v1 p=<prime> k=<K>
//! <value 1>
//! ...
//! <value K>
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::mds::{CodeMatrix, CodeMatrixDoc};
use crate::rate::{ProblemParams, RatePlan};
use crate::scheme::{Answer, Database, Query, QueryBlock, Round};

/// Serializes `value` with sorted keys and no insignificant whitespace.
pub fn to_canonical<T: Serialize>(value: &T) -> String {
    // serde_json's Map is a BTreeMap, so going through Value sorts every key.
    let v = serde_json::to_value(value).expect("document types serialize infallibly");
    serde_json::to_string(&v).expect("Value serializes infallibly")
}

fn malformed(e: impl std::fmt::Display) -> Error {
    Error::Malformed(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBlockDoc {
    pub support: Vec<usize>,
    pub r: usize,
    pub n: usize,
    pub entries: Vec<u64>,
}

/// The query as it travels to the server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDoc {
    pub p: u64,
    pub blocks: Vec<QueryBlockDoc>,
}

impl QueryDoc {
    pub fn from_query(q: &Query) -> Self {
        Self {
            p: q.field().modulus(),
            blocks: q
                .blocks()
                .iter()
                .map(|b| QueryBlockDoc {
                    support: b.support.clone(),
                    r: b.matrix.rows(),
                    n: b.matrix.cols(),
                    entries: b.matrix.entries().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_query(&self) -> Result<Query> {
        let field = PrimeField::new(self.p)?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let matrix = CodeMatrix::from_doc(&CodeMatrixDoc {
                    r: b.r,
                    n: b.n,
                    p: self.p,
                    entries: b.entries.clone(),
                })?;
                if b.support.contains(&0) {
                    return Err(Error::Malformed("support indices start at 1".into()));
                }
                Ok(QueryBlock {
                    support: b.support.clone(),
                    matrix,
                })
            })
            .collect::<Result<_>>()?;
        Query::new(field, blocks)
    }
}

pub fn encode_query(q: &Query) -> Vec<u8> {
    to_canonical(&QueryDoc::from_query(q)).into_bytes()
}

pub fn decode_query(bytes: &[u8]) -> Result<Query> {
    let doc: QueryDoc = serde_json::from_slice(bytes).map_err(malformed)?;
    doc.to_query()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerDoc {
    pub p: u64,
    pub blocks: Vec<Vec<u64>>,
}

impl AnswerDoc {
    pub fn from_answer(a: &Answer, field: PrimeField) -> Self {
        Self {
            p: field.modulus(),
            blocks: a
                .blocks()
                .iter()
                .map(|b| b.iter().map(FieldElement::value).collect())
                .collect(),
        }
    }

    pub fn to_answer(&self) -> Result<Answer> {
        let field = PrimeField::new(self.p)?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&v| field.canonical(v)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        Ok(Answer::new(blocks))
    }
}

pub fn encode_answer(a: &Answer, field: PrimeField) -> Vec<u8> {
    to_canonical(&AnswerDoc::from_answer(a, field)).into_bytes()
}

pub fn decode_answer(bytes: &[u8]) -> Result<(Answer, PrimeField)> {
    let doc: AnswerDoc = serde_json::from_slice(bytes).map_err(malformed)?;
    Ok((doc.to_answer()?, PrimeField::new(doc.p)?))
}

/// `RatePlan` plus the sufficient-condition flag for the `K - M` download.
#[derive(Debug, Clone, Serialize)]
pub struct RateDoc<'a> {
    #[serde(flatten)]
    pub plan: &'a RatePlan,
    pub trivial_optimal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub params: ProblemParams,
    pub seed: u64,
    pub plan: RatePlan,
    pub layout: Vec<Vec<usize>>,
    pub query: QueryDoc,
    pub answer: AnswerDoc,
    /// Demand index (decimal string key) to decoded value.
    pub decoded: BTreeMap<String, u64>,
    pub transmissions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_us: Option<u128>,
}

impl Transcript {
    pub fn from_round(params: ProblemParams, seed: u64, round: &Round) -> Self {
        let field = round.query.field();
        Self {
            params,
            seed,
            plan: round.layout.plan().clone(),
            layout: round.layout.subspaces().to_vec(),
            query: QueryDoc::from_query(&round.query),
            answer: AnswerDoc::from_answer(&round.answer, field),
            decoded: round
                .decoded
                .iter()
                .map(|(i, x)| (i.to_string(), x.value()))
                .collect(),
            transmissions: round.query.transmissions(),
            timing_us: None,
        }
    }
}

pub fn format_database(db: &Database) -> String {
    let mut out = format!("pir-db v1 p={} k={}\n", db.field().modulus(), db.len());
    for x in db.values() {
        out.push_str(&x.value().to_string());
        out.push('\n');
    }
    out
}

pub fn parse_database(text: &str) -> Result<Database> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Malformed("empty database file".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("pir-db") || fields.next() != Some("v1") {
        return Err(Error::Malformed(format!("bad database header {header:?}")));
    }
    let mut p = None;
    let mut k = None;
    for kv in fields {
        match kv.split_once('=') {
            Some(("p", v)) => p = Some(v.parse::<u64>().map_err(malformed)?),
            Some(("k", v)) => k = Some(v.parse::<usize>().map_err(malformed)?),
            _ => return Err(Error::Malformed(format!("unknown header field {kv:?}"))),
        }
    }
    let (Some(p), Some(k)) = (p, k) else {
        return Err(Error::Malformed("header needs p= and k=".into()));
    };
    let field = PrimeField::new(p)?;
    let values: Vec<FieldElement> = lines
        .map(|l| {
            let v = l.parse::<u64>().map_err(malformed)?;
            field.canonical(v)
        })
        .collect::<Result<_>>()?;
    if values.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: values.len(),
        });
    }
    Database::new(field, values)
}
