//! Ring descriptors, monomials, and graded monomial orders.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::scalar::FieldKind;

/// A total order on monomials refining total degree (except plain lex,
/// which is kept for completeness of the text format).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MonomialOrder {
    Grevlex,
    Lex,
    GradedLex,
}

impl MonomialOrder {
    pub fn name(&self) -> &'static str {
        match self {
            MonomialOrder::Grevlex => "grevlex",
            MonomialOrder::Lex => "lex",
            MonomialOrder::GradedLex => "graded_lex",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "grevlex" => Some(MonomialOrder::Grevlex),
            "lex" => Some(MonomialOrder::Lex),
            "graded_lex" => Some(MonomialOrder::GradedLex),
            _ => None,
        }
    }
}

/// Descriptor of a standard-graded polynomial ring.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyRing {
    pub vars: Vec<String>,
    pub field: FieldKind,
    pub order: MonomialOrder,
}

impl PolyRing {
    pub fn new(vars: Vec<String>, field: FieldKind, order: MonomialOrder) -> Result<Arc<Self>> {
        field.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(EngineError::Structural(format!("bad variable name {v:?}")));
            }
            if !seen.insert(v.clone()) {
                return Err(EngineError::Structural(format!("duplicate variable {v}")));
            }
        }
        Ok(Arc::new(PolyRing { vars, field, order }))
    }

    pub fn rationals(vars: &[&str]) -> Arc<Self> {
        PolyRing::new(
            vars.iter().map(|s| s.to_string()).collect(),
            FieldKind::Rationals,
            MonomialOrder::Grevlex,
        )
        .expect("valid ring")
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

impl fmt::Display for PolyRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            FieldKind::Rationals => "Q".to_string(),
            FieldKind::Prime(p) => format!("F{p}"),
        };
        write!(f, "{field}[{}] {}", self.vars.join(","), self.order.name())
    }
}

/// Exponent vector; length always matches the ring's variable count.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Monomial {
    pub exps: Vec<u16>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn degree(&self) -> i64 {
        self.exps.iter().map(|&e| e as i64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// other / self, assuming divisibility.
    pub fn quotient_into(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: other
                .exps
                .iter()
                .zip(&self.exps)
                .map(|(b, a)| b - a)
                .collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }
}

/// Compare two monomials of the same length under the given order.
pub fn compare_monomials(a: &Monomial, b: &Monomial, order: MonomialOrder) -> Result<Ordering> {
    if a.exps.len() != b.exps.len() {
        return Err(EngineError::Structural(format!(
            "monomial length mismatch: {} vs {}",
            a.exps.len(),
            b.exps.len()
        )));
    }
    Ok(cmp_monomials_unchecked(a, b, order))
}

pub(crate) fn cmp_monomials_unchecked(a: &Monomial, b: &Monomial, order: MonomialOrder) -> Ordering {
    match order {
        MonomialOrder::Lex => a.exps.cmp(&b.exps),
        MonomialOrder::GradedLex => a
            .degree()
            .cmp(&b.degree())
            .then_with(|| a.exps.cmp(&b.exps)),
        MonomialOrder::Grevlex => a.degree().cmp(&b.degree()).then_with(|| {
            // degree tie: the monomial whose rightmost differing exponent
            // is smaller wins
            for i in (0..a.exps.len()).rev() {
                match a.exps[i].cmp(&b.exps[i]) {
                    Ordering::Equal => continue,
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                }
            }
            Ordering::Equal
        }),
    }
}

pub fn format_monomial(m: &Monomial, ring: &PolyRing) -> String {
    if m.is_one() {
        return "1".to_string();
    }
    let mut parts = Vec::new();
    for (i, &e) in m.exps.iter().enumerate() {
        if e == 1 {
            parts.push(ring.vars[i].clone());
        } else if e > 1 {
            parts.push(format!("{}^{}", ring.vars[i], e));
        }
    }
    parts.join("*")
}
