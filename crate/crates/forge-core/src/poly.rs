//! Sparse multivariate polynomials with exact coefficients.
//!
//! Terms are kept strictly descending under the ring's monomial order
//! with no zero coefficients, so equality is structural.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::ring::{cmp_monomials_unchecked, format_monomial, Monomial, PolyRing};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct Polynomial {
    pub ring: Arc<PolyRing>,
    /// (monomial, coefficient), descending by the ring order, no zeros.
    pub terms: Vec<(Monomial, Scalar)>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

/// Outcome of the homogeneity check.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Homogeneity {
    Degree(i64),
    /// The zero polynomial is homogeneous of every degree.
    ZeroAny,
    NotHomogeneous,
}

impl Polynomial {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        Polynomial { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Polynomial::constant(ring, Scalar::one(ring.field))
    }

    pub fn constant(ring: &Arc<PolyRing>, c: Scalar) -> Self {
        if c.is_zero() {
            return Polynomial::zero(ring);
        }
        Polynomial {
            ring: ring.clone(),
            terms: vec![(Monomial::one(ring.nvars()), c)],
        }
    }

    pub fn variable(ring: &Arc<PolyRing>, i: usize) -> Self {
        Polynomial {
            ring: ring.clone(),
            terms: vec![(Monomial::var(i, ring.nvars()), Scalar::one(ring.field))],
        }
    }

    pub fn term(ring: &Arc<PolyRing>, m: Monomial, c: Scalar) -> Self {
        if c.is_zero() {
            return Polynomial::zero(ring);
        }
        Polynomial { ring: ring.clone(), terms: vec![(m, c)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero constant, i.e. a unit of the graded ring.
    pub fn is_unit_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    pub fn constant_coefficient(&self) -> Scalar {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| Scalar::zero(self.ring.field))
    }

    pub fn leading(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.first().map(|(m, c)| (m, c))
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.iter().map(|(m, _)| m.degree()).max()
    }

    pub fn homogeneity(&self) -> Homogeneity {
        if self.terms.is_empty() {
            return Homogeneity::ZeroAny;
        }
        let d = self.terms[0].0.degree();
        if self.terms.iter().all(|(m, _)| m.degree() == d) {
            Homogeneity::Degree(d)
        } else {
            Homogeneity::NotHomogeneous
        }
    }

    fn check_ring(&self, other: &Polynomial) -> Result<()> {
        if *self.ring != *other.ring {
            return Err(EngineError::Structural("polynomials from different rings".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ring(other)?;
        let order = self.ring.order;
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match cmp_monomials_unchecked(&self.terms[i].0, &other.terms[j].0, order) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.terms[i].1.add(&other.terms[j].1)?;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(Polynomial { ring: self.ring.clone(), terms: out })
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Result<Polynomial> {
        if c.is_zero() {
            return Ok(Polynomial::zero(&self.ring));
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| Ok((m.clone(), a.mul(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Polynomial { ring: self.ring.clone(), terms })
    }

    /// Multiply by a single term c*m.
    pub fn mul_term(&self, m: &Monomial, c: &Scalar) -> Result<Polynomial> {
        if c.is_zero() {
            return Ok(Polynomial::zero(&self.ring));
        }
        let terms = self
            .terms
            .iter()
            .map(|(mm, a)| Ok((mm.mul(m), a.mul(c)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Polynomial { ring: self.ring.clone(), terms })
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Polynomial::zero(&self.ring));
        }
        let mut acc: std::collections::HashMap<Monomial, Scalar> = std::collections::HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                let c = c1.mul(c2)?;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut e) => {
                        let s = e.get().add(&c)?;
                        if s.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = s;
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        let mut terms: Vec<(Monomial, Scalar)> = acc.into_iter().collect();
        let order = self.ring.order;
        terms.sort_by(|a, b| cmp_monomials_unchecked(&b.0, &a.0, order));
        Ok(Polynomial { ring: self.ring.clone(), terms })
    }

    /// Normalize so the leading coefficient is 1.
    pub fn monic(&self) -> Result<Polynomial> {
        match self.leading() {
            None => Ok(self.clone()),
            Some((_, c)) => self.scale(&c.inv()?),
        }
    }

    /// Reinterpret a rational polynomial over F_p.
    pub fn to_prime_field(&self, target: &Arc<PolyRing>, p: u32) -> Result<Polynomial> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| Ok((m.clone(), c.to_prime_field(p)?)))
            .filter(|r| match r {
                Ok((_, c)) => !c.is_zero(),
                Err(_) => true,
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Polynomial { ring: target.clone(), terms })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative_display();
            let mag = c.abs_display();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", format_monomial(m, &self.ring))?;
            } else {
                write!(f, "{}*{}", mag, format_monomial(m, &self.ring))?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Text form: terms like `3*x^2*y - 1/2*z^3`, `*` optional after a coefficient.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '^' => {
                toks.push(Tok::Caret);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let v = text
                    .parse::<i64>()
                    .map_err(|_| EngineError::Structural(format!("integer too large: {text}")))?;
                toks.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                toks.push(Tok::Ident(bytes[start..i].iter().collect()));
            }
            other => {
                return Err(EngineError::Structural(format!(
                    "unexpected character {other:?} in polynomial"
                )))
            }
        }
    }
    Ok(toks)
}

impl Polynomial {
    /// Parse the canonical text form. Sums of terms; a term is a product of
    /// an optional coefficient (`3`, `1/2`) and powered variables.
    pub fn parse(ring: &Arc<PolyRing>, text: &str) -> Result<Polynomial> {
        let toks = tokenize(text)?;
        if toks.is_empty() {
            return Err(EngineError::Structural("empty polynomial".into()));
        }
        let mut acc = Polynomial::zero(ring);
        let mut i = 0;
        let mut sign_neg = false;
        // leading sign
        while i < toks.len() {
            match &toks[i] {
                Tok::Plus => i += 1,
                Tok::Minus => {
                    sign_neg = !sign_neg;
                    i += 1;
                }
                _ => break,
            }
        }
        loop {
            let (term, ni) = parse_term(ring, &toks, i)?;
            i = ni;
            let term = if sign_neg { term.neg() } else { term };
            acc = acc.add(&term)?;
            if i == toks.len() {
                break;
            }
            sign_neg = false;
            match &toks[i] {
                Tok::Plus => i += 1,
                Tok::Minus => {
                    sign_neg = true;
                    i += 1;
                }
                t => {
                    return Err(EngineError::Structural(format!(
                        "expected + or - between terms, found {t:?}"
                    )))
                }
            }
            while i < toks.len() {
                match &toks[i] {
                    Tok::Minus => {
                        sign_neg = !sign_neg;
                        i += 1;
                    }
                    Tok::Plus => i += 1,
                    _ => break,
                }
            }
            if i == toks.len() {
                return Err(EngineError::Structural("dangling sign".into()));
            }
        }
        Ok(acc)
    }
}

fn parse_term(ring: &Arc<PolyRing>, toks: &[Tok], mut i: usize) -> Result<(Polynomial, usize)> {
    let field = ring.field;
    let mut coeff = Scalar::one(field);
    let mut mono = Monomial::one(ring.nvars());
    let mut saw_factor = false;
    loop {
        if i >= toks.len() {
            break;
        }
        match &toks[i] {
            Tok::Num(n) => {
                let mut c = Scalar::from_i64(field, *n);
                i += 1;
                if i + 1 < toks.len() && toks[i] == Tok::Slash {
                    if let Tok::Num(d) = toks[i + 1] {
                        c = Scalar::from_fraction(field, *n, d)?;
                        i += 2;
                    }
                }
                coeff = coeff.mul(&c)?;
                saw_factor = true;
            }
            Tok::Ident(name) => {
                let vi = ring.var_index(name).ok_or_else(|| {
                    EngineError::Structural(format!("unknown variable {name}"))
                })?;
                i += 1;
                let mut exp: u16 = 1;
                if i < toks.len() && toks[i] == Tok::Caret {
                    i += 1;
                    match toks.get(i) {
                        Some(Tok::Num(e)) if *e >= 0 && *e <= u16::MAX as i64 => {
                            exp = *e as u16;
                            i += 1;
                        }
                        _ => {
                            return Err(EngineError::Structural("bad exponent".into()));
                        }
                    }
                }
                let mut exps = vec![0u16; ring.nvars()];
                exps[vi] = exp;
                mono = mono.mul(&Monomial { exps });
                saw_factor = true;
            }
            Tok::Star => {
                i += 1;
                continue;
            }
            _ => break,
        }
    }
    if !saw_factor {
        return Err(EngineError::Structural("empty term".into()));
    }
    Ok((Polynomial::term(ring, mono, coeff), i))
}
