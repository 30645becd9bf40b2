//! Twisted free modules, their elements, and graded maps between them.
//!
//! A `FreeModule` records the degree of each basis generator. An element
//! is homogeneous of degree d when entry j is homogeneous of degree
//! `d - twists[j]` (or zero); maps store their columns, so the source
//! twists are exactly the column degrees.

use std::fmt;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::poly::{Homogeneity, Polynomial};
use crate::ring::PolyRing;
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FreeModule {
    /// Degree of each basis generator.
    pub twists: Vec<i64>,
}

impl FreeModule {
    pub fn new(twists: Vec<i64>) -> Self {
        FreeModule { twists }
    }

    pub fn rank(&self) -> usize {
        self.twists.len()
    }

    pub fn zero() -> Self {
        FreeModule { twists: Vec::new() }
    }

    pub fn std(rank: usize) -> Self {
        FreeModule { twists: vec![0; rank] }
    }

    pub fn shift(&self, by: i64) -> Self {
        FreeModule { twists: self.twists.iter().map(|t| t + by).collect() }
    }

    pub fn dual(&self) -> Self {
        FreeModule { twists: self.twists.iter().map(|t| -t).collect() }
    }

    pub fn direct_sum(&self, other: &FreeModule) -> Self {
        let mut twists = self.twists.clone();
        twists.extend_from_slice(&other.twists);
        FreeModule { twists }
    }
}

/// Element of a free module, stored densely.
#[derive(Clone, PartialEq, Debug)]
pub struct Vector {
    pub ring: Arc<PolyRing>,
    pub entries: Vec<Polynomial>,
}

impl Vector {
    pub fn zero(ring: &Arc<PolyRing>, rank: usize) -> Self {
        Vector {
            ring: ring.clone(),
            entries: (0..rank).map(|_| Polynomial::zero(ring)).collect(),
        }
    }

    pub fn unit(ring: &Arc<PolyRing>, rank: usize, i: usize) -> Self {
        let mut v = Vector::zero(ring, rank);
        v.entries[i] = Polynomial::one(ring);
        v
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        if self.rank() != other.rank() {
            return Err(EngineError::Structural("vector rank mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ring: self.ring.clone(), entries })
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Vector {
        Vector {
            ring: self.ring.clone(),
            entries: self.entries.iter().map(|p| p.neg()).collect(),
        }
    }

    pub fn scale_poly(&self, f: &Polynomial) -> Result<Vector> {
        let entries = self
            .entries
            .iter()
            .map(|p| p.mul(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ring: self.ring.clone(), entries })
    }

    pub fn scale(&self, c: &Scalar) -> Result<Vector> {
        let entries = self
            .entries
            .iter()
            .map(|p| p.scale(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ring: self.ring.clone(), entries })
    }

    pub fn mul_term(&self, m: &crate::ring::Monomial, c: &Scalar) -> Result<Vector> {
        let entries = self
            .entries
            .iter()
            .map(|p| p.mul_term(m, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ring: self.ring.clone(), entries })
    }

    /// Degree as a homogeneous element of `ambient`, if homogeneous.
    pub fn degree_in(&self, ambient: &FreeModule) -> Result<Option<i64>> {
        if self.rank() != ambient.rank() {
            return Err(EngineError::Structural("vector/module rank mismatch".into()));
        }
        let mut degree: Option<i64> = None;
        for (j, p) in self.entries.iter().enumerate() {
            match p.homogeneity() {
                Homogeneity::ZeroAny => continue,
                Homogeneity::NotHomogeneous => {
                    return Err(EngineError::Inhomogeneous(format!(
                        "entry {j} is not homogeneous: {p}"
                    )))
                }
                Homogeneity::Degree(d) => {
                    let total = d + ambient.twists[j];
                    match degree {
                        None => degree = Some(total),
                        Some(t) if t == total => {}
                        Some(t) => {
                            return Err(EngineError::Inhomogeneous(format!(
                                "mixed degrees {t} and {total} in one element"
                            )))
                        }
                    }
                }
            }
        }
        Ok(degree)
    }

    /// Concatenate with another vector (block element of a direct sum).
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Vector { ring: self.ring.clone(), entries }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Vector {
        Vector {
            ring: self.ring.clone(),
            entries: self.entries[range].to_vec(),
        }
    }
}

/// Graded map between free modules, stored by columns.
#[derive(Clone, PartialEq, Debug)]
pub struct ModuleMap {
    pub ring: Arc<PolyRing>,
    pub source: FreeModule,
    pub target: FreeModule,
    pub cols: Vec<Vector>,
}

impl ModuleMap {
    /// Build a map from homogeneous columns; source twists are inferred.
    /// Zero columns are given the provided fallback degree (they carry no
    /// degree of their own).
    pub fn from_columns(
        ring: &Arc<PolyRing>,
        target: FreeModule,
        cols: Vec<Vector>,
    ) -> Result<ModuleMap> {
        let mut twists = Vec::with_capacity(cols.len());
        for (j, c) in cols.iter().enumerate() {
            match c.degree_in(&target)? {
                Some(d) => twists.push(d),
                None => {
                    return Err(EngineError::Structural(format!(
                        "column {j} is zero; use from_columns_with_twists"
                    )))
                }
            }
        }
        Ok(ModuleMap {
            ring: ring.clone(),
            source: FreeModule::new(twists),
            target,
            cols,
        })
    }

    pub fn from_columns_with_twists(
        ring: &Arc<PolyRing>,
        target: FreeModule,
        source: FreeModule,
        cols: Vec<Vector>,
    ) -> Result<ModuleMap> {
        if cols.len() != source.rank() {
            return Err(EngineError::Structural("column count != source rank".into()));
        }
        for (j, c) in cols.iter().enumerate() {
            if c.rank() != target.rank() {
                return Err(EngineError::Structural(format!("column {j} has wrong rank")));
            }
            if let Some(d) = c.degree_in(&target)? {
                if d != source.twists[j] {
                    return Err(EngineError::Inhomogeneous(format!(
                        "column {j} has degree {d}, source twist is {}",
                        source.twists[j]
                    )));
                }
            }
        }
        Ok(ModuleMap { ring: ring.clone(), source, target, cols })
    }

    pub fn zero_map(ring: &Arc<PolyRing>, source: FreeModule, target: FreeModule) -> ModuleMap {
        let cols = (0..source.rank())
            .map(|_| Vector::zero(ring, target.rank()))
            .collect();
        ModuleMap { ring: ring.clone(), source, target, cols }
    }

    pub fn identity(ring: &Arc<PolyRing>, module: FreeModule) -> ModuleMap {
        let rank = module.rank();
        let cols = (0..rank).map(|i| Vector::unit(ring, rank, i)).collect();
        ModuleMap { ring: ring.clone(), source: module.clone(), target: module, cols }
    }

    pub fn entry(&self, row: usize, col: usize) -> &Polynomial {
        &self.cols[col].entries[row]
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if v.rank() != self.source.rank() {
            return Err(EngineError::Structural("apply: rank mismatch".into()));
        }
        let mut out = Vector::zero(&self.ring, self.target.rank());
        for (j, coeff) in v.entries.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            out = out.add(&self.cols[j].scale_poly(coeff)?)?;
        }
        Ok(out)
    }

    pub fn compose(&self, inner: &ModuleMap) -> Result<ModuleMap> {
        // self ∘ inner
        if inner.target != self.source {
            return Err(EngineError::Structural("compose: middle modules differ".into()));
        }
        let cols = inner
            .cols
            .iter()
            .map(|c| self.apply(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleMap {
            ring: self.ring.clone(),
            source: inner.source.clone(),
            target: self.target.clone(),
            cols,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    pub fn transpose(&self) -> ModuleMap {
        let rows = self.target.rank();
        let cols = self.cols.len();
        let mut tcols = Vec::with_capacity(rows);
        for i in 0..rows {
            let entries = (0..cols).map(|j| self.cols[j].entries[i].clone()).collect();
            tcols.push(Vector { ring: self.ring.clone(), entries });
        }
        ModuleMap {
            ring: self.ring.clone(),
            source: self.target.dual(),
            target: self.source.dual(),
            cols: tcols,
        }
    }

    pub fn neg(&self) -> ModuleMap {
        ModuleMap {
            ring: self.ring.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            cols: self.cols.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn add(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if self.source != other.source || self.target != other.target {
            return Err(EngineError::Structural("map addition: shape mismatch".into()));
        }
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleMap {
            ring: self.ring.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
            cols,
        })
    }

    pub fn sub(&self, other: &ModuleMap) -> Result<ModuleMap> {
        self.add(&other.neg())
    }

    /// Stack columns of `other` after columns of `self` (same target).
    pub fn hcat(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if self.target != other.target {
            return Err(EngineError::Structural("hcat: targets differ".into()));
        }
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        Ok(ModuleMap {
            ring: self.ring.clone(),
            source: self.source.direct_sum(&other.source),
            target: self.target.clone(),
            cols,
        })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &ModuleMap) -> ModuleMap {
        let source = self.source.direct_sum(&other.source);
        let target = self.target.direct_sum(&other.target);
        let mut cols = Vec::with_capacity(source.rank());
        for c in &self.cols {
            cols.push(c.concat(&Vector::zero(&self.ring, other.target.rank())));
        }
        for c in &other.cols {
            cols.push(Vector::zero(&self.ring, self.target.rank()).concat(c));
        }
        ModuleMap { ring: self.ring.clone(), source, target, cols }
    }

    /// Shift all twists by `by` (the map itself is unchanged).
    pub fn shift(&self, by: i64) -> ModuleMap {
        ModuleMap {
            ring: self.ring.clone(),
            source: self.source.shift(by),
            target: self.target.shift(by),
            cols: self.cols.clone(),
        }
    }

    /// Keep only the selected rows/columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ModuleMap {
        let target = FreeModule::new(rows.iter().map(|&i| self.target.twists[i]).collect());
        let source = FreeModule::new(cols.iter().map(|&j| self.source.twists[j]).collect());
        let new_cols = cols
            .iter()
            .map(|&j| Vector {
                ring: self.ring.clone(),
                entries: rows.iter().map(|&i| self.cols[j].entries[i].clone()).collect(),
            })
            .collect();
        ModuleMap { ring: self.ring.clone(), source, target, cols: new_cols }
    }

    /// All-entries check used by minimality certificates.
    pub fn has_constant_entry(&self) -> bool {
        self.cols.iter().any(|c| {
            c.entries
                .iter()
                .any(|p| !p.is_zero() && !p.constant_coefficient().is_zero())
        })
    }
}

impl fmt::Display for ModuleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.target.rank();
        writeln!(f, "[{} x {}]", rows, self.cols.len())?;
        for i in 0..rows {
            let row: Vec<String> =
                (0..self.cols.len()).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn ring() -> Arc<PolyRing> {
        PolyRing::rationals(&["x", "y", "z"])
    }

    fn vecp(strs: &[&str]) -> Vector {
        let r = ring();
        Vector {
            ring: r.clone(),
            entries: strs.iter().map(|s| Polynomial::parse(&r, s).unwrap()).collect(),
        }
    }

    #[test]
    fn column_degrees_inferred() {
        let r = ring();
        let m = ModuleMap::from_columns(&r, FreeModule::std(1), vec![vecp(&["x"]), vecp(&["y^2"])])
            .unwrap();
        assert_eq!(m.source.twists, vec![1, 2]);
    }

    #[test]
    fn inhomogeneous_column_rejected() {
        let r = ring();
        let err = ModuleMap::from_columns(&r, FreeModule::std(1), vec![vecp(&["x + y^2"])]);
        assert!(err.is_err());
    }

    #[test]
    fn compose_and_transpose() {
        let r = ring();
        // row (x, y): R(-1)^2 -> R
        let a = ModuleMap::from_columns(&r, FreeModule::std(1), vec![vecp(&["x"]), vecp(&["y"])])
            .unwrap();
        // koszul column (y, -x)^T
        let s = ModuleMap::from_columns(&r, a.source.clone(), vec![vecp(&["y", "-x"])]).unwrap();
        let comp = a.compose(&s).unwrap();
        assert!(comp.is_zero());
        let t = a.transpose();
        assert_eq!(t.source.twists, vec![0]);
        assert_eq!(t.target.twists, vec![-1, -1]);
        let tt = t.transpose();
        assert_eq!(tt, a);
    }
}
