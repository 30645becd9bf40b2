//! Degreewise exact linear algebra over the coefficient field.
//!
//! This is the second, Groebner-free computational route: graded pieces
//! of free modules are finite-dimensional vector spaces with monomial
//! bases, so ranks, kernels, and membership in bounded degree reduce to
//! Gaussian elimination. Production Hilbert functions and exactness
//! certificates run through here, as do the test oracles.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::module::{FreeModule, ModuleMap, Vector};
use crate::modules::QuotientCtx;
use crate::ring::{cmp_monomials_unchecked, Monomial, PolyRing};
use crate::scalar::Scalar;

/// All monomials of the given total degree, descending in the ring order.
pub fn monomials_of_degree(ring: &PolyRing, d: i64) -> Vec<Monomial> {
    if d < 0 {
        return Vec::new();
    }
    let n = ring.nvars();
    if n == 0 {
        return if d == 0 { vec![Monomial { exps: vec![] }] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut current = vec![0u16; n];
    fill(&mut out, &mut current, 0, d as u16, n);
    out.sort_by(|a, b| cmp_monomials_unchecked(b, a, ring.order));
    out
}

fn fill(out: &mut Vec<Monomial>, current: &mut Vec<u16>, var: usize, remaining: u16, n: usize) {
    if var == n - 1 {
        current[var] = remaining;
        out.push(Monomial { exps: current.clone() });
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e;
        fill(out, current, var + 1, remaining - e, n);
        current[var] = 0;
    }
}

/// Basis of the degree-d piece of a twisted free module, optionally over
/// a quotient context (standard monomials only).
pub struct DegreeBasis {
    pub pairs: Vec<(usize, Monomial)>,
    index: HashMap<(usize, Monomial), usize>,
}

impl DegreeBasis {
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }
}

fn standard(m: &Monomial, ctx: Option<&QuotientCtx>) -> bool {
    match ctx {
        None => true,
        Some(c) => !c.lead_monomials().iter().any(|lt| lt.divides(m)),
    }
}

pub fn degree_basis(
    ring: &PolyRing,
    module: &FreeModule,
    d: i64,
    ctx: Option<&QuotientCtx>,
) -> DegreeBasis {
    let mut pairs = Vec::new();
    for (j, t) in module.twists.iter().enumerate() {
        for m in monomials_of_degree(ring, d - t) {
            if standard(&m, ctx) {
                pairs.push((j, m));
            }
        }
    }
    let index = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    DegreeBasis { pairs, index }
}

/// Coordinates of a homogeneous vector in the degree basis; the vector is
/// reduced by the context first so coordinates live on standard monomials.
pub fn coordinates(
    v: &Vector,
    basis: &DegreeBasis,
    field: crate::scalar::FieldKind,
    ctx: Option<&QuotientCtx>,
) -> Result<Vec<Scalar>> {
    let reduced = match ctx {
        None => v.clone(),
        Some(c) => c.reduce_vector(v)?,
    };
    let mut coords = vec![Scalar::zero(field); basis.dim()];
    for (j, p) in reduced.entries.iter().enumerate() {
        for (m, c) in &p.terms {
            match basis.index.get(&(j, m.clone())) {
                Some(&i) => coords[i] = c.clone(),
                None => {
                    return Err(EngineError::Internal(format!(
                        "coordinate ({j}, {m:?}) outside degree basis"
                    )))
                }
            }
        }
    }
    Ok(coords)
}

/// Dense matrix over the field, row-major.
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Scalar>>,
}

impl DenseMatrix {
    pub fn from_rows(data: Vec<Vec<Scalar>>) -> Self {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        DenseMatrix { rows, cols, data }
    }

    /// Rank by Gaussian elimination (destructive on a copy).
    pub fn rank(&self) -> Result<usize> {
        let mut m = self.data.clone();
        let mut rank = 0;
        let mut pivot_col = 0;
        while rank < self.rows && pivot_col < self.cols {
            let mut pivot = None;
            for (r, row) in m.iter().enumerate().skip(rank) {
                if !row[pivot_col].is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            match pivot {
                None => pivot_col += 1,
                Some(pr) => {
                    m.swap(rank, pr);
                    let inv = m[rank][pivot_col].inv()?;
                    for c in pivot_col..self.cols {
                        m[rank][c] = m[rank][c].mul(&inv)?;
                    }
                    for r in 0..self.rows {
                        if r != rank && !m[r][pivot_col].is_zero() {
                            let f = m[r][pivot_col].clone();
                            for c in pivot_col..self.cols {
                                let s = m[rank][c].mul(&f)?;
                                m[r][c] = m[r][c].sub(&s)?;
                            }
                        }
                    }
                    rank += 1;
                    pivot_col += 1;
                }
            }
        }
        Ok(rank)
    }
}

/// Rank of the span of homogeneous module elements inside degree d: the
/// elements are multiplied up by all (standard) monomials of the right
/// degrees.
pub fn span_rank_at_degree(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    gens: &[Vector],
    d: i64,
    ctx: Option<&QuotientCtx>,
) -> Result<usize> {
    let basis = degree_basis(ring, ambient, d, ctx);
    if basis.dim() == 0 {
        return Ok(0);
    }
    let mut rows = Vec::new();
    for g in gens {
        let gd = match g.degree_in(ambient)? {
            Some(x) => x,
            None => continue,
        };
        if gd > d {
            continue;
        }
        for m in monomials_of_degree(ring, d - gd) {
            if !standard(&m, ctx) {
                continue;
            }
            let one = Scalar::one(ring.field);
            let v = g.mul_term(&m, &one)?;
            rows.push(coordinates(&v, &basis, ring.field, ctx)?);
        }
    }
    if rows.is_empty() {
        return Ok(0);
    }
    DenseMatrix::from_rows(rows).rank()
}

/// Dimension of the degree-d piece of coker(relations) over the context.
pub fn coker_dim_at_degree(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    relations: &[Vector],
    d: i64,
    ctx: Option<&QuotientCtx>,
) -> Result<usize> {
    let total = degree_basis(ring, ambient, d, ctx).dim();
    let image = span_rank_at_degree(ring, ambient, relations, d, ctx)?;
    Ok(total - image)
}

/// Matrix of a graded map on the degree-d pieces (columns indexed by the
/// source degree basis).
pub fn map_matrix_at_degree(
    a: &ModuleMap,
    d: i64,
    ctx: Option<&QuotientCtx>,
) -> Result<(DenseMatrix, DegreeBasis, DegreeBasis)> {
    let ring = &a.ring;
    let src = degree_basis(ring, &a.source, d, ctx);
    let tgt = degree_basis(ring, &a.target, d, ctx);
    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(src.dim());
    let one = Scalar::one(ring.field);
    for (j, m) in &src.pairs {
        let img = a.cols[*j].mul_term(m, &one)?;
        cols.push(coordinates(&img, &tgt, ring.field, ctx)?);
    }
    // transpose into rows
    let rows = (0..tgt.dim())
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    Ok((DenseMatrix { rows: tgt.dim(), cols: src.dim(), data: rows }, src, tgt))
}

/// dim ker(A_d) computed by rank-nullity.
pub fn kernel_dim_at_degree(a: &ModuleMap, d: i64, ctx: Option<&QuotientCtx>) -> Result<usize> {
    let (m, src, _) = map_matrix_at_degree(a, d, ctx)?;
    Ok(src.dim() - m.rank()?)
}

/// Is the homogeneous vector in the span of the generators, checked by a
/// rank comparison in its degree?
pub fn membership_at_degree(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    gens: &[Vector],
    v: &Vector,
    ctx: Option<&QuotientCtx>,
) -> Result<bool> {
    let d = match v.degree_in(ambient)? {
        None => return Ok(true),
        Some(d) => d,
    };
    let with = span_rank_at_degree(ring, ambient, &[gens, std::slice::from_ref(v)].concat(), d, ctx)?;
    let without = span_rank_at_degree(ring, ambient, gens, d, ctx)?;
    Ok(with == without)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn ring() -> Arc<PolyRing> {
        PolyRing::rationals(&["x", "y", "z"])
    }

    #[test]
    fn monomial_counts_are_binomial() {
        let r = ring();
        assert_eq!(monomials_of_degree(&r, 0).len(), 1);
        assert_eq!(monomials_of_degree(&r, 1).len(), 3);
        assert_eq!(monomials_of_degree(&r, 2).len(), 6);
        assert_eq!(monomials_of_degree(&r, 3).len(), 10);
    }

    #[test]
    fn coker_dims_match_known_hilbert_values() {
        let r = ring();
        let amb = FreeModule::std(1);
        // R/(x, y) has Hilbert function 1,1,1,...
        let rels: Vec<Vector> = ["x", "y"]
            .iter()
            .map(|s| Vector {
                ring: r.clone(),
                entries: vec![Polynomial::parse(&r, s).unwrap()],
            })
            .collect();
        for d in 0..4 {
            assert_eq!(coker_dim_at_degree(&r, &amb, &rels, d, None).unwrap(), 1);
        }
    }

    #[test]
    fn kernel_dimension_of_koszul_row() {
        let r = ring();
        let a = ModuleMap::from_columns(
            &r,
            FreeModule::std(1),
            vec![
                Vector { ring: r.clone(), entries: vec![Polynomial::parse(&r, "x").unwrap()] },
                Vector { ring: r.clone(), entries: vec![Polynomial::parse(&r, "y").unwrap()] },
            ],
        )
        .unwrap();
        // kernel of (x,y): R(-1)^2 -> R is generated by (y,-x) in degree 2
        assert_eq!(kernel_dim_at_degree(&a, 1, None).unwrap(), 0);
        assert_eq!(kernel_dim_at_degree(&a, 2, None).unwrap(), 1);
        assert_eq!(kernel_dim_at_degree(&a, 3, None).unwrap(), 3);
    }
}
