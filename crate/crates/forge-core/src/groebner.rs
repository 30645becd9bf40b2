//! Module Groebner bases over twisted free modules.
//!
//! The module order is position-over-term: positions compared first
//! (earlier index dominates), ties broken by the ring's monomial order.
//! Kernels and lifts both go through one elimination trick: compute a
//! basis of the graph module {(A e_j, e_j)} with the target block
//! dominant, then read off elements supported in the source block.
//!
//! Pair selection follows the normal strategy (lowest twisted degree
//! first, ties by (i, j)), and bases are interreduced and monic, so every
//! run is deterministic.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::module::{FreeModule, ModuleMap, Vector};
use crate::poly::Polynomial;
use crate::ring::{cmp_monomials_unchecked, Monomial, PolyRing};
use crate::scalar::Scalar;

/// Leading position/monomial of a module element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LeadTerm {
    pub pos: usize,
    pub mono: Monomial,
    pub coeff: Scalar,
}

fn lead_term(v: &Vector) -> Option<LeadTerm> {
    for (pos, p) in v.entries.iter().enumerate() {
        if let Some((m, c)) = p.leading() {
            return Some(LeadTerm { pos, mono: m.clone(), coeff: c.clone() });
        }
    }
    None
}

fn cmp_mod_terms(
    a: (usize, &Monomial),
    b: (usize, &Monomial),
    ring: &PolyRing,
) -> Ordering {
    // earlier position dominates
    match a.0.cmp(&b.0) {
        Ordering::Less => Ordering::Greater,
        Ordering::Greater => Ordering::Less,
        Ordering::Equal => cmp_monomials_unchecked(a.1, b.1, ring.order),
    }
}

/// Interreduced, monic module Groebner basis.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub ring: Arc<PolyRing>,
    pub ambient: FreeModule,
    pub gens: Vec<Vector>,
    leads: Vec<LeadTerm>,
}

impl GroebnerBasis {
    pub fn generators(&self) -> &[Vector] {
        &self.gens
    }

    /// Re-verify the basis property: every S-vector of a same-position
    /// pair reduces to zero.
    pub fn verify(&self) -> Result<()> {
        for i in 0..self.gens.len() {
            for j in (i + 1)..self.gens.len() {
                if self.leads[i].pos != self.leads[j].pos {
                    continue;
                }
                let s = s_vector(&self.gens[i], &self.gens[j], &self.leads[i], &self.leads[j])?;
                if !reduce_full(&s, &self.gens, &self.leads)?.is_zero() {
                    return Err(EngineError::Internal(format!(
                        "S-vector of pair ({i},{j}) does not reduce to zero"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn validate_homogeneous(gens: &[Vector], ambient: &FreeModule) -> Result<()> {
    for (i, g) in gens.iter().enumerate() {
        g.degree_in(ambient)
            .map_err(|e| EngineError::Inhomogeneous(format!("generator {i}: {e}")))?;
    }
    Ok(())
}

/// Buchberger's algorithm on module generators.
pub fn buchberger(ring: &Arc<PolyRing>, gens: &[Vector], ambient: &FreeModule) -> Result<GroebnerBasis> {
    validate_homogeneous(gens, ambient)?;
    let mut basis: Vec<Vector> = Vec::new();
    let mut leads: Vec<LeadTerm> = Vec::new();

    let mut pending: Vec<Vector> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    for g in &mut pending {
        *g = monic(g)?;
    }

    // queue of S-pairs keyed by (twisted degree, i, j)
    let mut queue: BTreeSet<(i64, usize, usize)> = BTreeSet::new();

    let insert = |basis: &mut Vec<Vector>,
                  leads: &mut Vec<LeadTerm>,
                  queue: &mut BTreeSet<(i64, usize, usize)>,
                  g: Vector| {
        let lt = lead_term(&g).expect("nonzero");
        let k = basis.len();
        for (i, li) in leads.iter().enumerate() {
            if li.pos == lt.pos {
                let lcm = li.mono.lcm(&lt.mono);
                let pair_deg = lcm.degree() + ambient.twists[lt.pos];
                queue.insert((pair_deg, i, k));
            }
        }
        basis.push(g);
        leads.push(lt);
    };

    for g in pending {
        insert(&mut basis, &mut leads, &mut queue, g);
    }

    while let Some(&key) = queue.iter().next() {
        queue.remove(&key);
        let (_, i, j) = key;
        let s = s_vector(&basis[i], &basis[j], &leads[i], &leads[j])?;
        let r = reduce_full(&s, &basis, &leads)?;
        if !r.is_zero() {
            let r = monic(&r)?;
            insert(&mut basis, &mut leads, &mut queue, r);
        }
    }

    interreduce(ring, ambient, basis)
}

fn monic(v: &Vector) -> Result<Vector> {
    match lead_term(v) {
        None => Ok(v.clone()),
        Some(lt) => v.scale(&lt.coeff.inv()?),
    }
}

fn s_vector(a: &Vector, b: &Vector, la: &LeadTerm, lb: &LeadTerm) -> Result<Vector> {
    debug_assert_eq!(la.pos, lb.pos);
    let lcm = la.mono.lcm(&lb.mono);
    let ma = la.mono.quotient_into(&lcm);
    let mb = lb.mono.quotient_into(&lcm);
    // both generators are monic
    let one = Scalar::one(a.ring.field);
    let ta = a.mul_term(&ma, &one)?;
    let tb = b.mul_term(&mb, &one)?;
    ta.sub(&tb)
}

/// Full normal form: no remaining term divisible by any basis lead.
fn reduce_full(v: &Vector, basis: &[Vector], leads: &[LeadTerm]) -> Result<Vector> {
    let mut cur = v.clone();
    'outer: loop {
        for pos in 0..cur.entries.len() {
            let terms = cur.entries[pos].terms.clone();
            for (m, c) in &terms {
                for (g, lt) in basis.iter().zip(leads) {
                    if lt.pos == pos && lt.mono.divides(m) {
                        let q = lt.mono.quotient_into(m);
                        let sub = g.mul_term(&q, c)?;
                        cur = cur.sub(&sub)?;
                        continue 'outer;
                    }
                }
            }
        }
        return Ok(cur);
    }
}

fn interreduce(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    mut basis: Vec<Vector>,
) -> Result<GroebnerBasis> {
    // minimal set of leads: drop any generator whose lead is divisible by
    // another kept one
    let mut leads: Vec<LeadTerm> = basis.iter().map(|g| lead_term(g).unwrap()).collect();
    let mut order_idx: Vec<usize> = (0..basis.len()).collect();
    order_idx.sort_by(|&a, &b| {
        cmp_mod_terms((leads[a].pos, &leads[a].mono), (leads[b].pos, &leads[b].mono), ring)
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order_idx {
        let divisible = kept.iter().any(|&k| {
            leads[k].pos == leads[i].pos && leads[k].mono.divides(&leads[i].mono)
        });
        if !divisible {
            kept.push(i);
        }
    }
    let mut reduced: Vec<Vector> = kept.iter().map(|&i| basis[i].clone()).collect();
    // tail-reduce each against the others
    for i in 0..reduced.len() {
        let mut others = reduced.clone();
        others.remove(i);
        let other_leads: Vec<LeadTerm> = others.iter().map(|g| lead_term(g).unwrap()).collect();
        reduced[i] = monic(&reduce_full(&reduced[i], &others, &other_leads)?)?;
    }
    // canonical order: descending by lead term
    reduced.sort_by(|a, b| {
        let la = lead_term(a).unwrap();
        let lb = lead_term(b).unwrap();
        cmp_mod_terms((lb.pos, &lb.mono), (la.pos, &la.mono), ring)
    });
    leads = reduced.iter().map(|g| lead_term(g).unwrap()).collect();
    basis = reduced;
    Ok(GroebnerBasis { ring: ring.clone(), ambient: ambient.clone(), gens: basis, leads })
}

/// Remainder of `v` on division by the basis; `v - result` lies in the
/// submodule and no term of the result is divisible by a basis lead.
pub fn normal_form(v: &Vector, gb: &GroebnerBasis) -> Result<Vector> {
    if v.rank() != gb.ambient.rank() {
        return Err(EngineError::Structural("normal_form: ambient mismatch".into()));
    }
    v.degree_in(&gb.ambient)?;
    reduce_full(v, &gb.gens, &gb.leads)
}

/// Groebner basis of a polynomial ideal (rank-1 module).
pub fn ideal_gb(ring: &Arc<PolyRing>, gens: &[Polynomial]) -> Result<GroebnerBasis> {
    let ambient = FreeModule::std(1);
    let vecs: Vec<Vector> = gens
        .iter()
        .map(|p| Vector { ring: ring.clone(), entries: vec![p.clone()] })
        .collect();
    buchberger(ring, &vecs, &ambient)
}

pub fn ideal_gb_polys(gb: &GroebnerBasis) -> Vec<Polynomial> {
    gb.gens.iter().map(|v| v.entries[0].clone()).collect()
}

// ---------------------------------------------------------------------------
// Kernels and lifts via the graph module.

/// Graph basis of a map A: the Groebner basis of {(A e_j, e_j)} inside
/// target ⊕ source, target block dominant.
pub struct GraphBasis {
    pub gb: GroebnerBasis,
    target_rank: usize,
    source_rank: usize,
}

pub fn graph_basis(a: &ModuleMap) -> Result<GraphBasis> {
    let ring = &a.ring;
    let ambient = a.target.direct_sum(&a.source);
    let gens: Vec<Vector> = a
        .cols
        .iter()
        .enumerate()
        .map(|(j, c)| c.concat(&Vector::unit(ring, a.source.rank(), j)))
        .collect();
    let gb = buchberger(ring, &gens, &ambient)?;
    Ok(GraphBasis { gb, target_rank: a.target.rank(), source_rank: a.source.rank() })
}

impl GraphBasis {
    /// Generators of ker(A), read off as the source parts of basis
    /// elements supported entirely in the source block.
    pub fn kernel_columns(&self) -> Vec<Vector> {
        self.gb
            .gens
            .iter()
            .filter(|g| g.slice(0..self.target_rank).is_zero())
            .map(|g| g.slice(self.target_rank..self.target_rank + self.source_rank))
            .collect()
    }

    /// Solve A x = b; `None` when b is not in the image.
    pub fn lift(&self, b: &Vector) -> Result<Option<Vector>> {
        let ring = &self.gb.ring;
        let padded = b.concat(&Vector::zero(ring, self.source_rank));
        let nf = normal_form(&padded, &self.gb)?;
        if nf.slice(0..self.target_rank).is_zero() {
            Ok(Some(nf.slice(self.target_rank..self.target_rank + self.source_rank).neg()))
        } else {
            Ok(None)
        }
    }

    /// Groebner basis of im(A): target parts of basis elements whose lead
    /// sits in the target block.
    pub fn image_gb(&self) -> Result<GroebnerBasis> {
        let ring = self.gb.ring.clone();
        let ambient = FreeModule::new(self.gb.ambient.twists[0..self.target_rank].to_vec());
        let gens: Vec<Vector> = self
            .gb
            .gens
            .iter()
            .filter(|g| !g.slice(0..self.target_rank).is_zero())
            .map(|g| g.slice(0..self.target_rank))
            .collect();
        // already a Groebner basis by elimination; interreduce for canonical form
        interreduce(&ring, &ambient, gens)
    }
}

/// Columns generating ker(A), with Schreyer-style determinism.
pub fn syzygy_matrix(a: &ModuleMap) -> Result<ModuleMap> {
    let graph = graph_basis(a)?;
    let cols = graph.kernel_columns();
    let map = module_map_from_kernel(a, cols)?;
    debug_assert!(a.compose(&map).unwrap().is_zero());
    Ok(map)
}

fn module_map_from_kernel(a: &ModuleMap, cols: Vec<Vector>) -> Result<ModuleMap> {
    let ring = &a.ring;
    let mut twists = Vec::with_capacity(cols.len());
    for c in &cols {
        let d = c
            .degree_in(&a.source)?
            .ok_or_else(|| EngineError::Internal("zero kernel generator".into()))?;
        twists.push(d);
    }
    ModuleMap::from_columns_with_twists(ring, a.source.clone(), FreeModule::new(twists), cols)
}

/// Solve A x = b exactly; b must be homogeneous in A's target.
pub fn lift_through(a: &ModuleMap, b: &Vector) -> Result<Option<Vector>> {
    let graph = graph_basis(a)?;
    lift_with(&graph, a, b)
}

pub fn lift_with(graph: &GraphBasis, a: &ModuleMap, b: &Vector) -> Result<Option<Vector>> {
    b.degree_in(&a.target)?;
    match graph.lift(b)? {
        None => Ok(None),
        Some(x) => {
            let check = a.apply(&x)?;
            if check != *b {
                return Err(EngineError::Internal("lift verification failed".into()));
            }
            Ok(Some(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn ring() -> Arc<PolyRing> {
        PolyRing::rationals(&["x", "y", "z"])
    }

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(&ring(), s).unwrap()
    }

    fn vp(strs: &[&str]) -> Vector {
        let r = ring();
        Vector {
            ring: r.clone(),
            entries: strs.iter().map(|s| Polynomial::parse(&r, s).unwrap()).collect(),
        }
    }

    #[test]
    fn already_a_basis() {
        let r = ring();
        let gb = ideal_gb(&r, &[p("x"), p("y")]).unwrap();
        let polys = ideal_gb_polys(&gb);
        assert_eq!(polys, vec![p("x"), p("y")]);
    }

    #[test]
    fn linear_combination_collapses() {
        let r = ring();
        let gb = ideal_gb(&r, &[p("x^2-y^2"), p("x^2+y^2")]).unwrap();
        let polys = ideal_gb_polys(&gb);
        assert_eq!(polys, vec![p("x^2"), p("y^2")]);
    }

    #[test]
    fn normal_form_examples() {
        let r = ring();
        let gb = ideal_gb(&r, &[p("x")]).unwrap();
        let v = vp(&["x^2*y"]);
        assert!(normal_form(&v, &gb).unwrap().is_zero());

        let gb2 = ideal_gb(&r, &[p("x"), p("y")]).unwrap();
        let v2 = vp(&["z^3"]);
        assert_eq!(normal_form(&v2, &gb2).unwrap(), v2);
    }

    #[test]
    fn koszul_syzygies_of_two_variables() {
        let r = ring();
        let a = ModuleMap::from_columns(&r, FreeModule::std(1), vec![vp(&["x"]), vp(&["y"])])
            .unwrap();
        let s = syzygy_matrix(&a).unwrap();
        assert_eq!(s.cols.len(), 1);
        let c = &s.cols[0];
        // (y, -x) up to sign normalization
        assert_eq!(c.entries[0], p("y"));
        assert_eq!(c.entries[1], p("-x"));
        assert!(a.compose(&s).unwrap().is_zero());
    }

    #[test]
    fn koszul_syzygies_of_three_variables() {
        let r = ring();
        let a = ModuleMap::from_columns(
            &r,
            FreeModule::std(1),
            vec![vp(&["x"]), vp(&["y"]), vp(&["z"])],
        )
        .unwrap();
        let s = syzygy_matrix(&a).unwrap();
        assert!(a.compose(&s).unwrap().is_zero());
        assert_eq!(s.cols.len(), 3);
        let expect = [vp(&["y", "-x", "0"]), vp(&["z", "0", "-x"]), vp(&["0", "z", "-y"])];
        for e in &expect {
            assert!(s.cols.contains(e), "missing koszul column");
        }
    }

    #[test]
    fn syzygy_of_injective_map_is_empty() {
        let r = ring();
        let a = ModuleMap::identity(&r, FreeModule::std(2));
        let s = syzygy_matrix(&a).unwrap();
        assert_eq!(s.source.rank(), 0);
    }

    #[test]
    fn lift_examples() {
        let r = ring();
        let a = ModuleMap::from_columns(&r, FreeModule::std(1), vec![vp(&["x"]), vp(&["y"])])
            .unwrap();
        let x = lift_through(&a, &vp(&["x^2+y^2"])).unwrap().unwrap();
        assert_eq!(a.apply(&x).unwrap(), vp(&["x^2+y^2"]));
        assert!(lift_through(&a, &vp(&["z"])).unwrap().is_none());
    }
}
