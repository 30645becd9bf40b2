//! Finitely presented graded modules and their basic operations.
//!
//! A quotient ring R/(f_1..f_t) is never materialized: a module "over the
//! context" is a module over R whose relations implicitly include the
//! context ideal. One Groebner engine therefore serves the whole ladder
//! of quotient rings; kernels and lifts relative to a context are plain
//! kernels and lifts of augmented matrices.

use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::groebner::{
    buchberger, ideal_gb, ideal_gb_polys, lift_through, normal_form, syzygy_matrix, GroebnerBasis,
};
use crate::linalg;
use crate::module::{FreeModule, ModuleMap, Vector};
use crate::poly::{Homogeneity, Polynomial};
use crate::ring::{Monomial, PolyRing};

/// Homogeneous ideal with a cached reduced Groebner basis.
#[derive(Clone, Debug)]
pub struct Ideal {
    pub ring: Arc<PolyRing>,
    pub gens: Vec<Polynomial>,
    gb: Vec<Polynomial>,
    basis: GroebnerBasis,
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.gb == other.gb
    }
}

impl Ideal {
    pub fn new(ring: &Arc<PolyRing>, gens: Vec<Polynomial>) -> Result<Ideal> {
        for g in &gens {
            if let Homogeneity::NotHomogeneous = g.homogeneity() {
                return Err(EngineError::Inhomogeneous(format!("ideal generator {g}")));
            }
        }
        let nonzero: Vec<Polynomial> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        let basis = ideal_gb(ring, &nonzero)?;
        let gb = ideal_gb_polys(&basis);
        Ok(Ideal { ring: ring.clone(), gens: nonzero, gb, basis })
    }

    pub fn zero(ring: &Arc<PolyRing>) -> Ideal {
        Ideal::new(ring, vec![]).expect("empty generating set is valid")
    }

    pub fn is_zero(&self) -> bool {
        self.gb.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.gb.iter().any(|g| g.is_unit_constant())
    }

    pub fn groebner(&self) -> &[Polynomial] {
        &self.gb
    }

    pub fn contains(&self, f: &Polynomial) -> Result<bool> {
        if f.is_zero() {
            return Ok(true);
        }
        let v = Vector { ring: self.ring.clone(), entries: vec![f.clone()] };
        Ok(normal_form(&v, &self.basis)?.is_zero())
    }

    pub fn contains_ideal(&self, other: &Ideal) -> Result<bool> {
        for g in &other.gb {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Quotient-ring context R/(gens); carries the reduced Groebner basis of
/// the ideal so normal forms and standard monomials are canonical.
#[derive(Clone, Debug)]
pub struct QuotientCtx {
    pub ring: Arc<PolyRing>,
    pub gens: Vec<Polynomial>,
    gb: Vec<Polynomial>,
    basis: GroebnerBasis,
    lead_monos: Vec<Monomial>,
}

impl PartialEq for QuotientCtx {
    fn eq(&self, other: &Self) -> bool {
        self.gb == other.gb
    }
}

impl QuotientCtx {
    pub fn new(ring: &Arc<PolyRing>, gens: Vec<Polynomial>) -> Result<QuotientCtx> {
        for g in &gens {
            match g.homogeneity() {
                Homogeneity::NotHomogeneous => {
                    return Err(EngineError::Inhomogeneous(format!("context generator {g}")))
                }
                Homogeneity::Degree(0) => {
                    return Err(EngineError::Structural("context generator is a unit".into()))
                }
                _ => {}
            }
        }
        let basis = ideal_gb(ring, &gens)?;
        let gb = ideal_gb_polys(&basis);
        let lead_monos = gb.iter().filter_map(|g| g.leading().map(|(m, _)| m.clone())).collect();
        Ok(QuotientCtx { ring: ring.clone(), gens, gb, basis, lead_monos })
    }

    /// Extend the context by further homogeneous generators.
    pub fn extended(&self, more: &[Polynomial]) -> Result<QuotientCtx> {
        let mut gens = self.gens.clone();
        gens.extend(more.iter().cloned());
        QuotientCtx::new(&self.ring, gens)
    }

    pub fn groebner(&self) -> &[Polynomial] {
        &self.gb
    }

    pub fn lead_monomials(&self) -> &[Monomial] {
        &self.lead_monos
    }

    pub fn reduce_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        if p.is_zero() {
            return Ok(p.clone());
        }
        let v = Vector { ring: self.ring.clone(), entries: vec![p.clone()] };
        Ok(normal_form(&v, &self.basis)?.entries[0].clone())
    }

    pub fn reduce_vector(&self, v: &Vector) -> Result<Vector> {
        let entries = v
            .entries
            .iter()
            .map(|p| self.reduce_poly(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector { ring: v.ring.clone(), entries })
    }

    pub fn reduce_map(&self, a: &ModuleMap) -> Result<ModuleMap> {
        let cols = a
            .cols
            .iter()
            .map(|c| self.reduce_vector(c))
            .collect::<Result<Vec<_>>>()?;
        ModuleMap::from_columns_with_twists(&a.ring, a.target.clone(), a.source.clone(), cols)
    }

    pub fn contains(&self, f: &Polynomial) -> Result<bool> {
        Ok(self.reduce_poly(f)?.is_zero())
    }

    /// Map whose columns are g * e_i for each Groebner generator g of the
    /// context and each basis vector of `module`.
    pub fn relation_map(&self, module: &FreeModule) -> Result<ModuleMap> {
        let mut cols = Vec::new();
        let mut twists = Vec::new();
        for g in &self.gb {
            let gd = match g.homogeneity() {
                Homogeneity::Degree(d) => d,
                _ => unreachable!("context generators are homogeneous and nonzero"),
            };
            for (i, t) in module.twists.iter().enumerate() {
                let mut v = Vector::zero(&self.ring, module.rank());
                v.entries[i] = g.clone();
                cols.push(v);
                twists.push(t + gd);
            }
        }
        ModuleMap::from_columns_with_twists(
            &self.ring,
            module.clone(),
            FreeModule::new(twists),
            cols,
        )
    }
}

fn opt_eq(a: &Option<QuotientCtx>, b: &Option<QuotientCtx>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// A finitely presented graded module: coker(relations), optionally over
/// a quotient context.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub relations: ModuleMap,
    pub ctx: Option<QuotientCtx>,
}

impl PartialEq for Presentation {
    fn eq(&self, other: &Self) -> bool {
        self.relations == other.relations && opt_eq(&self.ctx, &other.ctx)
    }
}

impl Presentation {
    pub fn new(relations: ModuleMap, ctx: Option<QuotientCtx>) -> Presentation {
        Presentation { relations, ctx }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.relations.ring
    }

    pub fn ambient(&self) -> &FreeModule {
        &self.relations.target
    }

    /// Free module with no relations.
    pub fn free(ring: &Arc<PolyRing>, module: FreeModule, ctx: Option<QuotientCtx>) -> Presentation {
        let relations = ModuleMap::zero_map(ring, FreeModule::zero(), module);
        Presentation { relations, ctx }
    }

    /// R/I for a homogeneous ideal.
    pub fn cyclic(ring: &Arc<PolyRing>, gens: &[Polynomial]) -> Result<Presentation> {
        let cols: Vec<Vector> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| Vector { ring: ring.clone(), entries: vec![g.clone()] })
            .collect();
        let relations = if cols.is_empty() {
            ModuleMap::zero_map(ring, FreeModule::zero(), FreeModule::std(1))
        } else {
            ModuleMap::from_columns(ring, FreeModule::std(1), cols)?
        };
        Ok(Presentation { relations, ctx: None })
    }

    pub fn direct_sum(&self, other: &Presentation) -> Result<Presentation> {
        if !opt_eq(&self.ctx, &other.ctx) {
            return Err(EngineError::Structural("direct sum across contexts".into()));
        }
        Ok(Presentation {
            relations: self.relations.direct_sum(&other.relations),
            ctx: self.ctx.clone(),
        })
    }

    pub fn shift(&self, by: i64) -> Presentation {
        Presentation { relations: self.relations.shift(by), ctx: self.ctx.clone() }
    }

    /// Relations with the context columns adjoined (the full defining
    /// submodule of the cokernel as an R-module).
    pub fn relations_with_ctx(&self) -> Result<ModuleMap> {
        match &self.ctx {
            None => Ok(self.relations.clone()),
            Some(c) => self.relations.hcat(&c.relation_map(self.ambient())?),
        }
    }

    /// View the same cokernel as a plain R-module (context folded in).
    pub fn over_base_ring(&self) -> Result<Presentation> {
        Ok(Presentation { relations: self.relations_with_ctx()?, ctx: None })
    }

    /// Groebner basis of the defining submodule.
    pub fn relations_gb(&self) -> Result<GroebnerBasis> {
        let full = self.relations_with_ctx()?;
        buchberger(self.ring(), &full.cols, self.ambient())
    }

    /// Does the homogeneous vector represent zero in the module?
    pub fn is_zero_element(&self, v: &Vector) -> Result<bool> {
        let gb = self.relations_gb()?;
        Ok(normal_form(v, &gb)?.is_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rel = &self.relations;
        let rows = rel.target.rank();
        let matrix: Vec<Vec<String>> = (0..rows)
            .map(|i| (0..rel.cols.len()).map(|j| rel.entry(i, j).to_string()).collect())
            .collect();
        serde_json::json!({
            "twists": rel.target.twists,
            "relation_twists": rel.source.twists,
            "relations": matrix,
            "context": self.ctx.as_ref().map(|c| c.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>()),
        })
    }
}

// ---------------------------------------------------------------------------
// Context-aware kernels and lifts.

/// Generators of {v : A v ∈ ctx·target}, i.e. the kernel over the
/// quotient context (plain kernel when ctx is None).
pub fn kernel_ctx(a: &ModuleMap, ctx: Option<&QuotientCtx>) -> Result<ModuleMap> {
    match ctx {
        None => syzygy_matrix(a),
        Some(c) => {
            let aug = a.hcat(&c.relation_map(&a.target)?)?;
            let k = syzygy_matrix(&aug)?;
            let n = a.source.rank();
            let mut cols = Vec::new();
            let mut twists = Vec::new();
            for (j, col) in k.cols.iter().enumerate() {
                let head = col.slice(0..n);
                if head.is_zero() {
                    continue;
                }
                cols.push(head);
                twists.push(k.source.twists[j]);
            }
            ModuleMap::from_columns_with_twists(
                &a.ring,
                a.source.clone(),
                FreeModule::new(twists),
                cols,
            )
        }
    }
}

/// Solve A x ≡ b modulo ctx·target.
pub fn lift_ctx(a: &ModuleMap, b: &Vector, ctx: Option<&QuotientCtx>) -> Result<Option<Vector>> {
    match ctx {
        None => lift_through(a, b),
        Some(c) => {
            let aug = a.hcat(&c.relation_map(&a.target)?)?;
            match lift_through(&aug, b)? {
                None => Ok(None),
                Some(x) => Ok(Some(x.slice(0..a.source.rank()))),
            }
        }
    }
}

/// Is v in the submodule spanned by `gens` plus ctx multiples?
pub fn in_submodule_ctx(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    gens: &[Vector],
    v: &Vector,
    ctx: Option<&QuotientCtx>,
) -> Result<bool> {
    let mut all = gens.to_vec();
    if let Some(c) = ctx {
        all.extend(c.relation_map(ambient)?.cols);
    }
    let gb = buchberger(ring, &all, ambient)?;
    Ok(normal_form(v, &gb)?.is_zero())
}

/// Greedy minimal generating set of the submodule generated by `gens`
/// (modulo ctx): process by ascending degree and keep a generator exactly
/// when it is not in the span of those already kept. Graded Nakayama
/// makes the greedy set minimal.
pub fn minimal_gens_of_submodule(
    ring: &Arc<PolyRing>,
    ambient: &FreeModule,
    gens: &[Vector],
    ctx: Option<&QuotientCtx>,
) -> Result<Vec<Vector>> {
    let mut indexed: Vec<(i64, usize, Vector)> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let g = match ctx {
            Some(c) => c.reduce_vector(g)?,
            None => g.clone(),
        };
        if let Some(d) = g.degree_in(ambient)? {
            indexed.push((d, i, g));
        }
    }
    indexed.sort_by_key(|(d, i, _)| (*d, *i));
    let mut kept: Vec<Vector> = Vec::new();
    // TODO: reuse the pair queue across greedy steps instead of
    // rebuilding the basis for every accepted generator
    for (_, _, g) in indexed {
        if !in_submodule_ctx(ring, ambient, &kept, &g, ctx)? {
            kept.push(g);
        }
    }
    Ok(kept)
}

// ---------------------------------------------------------------------------
// Presentation-level operations.

/// Minimal presentation: eliminate unit pivots (graded Nakayama on the
/// generators), then minimalize the relation columns. Also returns the
/// map sending the new generators to their representatives among the old.
pub fn minimal_presentation(p: &Presentation) -> Result<(Presentation, ModuleMap)> {
    let ring = p.ring().clone();
    let ctx = p.ctx.clone();
    let mut rel = match &ctx {
        Some(c) => c.reduce_map(&p.relations)?,
        None => p.relations.clone(),
    };
    let mut kept_rows: Vec<usize> = (0..rel.target.rank()).collect();

    // unit-pivot elimination, row-major scan
    loop {
        let mut pivot = None;
        'scan: for i in 0..rel.target.rank() {
            for j in 0..rel.cols.len() {
                let e = rel.entry(i, j);
                if !e.is_zero() && !e.constant_coefficient().is_zero() {
                    pivot = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (pi, pj) = match pivot {
            None => break,
            Some(x) => x,
        };
        let u = rel.entry(pi, pj).constant_coefficient();
        let uinv = u.inv()?;
        let pivot_col = rel.cols[pj].clone();
        let mut new_cols = Vec::new();
        for (j, col) in rel.cols.iter().enumerate() {
            if j == pj {
                continue;
            }
            let factor = col.entries[pi].mul(&Polynomial::constant(&ring, uinv.clone()))?;
            let adjusted = col.sub(&pivot_col.scale_poly(&factor)?)?;
            new_cols.push((rel.source.twists[j], adjusted));
        }
        // drop row pi
        let rows: Vec<usize> = (0..rel.target.rank()).filter(|&r| r != pi).collect();
        let new_target = FreeModule::new(rows.iter().map(|&r| rel.target.twists[r]).collect());
        let cols: Vec<Vector> = new_cols
            .iter()
            .map(|(_, c)| Vector {
                ring: ring.clone(),
                entries: rows.iter().map(|&r| c.entries[r].clone()).collect(),
            })
            .collect();
        let twists: Vec<i64> = new_cols.iter().map(|(t, _)| *t).collect();
        rel = ModuleMap::from_columns_with_twists(&ring, new_target, FreeModule::new(twists), cols)?;
        if let Some(c) = &ctx {
            rel = c.reduce_map(&rel)?;
        }
        kept_rows.remove(pi);
    }

    // minimalize relation columns
    let min_cols = minimal_gens_of_submodule(&ring, &rel.target, &rel.cols, ctx.as_ref())?;
    let relations = if min_cols.is_empty() {
        ModuleMap::zero_map(&ring, FreeModule::zero(), rel.target.clone())
    } else {
        ModuleMap::from_columns(&ring, rel.target.clone(), min_cols)?
    };

    let old_rank = p.ambient().rank();
    let reps = ModuleMap::from_columns_with_twists(
        &ring,
        p.ambient().clone(),
        relations.target.clone(),
        kept_rows
            .iter()
            .map(|&r| Vector::unit(&ring, old_rank, r))
            .collect(),
    )?;
    Ok((Presentation { relations, ctx }, reps))
}

/// Number of minimal generators (dim of M/mM over the context).
pub fn minimal_generator_count(p: &Presentation) -> Result<usize> {
    Ok(minimal_presentation(p)?.0.ambient().rank())
}

pub fn is_zero_module(p: &Presentation) -> Result<bool> {
    Ok(minimal_generator_count(p)? == 0)
}

/// Hilbert function of the cokernel in degrees 0..=bound, by degreewise
/// linear algebra.
pub fn hilbert_function(p: &Presentation, bound: i64) -> Result<Vec<usize>> {
    (0..=bound).map(|d| hilbert_at(p, d)).collect()
}

pub fn hilbert_at(p: &Presentation, d: i64) -> Result<usize> {
    linalg::coker_dim_at_degree(
        p.ring(),
        p.ambient(),
        &p.relations.cols,
        d,
        p.ctx.as_ref(),
    )
}

/// Hilbert values over an arbitrary degree window (twists may be
/// negative).
pub fn hilbert_window(p: &Presentation, lo: i64, hi: i64) -> Result<Vec<usize>> {
    (lo..=hi).map(|d| hilbert_at(p, d)).collect()
}

/// Base change M ⊗ R/(ideal): relations reduced modulo the context, zero
/// columns dropped, context attached.
pub fn base_change_quotient(p: &Presentation, ctx: &QuotientCtx) -> Result<Presentation> {
    let merged = match &p.ctx {
        None => ctx.clone(),
        Some(c) => c.extended(&ctx.gens)?,
    };
    let ring = p.ring().clone();
    let mut cols = Vec::new();
    let mut twists = Vec::new();
    for (j, c) in p.relations.cols.iter().enumerate() {
        let r = merged.reduce_vector(c)?;
        if !r.is_zero() {
            cols.push(r);
            twists.push(p.relations.source.twists[j]);
        }
    }
    let relations = ModuleMap::from_columns_with_twists(
        &ring,
        p.ambient().clone(),
        FreeModule::new(twists),
        cols,
    )?;
    Ok(Presentation { relations, ctx: Some(merged) })
}

/// Functionals on the presented module: generators of ker(Bᵀ) over the
/// context, each row vector being a functional on the ambient generators.
pub fn hom_into_ring(p: &Presentation) -> Result<ModuleMap> {
    kernel_ctx(&p.relations.transpose(), p.ctx.as_ref())
}

/// Order ideal of the k-th generator: all values f(generator_k) as f runs
/// over Hom(S, ring). Computed as the k-th entries of a generating set of
/// ker(Bᵀ).
pub fn hom_of_submodule(p: &Presentation, beta_index: usize) -> Result<Ideal> {
    if beta_index >= p.ambient().rank() {
        return Err(EngineError::Structural(format!(
            "generator index {beta_index} out of range (rank {})",
            p.ambient().rank()
        )));
    }
    let hom = hom_into_ring(p)?;
    let entries: Vec<Polynomial> = hom
        .cols
        .iter()
        .map(|c| c.entries[beta_index].clone())
        .filter(|f| !f.is_zero())
        .collect();
    Ideal::new(p.ring(), entries)
}

/// Annihilator {r : r·M = 0}, computed exactly by one blocked kernel:
/// r ↦ (r e_1, ..., r e_k) into ⊕_j F0(-t_j) with the relations in each
/// block. For context presentations the result contains the context ideal.
pub fn annihilator(p: &Presentation) -> Result<Ideal> {
    let ring = p.ring().clone();
    let amb = p.ambient();
    let k = amb.rank();
    if k == 0 {
        // zero module: annihilator is the unit ideal
        return Ideal::new(&ring, vec![Polynomial::one(&ring)]);
    }
    let full_rel = p.relations_with_ctx()?;

    // blocked target: block j is F0 shifted by -t_j
    let mut target_twists = Vec::new();
    for j in 0..k {
        for t in &amb.twists {
            target_twists.push(t - amb.twists[j]);
        }
    }
    let target = FreeModule::new(target_twists);

    // first column: the stacked identity element (degree 0 in every block)
    let mut stacked = Vector::zero(&ring, k * k);
    for j in 0..k {
        stacked.entries[j * k + j] = Polynomial::one(&ring);
    }
    let mut cols = vec![stacked];
    let mut twists = vec![0i64];
    // relations per block
    for j in 0..k {
        for (c, col) in full_rel.cols.iter().enumerate() {
            let mut v = Vector::zero(&ring, k * k);
            for (i, e) in col.entries.iter().enumerate() {
                v.entries[j * k + i] = e.clone();
            }
            cols.push(v);
            twists.push(full_rel.source.twists[c] - amb.twists[j]);
        }
    }
    let big = ModuleMap::from_columns_with_twists(&ring, target, FreeModule::new(twists), cols)?;
    let ker = syzygy_matrix(&big)?;
    let gens: Vec<Polynomial> = ker
        .cols
        .iter()
        .map(|c| c.entries[0].clone())
        .filter(|f| !f.is_zero())
        .collect();
    Ideal::new(&ring, gens)
}
