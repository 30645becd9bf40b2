//! Order ideals of minimal syzygy generators: the grade checker, the
//! free-splitting lemma, Tor-vanishing regular sequences, and the
//! nonzerodivisor check for minimal generators of ideals.

use std::collections::HashMap;
use std::sync::Arc;

use crate::complexes::{
    free_resolution, grade_ideal, grade_ideal_ctx, resolve, tor_module, GradeValue, Resolution,
};
use crate::error::{EngineError, Result};
use crate::module::{FreeModule, ModuleMap, Vector};
use crate::modules::{
    annihilator, hom_into_ring, kernel_ctx, minimal_gens_of_submodule, minimal_presentation,
    Ideal, Presentation, QuotientCtx,
};
use crate::poly::Polynomial;
use crate::ring::PolyRing;
use crate::scalar::Scalar;

/// Small deterministic generator for seeded probes and searches.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Small scalar in {-2,-1,0,1,2}.
    pub fn small_coeff(&mut self, field: crate::scalar::FieldKind) -> Scalar {
        let v = (self.below(5) as i64) - 2;
        Scalar::from_i64(field, v)
    }
}

// ---------------------------------------------------------------------------
// The checker.

#[derive(Clone, Debug)]
pub struct OicEntry {
    pub syzygy_index: usize,
    pub generator: String,
    pub order_ideal: Vec<String>,
    pub entries_ideal_contained: bool,
    pub grade: GradeValue,
    pub entries_grade: GradeValue,
    pub required: usize,
    pub pass: bool,
    pub probe: bool,
}

#[derive(Clone, Debug)]
pub struct OicReport {
    pub entries: Vec<OicEntry>,
    pub projective_dimension: usize,
    pub truncated: bool,
    pub overall_pass: bool,
}

impl OicReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "projective_dimension": self.projective_dimension,
            "truncated": self.truncated,
            "overall": if self.overall_pass { "PASS" } else { "FAIL" },
            "entries": self.entries.iter().map(|e| serde_json::json!({
                "syzygy": e.syzygy_index,
                "generator": e.generator,
                "order_ideal": e.order_ideal,
                "entries_ideal_contained": e.entries_ideal_contained,
                "grade": e.grade.to_string(),
                "entries_grade": e.entries_grade.to_string(),
                "required": e.required,
                "verdict": if e.pass { "PASS" } else { "FAIL" },
                "probe": e.probe,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn display_table(&self) -> String {
        let mut out = String::new();
        out.push_str("syz gen                grade required verdict\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{:>3} {:<20} {:>5} {:>8} {}{}\n",
                e.syzygy_index,
                e.generator,
                e.grade.to_string(),
                e.required,
                if e.pass { "PASS" } else { "FAIL" },
                if e.probe { " (probe)" } else { "" },
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.overall_pass { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Grade with a cache keyed by the canonical Groebner basis.
fn cached_grade(
    cache: &mut HashMap<String, GradeValue>,
    ideal: &Ideal,
) -> Result<GradeValue> {
    if ideal.is_unit() {
        return Ok(GradeValue::Infinite);
    }
    if ideal.is_zero() {
        return Ok(GradeValue::Infinite);
    }
    let key = ideal
        .groebner()
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(";");
    if let Some(g) = cache.get(&key) {
        return Ok(*g);
    }
    let g = grade_ideal(ideal)?;
    cache.insert(key, g);
    Ok(g)
}

/// Order ideal of the k-th minimal generator of the i-th syzygy of a
/// resolved module: the k-th entries of a generating set of the
/// functionals on that syzygy.
pub fn order_ideal_at(res: &Resolution, i: usize, k: usize) -> Result<Ideal> {
    let c = &res.complex;
    if i == 0 || i > c.top() {
        return Err(EngineError::Structural(format!("syzygy index {i} out of range")));
    }
    let ring = &c.ring;
    let rel = if i < c.top() {
        c.differential(i + 1)
    } else {
        ModuleMap::zero_map(ring, FreeModule::zero(), c.module(i))
    };
    let pres = Presentation::new(rel, c.ctx.clone());
    crate::modules::hom_of_submodule(&pres, k)
}

/// Full checker: for every syzygy index up to `max_i` and every minimal
/// generator (plus optional seeded unit-combination probes), compute the
/// order ideal, its grade, and the entries-ideal containment, and compare
/// the grade with the required lower bound.
pub fn check_oic(p: &Presentation, max_i: usize, probes: usize, seed: u64) -> Result<OicReport> {
    let res = resolve(p)?;
    let pd = res.length();
    let c = &res.complex;
    let ring = c.ring.clone();
    let mut cache: HashMap<String, GradeValue> = HashMap::new();
    let mut entries = Vec::new();
    let mut rng = SplitMix64::new(seed);

    let top_i = max_i.min(pd);
    for i in 1..=top_i {
        // functionals on the i-th syzygy, computed once
        let rel = if i < c.top() {
            c.differential(i + 1)
        } else {
            ModuleMap::zero_map(&ring, FreeModule::zero(), c.module(i))
        };
        let pres = Presentation::new(rel, c.ctx.clone());
        let hom = hom_into_ring(&pres)?;
        let d_i = c.differential(i);
        let rank = c.module(i).rank();

        let mut eval = |coeffs: &Vector, label: String, probe: bool| -> Result<OicEntry> {
            // order ideal of the combination: functional values
            let oi_gens: Vec<Polynomial> = hom
                .cols
                .iter()
                .map(|col| {
                    let mut acc = Polynomial::zero(&ring);
                    for (k, c_k) in coeffs.entries.iter().enumerate() {
                        acc = acc.add(&col.entries[k].mul(c_k)?)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            let oi = Ideal::new(&ring, oi_gens)?;
            // the syzygy element itself and its entries ideal
            let beta = d_i.apply(coeffs)?;
            let entries_ideal = Ideal::new(&ring, beta.entries.clone())?;
            let contained = oi.contains_ideal(&entries_ideal)?;
            let grade = cached_grade(&mut cache, &oi)?;
            let entries_grade = cached_grade(&mut cache, &entries_ideal)?;
            Ok(OicEntry {
                syzygy_index: i,
                generator: label,
                order_ideal: oi.groebner().iter().map(|g| g.to_string()).collect(),
                entries_ideal_contained: contained,
                grade,
                entries_grade,
                required: i,
                pass: grade.at_least(i),
                probe,
            })
        };

        for k in 0..rank {
            let e = Vector::unit(&ring, rank, k);
            entries.push(eval(&e, format!("e{k}"), false)?);
        }
        // seeded unit combinations within a twist class
        if probes > 0 && rank > 1 {
            let twists = c.module(i).twists.clone();
            for pnum in 0..probes {
                // pick a twist value with at least two generators
                let mut classes: Vec<i64> = twists.clone();
                classes.sort();
                classes.dedup();
                let candidates: Vec<i64> = classes
                    .into_iter()
                    .filter(|t| twists.iter().filter(|u| *u == t).count() >= 2)
                    .collect();
                if candidates.is_empty() {
                    break;
                }
                let t = candidates[(rng.below(candidates.len() as u64)) as usize];
                let mut coeffs = Vector::zero(&ring, rank);
                let mut nonzero = false;
                for (k, tw) in twists.iter().enumerate() {
                    if *tw == t {
                        let s = rng.small_coeff(ring.field);
                        if !s.is_zero() {
                            nonzero = true;
                        }
                        coeffs.entries[k] = Polynomial::constant(&ring, s);
                    }
                }
                if !nonzero {
                    // force a unit so the combination is a minimal generator
                    let k = twists.iter().position(|u| *u == t).unwrap();
                    coeffs.entries[k] = Polynomial::one(&ring);
                }
                entries.push(eval(&coeffs, format!("probe{pnum}"), true)?);
            }
        }
    }

    let overall_pass = entries.iter().all(|e| e.pass) && !res.truncated;
    Ok(OicReport {
        entries,
        projective_dimension: pd,
        truncated: res.truncated,
        overall_pass,
    })
}

// ---------------------------------------------------------------------------
// Free splitting.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitStatus {
    Complete,
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct FreeSplitResult {
    /// Rank of the module (alternating sum of Betti numbers, i.e. the
    /// Hilbert-series numerator at 1).
    pub rank: i64,
    /// Chosen basic generators, as coefficient vectors on the minimal
    /// generators of the module.
    pub chosen: Vec<Vector>,
    /// The quotient by the free submodule they span.
    pub quotient: Presentation,
    /// Hom(quotient, ring) = 0, certifying positive grade.
    pub hom_vanishes: bool,
    pub status: SplitStatus,
}

/// Split off a free submodule generated by part of a minimal generating
/// set so the quotient has positive grade. Candidates are minimal
/// generators first, then seeded scalar combinations within a twist
/// class; each accepted candidate must generate freely (zero
/// annihilator). Search exhaustion is a legal Inconclusive outcome.
pub fn free_split(p: &Presentation, seed: u64) -> Result<FreeSplitResult> {
    let (m_min, _) = minimal_presentation(p)?;
    let ring = m_min.ring().clone();
    let ctx = m_min.ctx.clone();
    let res = free_resolution(&m_min, ring.nvars() + 1 + ctx.as_ref().map(|c| c.gens.len()).unwrap_or(0))?;
    if res.truncated {
        return Ok(FreeSplitResult {
            rank: 0,
            chosen: vec![],
            quotient: m_min,
            hom_vanishes: false,
            status: SplitStatus::Inconclusive("resolution truncated; rank unknown".into()),
        });
    }
    let rank = res.betti().rank_alternating();
    let mut rng = SplitMix64::new(seed);

    let mut current = m_min.clone();
    let mut chosen: Vec<Vector> = Vec::new();
    for _step in 0..rank.max(0) {
        let rank0 = current.ambient().rank();
        // candidate coefficient vectors: unit vectors, then combinations
        let mut candidates: Vec<Vector> = (0..rank0)
            .map(|g| Vector::unit(&ring, rank0, g))
            .collect();
        let twists = current.ambient().twists.clone();
        for _ in 0..50 {
            let mut classes: Vec<i64> = twists.clone();
            classes.sort();
            classes.dedup();
            if classes.is_empty() {
                break;
            }
            let t = classes[(rng.below(classes.len() as u64)) as usize];
            let mut v = Vector::zero(&ring, rank0);
            let mut any = false;
            for (k, tw) in twists.iter().enumerate() {
                if *tw == t {
                    let s = rng.small_coeff(ring.field);
                    if !s.is_zero() {
                        any = true;
                    }
                    v.entries[k] = Polynomial::constant(&ring, s);
                }
            }
            if any {
                candidates.push(v);
            }
        }
        let mut found = None;
        for cand in candidates {
            if cand.is_zero() {
                continue;
            }
            // annihilator of the candidate element must vanish
            let alpha_col = ModuleMap::from_columns_with_twists(
                &ring,
                current.ambient().clone(),
                FreeModule::new(vec![cand
                    .degree_in(current.ambient())?
                    .unwrap_or(0)]),
                vec![cand.clone()],
            )?;
            let aug = alpha_col.hcat(&current.relations)?;
            let ker = kernel_ctx(&aug, ctx.as_ref())?;
            let mut ann_zero = true;
            for col in &ker.cols {
                let r = &col.entries[0];
                let trivial = match &ctx {
                    None => r.is_zero(),
                    Some(c) => c.contains(r)?,
                };
                if !trivial {
                    ann_zero = false;
                    break;
                }
            }
            if ann_zero {
                found = Some((cand, alpha_col));
                break;
            }
        }
        match found {
            None => {
                return Ok(FreeSplitResult {
                    rank,
                    chosen,
                    quotient: current,
                    hom_vanishes: false,
                    status: SplitStatus::Inconclusive(
                        "no basic generator found within the search budget".into(),
                    ),
                })
            }
            Some((cand, alpha_col)) => {
                chosen.push(cand);
                let new_rel = current.relations.hcat(&alpha_col)?;
                current = Presentation::new(new_rel, ctx.clone());
            }
        }
    }
    // positive grade of the quotient: no nonzero functionals into the ring
    let hom = hom_into_ring(&current)?;
    let mut hom_vanishes = true;
    'outer: for col in &hom.cols {
        for e in &col.entries {
            let trivial = match &ctx {
                None => e.is_zero(),
                Some(c) => c.contains(e)?,
            };
            if !trivial {
                hom_vanishes = false;
                break 'outer;
            }
        }
    }
    Ok(FreeSplitResult {
        rank,
        chosen,
        quotient: current,
        hom_vanishes,
        status: SplitStatus::Complete,
    })
}

// ---------------------------------------------------------------------------
// Tor-vanishing regular sequences.

#[derive(Clone, Debug)]
pub struct TorSeqCertificate {
    pub sequence: Vec<Polynomial>,
    pub expected_length: usize,
    /// Per element: annihilator-of-multiplication vanishes modulo the
    /// predecessors (re-verified over the base ring at the end).
    pub nzd_ok: Vec<bool>,
    pub partner_label: String,
    pub partner_regular: bool,
    /// (homological index, Tor vanished) against the partner module.
    pub tor_checks: Vec<(usize, bool)>,
    pub status: SplitStatus,
}

impl TorSeqCertificate {
    pub fn all_ok(&self) -> bool {
        self.status == SplitStatus::Complete
            && self.sequence.len() == self.expected_length
            && self.nzd_ok.iter().all(|b| *b)
            && self.partner_regular
            && self.tor_checks.iter().all(|(_, ok)| *ok)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sequence": self.sequence.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "expected_length": self.expected_length,
            "nzd_ok": self.nzd_ok,
            "partner": self.partner_label,
            "partner_regular": self.partner_regular,
            "tor_checks": self.tor_checks,
            "status": match &self.status {
                SplitStatus::Complete => "COMPLETE".to_string(),
                SplitStatus::Inconclusive(w) => format!("INCONCLUSIVE: {w}"),
            },
            "all_ok": self.all_ok(),
        })
    }
}

/// Is x a nonzerodivisor modulo the ideal generated by `prev` (and the
/// ring context None)?
fn is_nzd_mod(ring: &Arc<PolyRing>, x: &Polynomial, prev: &[Polynomial]) -> Result<bool> {
    let ctx = if prev.is_empty() {
        None
    } else {
        Some(QuotientCtx::new(ring, prev.to_vec())?)
    };
    if let Some(c) = &ctx {
        if c.contains(x)? {
            return Ok(false);
        }
    } else if x.is_zero() {
        return Ok(false);
    }
    let mult = ModuleMap::from_columns(
        ring,
        FreeModule::std(1),
        vec![Vector { ring: ring.clone(), entries: vec![x.clone()] }],
    )?;
    let ker = kernel_ctx(&mult, ctx.as_ref())?;
    for col in &ker.cols {
        let w = &col.entries[0];
        let trivial = match &ctx {
            None => w.is_zero(),
            Some(c) => c.contains(w)?,
        };
        if !trivial {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Build a regular sequence of length pd(M) such that Tor_j(M, N)
/// vanishes for j > 0 whenever the sequence is N-regular: split off the
/// free part, pick a nonzerodivisor in the annihilator of the quotient,
/// embed into the quotient ring, and recurse; then validate against a
/// concrete partner N = R/(variable).
pub fn tor_vanishing_sequence(p: &Presentation, seed: u64) -> Result<TorSeqCertificate> {
    let ring = p.ring().clone();
    let (m_min, _) = minimal_presentation(p)?;
    let res = resolve(&m_min)?;
    if res.truncated {
        return Err(EngineError::Truncated(res.complex.top()));
    }
    let h = res.length();
    let mut sequence: Vec<Polynomial> = Vec::new();
    let mut status = SplitStatus::Complete;

    let mut current = m_min.clone();
    let mut rng = SplitMix64::new(seed);
    for remaining in (1..=h).rev() {
        // split off the free part so the quotient has positive grade
        let split = free_split(&current, rng.next_u64())?;
        if split.status != SplitStatus::Complete || !split.hom_vanishes {
            status = SplitStatus::Inconclusive(format!(
                "free splitting failed with {} elements found",
                sequence.len()
            ));
            break;
        }
        let mprime = split.quotient;
        // pick a nonzerodivisor in the annihilator of the quotient
        let ann = annihilator(&mprime)?;
        let prev: Vec<Polynomial> = mprime
            .ctx
            .as_ref()
            .map(|c| c.gens.clone())
            .unwrap_or_default();
        let mut pick: Option<Polynomial> = None;
        for g in ann.groebner() {
            let reduced_ok = is_nzd_mod(&ring, g, &prev)?;
            if reduced_ok {
                pick = Some(g.clone());
                break;
            }
        }
        if pick.is_none() {
            // bounded seeded combinations of annihilator generators of
            // equal degree
            let gens = ann.groebner();
            for _ in 0..50 {
                if gens.is_empty() {
                    break;
                }
                let d = gens[(rng.below(gens.len() as u64)) as usize]
                    .total_degree()
                    .unwrap_or(1);
                let mut acc = Polynomial::zero(&ring);
                for g in gens {
                    if g.total_degree() == Some(d) {
                        acc = acc.add(&g.scale(&rng.small_coeff(ring.field))?)?;
                    }
                }
                if !acc.is_zero() && is_nzd_mod(&ring, &acc, &prev)? {
                    pick = Some(acc);
                    break;
                }
            }
        }
        let x = match pick {
            Some(x) => x,
            None => {
                status = SplitStatus::Inconclusive(format!(
                    "no nonzerodivisor found in the annihilator after {} elements",
                    sequence.len()
                ));
                break;
            }
        };
        sequence.push(x.clone());
        if remaining == 1 {
            break;
        }
        // embed the quotient over the extended context and continue
        let emb = crate::embeddings::embed_module(&mprime, &[x])?;
        current = emb.envelope;
    }

    // re-verify regularity over the base ring
    let mut nzd_ok = Vec::new();
    for k in 0..sequence.len() {
        nzd_ok.push(is_nzd_mod(&ring, &sequence[k], &sequence[0..k])?);
    }

    // choose a partner N = R/(v) on which the sequence stays regular
    let mut partner: Option<(String, Presentation)> = None;
    'vars: for vi in 0..ring.nvars() {
        let v = Polynomial::variable(&ring, vi);
        let mut prev = vec![v.clone()];
        for x in &sequence {
            if !is_nzd_mod(&ring, x, &prev)? {
                continue 'vars;
            }
            prev.push(x.clone());
        }
        partner = Some((
            format!("quotient by {}", ring.vars[vi]),
            Presentation::cyclic(&ring, &[v])?,
        ));
        break;
    }
    let (partner_label, partner_pres, partner_regular) = match partner {
        Some((label, pres)) => (label, pres, true),
        None => (
            "the ring itself".to_string(),
            Presentation::free(&ring, FreeModule::std(1), None),
            true,
        ),
    };

    let mut tor_checks = Vec::new();
    for j in 1..=(h + 1) {
        let t = tor_module(&m_min, &partner_pres, j)?;
        tor_checks.push((j, crate::modules::is_zero_module(&t)?));
    }

    Ok(TorSeqCertificate {
        sequence,
        expected_length: h,
        nzd_ok,
        partner_label,
        partner_regular,
        tor_checks,
        status,
    })
}

// ---------------------------------------------------------------------------
// Nonzerodivisor check for ideal generators.

#[derive(Clone, Debug)]
pub struct NzdReport {
    pub generators: Vec<(String, bool)>,
    pub grade: GradeValue,
    pub quotient_pd: usize,
    pub height: usize,
    /// Whether the grade-2 = height-2 hypothesis profile holds.
    pub profile_grade2_height2: bool,
    pub all_nzd: bool,
}

impl NzdReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "generators": self.generators.iter().map(|(g, ok)| serde_json::json!({
                "generator": g,
                "verdict": if *ok { "NZD" } else { "FAIL" },
            })).collect::<Vec<_>>(),
            "grade": self.grade.to_string(),
            "quotient_pd": self.quotient_pd,
            "height": self.height,
            "profile_grade2_height2": self.profile_grade2_height2,
            "all_nzd": self.all_nzd,
        })
    }
}

/// Multiplicity of the root t = 1 of the Hilbert-series numerator; over
/// the graded polynomial ring this is the codimension (height) of the
/// support.
pub fn height_from_numerator(coeffs: &[i64]) -> usize {
    let mut cur: Vec<i64> = coeffs.to_vec();
    let mut s = 0usize;
    loop {
        if cur.iter().all(|c| *c == 0) {
            return s;
        }
        if cur.iter().sum::<i64>() != 0 {
            return s;
        }
        // divide by (1 - t): prefix sums, dropping the final zero
        let mut acc = 0i64;
        let mut next = Vec::with_capacity(cur.len());
        for c in &cur {
            acc += c;
            next.push(acc);
        }
        next.pop();
        cur = next;
        s += 1;
    }
}

pub fn nzd_check(ideal: &Ideal) -> Result<NzdReport> {
    let ring = ideal.ring.clone();
    // minimal generators of the ideal
    let vecs: Vec<Vector> = ideal
        .gens
        .iter()
        .map(|g| Vector { ring: ring.clone(), entries: vec![g.clone()] })
        .collect();
    let min_gens = minimal_gens_of_submodule(&ring, &FreeModule::std(1), &vecs, None)?;
    let gens: Vec<Polynomial> = min_gens.into_iter().map(|v| v.entries[0].clone()).collect();

    let mut ann_witnesses = Vec::new();
    for g in &gens {
        // (0 : g) via the kernel of multiplication
        let mult = ModuleMap::from_columns(
            &ring,
            FreeModule::std(1),
            vec![Vector { ring: ring.clone(), entries: vec![g.clone()] }],
        )?;
        let ker = crate::groebner::syzygy_matrix(&mult)?;
        let witnesses: Vec<Polynomial> = ker
            .cols
            .iter()
            .map(|c| c.entries[0].clone())
            .filter(|w| !w.is_zero())
            .collect();
        ann_witnesses.push((g.clone(), witnesses));
    }

    let quotient = Presentation::cyclic(&ring, &gens)?;
    let res = resolve(&quotient)?;
    if res.truncated {
        return Err(EngineError::Truncated(res.complex.top()));
    }
    let grade = grade_ideal(ideal)?;
    let (_, coeffs) = res.betti().hilbert_numerator();
    let height = height_from_numerator(&coeffs);
    assemble_nzd_report(ann_witnesses, grade, res.length(), height)
}

/// Assemble the verdicts from computed annihilator witnesses. Split out
/// so the negative control can inject a fake witness.
pub fn assemble_nzd_report(
    ann_witnesses: Vec<(Polynomial, Vec<Polynomial>)>,
    grade: GradeValue,
    quotient_pd: usize,
    height: usize,
) -> Result<NzdReport> {
    let generators: Vec<(String, bool)> = ann_witnesses
        .iter()
        .map(|(g, ws)| (g.to_string(), ws.is_empty()))
        .collect();
    let all_nzd = generators.iter().all(|(_, ok)| *ok);
    Ok(NzdReport {
        generators,
        grade,
        quotient_pd,
        height,
        profile_grade2_height2: grade == GradeValue::Finite(2) && height == 2,
        all_nzd,
    })
}

/// Grade-reduction comparison in the shape of the first-syzygy descent:
/// for a nonzerodivisor y inside the entries ideal, the order-ideal grade
/// must be at least one more than the grade of the entries ideal over the
/// quotient by y. Returns None when no generator of the entries ideal is
/// a nonzerodivisor.
pub fn reduction_consistency(
    order_ideal_grade: GradeValue,
    entries_ideal: &Ideal,
) -> Result<Option<bool>> {
    let ring = entries_ideal.ring.clone();
    let mut y = None;
    for g in entries_ideal.groebner() {
        if is_nzd_mod(&ring, g, &[])? {
            y = Some(g.clone());
            break;
        }
    }
    let y = match y {
        Some(y) => y,
        None => return Ok(None),
    };
    let ctx = QuotientCtx::new(&ring, vec![y])?;
    let reduced_grade = grade_ideal_ctx(entries_ideal, Some(&ctx))?;
    let ok = match (order_ideal_grade, reduced_grade) {
        (GradeValue::Infinite, _) => true,
        (GradeValue::Finite(_), GradeValue::Infinite) => true,
        (GradeValue::Finite(a), GradeValue::Finite(b)) => a > b,
    };
    Ok(Some(ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Arc<PolyRing> {
        PolyRing::rationals(&["x", "y", "z"])
    }

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(&ring(), s).unwrap()
    }

    fn residue_field() -> Presentation {
        Presentation::cyclic(&ring(), &[p("x"), p("y"), p("z")]).unwrap()
    }

    #[test]
    fn order_ideal_of_koszul_relation() {
        // first syzygy of the module (x,y,z): order ideal of a koszul
        // relation is generated by the two variables it involves
        let res = resolve(&residue_field()).unwrap();
        // syzygy index 2 of R/m is the first syzygy of the ideal
        let oi = order_ideal_at(&res, 2, 0).unwrap();
        let expected = Ideal::new(&ring(), vec![p("x"), p("y")]).unwrap();
        assert!(oi.contains_ideal(&expected).unwrap() && expected.contains_ideal(&oi).unwrap());
        assert_eq!(grade_ideal(&oi).unwrap(), GradeValue::Finite(2));
    }

    #[test]
    fn checker_passes_on_residue_field_with_exact_grades() {
        let report = check_oic(&residue_field(), 3, 0, 1).unwrap();
        assert!(report.overall_pass);
        assert_eq!(report.projective_dimension, 3);
        for e in &report.entries {
            match e.syzygy_index {
                1 => assert_eq!(e.grade, GradeValue::Finite(1)),
                2 => assert_eq!(e.grade, GradeValue::Finite(2)),
                3 => assert_eq!(e.grade, GradeValue::Infinite),
                _ => unreachable!(),
            }
            assert!(e.entries_ideal_contained);
        }
    }

    #[test]
    fn checker_vacuous_on_free_module() {
        let r = ring();
        let free = Presentation::free(&r, FreeModule::std(2), None);
        let report = check_oic(&free, 3, 0, 1).unwrap();
        assert!(report.overall_pass);
        assert!(report.entries.is_empty());
    }

    #[test]
    fn checker_with_probes_is_deterministic() {
        let a = check_oic(&residue_field(), 3, 3, 42).unwrap();
        let b = check_oic(&residue_field(), 3, 3, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.overall_pass);
    }

    #[test]
    fn free_split_of_mixed_module() {
        // M = R ⊕ R/(x,y): the free part splits off, leaving grade > 0
        let r = ring();
        let m = Presentation::free(&r, FreeModule::std(1), None)
            .direct_sum(&Presentation::cyclic(&r, &[p("x"), p("y")]).unwrap())
            .unwrap();
        let split = free_split(&m, 7).unwrap();
        assert_eq!(split.status, SplitStatus::Complete);
        assert_eq!(split.rank, 1);
        assert_eq!(split.chosen.len(), 1);
        assert!(split.hom_vanishes);
        // quotient is the torsion part
        assert!(crate::complexes::iso_evidence(
            &split.quotient,
            &Presentation::cyclic(&r, &[p("x"), p("y")]).unwrap(),
            0,
            5
        )
        .unwrap());
    }

    #[test]
    fn free_split_of_torsion_module_is_trivial() {
        let m = residue_field();
        let split = free_split(&m, 3).unwrap();
        assert_eq!(split.rank, 0);
        assert!(split.chosen.is_empty());
        assert!(split.hom_vanishes);
    }

    #[test]
    fn tor_sequence_for_plane_section() {
        let r = ring();
        let m = Presentation::cyclic(&r, &[p("x"), p("y")]).unwrap();
        let cert = tor_vanishing_sequence(&m, 11).unwrap();
        assert_eq!(cert.expected_length, 2);
        assert_eq!(cert.sequence.len(), 2);
        assert!(cert.all_ok(), "{:?}", cert);
        // the partner is the quotient by the remaining variable
        assert!(cert.partner_label.contains('z'));
    }

    #[test]
    fn tor_sequence_for_residue_field() {
        let cert = tor_vanishing_sequence(&residue_field(), 5).unwrap();
        assert_eq!(cert.expected_length, 3);
        assert_eq!(cert.sequence.len(), 3);
        assert!(cert.nzd_ok.iter().all(|b| *b));
        assert_eq!(cert.status, SplitStatus::Complete);
    }

    #[test]
    fn tor_sequence_trivial_for_free() {
        let r = ring();
        let free = Presentation::free(&r, FreeModule::std(1), None);
        let cert = tor_vanishing_sequence(&free, 1).unwrap();
        assert_eq!(cert.expected_length, 0);
        assert!(cert.sequence.is_empty());
        assert!(cert.all_ok());
    }

    #[test]
    fn nzd_check_on_regular_sequence_ideal() {
        let r = ring();
        let ideal = Ideal::new(&r, vec![p("x"), p("y")]).unwrap();
        let report = nzd_check(&ideal).unwrap();
        assert!(report.all_nzd);
        assert_eq!(report.grade, GradeValue::Finite(2));
        assert_eq!(report.height, 2);
        assert!(report.profile_grade2_height2);
    }

    #[test]
    fn nzd_check_on_determinantal_pair() {
        let r = ring();
        let ideal = Ideal::new(&r, vec![p("x^2 - y*z"), p("x*y")]).unwrap();
        let report = nzd_check(&ideal).unwrap();
        assert!(report.all_nzd);
        assert_eq!(report.grade, GradeValue::Finite(2));
        assert_eq!(report.height, 2);
    }

    #[test]
    fn nzd_negative_control_detects_injected_zerodivisor() {
        let r = ring();
        let grade = GradeValue::Finite(2);
        let fake = vec![
            (p("x"), vec![]),
            (p("y"), vec![p("z")]), // injected fake annihilator witness
        ];
        let report = assemble_nzd_report(fake, grade, 2, 2).unwrap();
        assert!(!report.all_nzd);
        assert!(!report.generators[1].1);
        let _ = r;
    }

    #[test]
    fn reduction_consistency_on_koszul_syzygy() {
        let res = resolve(&residue_field()).unwrap();
        let oi = order_ideal_at(&res, 2, 0).unwrap();
        let g = grade_ideal(&oi).unwrap();
        let beta = res.complex.differential(2).cols[0].clone();
        let entries = Ideal::new(&ring(), beta.entries.clone()).unwrap();
        let ok = reduction_consistency(g, &entries).unwrap();
        assert_eq!(ok, Some(true));
    }

    #[test]
    fn height_numerator_arithmetic() {
        // numerator of R/(x,y) over three variables: (1 - t)^2
        assert_eq!(height_from_numerator(&[1, -2, 1]), 2);
        // numerator of R itself: 1
        assert_eq!(height_from_numerator(&[1]), 0);
        // numerator of R/m: (1 - t)^3
        assert_eq!(height_from_numerator(&[1, -3, 3, -1]), 3);
    }
}
