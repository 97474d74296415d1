//! Bounded complexes of standard projectives with differentials recorded
//! as algebra elements: a map Ae_a -> Ae_b is right multiplication by an
//! element of e_a A e_b, and composing maps multiplies those elements
//! left to right. Shifts, cones, direct sums, tensor induction along an
//! algebra map, and the module realization used to cross-check the block
//! calculus against the module layer.
//!
//! Sign conventions (pinned in docs/CONVENTIONS.md): the n-th shift has
//! i-th term X^{i+n} and differential (-1)^n d^{i+n}; the cone of a
//! degree-zero chain map f: X -> Y has i-th term X^{i+1} (+) Y^i with
//! (x, y) |-> (-x d_X, x f + y d_Y).

mod decompose;
mod homspace;

pub use decompose::{
    complexes_isomorphic, decompose, reduce, split_summands, Decomposition, SplitSummand,
};
pub(crate) use decompose::entries_from_module_matrix;
pub use homspace::{end_algebra_k, homotopy_hom, strict_end, EndK, HomotopyHomSpace, StrictEnd};

use crate::algebra::{ensure_same_algebra, AlgElem, AlgebraHom, FDAlgebra};
use crate::error::{QdeError, Result};
use crate::matrix::Matrix;
use crate::module::{is_isomorphic, left_ideal, projective_embedded, FDModule};
use crate::parse::ComplexSpec;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Matrix of algebra elements describing a map between direct sums of
/// standard projectives. `entries[r][c]` lies in e_{src[r]} A e_{dst[c]};
/// a row vector x maps to x · entries, and composing two matrices in
/// application order is the plain matrix product.
#[derive(Clone)]
pub struct AMatrix {
    pub algebra: Arc<FDAlgebra>,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub entries: Vec<Vec<AlgElem>>,
}

impl AMatrix {
    pub fn new(
        algebra: Arc<FDAlgebra>,
        src: Vec<usize>,
        dst: Vec<usize>,
        entries: Vec<Vec<AlgElem>>,
    ) -> Result<AMatrix> {
        if entries.len() != src.len() || entries.iter().any(|row| row.len() != dst.len()) {
            return Err(QdeError::DimMismatch("entry grid shape".into()));
        }
        for (r, row) in entries.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if v.len() != algebra.dim {
                    return Err(QdeError::DimMismatch("entry coordinate length".into()));
                }
                if algebra.block(src[r], dst[c])?.coords(v).is_none() {
                    return Err(QdeError::BlockMismatch(format!(
                        "entry ({r},{c}) does not lie in block ({}, {})",
                        src[r], dst[c]
                    )));
                }
            }
        }
        Ok(AMatrix { algebra, src, dst, entries })
    }

    pub fn zero(algebra: &Arc<FDAlgebra>, src: Vec<usize>, dst: Vec<usize>) -> AMatrix {
        let entries = src
            .iter()
            .map(|_| dst.iter().map(|_| algebra.zero_elem()).collect())
            .collect();
        AMatrix { algebra: algebra.clone(), src, dst, entries }
    }

    pub fn identity(algebra: &Arc<FDAlgebra>, comps: Vec<usize>) -> Result<AMatrix> {
        let mut m = AMatrix::zero(algebra, comps.clone(), comps);
        for r in 0..m.src.len() {
            m.entries[r][r] = algebra.idempotent(m.src[r])?;
        }
        Ok(m)
    }

    pub fn compose(&self, other: &AMatrix) -> Result<AMatrix> {
        if self.dst != other.src {
            return Err(QdeError::DimMismatch("composition components disagree".into()));
        }
        let a = &self.algebra;
        let mut out = AMatrix::zero(a, self.src.clone(), other.dst.clone());
        for r in 0..self.src.len() {
            for c in 0..other.dst.len() {
                let mut acc = a.zero_elem();
                for s in 0..self.dst.len() {
                    let p = a.mul(&self.entries[r][s], &other.entries[s][c]);
                    acc = a.add(&acc, &p);
                }
                out.entries[r][c] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &AMatrix) -> Result<AMatrix> {
        if self.src != other.src || self.dst != other.dst {
            return Err(QdeError::DimMismatch("sum components disagree".into()));
        }
        let mut out = self.clone();
        for r in 0..self.src.len() {
            for c in 0..self.dst.len() {
                out.entries[r][c] = self.algebra.add(&self.entries[r][c], &other.entries[r][c]);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> AMatrix {
        let mut out = self.clone();
        for row in &mut out.entries {
            for v in row.iter_mut() {
                *v = self.algebra.scale(c, v);
            }
        }
        out
    }

    pub fn neg(&self) -> AMatrix {
        self.scale(&self.algebra.field.from_i64(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|v| self.algebra.is_zero_elem(v)))
    }

    /// Every entry inside the radical.
    pub fn is_radical(&self) -> Result<bool> {
        let rad = self.algebra.radical_subspace()?;
        for row in &self.entries {
            for v in row {
                if !rad.contains(v) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Bounded complex of standard projectives. `terms[k]` lists the
/// projective indices in degree lo + k; `diffs[k]` maps degree lo + k to
/// degree lo + k + 1.
#[derive(Clone)]
pub struct ProjComplex {
    pub algebra: Arc<FDAlgebra>,
    pub lo: i32,
    pub terms: Vec<Vec<usize>>,
    pub diffs: Vec<AMatrix>,
}

impl ProjComplex {
    pub fn new(
        algebra: Arc<FDAlgebra>,
        lo: i32,
        terms: Vec<Vec<usize>>,
        diffs: Vec<AMatrix>,
    ) -> Result<ProjComplex> {
        if terms.is_empty() {
            return Ok(ProjComplex::zero(&algebra));
        }
        if diffs.len() + 1 != terms.len() {
            return Err(QdeError::DimMismatch("one differential between consecutive terms".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.src != terms[k] || d.dst != terms[k + 1] {
                return Err(QdeError::DimMismatch(format!(
                    "differential {k} does not match its terms"
                )));
            }
        }
        for k in 0..diffs.len().saturating_sub(1) {
            if !diffs[k].compose(&diffs[k + 1])?.is_zero() {
                return Err(QdeError::NotAComplex(format!(
                    "d({}) then d({}) is nonzero",
                    lo + k as i32,
                    lo + k as i32 + 1
                )));
            }
        }
        let x = ProjComplex { algebra, lo, terms, diffs };
        Ok(x.trimmed())
    }

    pub fn zero(algebra: &Arc<FDAlgebra>) -> ProjComplex {
        ProjComplex { algebra: algebra.clone(), lo: 0, terms: vec![vec![]], diffs: vec![] }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.terms.len() as i32 - 1
    }

    pub fn is_zero_complex(&self) -> bool {
        self.terms.iter().all(|t| t.is_empty())
    }

    /// Components in the given degree; empty outside the stored range.
    pub fn comps(&self, degree: i32) -> &[usize] {
        let k = degree - self.lo;
        if k < 0 || k as usize >= self.terms.len() {
            &[]
        } else {
            &self.terms[k as usize]
        }
    }

    /// Differential out of the given degree, zero-shaped outside range.
    pub fn diff(&self, degree: i32) -> AMatrix {
        let k = degree - self.lo;
        if k >= 0 && (k as usize) < self.diffs.len() {
            self.diffs[k as usize].clone()
        } else {
            AMatrix::zero(
                &self.algebra,
                self.comps(degree).to_vec(),
                self.comps(degree + 1).to_vec(),
            )
        }
    }

    fn trimmed(mut self) -> ProjComplex {
        while self.terms.len() > 1 && self.terms.last().map(|t| t.is_empty()) == Some(true) {
            self.terms.pop();
            self.diffs.pop();
        }
        while self.terms.len() > 1 && self.terms.first().map(|t| t.is_empty()) == Some(true) {
            self.terms.remove(0);
            self.diffs.remove(0);
            self.lo += 1;
        }
        if self.terms.len() == 1 && self.terms[0].is_empty() {
            self.lo = 0;
        }
        self
    }

    /// Total number of components equal to the given projective index.
    pub fn multiplicity(&self, i: usize) -> usize {
        self.terms.iter().map(|t| t.iter().filter(|&&c| c == i).count()).sum()
    }

    pub fn is_radical(&self) -> Result<bool> {
        for d in &self.diffs {
            if !d.is_radical()? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Stalk of one standard projective in the given degree.
pub fn projective_stalk(a: &Arc<FDAlgebra>, i: usize, degree: i32) -> Result<ProjComplex> {
    let n = a.num_projectives()?;
    if i >= n {
        return Err(QdeError::PreconditionFailed(format!("no idempotent with index {i}")));
    }
    ProjComplex::new(a.clone(), degree, vec![vec![i]], vec![])
}

/// The regular module as a degree-zero stalk: one component per
/// primitive idempotent.
pub fn regular_stalk(a: &Arc<FDAlgebra>) -> Result<ProjComplex> {
    let n = a.num_projectives()?;
    ProjComplex::new(a.clone(), 0, vec![(0..n).collect()], vec![])
}

/// Resolve a parsed complex block against its algebra.
pub fn make_complex(a: &Arc<FDAlgebra>, spec: &ComplexSpec) -> Result<ProjComplex> {
    let info = a
        .path_info
        .as_ref()
        .ok_or_else(|| QdeError::PreconditionFailed("complex needs a presented algebra".into()))?;
    let vertex_index = |label: &str| -> Result<usize> {
        info.presentation
            .quiver
            .vertices
            .iter()
            .position(|v| v == label)
            .ok_or_else(|| QdeError::PreconditionFailed(format!("unknown vertex {label}")))
    };
    if spec.terms.is_empty() {
        return Ok(ProjComplex::zero(a));
    }
    let lo = *spec.terms.keys().next().unwrap();
    let hi = *spec.terms.keys().next_back().unwrap();
    let mut terms: Vec<Vec<usize>> = Vec::new();
    for d in lo..=hi {
        let labels = spec.terms.get(&d).cloned().unwrap_or_default();
        terms.push(labels.iter().map(|l| vertex_index(l)).collect::<Result<_>>()?);
    }
    for d in spec.diffs.keys() {
        if *d < lo || *d >= hi {
            return Err(QdeError::DimMismatch(format!(
                "differential d({d}) outside the term range"
            )));
        }
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let k = (d - lo) as usize;
        let (src, dst) = (terms[k].clone(), terms[k + 1].clone());
        let m = match spec.diffs.get(&d) {
            None => AMatrix::zero(a, src, dst),
            Some(rows) => {
                // Written rows index the codomain, columns the domain.
                if rows.len() != dst.len() || rows.iter().any(|r| r.len() != src.len()) {
                    return Err(QdeError::DimMismatch(format!(
                        "d({d}) must be {} x {}",
                        dst.len(),
                        src.len()
                    )));
                }
                let mut entries = vec![vec![a.zero_elem(); dst.len()]; src.len()];
                for (wr, row) in rows.iter().enumerate() {
                    for (wc, expr) in row.iter().enumerate() {
                        entries[wc][wr] = info.resolve(expr)?;
                    }
                }
                AMatrix::new(a.clone(), src, dst, entries)?
            }
        };
        diffs.push(m);
    }
    ProjComplex::new(a.clone(), lo, terms, diffs)
}

/// The n-th shift: i-th term X^{i+n}, differential scaled by (-1)^n.
pub fn shift(x: &ProjComplex, n: i32) -> ProjComplex {
    let sign = x.algebra.field.from_i64(if n.rem_euclid(2) == 0 { 1 } else { -1 });
    ProjComplex {
        algebra: x.algebra.clone(),
        lo: x.lo - n,
        terms: x.terms.clone(),
        diffs: x.diffs.iter().map(|d| d.scale(&sign)).collect(),
    }
}

pub fn direct_sum(xs: &[&ProjComplex]) -> Result<ProjComplex> {
    let algebra = xs
        .first()
        .map(|x| x.algebra.clone())
        .ok_or_else(|| QdeError::PreconditionFailed("empty direct sum needs an algebra".into()))?;
    for x in xs {
        ensure_same_algebra(&algebra, &x.algebra, "complex direct sum")?;
    }
    let lo = xs.iter().map(|x| x.lo).min().unwrap();
    let hi = xs.iter().map(|x| x.hi()).max().unwrap();
    let mut terms = Vec::new();
    for d in lo..=hi {
        let mut t = Vec::new();
        for x in xs {
            t.extend_from_slice(x.comps(d));
        }
        terms.push(t);
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let src = terms[(d - lo) as usize].clone();
        let dst = terms[(d - lo) as usize + 1].clone();
        let mut m = AMatrix::zero(&algebra, src, dst);
        let mut roff = 0;
        let mut coff = 0;
        for x in xs {
            let b = x.diff(d);
            for r in 0..b.src.len() {
                for c in 0..b.dst.len() {
                    m.entries[roff + r][coff + c] = b.entries[r][c].clone();
                }
            }
            roff += b.src.len();
            coff += b.dst.len();
        }
        diffs.push(m);
    }
    ProjComplex::new(algebra, lo, terms, diffs)
}

/// Chain map of degree `shift_by`: per source degree i, a block matrix
/// X^i -> Y^{i + shift_by}.
#[derive(Clone)]
pub struct ChainMap {
    pub source: ProjComplex,
    pub target: ProjComplex,
    pub shift_by: i32,
    pub mats: Vec<AMatrix>,
}

impl ChainMap {
    pub fn new(
        source: ProjComplex,
        target: ProjComplex,
        shift_by: i32,
        mats: Vec<AMatrix>,
    ) -> Result<ChainMap> {
        if mats.len() != source.terms.len() {
            return Err(QdeError::DimMismatch("one matrix per source degree".into()));
        }
        for (k, m) in mats.iter().enumerate() {
            let d = source.lo + k as i32;
            if m.src != source.comps(d) || m.dst != target.comps(d + shift_by) {
                return Err(QdeError::DimMismatch(format!(
                    "chain map block at degree {d} has wrong components"
                )));
            }
        }
        Ok(ChainMap { source, target, shift_by, mats })
    }

    pub fn identity(x: &ProjComplex) -> Result<ChainMap> {
        let mats = (0..x.terms.len())
            .map(|k| AMatrix::identity(&x.algebra, x.terms[k].clone()))
            .collect::<Result<_>>()?;
        ChainMap::new(x.clone(), x.clone(), 0, mats)
    }

    pub fn zero(x: &ProjComplex, y: &ProjComplex, shift_by: i32) -> ChainMap {
        let mats = (0..x.terms.len())
            .map(|k| {
                let d = x.lo + k as i32;
                AMatrix::zero(&x.algebra, x.comps(d).to_vec(), y.comps(d + shift_by).to_vec())
            })
            .collect();
        ChainMap { source: x.clone(), target: y.clone(), shift_by, mats }
    }

    /// Block at the given source degree, zero-shaped outside range.
    pub fn mat_at(&self, degree: i32) -> AMatrix {
        let k = degree - self.source.lo;
        if k >= 0 && (k as usize) < self.mats.len() {
            self.mats[k as usize].clone()
        } else {
            AMatrix::zero(
                &self.source.algebra,
                self.source.comps(degree).to_vec(),
                self.target.comps(degree + self.shift_by).to_vec(),
            )
        }
    }

    /// The cocycle condition with the pinned sign: for every degree p,
    /// a^p d_Y^{n+p} = (-1)^n d_X^p a^{p+1}.
    pub fn verify(&self) -> Result<()> {
        let n = self.shift_by;
        let sign = self
            .source
            .algebra
            .field
            .from_i64(if n.rem_euclid(2) == 0 { 1 } else { -1 });
        for p in self.source.lo - 1..=self.source.hi() {
            let lhs = self.mat_at(p).compose(&self.target.diff(p + n))?;
            let rhs = self.source.diff(p).compose(&self.mat_at(p + 1))?.scale(&sign);
            let diff = lhs.add(&rhs.neg())?;
            if !diff.is_zero() {
                return Err(QdeError::VerificationFailed(format!(
                    "chain condition fails at degree {p}"
                )));
            }
        }
        Ok(())
    }

    /// First self, then g; shifts add, maps shift without signs.
    pub fn then(&self, g: &ChainMap) -> Result<ChainMap> {
        let n = self.shift_by;
        let mats = (0..self.source.terms.len())
            .map(|k| {
                let d = self.source.lo + k as i32;
                self.mat_at(d).compose(&g.mat_at(d + n))
            })
            .collect::<Result<_>>()?;
        ChainMap::new(self.source.clone(), g.target.clone(), n + g.shift_by, mats)
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        ChainMap::new(self.source.clone(), self.target.clone(), self.shift_by, mats)
    }

    pub fn scale(&self, c: &Scalar) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            shift_by: self.shift_by,
            mats: self.mats.iter().map(|m| m.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.is_zero())
    }
}

/// Mapping cone of a degree-zero chain map: term X^{i+1} (+) Y^i with
/// differential (x, y) |-> (-x d_X, x f + y d_Y).
pub fn cone(f: &ChainMap) -> Result<ProjComplex> {
    if f.shift_by != 0 {
        return Err(QdeError::PreconditionFailed("cone needs a degree-zero chain map".into()));
    }
    f.verify()?;
    let (x, y) = (&f.source, &f.target);
    let a = &x.algebra;
    let lo = (x.lo - 1).min(y.lo);
    let hi = x.hi().max(y.hi() + 1) - 1;
    let hi = hi.max(lo);
    let mut terms = Vec::new();
    for d in lo..=hi {
        let mut t = x.comps(d + 1).to_vec();
        t.extend_from_slice(y.comps(d));
        terms.push(t);
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let src = terms[(d - lo) as usize].clone();
        let dst = terms[(d - lo) as usize + 1].clone();
        let mut m = AMatrix::zero(a, src, dst);
        let dx = x.diff(d + 1);
        let fm = f.mat_at(d + 1);
        let dy = y.diff(d);
        let xn = x.comps(d + 1).len();
        for r in 0..dx.src.len() {
            for c in 0..dx.dst.len() {
                m.entries[r][c] = a.neg(&dx.entries[r][c]);
            }
            for c in 0..fm.dst.len() {
                m.entries[r][dx.dst.len() + c] = fm.entries[r][c].clone();
            }
        }
        for r in 0..dy.src.len() {
            for c in 0..dy.dst.len() {
                m.entries[xn + r][dx.dst.len() + c] = dy.entries[r][c].clone();
            }
        }
        diffs.push(m);
    }
    ProjComplex::new(a.clone(), lo, terms, diffs)
}

/// Direct sum of the standard projective modules making up one term,
/// realized through `projective_embedded` in component order.
pub fn term_module(x: &ProjComplex, degree: i32) -> Result<FDModule> {
    let comps = x.comps(degree);
    if comps.is_empty() {
        return Ok(FDModule::zero(x.algebra.clone()));
    }
    let mods: Vec<FDModule> = comps
        .iter()
        .map(|&i| Ok(projective_embedded(&x.algebra, i)?.0))
        .collect::<Result<_>>()?;
    let refs: Vec<&FDModule> = mods.iter().collect();
    FDModule::direct_sum(&refs)
}

/// The k-linear matrix of a block map on module coordinates: rows index
/// target coordinates, columns source coordinates, applied as M v.
pub fn amatrix_module_matrix(m: &AMatrix) -> Result<Matrix> {
    let a = &m.algebra;
    let field = a.field;
    let mut src_info = Vec::new();
    for &i in &m.src {
        src_info.push(projective_embedded(a, i)?);
    }
    let mut dst_info = Vec::new();
    for &j in &m.dst {
        dst_info.push(projective_embedded(a, j)?);
    }
    let sdim: usize = src_info.iter().map(|t| t.1.len()).sum();
    let ddim: usize = dst_info.iter().map(|t| t.1.len()).sum();
    let mut out = Matrix::zero(field, ddim, sdim);
    let mut coff = 0;
    for (r, (_, svecs, _)) in src_info.iter().enumerate() {
        for (sj, sv) in svecs.iter().enumerate() {
            let mut roff = 0;
            for (c, (_, dvecs, _)) in dst_info.iter().enumerate() {
                let img = a.mul(sv, &m.entries[r][c]);
                let mut cols = Matrix::zero(field, a.dim, dvecs.len());
                for (k, dv) in dvecs.iter().enumerate() {
                    for (row, v) in dv.iter().enumerate() {
                        if !v.is_zero() {
                            cols.set(row, k, v.clone());
                        }
                    }
                }
                let coords = cols
                    .solve(&img)
                    .ok_or_else(|| QdeError::Internal("entry image escapes its projective".into()))?;
                for (k, v) in coords.into_iter().enumerate() {
                    if !v.is_zero() {
                        out.set(roff + k, coff + sj, v);
                    }
                }
                roff += dvecs.len();
            }
        }
        coff += svecs.len();
    }
    Ok(out)
}

/// Tensor induction along an algebra map, with the per-degree unit maps
/// on module coordinates and the component matching.
pub struct InducedComplex {
    pub complex: ProjComplex,
    /// Per degree, per original component: position among the induced
    /// components, or None when the projective collapses to zero.
    pub comp_map: Vec<Vec<Option<usize>>>,
    /// Per degree: module coordinates of x's term to module coordinates
    /// of the induced term, sending m to 1 (x) m.
    pub unit: Vec<Matrix>,
}

/// Identify the image of a primitive-or-zero idempotent with a standard
/// projective: returns the matched index j together with elements
/// u in E·G·e_j and v in e_j·G·E satisfying u v = E and v u = e_j.
pub fn match_projective(
    g: &Arc<FDAlgebra>,
    e: &AlgElem,
) -> Result<Option<(usize, AlgElem, AlgElem)>> {
    if g.is_zero_elem(e) {
        return Ok(None);
    }
    let n = g.num_projectives()?;
    // Canonical case: the image idempotent is literally one of the
    // algebra's own idempotents, so no basis change is needed.
    for j in 0..n {
        let ej = g.idempotent(j)?;
        if g.is_zero_elem(&g.add(e, &g.neg(&ej))) {
            return Ok(Some((j, ej.clone(), ej)));
        }
    }
    let (ideal, incl) = left_ideal(g, e)?;
    for j in 0..n {
        let (pj, pvecs, _) = projective_embedded(g, j)?;
        if pj.dim != ideal.dim {
            continue;
        }
        if let Some(w) = is_isomorphic(&ideal, &pj)?.witness() {
            let embed_p = |coords: &[Scalar]| -> AlgElem {
                let mut out = g.zero_elem();
                for (k, c) in coords.iter().enumerate() {
                    if !c.is_zero() {
                        for (row, v) in pvecs[k].iter().enumerate() {
                            out[row] = out[row].add(&c.mul(v));
                        }
                    }
                }
                out
            };
            let e_coords = incl
                .solve(e)
                .ok_or_else(|| QdeError::Internal("idempotent outside its own ideal".into()))?;
            let u = embed_p(&w.mat.apply(&e_coords));
            let winv = w
                .mat
                .inverse()
                .ok_or_else(|| QdeError::Internal("witness not invertible".into()))?;
            let ej = g.idempotent(j)?;
            let ej_coords = {
                let mut cols = Matrix::zero(g.field, g.dim, pvecs.len());
                for (k, pv) in pvecs.iter().enumerate() {
                    for (row, v) in pv.iter().enumerate() {
                        if !v.is_zero() {
                            cols.set(row, k, v.clone());
                        }
                    }
                }
                cols.solve(&ej)
                    .ok_or_else(|| QdeError::Internal("idempotent outside its projective".into()))?
            };
            let v = {
                let back = winv.apply(&ej_coords);
                let mut out = g.zero_elem();
                for (row, c) in incl.apply(&back).into_iter().enumerate() {
                    out[row] = c;
                }
                out
            };
            if g.mul(&u, &v) != *e || g.mul(&v, &u) != ej {
                return Err(QdeError::Internal("projective matching data inconsistent".into()));
            }
            return Ok(Some((j, u, v)));
        }
    }
    Err(QdeError::Internal("primitive idempotent image matches no projective".into()))
}

pub fn tensor_induce(f: &AlgebraHom, x: &ProjComplex) -> Result<InducedComplex> {
    ensure_same_algebra(&f.domain, &x.algebra, "tensor induction")?;
    let g = &f.codomain;
    let n = x.algebra.num_projectives()?;
    let mut matches: BTreeMap<usize, Option<(usize, AlgElem, AlgElem)>> = BTreeMap::new();
    for d in 0..x.terms.len() {
        for &i in &x.terms[d] {
            if let std::collections::btree_map::Entry::Vacant(slot) = matches.entry(i) {
                if i >= n {
                    return Err(QdeError::PreconditionFailed(format!("component index {i}")));
                }
                let e = f.apply(&x.algebra.idempotent(i)?);
                slot.insert(match_projective(g, &e)?);
            }
        }
    }
    let mut terms = Vec::new();
    let mut comp_map = Vec::new();
    for t in &x.terms {
        let mut new_t = Vec::new();
        let mut cm = Vec::new();
        for &i in t {
            match &matches[&i] {
                None => cm.push(None),
                Some((j, _, _)) => {
                    cm.push(Some(new_t.len()));
                    new_t.push(*j);
                }
            }
        }
        terms.push(new_t);
        comp_map.push(cm);
    }
    let mut diffs = Vec::new();
    for (k, d) in x.diffs.iter().enumerate() {
        let src = terms[k].clone();
        let dst = terms[k + 1].clone();
        let mut m = AMatrix::zero(g, src, dst);
        for (r, ri) in d.src.iter().enumerate() {
            let Some((_, _, vr)) = &matches[ri] else { continue };
            let Some(nr) = comp_map[k][r] else { continue };
            for (c, ci) in d.dst.iter().enumerate() {
                let Some((_, uc, _)) = &matches[ci] else { continue };
                let Some(nc) = comp_map[k + 1][c] else { continue };
                let pushed = f.apply(&d.entries[r][c]);
                m.entries[nr][nc] = g.mul(vr, &g.mul(&pushed, uc));
            }
        }
        diffs.push(m);
    }
    let complex = ProjComplex::new(g.clone(), x.lo, terms, diffs)?;
    // Unit maps on module coordinates: m in Ae_i goes to f(m)·u_i.
    let mut unit = Vec::new();
    for (k, t) in x.terms.iter().enumerate() {
        let deg = x.lo + k as i32;
        let tgt_comps = complex.comps(deg);
        let mut tgt_info = Vec::new();
        for &j in tgt_comps {
            tgt_info.push(projective_embedded(g, j)?);
        }
        let tgt_offsets: Vec<usize> = {
            let mut off = vec![0usize];
            for info in &tgt_info {
                off.push(off.last().unwrap() + info.1.len());
            }
            off
        };
        let tdim = *tgt_offsets.last().unwrap();
        let mut src_dims = Vec::new();
        let mut src_vecs = Vec::new();
        for &i in t {
            let (_, vecs, _) = projective_embedded(&x.algebra, i)?;
            src_dims.push(vecs.len());
            src_vecs.push(vecs);
        }
        let sdim: usize = src_dims.iter().sum();
        let mut mat = Matrix::zero(g.field, tdim, sdim);
        let mut coff = 0;
        for (r, &i) in t.iter().enumerate() {
            if let Some(nr) = comp_map[k][r] {
                let (_, _, ui) = matches[&i].as_ref().unwrap();
                let (_, tvecs, _) = &tgt_info[nr];
                let mut cols = Matrix::zero(g.field, g.dim, tvecs.len());
                for (kk, tv) in tvecs.iter().enumerate() {
                    for (row, v) in tv.iter().enumerate() {
                        if !v.is_zero() {
                            cols.set(row, kk, v.clone());
                        }
                    }
                }
                for (sj, sv) in src_vecs[r].iter().enumerate() {
                    let img = g.mul(&f.apply(sv), ui);
                    let coords = cols.solve(&img).ok_or_else(|| {
                        QdeError::Internal("unit image escapes matched projective".into())
                    })?;
                    for (row, v) in coords.into_iter().enumerate() {
                        if !v.is_zero() {
                            mat.set(tgt_offsets[nr] + row, coff + sj, v);
                        }
                    }
                }
            }
            coff += src_dims[r];
        }
        unit.push(mat);
    }
    Ok(InducedComplex { complex, comp_map, unit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::EX56_T;
    use crate::parse::parse_source;

    fn t_complex() -> (Arc<FDAlgebra>, ProjComplex) {
        let items = parse_source(EX56_T).unwrap();
        let a = crate::algebra::build(items[0].as_algebra().unwrap()).unwrap();
        let spec = items[1].as_complex().unwrap();
        let x = make_complex(&a, spec).unwrap();
        (a, x)
    }

    #[test]
    fn parsed_complex_shape() {
        let (_, x) = t_complex();
        assert_eq!(x.lo, -1);
        assert_eq!(x.hi(), 0);
        assert_eq!(x.comps(-1), &[1, 1, 2]);
        assert_eq!(x.comps(0), &[0]);
        assert!(x.is_radical().unwrap());
        assert_eq!(x.multiplicity(1), 2);
    }

    #[test]
    fn shift_round_trip_and_signs() {
        let (_, x) = t_complex();
        let s = shift(&x, 1);
        assert_eq!(s.lo, -2);
        assert!(!s.diffs[0].entries[0][0].iter().all(|v| v.is_zero()));
        let back = shift(&s, -1);
        assert_eq!(back.lo, x.lo);
        for (a, b) in back.diffs.iter().zip(&x.diffs) {
            assert!(a.add(&b.neg()).unwrap().is_zero());
        }
    }

    #[test]
    fn identity_cone_is_exact() {
        let (a, x) = t_complex();
        let id = ChainMap::identity(&x).unwrap();
        let c = cone(&id).unwrap();
        // Contractible: reduces to the zero complex.
        let r = reduce(&c).unwrap();
        assert!(r.is_zero_complex());
        let _ = a;
    }
}
