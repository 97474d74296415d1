//! Patching projectives and projective complexes over a pullback square.
//!
//! A patch combines a projective complex over each corner algebra with a
//! degreewise gluing isomorphism between their images over the base, and
//! produces a projective complex over the pullback algebra together with
//! verified exactness and comparison data.

use crate::algebra::{ensure_same_algebra, AlgElem, AlgebraHom, FDAlgebra, MilnorSquare};
use crate::complex::{
    amatrix_module_matrix, end_algebra_k, entries_from_module_matrix, homotopy_hom,
    match_projective, term_module, AMatrix, ChainMap, EndK, ProjComplex,
};
use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::module::{left_ideal, projective_embedded, FDModule};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A module identified as a finite direct sum of standard projectives:
/// the component indices and the change of basis between the module's
/// own coordinates and the stacked standard coordinates.
pub struct RecognizedProjective {
    pub comps: Vec<usize>,
    /// Stacked standard coordinates -> module coordinates.
    pub from_standard: Matrix,
    /// Module coordinates -> stacked standard coordinates.
    pub to_standard: Matrix,
}

/// Identify a projective module by lifting a basis of its top and
/// checking that the cover from the matching standard projectives is
/// bijective. Errs when the module is not projective.
pub fn recognize_projective(m: &FDModule) -> Result<RecognizedProjective> {
    let a = &m.algebra;
    let field = a.field;
    let n = a.num_projectives()?;
    if m.dim == 0 {
        return Ok(RecognizedProjective {
            comps: vec![],
            from_standard: Matrix::zero(field, 0, 0),
            to_standard: Matrix::zero(field, 0, 0),
        });
    }
    let rad = a.radical_subspace()?;
    let mut radm: Vec<Vec<Scalar>> = Vec::new();
    for r in rad.basis_rows() {
        let act = m.act(&r);
        for j in 0..m.dim {
            radm.push((0..m.dim).map(|i| act.at(i, j).clone()).collect());
        }
    }
    let mut span = Subspace::span(field, m.dim, &radm);
    // Generators vertex by vertex: idempotent-action columns that extend
    // the radical span lift a basis of the top, and a lifted top basis
    // generates.
    let mut gens: Vec<(usize, Vec<Scalar>)> = Vec::new();
    for i in 0..n {
        let e = a.idempotent(i)?;
        let act = m.act(&e);
        for j in 0..m.dim {
            let col: Vec<Scalar> = (0..m.dim).map(|r| act.at(r, j).clone()).collect();
            if !span.contains(&col) {
                span = span.sum(&Subspace::span(field, m.dim, std::slice::from_ref(&col)));
                gens.push((i, col));
            }
        }
    }
    let mut comps = Vec::new();
    let mut cols: Vec<Vec<Scalar>> = Vec::new();
    for (i, v) in &gens {
        let (_, pvecs, _) = projective_embedded(a, *i)?;
        comps.push(*i);
        for b in &pvecs {
            cols.push(m.act_vec(b, v));
        }
    }
    if cols.len() != m.dim {
        return Err(QdeError::VerificationFailed(format!(
            "module is not projective: its cover has dimension {} over {}",
            cols.len(),
            m.dim
        )));
    }
    let mut f = Matrix::zero(field, m.dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (r, v) in c.iter().enumerate() {
            if !v.is_zero() {
                f.set(r, j, v.clone());
            }
        }
    }
    let to = f.inverse().ok_or_else(|| {
        QdeError::VerificationFailed("module is not projective: its cover is singular".into())
    })?;
    Ok(RecognizedProjective { comps, from_standard: f, to_standard: to })
}

/// One standard-projective slot of a tensored idempotent E = f(e): the
/// matched component j with witnesses u in E·G·e_j and v in e_j·G·E.
/// Across the slots of one image, sum u_t v_t = E and v_s u_t vanishes
/// for s distinct from t while v_t u_t = e_{j_t}.
#[derive(Clone)]
pub struct SlotData {
    pub comp: usize,
    pub u: AlgElem,
    pub v: AlgElem,
}

fn image_slots(g: &Arc<FDAlgebra>, e: &AlgElem) -> Result<Vec<SlotData>> {
    if g.is_zero_elem(e) {
        return Ok(vec![]);
    }
    let idem = g.idempotent_list()?.clone();
    let mut chosen = Vec::new();
    let mut sum = g.zero_elem();
    for (j, ej) in idem.iter().enumerate() {
        if g.mul(ej, e) == *ej && g.mul(e, ej) == *ej {
            chosen.push(j);
            sum = g.add(&sum, ej);
        }
    }
    if sum == *e {
        return Ok(chosen
            .into_iter()
            .map(|j| SlotData { comp: j, u: idem[j].clone(), v: idem[j].clone() })
            .collect());
    }
    match match_projective(g, e)? {
        Some((comp, u, v)) => Ok(vec![SlotData { comp, u, v }]),
        None => Err(QdeError::Internal("nonzero idempotent matched as zero".into())),
    }
}

/// A complex tensored along an algebra map, with enough bookkeeping to
/// transport chain maps along the same map afterwards.
pub struct Induced {
    pub complex: ProjComplex,
    /// Per source degree, per source slot: one entry per expansion slot.
    pub slots: Vec<Vec<Vec<SlotData>>>,
    /// Per source degree, per source slot: position of its first
    /// expansion slot inside the induced term.
    pub offsets: Vec<Vec<usize>>,
    /// Per source degree: unit map on module coordinates, from source
    /// term coordinates to induced term coordinates.
    pub unit: Vec<Matrix>,
}

pub fn induce_along(f: &AlgebraHom, x: &ProjComplex) -> Result<Induced> {
    ensure_same_algebra(&f.domain, &x.algebra, "induction along a homomorphism")?;
    let g = f.codomain.clone();
    let n = x.algebra.num_projectives()?;
    let mut cache: BTreeMap<usize, Vec<SlotData>> = BTreeMap::new();
    for t in &x.terms {
        for &i in t {
            if i >= n {
                return Err(QdeError::PreconditionFailed(format!("component index {i}")));
            }
            if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(i) {
                let e = f.apply(&x.algebra.idempotent(i)?);
                slot.insert(image_slots(&g, &e)?);
            }
        }
    }
    let mut terms = Vec::new();
    let mut slots = Vec::new();
    let mut offsets = Vec::new();
    for t in &x.terms {
        let mut term = Vec::new();
        let mut srow = Vec::new();
        let mut orow = Vec::new();
        for &i in t {
            orow.push(term.len());
            let sd = cache[&i].clone();
            for s in &sd {
                term.push(s.comp);
            }
            srow.push(sd);
        }
        terms.push(term);
        slots.push(srow);
        offsets.push(orow);
    }
    let mut diffs = Vec::new();
    for (k, d) in x.diffs.iter().enumerate() {
        let mut m = AMatrix::zero(&g, terms[k].clone(), terms[k + 1].clone());
        for r in 0..d.src.len() {
            for (ti, ts) in slots[k][r].iter().enumerate() {
                let nr = offsets[k][r] + ti;
                for c in 0..d.dst.len() {
                    let pushed = f.apply(&d.entries[r][c]);
                    for (si, ss) in slots[k + 1][c].iter().enumerate() {
                        let nc = offsets[k + 1][c] + si;
                        m.entries[nr][nc] = g.mul(&ts.v, &g.mul(&pushed, &ss.u));
                    }
                }
            }
        }
        diffs.push(m);
    }
    let complex = ProjComplex::new(g.clone(), x.lo, terms, diffs)?;
    let mut unit = Vec::new();
    for (k, t) in x.terms.iter().enumerate() {
        let deg = x.lo + k as i32;
        unit.push(unit_matrix(f, x, t, &complex, deg, &slots[k], &offsets[k])?);
    }
    Ok(Induced { complex, slots, offsets, unit })
}

fn unit_matrix(
    f: &AlgebraHom,
    x: &ProjComplex,
    src_comps: &[usize],
    induced: &ProjComplex,
    deg: i32,
    slots: &[Vec<SlotData>],
    offsets: &[usize],
) -> Result<Matrix> {
    let g = &f.codomain;
    let tgt_comps = induced.comps(deg);
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
    let mut src_vecs = Vec::new();
    for &i in src_comps {
        let (_, vecs, _) = projective_embedded(&x.algebra, i)?;
        src_vecs.push(vecs);
    }
    let sdim: usize = src_vecs.iter().map(|v| v.len()).sum();
    let mut mat = Matrix::zero(g.field, tdim, sdim);
    let mut coff = 0;
    for (r, vecs) in src_vecs.iter().enumerate() {
        for (ti, ts) in slots[r].iter().enumerate() {
            let nslot = offsets[r] + ti;
            let (_, tvecs, _) = &tgt_info[nslot];
            let mut cols = Matrix::zero(g.field, g.dim, tvecs.len());
            for (kk, tv) in tvecs.iter().enumerate() {
                for (row, v) in tv.iter().enumerate() {
                    if !v.is_zero() {
                        cols.set(row, kk, v.clone());
                    }
                }
            }
            for (sj, sv) in vecs.iter().enumerate() {
                let img = g.mul(&f.apply(sv), &ts.u);
                let coords = cols.solve(&img).ok_or_else(|| {
                    QdeError::Internal("unit image escapes its matched projective".into())
                })?;
                for (row, v) in coords.into_iter().enumerate() {
                    if !v.is_zero() {
                        mat.set(tgt_offsets[nslot] + row, coff + sj, v);
                    }
                }
            }
        }
        coff += vecs.len();
    }
    Ok(mat)
}

/// Transport a chain map along the same algebra map between two induced
/// complexes previously produced by `induce_along`.
pub fn induce_chain_map(
    f: &AlgebraHom,
    cm: &ChainMap,
    src: &Induced,
    tgt: &Induced,
) -> Result<ChainMap> {
    let g = &f.codomain;
    let n = cm.shift_by;
    let mut mats = Vec::new();
    for k in 0..src.complex.terms.len() {
        let d = src.complex.lo + k as i32;
        let block = cm.mat_at(d);
        let dst_comps = tgt.complex.comps(d + n).to_vec();
        let mut m = AMatrix::zero(g, src.complex.terms[k].clone(), dst_comps);
        let kt = d + n - tgt.complex.lo;
        let tgt_in_range = kt >= 0 && (kt as usize) < tgt.complex.terms.len();
        for r in 0..block.src.len() {
            for (ti, ts) in src.slots[k][r].iter().enumerate() {
                let nr = src.offsets[k][r] + ti;
                for c in 0..block.dst.len() {
                    if !tgt_in_range {
                        continue;
                    }
                    let pushed = f.apply(&block.entries[r][c]);
                    for (si, ss) in tgt.slots[kt as usize][c].iter().enumerate() {
                        let nc = tgt.offsets[kt as usize][c] + si;
                        m.entries[nr][nc] = g.mul(&ts.v, &g.mul(&pushed, &ss.u));
                    }
                }
            }
        }
        mats.push(m);
    }
    let out = ChainMap::new(src.complex.clone(), tgt.complex.clone(), n, mats)?;
    out.verify()?;
    Ok(out)
}

/// Degreewise gluing data: module-coordinate matrices from the first
/// induced complex to the second, indexed from `lo`. Degrees outside the
/// list must have both induced terms zero.
pub struct PatchGlue {
    pub lo: i32,
    pub mats: Vec<Matrix>,
}

impl PatchGlue {
    pub fn single(degree: i32, mat: Matrix) -> PatchGlue {
        PatchGlue { lo: degree, mats: vec![mat] }
    }

    fn mat_at(&self, d: i32, rows: usize, cols: usize, field: crate::scalar::FieldTag) -> Result<Matrix> {
        let k = d - self.lo;
        if k >= 0 && (k as usize) < self.mats.len() {
            let m = self.mats[k as usize].clone();
            if m.rows != rows || m.cols != cols {
                return Err(QdeError::DimMismatch(format!(
                    "gluing matrix at degree {d} is {}x{}, expected {rows}x{cols}",
                    m.rows, m.cols
                )));
            }
            Ok(m)
        } else if rows == 0 && cols == 0 {
            Ok(Matrix::zero(field, 0, 0))
        } else {
            Err(QdeError::DimMismatch(format!(
                "no gluing matrix at degree {d} with nonzero terms"
            )))
        }
    }
}

/// The canonical gluing when both induced complexes carry identical
/// component lists degree by degree.
pub fn identity_glue(ind1: &Induced, ind2: &Induced) -> Result<PatchGlue> {
    let lo = ind1.complex.lo.min(ind2.complex.lo);
    let hi = ind1.complex.hi().max(ind2.complex.hi());
    let field = ind1.complex.algebra.field;
    let mut mats = Vec::new();
    for d in lo..=hi {
        if ind1.complex.comps(d) != ind2.complex.comps(d) {
            return Err(QdeError::PreconditionFailed(format!(
                "induced components differ at degree {d}; no canonical gluing"
            )));
        }
        let dim = term_module(&ind1.complex, d)?.dim;
        mats.push(Matrix::identity(field, dim));
    }
    Ok(PatchGlue { lo, mats })
}

/// A verified patch over the pullback algebra. All per-degree vectors
/// are indexed from `win_lo`, the lower end of the union window of the
/// two corner complexes.
pub struct Patched {
    pub complex: ProjComplex,
    pub x1: ProjComplex,
    pub x2: ProjComplex,
    pub ind1: Induced,
    pub ind2: Induced,
    pub win_lo: i32,
    /// Normalized gluing matrices, one per window degree.
    pub glue: Vec<Matrix>,
    /// Patch standard coordinates into X1 + X2 coordinates.
    pub embed: Vec<Matrix>,
    pub p1: Vec<Matrix>,
    pub p2: Vec<Matrix>,
    /// The patch tensored back up each leg, with the comparison isos
    /// onto the corner complexes on module coordinates per window degree.
    pub ind_m1: Induced,
    pub ind_m2: Induced,
    pub mu1: Vec<Matrix>,
    pub mu2: Vec<Matrix>,
}

fn block_diag(field: crate::scalar::FieldTag, a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zero(field, a.rows + b.rows, a.cols + b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let v = a.at(i, j);
            if !v.is_zero() {
                out.set(i, j, v.clone());
            }
        }
    }
    for i in 0..b.rows {
        for j in 0..b.cols {
            let v = b.at(i, j);
            if !v.is_zero() {
                out.set(a.rows + i, a.cols + j, v.clone());
            }
        }
    }
    out
}

/// Patch two projective complexes over the corners of a pullback square
/// along a degreewise gluing isomorphism of their base images, returning
/// a verified projective complex over the pullback algebra.
///
/// Verified along the way: the gluing commutes with the induced
/// differentials and is invertible degree by degree; the defining
/// sequence 0 -> M -> X1 + X2 -> base image of X2 -> 0 is exact in each
/// degree; every degree of M is projective over the pullback; and
/// tensoring M back up each leg is isomorphic to the corner complex via
/// an explicit chain iso compatible with the units.
pub fn patch_complex(
    square: &MilnorSquare,
    x1: &ProjComplex,
    x2: &ProjComplex,
    glue: &PatchGlue,
) -> Result<Patched> {
    ensure_same_algebra(&square.pi1.domain, &x1.algebra, "first patch corner")?;
    ensure_same_algebra(&square.pi2.domain, &x2.algebra, "second patch corner")?;
    let lam = &square.algebra;
    let field = lam.field;
    let ind1 = induce_along(&square.pi1, x1)?;
    let ind2 = induce_along(&square.pi2, x2)?;
    let win_lo = x1.lo.min(x2.lo);
    let win_hi = x1.hi().max(x2.hi());
    let width = (win_hi - win_lo + 1).max(0) as usize;

    // Per window degree: corner terms, induced terms, normalized glue.
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    let mut i1dim = Vec::new();
    let mut i2dim = Vec::new();
    let mut glue_mats = Vec::new();
    for k in 0..width {
        let d = win_lo + k as i32;
        t1.push(term_module(x1, d)?);
        t2.push(term_module(x2, d)?);
        let d1 = term_module(&ind1.complex, d)?.dim;
        let d2 = term_module(&ind2.complex, d)?.dim;
        let h = glue.mat_at(d, d2, d1, field)?;
        if d1 != d2 || (d1 > 0 && h.inverse().is_none()) {
            return Err(QdeError::VerificationFailed(format!(
                "gluing is not invertible at degree {d}"
            )));
        }
        i1dim.push(d1);
        i2dim.push(d2);
        glue_mats.push(h);
    }
    // The gluing must be a map of complexes.
    for k in 0..width.saturating_sub(1) {
        let d = win_lo + k as i32;
        let d1 = amatrix_module_matrix(&ind1.complex.diff(d))?;
        let d2 = amatrix_module_matrix(&ind2.complex.diff(d))?;
        if glue_mats[k + 1].mul(&d1) != d2.mul(&glue_mats[k]) {
            return Err(QdeError::VerificationFailed(format!(
                "gluing does not commute with the induced differentials at degree {d}"
            )));
        }
    }

    // Kernel of [H·unit1, -unit2] per degree, with the exactness check.
    let mut kers = Vec::new();
    let mut recs = Vec::new();
    for k in 0..width {
        let d = win_lo + k as i32;
        let u1 = unit_or_zero(&ind1, x1, d, i1dim[k], field);
        let u2 = unit_or_zero(&ind2, x2, d, i2dim[k], field);
        let psi = glue_mats[k].mul(&u1).hstack(&u2.neg());
        if psi.rank() != i2dim[k] {
            return Err(QdeError::VerificationFailed(format!(
                "patch sequence is not exact at degree {d}"
            )));
        }
        let basis = psi.kernel_basis();
        let mut kmat = Matrix::zero(field, t1[k].dim + t2[k].dim, basis.len());
        for (j, col) in basis.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    kmat.set(r, j, v.clone());
                }
            }
        }
        // Pullback-algebra action restricted to the kernel.
        let mdim = kmat.cols;
        let mut actions = Vec::with_capacity(lam.dim);
        for b in 0..lam.dim {
            let ell = lam.basis_elem(b);
            let a1 = square.lam1.apply(&ell);
            let a2 = square.lam2.apply(&ell);
            let big = block_diag(field, &t1[k].act(&a1), &t2[k].act(&a2));
            let mut act = Matrix::zero(field, mdim, mdim);
            for j in 0..mdim {
                let col: Vec<Scalar> = (0..kmat.rows).map(|r| kmat.at(r, j).clone()).collect();
                let w = big.apply(&col);
                let sol = kmat.solve(&w).ok_or_else(|| {
                    QdeError::VerificationFailed(format!(
                        "patch kernel is not stable under the pullback action at degree {d}"
                    ))
                })?;
                for (r, v) in sol.into_iter().enumerate() {
                    if !v.is_zero() {
                        act.set(r, j, v);
                    }
                }
            }
            actions.push(act);
        }
        let module = FDModule::new(lam.clone(), actions)?;
        let rec = recognize_projective(&module)?;
        kers.push(kmat);
        recs.push(rec);
    }

    // Differentials restricted to the kernels, in standard coordinates.
    let mut terms = Vec::new();
    let mut embeds = Vec::new();
    for (k, rec) in recs.iter().enumerate() {
        terms.push(rec.comps.clone());
        embeds.push(kers[k].mul(&rec.from_standard));
    }
    let mut diffs = Vec::new();
    for k in 0..width.saturating_sub(1) {
        let d = win_lo + k as i32;
        let big = block_diag(
            field,
            &amatrix_module_matrix(&x1.diff(d))?,
            &amatrix_module_matrix(&x2.diff(d))?,
        );
        let mapped = big.mul(&embeds[k]);
        let mut in_next = Matrix::zero(field, embeds[k + 1].cols.max(0), mapped.cols);
        for j in 0..mapped.cols {
            let col: Vec<Scalar> = (0..mapped.rows).map(|r| mapped.at(r, j).clone()).collect();
            let sol = embeds[k + 1].solve(&col).ok_or_else(|| {
                QdeError::VerificationFailed(format!(
                    "patched differential leaves the patch at degree {d}"
                ))
            })?;
            for (r, v) in sol.into_iter().enumerate() {
                if !v.is_zero() {
                    in_next.set(r, j, v);
                }
            }
        }
        diffs.push(entries_from_module_matrix(lam, &terms[k], &terms[k + 1], &in_next)?);
    }

    // Trim empty boundary degrees.
    let first = terms.iter().position(|t| !t.is_empty());
    let complex = match first {
        None => ProjComplex::zero(lam),
        Some(f) => {
            let l = terms.iter().rposition(|t| !t.is_empty()).unwrap();
            ProjComplex::new(
                lam.clone(),
                win_lo + f as i32,
                terms[f..=l].to_vec(),
                diffs[f..l].to_vec(),
            )?
        }
    };

    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for (k, e) in embeds.iter().enumerate() {
        let mut top = Matrix::zero(field, t1[k].dim, e.cols);
        let mut bot = Matrix::zero(field, t2[k].dim, e.cols);
        for j in 0..e.cols {
            for r in 0..t1[k].dim {
                let v = e.at(r, j);
                if !v.is_zero() {
                    top.set(r, j, v.clone());
                }
            }
            for r in 0..t2[k].dim {
                let v = e.at(t1[k].dim + r, j);
                if !v.is_zero() {
                    bot.set(r, j, v.clone());
                }
            }
        }
        p1.push(top);
        p2.push(bot);
    }

    // Tensor the patch back up both legs and verify the comparison isos.
    let ind_m1 = induce_along(&square.lam1, &complex)?;
    let ind_m2 = induce_along(&square.lam2, &complex)?;
    let mu1 = comparison_iso(square, &square.lam1, &complex, &ind_m1, x1, &p1, win_lo, 1)?;
    let mu2 = comparison_iso(square, &square.lam2, &complex, &ind_m2, x2, &p2, win_lo, 2)?;

    Ok(Patched {
        complex,
        x1: x1.clone(),
        x2: x2.clone(),
        ind1,
        ind2,
        win_lo,
        glue: glue_mats,
        embed: embeds,
        p1,
        p2,
        ind_m1,
        ind_m2,
        mu1,
        mu2,
    })
}

fn unit_or_zero(
    ind: &Induced,
    x: &ProjComplex,
    d: i32,
    idim: usize,
    field: crate::scalar::FieldTag,
) -> Matrix {
    let k = d - x.lo;
    if k >= 0 && (k as usize) < ind.unit.len() {
        ind.unit[k as usize].clone()
    } else {
        Matrix::zero(field, idim, 0)
    }
}

/// The canonical map from the patch tensored up one leg onto the corner
/// complex: on the slot expansion of a patch component with generator m,
/// a basis vector w of the matched projective goes to (w·v)·p(m). The
/// map is verified to be a degreewise bijection, to commute with the
/// differentials, and to collapse the unit onto the projection.
#[allow(clippy::too_many_arguments)]
fn comparison_iso(
    square: &MilnorSquare,
    leg: &AlgebraHom,
    patch: &ProjComplex,
    ind_m: &Induced,
    x: &ProjComplex,
    proj: &[Matrix],
    win_lo: i32,
    side: usize,
) -> Result<Vec<Matrix>> {
    let corner = &leg.codomain;
    let field = corner.field;
    let lam = &square.algebra;
    let width = proj.len();
    let mut mats = Vec::new();
    for k in 0..width {
        let d = win_lo + k as i32;
        let xt = term_module(x, d)?;
        let yt = term_module(&ind_m.complex, d)?;
        let mut nu = Matrix::zero(field, xt.dim, yt.dim);
        let kk = d - patch.lo;
        if kk >= 0 && (kk as usize) < patch.terms.len() {
            let kk = kk as usize;
            let pcomps = &patch.terms[kk];
            // Stacked standard offsets of the patch term.
            let mut poff = vec![0usize];
            for &pc in pcomps {
                let (pm, _, _) = projective_embedded(lam, pc)?;
                poff.push(poff.last().unwrap() + pm.dim);
            }
            let pdim = *poff.last().unwrap();
            let mut col_off = 0usize;
            for (c, &pc) in pcomps.iter().enumerate() {
                let (_, _, gen) = projective_embedded(lam, pc)?;
                let mut gstd = vec![field.zero(); pdim];
                for (t, v) in gen.iter().enumerate() {
                    gstd[poff[c] + t] = v.clone();
                }
                let pm = proj[k].apply(&gstd);
                for ts in &ind_m.slots[kk][c] {
                    let (_, wvecs, _) = projective_embedded(corner, ts.comp)?;
                    for wv in &wvecs {
                        let z = corner.mul(wv, &ts.v);
                        let img = xt.act_vec(&z, &pm);
                        for (r, v) in img.into_iter().enumerate() {
                            if !v.is_zero() {
                                nu.set(r, col_off, v);
                            }
                        }
                        col_off += 1;
                    }
                }
            }
        }
        if xt.dim != yt.dim || (xt.dim > 0 && nu.inverse().is_none()) {
            return Err(QdeError::VerificationFailed(format!(
                "tensoring the patch up leg {side} is not isomorphic to the corner at degree {d}"
            )));
        }
        // The unit composed with the comparison map is the projection.
        let kk2 = d - patch.lo;
        if kk2 >= 0 && (kk2 as usize) < ind_m.unit.len() {
            if nu.mul(&ind_m.unit[kk2 as usize]) != proj[k] {
                return Err(QdeError::VerificationFailed(format!(
                    "comparison map is incompatible with the unit at degree {d} on leg {side}"
                )));
            }
        }
        mats.push(nu);
    }
    // Chain-map condition across the window.
    for k in 0..width.saturating_sub(1) {
        let d = win_lo + k as i32;
        let dy = amatrix_module_matrix(&ind_m.complex.diff(d))?;
        let dx = amatrix_module_matrix(&x.diff(d))?;
        if mats[k + 1].mul(&dy) != dx.mul(&mats[k]) {
            return Err(QdeError::VerificationFailed(format!(
                "comparison map does not commute with the differentials at degree {d} on leg {side}"
            )));
        }
    }
    Ok(mats)
}

/// A patched module: the degree-zero patch of two projective modules
/// given by their component lists and a base gluing matrix.
pub struct PatchedModule {
    pub patched: Patched,
    pub module: FDModule,
    pub comps: Vec<usize>,
}

pub fn patch_module(
    square: &MilnorSquare,
    comps1: &[usize],
    comps2: &[usize],
    h: &Matrix,
) -> Result<PatchedModule> {
    let a1 = square.pi1.domain.clone();
    let a2 = square.pi2.domain.clone();
    let x1 = if comps1.is_empty() {
        ProjComplex::zero(&a1)
    } else {
        ProjComplex::new(a1, 0, vec![comps1.to_vec()], vec![])?
    };
    let x2 = if comps2.is_empty() {
        ProjComplex::zero(&a2)
    } else {
        ProjComplex::new(a2, 0, vec![comps2.to_vec()], vec![])?
    };
    let patched = patch_complex(square, &x1, &x2, &PatchGlue::single(0, h.clone()))?;
    let module = term_module(&patched.complex, 0)?;
    let comps = patched.complex.comps(0).to_vec();
    Ok(PatchedModule { patched, module, comps })
}

/// Classification of the indecomposable projectives over the pullback
/// algebra by their corner images: killed by the second leg, alive but
/// killed over the base, or alive over the base; plus the corresponding
/// base-kernel classes of each corner algebra.
pub struct ProjectivePartition {
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
    pub f3: Vec<usize>,
    pub p1: Vec<usize>,
    pub q1: Vec<usize>,
    pub p2: Vec<usize>,
    pub q2: Vec<usize>,
}

pub fn partition_projectives(square: &MilnorSquare) -> Result<ProjectivePartition> {
    let lam = &square.algebra;
    let a0 = &square.pi1.codomain;
    let a1 = &square.pi1.domain;
    let a2 = &square.pi2.domain;
    let mut out = ProjectivePartition {
        f1: vec![],
        f2: vec![],
        f3: vec![],
        p1: vec![],
        q1: vec![],
        p2: vec![],
        q2: vec![],
    };
    for c in 0..lam.num_projectives()? {
        let e2 = square.lam2.apply(&lam.idempotent(c)?);
        let d2 = left_ideal(a2, &e2)?.0.dim;
        if d2 == 0 {
            out.f1.push(c);
            continue;
        }
        let d0 = left_ideal(a0, &square.pi2.apply(&e2))?.0.dim;
        if d0 == 0 {
            out.f2.push(c);
        } else {
            out.f3.push(c);
        }
    }
    for v in 0..a1.num_projectives()? {
        let d0 = left_ideal(a0, &square.pi1.apply(&a1.idempotent(v)?))?.0.dim;
        if d0 == 0 {
            out.p1.push(v);
        } else {
            out.q1.push(v);
        }
    }
    for v in 0..a2.num_projectives()? {
        let d0 = left_ideal(a0, &square.pi2.apply(&a2.idempotent(v)?))?.0.dim;
        if d0 == 0 {
            out.p2.push(v);
        } else {
            out.q2.push(v);
        }
    }
    Ok(out)
}

/// The endomorphism square of a patch: homotopy-category endomorphism
/// algebras of the patch, the two corner complexes, and the base
/// complex, with the restriction and base-change maps between them. The
/// patch algebra is verified to be the pullback of the two restriction
/// legs over the base.
pub struct EndoSquare {
    pub b: EndK,
    pub b1: EndK,
    pub b2: EndK,
    pub b0: EndK,
    pub eps1: AlgebraHom,
    pub eps2: AlgebraHom,
    pub eta1: AlgebraHom,
    pub eta2: AlgebraHom,
    pub eta1_surjective: bool,
    pub eta2_surjective: bool,
}

impl EndoSquare {
    /// Realize the pullback of the two base-change legs as a concrete
    /// algebra (one leg must be surjective) together with the verified
    /// isomorphism from the patch endomorphism algebra onto it.
    pub fn pullback_model(&self) -> Result<(MilnorSquare, AlgebraHom)> {
        let sq = crate::algebra::pullback(&self.eta1, &self.eta2)?;
        let field = self.b.algebra.field;
        let stacked = sq.lam1.mat.vstack(&sq.lam2.mat);
        let mut mat = Matrix::zero(field, sq.algebra.dim, self.b.algebra.dim);
        for k in 0..self.b.algebra.dim {
            let bk = self.b.algebra.basis_elem(k);
            let mut v = self.eps1.apply(&bk);
            v.extend(self.eps2.apply(&bk));
            let sol = stacked.solve(&v).ok_or_else(|| {
                QdeError::VerificationFailed(
                    "endomorphism image escapes the pullback of the legs".into(),
                )
            })?;
            for (r, s) in sol.into_iter().enumerate() {
                if !s.is_zero() {
                    mat.set(r, k, s);
                }
            }
        }
        let iso = AlgebraHom::new(self.b.algebra.clone(), sq.algebra.clone(), mat)?;
        iso.verify()?;
        if self.b.algebra.dim != sq.algebra.dim || iso.mat.rank() != sq.algebra.dim {
            return Err(QdeError::VerificationFailed(
                "endomorphism algebra is not isomorphic to the pullback of the legs".into(),
            ));
        }
        Ok((sq, iso))
    }
}

pub fn endo_pullback_square(square: &MilnorSquare, patched: &Patched) -> Result<EndoSquare> {
    let x0 = &patched.ind2.complex;
    if homotopy_hom(x0, x0, -1)?.dim != 0 {
        return Err(QdeError::PreconditionFailed(
            "base complex has homotopy maps of degree -1; the endomorphism square needs them to vanish"
                .into(),
        ));
    }
    let b = end_algebra_k(&patched.complex)?;
    let b1 = end_algebra_k(&patched.x1)?;
    let b2 = end_algebra_k(&patched.x2)?;
    let b0 = end_algebra_k(x0)?;
    let field = b.algebra.field;

    let inv = |mats: &[Matrix]| -> Vec<Matrix> {
        mats.iter()
            .map(|m| if m.rows == 0 { m.clone() } else { m.inverse().expect("verified invertible") })
            .collect()
    };
    let mu1_inv = inv(&patched.mu1);
    let mu2_inv = inv(&patched.mu2);
    let glue_inv = inv(&patched.glue);

    // eps legs: realize each basis endomorphism of the patch, tensor up
    // one leg, conjugate through the comparison iso, and take its class.
    let eps = |ind_m: &Induced,
                   mu: &[Matrix],
                   mu_inv: &[Matrix],
                   x: &ProjComplex,
                   leg: &AlgebraHom,
                   bk: &EndK|
     -> Result<AlgebraHom> {
        let mut mat = Matrix::zero(field, bk.algebra.dim, b.algebra.dim);
        for k in 0..b.algebra.dim {
            let phi = b.representative(&unit_vec(field, b.algebra.dim, k));
            let lifted = induce_chain_map(leg, &phi, ind_m, ind_m)?;
            let mut mats = Vec::new();
            for t in 0..x.terms.len() {
                let d = x.lo + t as i32;
                let w = (d - patched.win_lo) as usize;
                let kk = d - ind_m.complex.lo;
                let raw = if kk >= 0 && (kk as usize) < ind_m.complex.terms.len() {
                    amatrix_module_matrix(&lifted.mat_at(d))?
                } else {
                    Matrix::zero(field, 0, 0)
                };
                let conj = mu[w].mul(&raw).mul(&mu_inv[w]);
                mats.push(entries_from_module_matrix(
                    &x.algebra,
                    x.comps(d),
                    x.comps(d),
                    &conj,
                )?);
            }
            let cm = ChainMap::new(x.clone(), x.clone(), 0, mats)?;
            cm.verify()?;
            let cls = bk.class_of(&cm)?;
            for (r, v) in cls.into_iter().enumerate() {
                if !v.is_zero() {
                    mat.set(r, k, v);
                }
            }
        }
        let hom = AlgebraHom::new(b.algebra.clone(), bk.algebra.clone(), mat)?;
        hom.verify()?;
        Ok(hom)
    };
    let eps1 = eps(&patched.ind_m1, &patched.mu1, &mu1_inv, &patched.x1, &square.lam1, &b1)?;
    let eps2 = eps(&patched.ind_m2, &patched.mu2, &mu2_inv, &patched.x2, &square.lam2, &b2)?;

    // eta legs: tensor a corner endomorphism down to the base; the first
    // leg is transported through the gluing.
    let eta = |src: &EndK,
               ind: &Induced,
               leg: &AlgebraHom,
               through_glue: bool|
     -> Result<AlgebraHom> {
        let mut mat = Matrix::zero(field, b0.algebra.dim, src.algebra.dim);
        for k in 0..src.algebra.dim {
            let psi = src.representative(&unit_vec(field, src.algebra.dim, k));
            let lifted = induce_chain_map(leg, &psi, ind, ind)?;
            let mut mats = Vec::new();
            for t in 0..x0.terms.len() {
                let d = x0.lo + t as i32;
                let kk = d - ind.complex.lo;
                let raw = if kk >= 0 && (kk as usize) < ind.complex.terms.len() {
                    amatrix_module_matrix(&lifted.mat_at(d))?
                } else {
                    Matrix::zero(field, term_module(x0, d)?.dim, term_module(x0, d)?.dim)
                };
                let m = if through_glue {
                    let w = (d - patched.win_lo) as usize;
                    patched.glue[w].mul(&raw).mul(&glue_inv[w])
                } else {
                    raw
                };
                mats.push(entries_from_module_matrix(
                    &x0.algebra,
                    x0.comps(d),
                    x0.comps(d),
                    &m,
                )?);
            }
            let cm = ChainMap::new(x0.clone(), x0.clone(), 0, mats)?;
            cm.verify()?;
            let cls = b0.class_of(&cm)?;
            for (r, v) in cls.into_iter().enumerate() {
                if !v.is_zero() {
                    mat.set(r, k, v);
                }
            }
        }
        let hom = AlgebraHom::new(src.algebra.clone(), b0.algebra.clone(), mat)?;
        hom.verify()?;
        Ok(hom)
    };
    let eta1 = eta(&b1, &patched.ind1, &square.pi1, true)?;
    let eta2 = eta(&b2, &patched.ind2, &square.pi2, false)?;

    // Commutativity and the pullback property.
    if eps1.then(&eta1)?.mat != eps2.then(&eta2)?.mat {
        return Err(QdeError::VerificationFailed(
            "endomorphism square does not commute".into(),
        ));
    }
    let stacked = eps1.mat.vstack(&eps2.mat);
    if stacked.rank() != b.algebra.dim {
        return Err(QdeError::VerificationFailed(
            "patch endomorphisms do not embed into the corner pair".into(),
        ));
    }
    let combined = eta1.mat.hstack(&eta2.mat.neg());
    let fiber_dim = b1.algebra.dim + b2.algebra.dim - combined.rank();
    if fiber_dim != b.algebra.dim {
        return Err(QdeError::VerificationFailed(format!(
            "endomorphism algebra has dimension {}, the fiber product has {}",
            b.algebra.dim, fiber_dim
        )));
    }
    let eta1_surjective = eta1.mat.rank() == b0.algebra.dim;
    let eta2_surjective = eta2.mat.rank() == b0.algebra.dim;
    Ok(EndoSquare { b, b1, b2, b0, eps1, eps2, eta1, eta2, eta1_surjective, eta2_surjective })
}

pub(crate) fn unit_vec(field: crate::scalar::FieldTag, n: usize, k: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); n];
    v[k] = field.one();
    v
}
