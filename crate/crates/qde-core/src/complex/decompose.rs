//! Minimal forms and direct-sum decompositions. `reduce` cancels
//! invertible differential entries (Gaussian elimination in the
//! homotopy category), `decompose` splits a complex along the primitive
//! idempotents of its strict endomorphism algebra, and
//! `complexes_isomorphic` compares two complexes by matching their
//! indecomposable summands.

use super::{
    amatrix_module_matrix, direct_sum, end_algebra_k, homotopy_hom, strict_end, term_module,
    AMatrix, ChainMap, ProjComplex,
};
use crate::algebra::{primitive_idempotents, FDAlgebra};
use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::module::{decompose_module, is_isomorphic, projective_embedded};
use crate::scalar::Scalar;
use std::sync::Arc;

/// Cancel invertible differential entries until every entry lies in the
/// radical. The result is the minimal form, isomorphic to the input in
/// the homotopy category; a contractible complex reduces to zero.
pub fn reduce(x: &ProjComplex) -> Result<ProjComplex> {
    let a = x.algebra.clone();
    let rad = a.radical_subspace()?.clone();
    let mut cur = x.clone();
    'outer: loop {
        let mut any_nonrad = false;
        for (k, d) in cur.diffs.iter().enumerate() {
            for r in 0..d.src.len() {
                for c in 0..d.dst.len() {
                    if rad.contains(&d.entries[r][c]) {
                        continue;
                    }
                    any_nonrad = true;
                    if d.src[r] == d.dst[c] {
                        cur = cancel(&cur, k, r, c)?;
                        continue 'outer;
                    }
                }
            }
        }
        if any_nonrad {
            // A unit entry between distinct projectives would mean the
            // algebra is not basic; over the basic algebras built here
            // the off-diagonal blocks sit inside the radical.
            return Err(QdeError::PreconditionFailed(
                "cancellation needs a basic algebra".into(),
            ));
        }
        return Ok(cur);
    }
}

/// Remove the contractible summand along the invertible entry (r, c) of
/// differential k; the Schur complement keeps everything else.
fn cancel(x: &ProjComplex, k: usize, r: usize, c: usize) -> Result<ProjComplex> {
    let a = &x.algebra;
    let d = &x.diffs[k];
    let i = d.src[r];
    let u = &d.entries[r][c];
    // Inverse of u in the corner e_i A e_i.
    let block = a.block(i, i)?;
    let mut cols = Matrix::zero(a.field, a.dim, block.dim());
    for (t, b) in block.basis.iter().enumerate() {
        for (row, v) in a.mul(u, b).into_iter().enumerate() {
            if !v.is_zero() {
                cols.set(row, t, v);
            }
        }
    }
    let e_i = a.idempotent(i)?;
    let sol = cols
        .solve(&e_i)
        .ok_or_else(|| QdeError::Internal("unit entry without a corner inverse".into()))?;
    let mut w = a.zero_elem();
    for (t, v) in sol.into_iter().enumerate() {
        if !v.is_zero() {
            w = a.add(&w, &a.scale(&v, &block.basis[t]));
        }
    }
    if a.mul(u, &w) != e_i || a.mul(&w, u) != e_i {
        return Err(QdeError::Internal("corner inverse is one-sided".into()));
    }
    let drop = |v: &[usize], skip: usize| -> Vec<usize> {
        v.iter()
            .enumerate()
            .filter(|(t, _)| *t != skip)
            .map(|(_, &x)| x)
            .collect()
    };
    let mut terms = x.terms.clone();
    terms[k] = drop(&terms[k], r);
    terms[k + 1] = drop(&terms[k + 1], c);
    let mut diffs = Vec::with_capacity(x.diffs.len());
    for (m, dm) in x.diffs.iter().enumerate() {
        if m + 1 == k {
            // Drop the column into the cancelled source component.
            let mut nm = AMatrix::zero(a, dm.src.clone(), terms[k].clone());
            for (rr, row) in dm.entries.iter().enumerate() {
                let mut cc = 0;
                for (t, v) in row.iter().enumerate() {
                    if t != r {
                        nm.entries[rr][cc] = v.clone();
                        cc += 1;
                    }
                }
            }
            diffs.push(nm);
        } else if m == k {
            let mut nm = AMatrix::zero(a, terms[k].clone(), terms[k + 1].clone());
            let mut nr = 0;
            for rr in 0..dm.src.len() {
                if rr == r {
                    continue;
                }
                let corr_left = a.mul(&dm.entries[rr][c], &w);
                let mut nc = 0;
                for cc in 0..dm.dst.len() {
                    if cc == c {
                        continue;
                    }
                    let corr = a.mul(&corr_left, &dm.entries[r][cc]);
                    nm.entries[nr][nc] = a.add(&dm.entries[rr][cc], &a.neg(&corr));
                    nc += 1;
                }
                nr += 1;
            }
            diffs.push(nm);
        } else if m == k + 1 {
            // Drop the row out of the cancelled target component.
            let mut nm = AMatrix::zero(a, terms[k + 1].clone(), dm.dst.clone());
            let mut nr = 0;
            for (rr, row) in dm.entries.iter().enumerate() {
                if rr != c {
                    nm.entries[nr] = row.clone();
                    nr += 1;
                }
            }
            diffs.push(nm);
        } else {
            diffs.push(dm.clone());
        }
    }
    ProjComplex::new(a.clone(), x.lo, terms, diffs)
}

/// One degree of an idempotent's image, split into standard
/// projectives: matched component indices, the map in (columns are new
/// components) and the map out, both on module coordinates.
struct DegreePieces {
    comps: Vec<usize>,
    fmat: Matrix,
    gmat: Matrix,
}

fn split_degree(xr: &ProjComplex, deg: i32, emat: &Matrix) -> Result<DegreePieces> {
    let a = &xr.algebra;
    let field = a.field;
    let tm = term_module(xr, deg)?;
    let n = tm.dim;
    let mut ucols: Vec<Vec<Scalar>> = Vec::new();
    let mut span = Subspace::zero(field, n);
    for j in 0..emat.cols {
        let col: Vec<Scalar> = (0..n).map(|i| emat.at(i, j).clone()).collect();
        if !span.contains(&col) {
            span = span.sum(&Subspace::span(field, n, std::slice::from_ref(&col)));
            ucols.push(col);
        }
    }
    let s = ucols.len();
    if s == 0 {
        return Ok(DegreePieces {
            comps: vec![],
            fmat: Matrix::zero(field, n, 0),
            gmat: Matrix::zero(field, 0, n),
        });
    }
    let mut u = Matrix::zero(field, n, s);
    for (j, col) in ucols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            if !v.is_zero() {
                u.set(i, j, v.clone());
            }
        }
    }
    let mut v = Matrix::zero(field, s, n);
    for j in 0..n {
        let col: Vec<Scalar> = (0..n).map(|i| emat.at(i, j).clone()).collect();
        let sol = u
            .solve(&col)
            .ok_or_else(|| QdeError::Internal("image column escapes its own span".into()))?;
        for (i, val) in sol.into_iter().enumerate() {
            if !val.is_zero() {
                v.set(i, j, val);
            }
        }
    }
    let actions: Vec<Matrix> = tm.action.iter().map(|am| v.mul(am).mul(&u)).collect();
    let im = crate::module::FDModule::new(a.clone(), actions)?;
    let summands = decompose_module(&im)?;
    let nproj = a.num_projectives()?;
    let mut comps = Vec::new();
    let mut fmat = Matrix::zero(field, n, 0);
    let mut gmat = Matrix::zero(field, 0, n);
    for sd in &summands {
        let mut matched = None;
        for j in 0..nproj {
            let (pj, _, _) = projective_embedded(a, j)?;
            if pj.dim != sd.module.dim {
                continue;
            }
            if let Some(w) = is_isomorphic(&pj, &sd.module)?.witness() {
                matched = Some((j, w));
                break;
            }
        }
        let (j, w) = matched.ok_or_else(|| {
            QdeError::Internal("projective summand matches no standard projective".into())
        })?;
        let winv = w
            .mat
            .inverse()
            .ok_or_else(|| QdeError::Internal("witness not invertible".into()))?;
        let fblock = u.mul(&sd.include.mat).mul(&w.mat);
        let gblock = winv.mul(&sd.project.mat).mul(&v);
        comps.push(j);
        fmat = fmat.hstack(&fblock);
        gmat = gmat.vstack(&gblock);
    }
    Ok(DegreePieces { comps, fmat, gmat })
}

/// Read a module-coordinate map between sums of standard projectives
/// back into an algebra-entry matrix.
pub(crate) fn entries_from_module_matrix(
    a: &Arc<FDAlgebra>,
    src: &[usize],
    dst: &[usize],
    m: &Matrix,
) -> Result<AMatrix> {
    let mut src_info = Vec::new();
    for &i in src {
        src_info.push(projective_embedded(a, i)?);
    }
    let mut dst_info = Vec::new();
    for &j in dst {
        dst_info.push(projective_embedded(a, j)?);
    }
    let mut out = AMatrix::zero(a, src.to_vec(), dst.to_vec());
    let sdim: usize = src_info.iter().map(|t| t.0.dim).sum();
    let mut soff = 0;
    for (r, (smod, _, gen)) in src_info.iter().enumerate() {
        let mut vec_in = vec![a.field.zero(); sdim];
        for (k, g) in gen.iter().enumerate() {
            vec_in[soff + k] = g.clone();
        }
        let img = m.apply(&vec_in);
        let mut doff = 0;
        for (c, (dmod, dvecs, _)) in dst_info.iter().enumerate() {
            let mut elem = a.zero_elem();
            for k in 0..dmod.dim {
                let coeff = &img[doff + k];
                if !coeff.is_zero() {
                    for (row, bv) in dvecs[k].iter().enumerate() {
                        elem[row] = elem[row].add(&coeff.mul(bv));
                    }
                }
            }
            out.entries[r][c] = elem;
            doff += dmod.dim;
        }
        soff += smod.dim;
    }
    AMatrix::new(a.clone(), src.to_vec(), dst.to_vec(), out.entries)
}

/// Direct-sum decomposition into indecomposables, grouped up to
/// isomorphism, with the basic form (one copy of each class).
pub struct Decomposition {
    pub summands: Vec<(ProjComplex, usize)>,
    pub basic_form: ProjComplex,
}

impl Decomposition {
    pub fn total_count(&self) -> usize {
        self.summands.iter().map(|(_, m)| m).sum()
    }
}

pub fn decompose(x: &ProjComplex) -> Result<Decomposition> {
    let xr = reduce(x)?;
    if xr.is_zero_complex() {
        return Ok(Decomposition {
            summands: vec![],
            basic_form: ProjComplex::zero(&xr.algebra),
        });
    }
    let se = strict_end(&xr)?;
    let srad = se.algebra.radical_subspace()?;
    for row in se.null_in_end.basis_rows() {
        if !srad.contains(&row) {
            return Err(QdeError::VerificationFailed(
                "null-homotopic ideal escapes the radical".into(),
            ));
        }
    }
    let prims = primitive_idempotents(&se.algebra)?;
    let endos: Vec<ChainMap> = prims.iter().map(|e| se.realize(e)).collect();
    let field = xr.algebra.field;
    let dmats: Vec<Matrix> = xr
        .diffs
        .iter()
        .map(amatrix_module_matrix)
        .collect::<Result<_>>()?;
    let mut parts: Vec<ProjComplex> = Vec::new();
    let mut fg_sums: Vec<Option<Matrix>> = vec![None; xr.terms.len()];
    for endo in &endos {
        endo.verify()?;
        let mut degree_pieces = Vec::new();
        for k in 0..xr.terms.len() {
            let deg = xr.lo + k as i32;
            let emat = amatrix_module_matrix(&endo.mat_at(deg))?;
            degree_pieces.push(split_degree(&xr, deg, &emat)?);
        }
        for (k, dp) in degree_pieces.iter().enumerate() {
            let prod = dp.fmat.mul(&dp.gmat);
            fg_sums[k] = Some(match fg_sums[k].take() {
                None => prod,
                Some(acc) => acc.add(&prod),
            });
        }
        let terms: Vec<Vec<usize>> = degree_pieces.iter().map(|dp| dp.comps.clone()).collect();
        let mut diffs = Vec::new();
        for k in 0..xr.diffs.len() {
            let comp = degree_pieces[k + 1].gmat.mul(&dmats[k]).mul(&degree_pieces[k].fmat);
            diffs.push(entries_from_module_matrix(
                &xr.algebra,
                &degree_pieces[k].comps,
                &degree_pieces[k + 1].comps,
                &comp,
            )?);
        }
        let part = ProjComplex::new(xr.algebra.clone(), xr.lo, terms.clone(), diffs.clone())?;
        // The projection down to this summand must itself be a chain
        // map; on module coordinates that is g d = d_new g per degree.
        for k in 0..xr.diffs.len() {
            let lhs = degree_pieces[k + 1].gmat.mul(&dmats[k]);
            let dnew = amatrix_module_matrix(&diffs[k])?;
            let rhs = dnew.mul(&degree_pieces[k].gmat);
            if lhs != rhs {
                return Err(QdeError::VerificationFailed(
                    "summand projection is not a chain map".into(),
                ));
            }
        }
        parts.push(part);
    }
    // The pieces must reassemble the complex: summed over all summands
    // the include-project composites give the identity in each degree.
    for (k, acc) in fg_sums.iter().enumerate() {
        let n = term_module(&xr, xr.lo + k as i32)?.dim;
        let ok = match acc {
            None => n == 0,
            Some(m) => *m == Matrix::identity(field, n),
        };
        if !ok {
            return Err(QdeError::VerificationFailed(
                "summands do not reassemble the complex".into(),
            ));
        }
    }
    // Group by isomorphism.
    let mut groups: Vec<(ProjComplex, usize)> = Vec::new();
    for p in parts {
        let mut placed = false;
        for (rep, count) in groups.iter_mut() {
            if indecomposable_pair_iso(rep, &p)? {
                *count += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push((p, 1));
        }
    }
    let reps: Vec<&ProjComplex> = groups.iter().map(|(p, _)| p).collect();
    let basic_form = direct_sum(&reps)?;
    Ok(Decomposition { summands: groups, basic_form })
}

/// One indecomposable direct summand with the chain maps that split it
/// off: `include` embeds the part, `project` retracts onto it, and
/// include then project is the identity of the part.
pub struct SplitSummand {
    pub part: ProjComplex,
    pub include: ChainMap,
    pub project: ChainMap,
}

/// Split a complex into indecomposable summands with explicit section
/// and retraction maps, one entry per summand copy (no grouping by
/// isomorphism). The input must already be in minimal form: every
/// differential entry inside the radical.
pub fn split_summands(x: &ProjComplex) -> Result<Vec<SplitSummand>> {
    if !x.is_radical()? {
        return Err(QdeError::PreconditionFailed(
            "splitting needs a minimal complex (radical differentials)".into(),
        ));
    }
    if x.is_zero_complex() {
        return Ok(vec![]);
    }
    let field = x.algebra.field;
    let se = strict_end(x)?;
    let prims = primitive_idempotents(&se.algebra)?;
    let dmats: Vec<Matrix> = x.diffs.iter().map(amatrix_module_matrix).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for prim in &prims {
        let endo = se.realize(prim);
        endo.verify()?;
        let mut pieces = Vec::new();
        for k in 0..x.terms.len() {
            let deg = x.lo + k as i32;
            let emat = amatrix_module_matrix(&endo.mat_at(deg))?;
            pieces.push(split_degree(x, deg, &emat)?);
        }
        let terms: Vec<Vec<usize>> = pieces.iter().map(|dp| dp.comps.clone()).collect();
        let mut diffs = Vec::new();
        for k in 0..x.diffs.len() {
            let comp = pieces[k + 1].gmat.mul(&dmats[k]).mul(&pieces[k].fmat);
            diffs.push(entries_from_module_matrix(
                &x.algebra,
                &pieces[k].comps,
                &pieces[k + 1].comps,
                &comp,
            )?);
        }
        let part = ProjComplex::new(x.algebra.clone(), x.lo, terms, diffs)?;
        let mut inc_mats = Vec::new();
        let mut proj_mats = Vec::new();
        for (k, dp) in pieces.iter().enumerate() {
            let deg = x.lo + k as i32;
            inc_mats.push(entries_from_module_matrix(
                &x.algebra,
                dp.comps.as_slice(),
                x.comps(deg),
                &dp.fmat,
            )?);
            proj_mats.push(entries_from_module_matrix(
                &x.algebra,
                x.comps(deg),
                dp.comps.as_slice(),
                &dp.gmat,
            )?);
            let prod = dp.gmat.mul(&dp.fmat);
            if prod != Matrix::identity(field, prod.rows) {
                return Err(QdeError::Internal("summand retraction is not a section".into()));
            }
        }
        let include = ChainMap::new(part.clone(), x.clone(), 0, inc_mats)?;
        include.verify()?;
        let project = ChainMap::new(x.clone(), part.clone(), 0, proj_mats)?;
        project.verify()?;
        out.push(SplitSummand { part, include, project });
    }
    Ok(out)
}

/// Isomorphism test for two indecomposable complexes with local
/// endomorphism rings: some basis pairing f g must be a unit, and by
/// bilinearity checking basis pairs is enough.
fn indecomposable_pair_iso(x: &ProjComplex, y: &ProjComplex) -> Result<bool> {
    if x.is_zero_complex() || y.is_zero_complex() {
        return Ok(x.is_zero_complex() && y.is_zero_complex());
    }
    let fwd = homotopy_hom(x, y, 0)?;
    if fwd.dim == 0 {
        return Ok(false);
    }
    let bwd = homotopy_hom(y, x, 0)?;
    if bwd.dim == 0 {
        return Ok(false);
    }
    let ek = end_algebra_k(x)?;
    let rad = ek.algebra.radical_subspace()?;
    for f in &fwd.basis {
        for g in &bwd.basis {
            let cls = ek.class_of(&f.then(g)?)?;
            if !rad.contains(&cls) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Whether two complexes over the same algebra become isomorphic in the
/// homotopy category: both are decomposed and their indecomposable
/// summands matched class by class with multiplicities.
pub fn complexes_isomorphic(x: &ProjComplex, y: &ProjComplex) -> Result<bool> {
    let dx = decompose(x)?;
    let dy = decompose(y)?;
    if dx.total_count() != dy.total_count() || dx.summands.len() != dy.summands.len() {
        return Ok(false);
    }
    let mut used = vec![false; dy.summands.len()];
    for (sx, mx) in &dx.summands {
        let mut found = false;
        for (j, (sy, my)) in dy.summands.iter().enumerate() {
            if used[j] {
                continue;
            }
            if indecomposable_pair_iso(sx, sy)? {
                if mx != my {
                    return Ok(false);
                }
                used[j] = true;
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cone, make_complex, projective_stalk, regular_stalk, shift, ChainMap};
    use crate::fixtures::{algebra_from, EX56_A, EX56_T};
    use crate::parse::parse_source;

    #[test]
    fn regular_stalk_splits_into_projective_stalks() {
        let a = algebra_from(EX56_A).unwrap();
        let r = regular_stalk(&a).unwrap();
        let d = decompose(&r).unwrap();
        assert_eq!(d.total_count(), 3);
        assert_eq!(d.summands.len(), 3);
        for (s, m) in &d.summands {
            assert_eq!(*m, 1);
            assert_eq!(s.terms.len(), 1);
            assert_eq!(s.comps(0).len(), 1);
        }
    }

    #[test]
    fn zero_map_cone_splits() {
        let a = algebra_from(EX56_A).unwrap();
        let p1 = projective_stalk(&a, 0, 0).unwrap();
        let p3 = projective_stalk(&a, 2, 0).unwrap();
        let z = ChainMap::zero(&p1, &p3, 0);
        let c = cone(&z).unwrap();
        let expected = direct_sum(&[&p3, &shift(&p1, 1)]).unwrap();
        assert!(complexes_isomorphic(&c, &expected).unwrap());
        assert!(!complexes_isomorphic(&c, &p3).unwrap());
    }

    #[test]
    fn two_term_tilting_complex_decomposes_into_three() {
        let items = parse_source(EX56_T).unwrap();
        let a = crate::algebra::build(items[0].as_algebra().unwrap()).unwrap();
        let t = make_complex(&a, items[1].as_complex().unwrap()).unwrap();
        let d = decompose(&t).unwrap();
        assert_eq!(d.total_count(), 3);
        assert_eq!(d.summands.len(), 3);
        // One two-term summand and the two shifted stalks.
        let mut two_term = 0;
        let mut stalks = Vec::new();
        for (s, m) in &d.summands {
            assert_eq!(*m, 1);
            if s.terms.len() == 2 {
                two_term += 1;
                assert_eq!(s.comps(-1), &[1]);
                assert_eq!(s.comps(0), &[0]);
            } else {
                assert_eq!(s.lo, -1);
                stalks.push(s.comps(-1).to_vec());
            }
        }
        assert_eq!(two_term, 1);
        stalks.sort();
        assert_eq!(stalks, vec![vec![1], vec![2]]);
    }

    #[test]
    fn shifted_pair_gives_two_classes() {
        let a = algebra_from(EX56_A).unwrap();
        let p = projective_stalk(&a, 1, 0).unwrap();
        let ps = shift(&p, 1);
        let both = direct_sum(&[&p, &ps]).unwrap();
        let d = decompose(&both).unwrap();
        assert_eq!(d.total_count(), 2);
        assert_eq!(d.summands.len(), 2);
    }
}
