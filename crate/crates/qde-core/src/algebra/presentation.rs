use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::quiver::{AlgebraPresentation, Arrow, Path, Quiver, RelationExpr};
use crate::scalar::{FieldTag, Scalar};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::{build, hom_from_assignment, AlgElem, AlgebraHom, ArrowImage, FDAlgebra};

/// Extract a quiver presentation from a basic algebra with split simple
/// modules: vertices are the primitive idempotents, arrows lift a basis of
/// e_i (rad/rad^2) e_j, and relations generate the kernel of the induced
/// surjection from the path algebra. Returns the presentation together
/// with the isomorphism from its build onto the input algebra.
pub fn basic_presentation(
    a: &Arc<FDAlgebra>,
    name: &str,
) -> Result<(AlgebraPresentation, AlgebraHom)> {
    let field = a.field;
    let idem = a.idempotent_list()?.clone();
    let n = idem.len();
    let rad = a.radical_subspace()?.clone();

    // rad^2 as a subspace.
    let rad_rows = rad.basis_rows();
    let mut rad2_vecs = Vec::new();
    for x in &rad_rows {
        for y in &rad_rows {
            rad2_vecs.push(a.mul(x, y));
        }
    }
    let rad2 = Subspace::span(field, a.dim, &rad2_vecs);

    // Basic + split checks: e_i S e_j must vanish for i != j and be one
    // dimensional for i = j, where S = A/rad.
    for i in 0..n {
        for j in 0..n {
            let mut vecs = Vec::new();
            for k in 0..a.dim {
                vecs.push(a.mul(&idem[i], &a.mul(&a.basis_elem(k), &idem[j])));
            }
            let eaej = Subspace::span(field, a.dim, &vecs);
            let mut rvecs = Vec::new();
            for r in &rad_rows {
                rvecs.push(a.mul(&idem[i], &a.mul(r, &idem[j])));
            }
            let erej = Subspace::span(field, a.dim, &rvecs);
            let sdim = eaej.dim() - erej.dim();
            if i == j && sdim != 1 {
                return Err(QdeError::NotSplit(format!(
                    "endomorphism ring of projective {i} has dimension {sdim} over the base field"
                )));
            }
            if i != j && sdim != 0 {
                return Err(QdeError::NotBasic(format!(
                    "projectives {i} and {j} are isomorphic"
                )));
            }
        }
    }

    // Arrows: lift a basis of e_i (rad/rad^2) e_j.
    let vertices: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut arrows: Vec<Arrow> = Vec::new();
    let mut arrow_elems: Vec<AlgElem> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut vecs = Vec::new();
            for r in &rad_rows {
                let v = a.mul(&idem[i], &a.mul(r, &idem[j]));
                if !a.is_zero_elem(&v) {
                    vecs.push(v);
                }
            }
            let radij = Subspace::span(field, a.dim, &vecs);
            let mut r2vecs = Vec::new();
            for r in rad2.basis_rows() {
                let v = a.mul(&idem[i], &a.mul(&r, &idem[j]));
                if !a.is_zero_elem(&v) {
                    r2vecs.push(v);
                }
            }
            let mut chosen = Subspace::span(field, a.dim, &r2vecs);
            for v in radij.basis_rows() {
                if !chosen.contains(&v) {
                    arrows.push(Arrow {
                        label: format!("a{}", arrows.len() + 1),
                        source: i,
                        target: j,
                    });
                    arrow_elems.push(v.clone());
                    let mut all = chosen.basis_rows();
                    all.push(v);
                    chosen = Subspace::span(field, a.dim, &all);
                }
            }
        }
    }

    let quiver = Quiver::new(vertices, arrows)?;
    let relations = kernel_relations(&quiver, field, a, &idem, &arrow_elems)?;
    let presentation = AlgebraPresentation {
        name: name.to_string(),
        field,
        quiver,
        relations,
    };
    let built = build(&presentation)?;
    let images: Vec<ArrowImage> = arrow_elems.iter().map(|v| ArrowImage::Elem(v.clone())).collect();
    let iso = hom_from_assignment(&built, a, &idem, &images)?;
    if built.dim != a.dim || iso.mat.rank() != a.dim {
        return Err(QdeError::VerificationFailed(
            "extracted presentation does not rebuild the algebra".into(),
        ));
    }
    Ok((presentation, iso))
}

/// Generators of the kernel of the algebra map from a path algebra defined
/// by the given vertex and arrow images. Arrow images must lie in the
/// radical. Kernels are collected degree by degree and filtered against
/// the ideal generated by relations found so far, so the returned set
/// generates but carries little redundancy.
pub fn kernel_relations(
    quiver: &Quiver,
    field: FieldTag,
    a: &Arc<FDAlgebra>,
    vertex_images: &[AlgElem],
    arrow_images: &[AlgElem],
) -> Result<Vec<RelationExpr>> {
    const PATH_BUDGET: usize = 200_000;
    let rad = a.radical_subspace()?;
    for (k, v) in arrow_images.iter().enumerate() {
        if !rad.contains(v) {
            return Err(QdeError::PreconditionFailed(format!(
                "image of arrow `{}` is not in the radical",
                quiver.arrows[k].label
            )));
        }
    }
    let nv = quiver.vertices.len();
    let mut by_len: Vec<Vec<(Path, AlgElem)>> = Vec::new();
    by_len.push(
        (0..nv)
            .map(|v| (Path::trivial(v), vertex_images[v].clone()))
            .collect(),
    );
    let mut total = nv;
    // Extend until all images at some length vanish; arrow images sit in
    // the radical, so this happens within the nilpotency index.
    let vanish_at = loop {
        let d = by_len.len();
        let mut next = Vec::new();
        for (p, img) in &by_len[d - 1] {
            for (ai, arr) in quiver.arrows.iter().enumerate() {
                if arr.source == p.target {
                    let np = p
                        .compose(&Path::from_arrows(quiver, vec![ai])?)
                        .expect("arrow extends path");
                    let nimg = a.mul(img, &arrow_images[ai]);
                    next.push((np, nimg));
                }
            }
        }
        total += next.len();
        if total > PATH_BUDGET {
            return Err(QdeError::BudgetExhausted(format!(
                "path enumeration exceeded {PATH_BUDGET} paths while extracting relations"
            )));
        }
        let all_zero = next.iter().all(|(_, img)| a.is_zero_elem(img));
        by_len.push(next);
        if all_zero {
            break d;
        }
        if d > a.dim + 2 {
            return Err(QdeError::Internal(
                "radical images did not vanish within the nilpotency bound".into(),
            ));
        }
    };

    // Per-block path lists over lengths 2..=vanish_at.
    struct Block {
        paths: Vec<Path>,
        index: BTreeMap<Path, usize>,
        images: Vec<AlgElem>,
        span_vecs: Vec<Vec<Scalar>>,
        span: Subspace,
    }
    let mut blocks: BTreeMap<(usize, usize), Block> = BTreeMap::new();
    for d in 2..=vanish_at {
        for (p, img) in &by_len[d] {
            let b = blocks.entry((p.source, p.target)).or_insert_with(|| Block {
                paths: Vec::new(),
                index: BTreeMap::new(),
                images: Vec::new(),
                span_vecs: Vec::new(),
                span: Subspace::zero(field, 0),
            });
            let i = b.paths.len();
            b.paths.push(p.clone());
            b.index.insert(p.clone(), i);
            b.images.push(img.clone());
        }
    }
    for b in blocks.values_mut() {
        b.span = Subspace::zero(field, b.paths.len());
    }

    // Saturate the span of a relation vector with arrow multiples whose
    // components all stay within the enumerated lengths. This under-
    // approximates the generated ideal, which only ever keeps an extra
    // (still valid) relation.
    let keys: Vec<(usize, usize)> = blocks.keys().cloned().collect();
    let add_and_saturate = |blocks: &mut BTreeMap<(usize, usize), Block>,
                                key: (usize, usize),
                                v: Vec<Scalar>|
     -> Result<()> {
        let mut worklist = vec![(key, v)];
        while let Some((k, w)) = worklist.pop() {
            if w.iter().all(|s| s.is_zero()) {
                continue;
            }
            {
                let b = blocks.get_mut(&k).unwrap();
                if b.span.contains(&w) {
                    continue;
                }
                b.span_vecs.push(w.clone());
                b.span = Subspace::span(field, b.paths.len(), &b.span_vecs);
            }
            let b = &blocks[&k];
            let max_len = w
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_zero())
                .map(|(i, _)| b.paths[i].len())
                .max()
                .unwrap();
            if max_len + 1 > vanish_at {
                continue;
            }
            let terms: Vec<(usize, Scalar)> = w
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.is_zero())
                .map(|(i, s)| (i, s.clone()))
                .collect();
            for (ai, arr) in quiver.arrows.iter().enumerate() {
                let ap = Path::from_arrows(quiver, vec![ai])?;
                if arr.target == k.0 {
                    let nk = (arr.source, k.1);
                    if let Some(nb) = blocks.get(&nk) {
                        let mut nv = vec![field.zero(); nb.paths.len()];
                        for (i, s) in &terms {
                            let np = ap.compose(&b.paths[*i]).expect("composes");
                            let idx = nb.index[&np];
                            nv[idx] = nv[idx].add(s);
                        }
                        worklist.push((nk, nv));
                    }
                }
                if arr.source == k.1 {
                    let nk = (k.0, arr.target);
                    if let Some(nb) = blocks.get(&nk) {
                        let mut nv = vec![field.zero(); nb.paths.len()];
                        for (i, s) in &terms {
                            let np = b.paths[*i].compose(&ap).expect("composes");
                            let idx = nb.index[&np];
                            nv[idx] = nv[idx].add(s);
                        }
                        worklist.push((nk, nv));
                    }
                }
            }
        }
        Ok(())
    };

    let mut relations = Vec::new();
    for d in 2..=vanish_at {
        for key in &keys {
            let (kernel, up_to) = {
                let b = &blocks[key];
                // Columns restricted to paths of length <= d.
                let up_to = b.paths.iter().take_while(|p| p.len() <= d).count();
                if up_to == 0 {
                    continue;
                }
                let mut m = Matrix::zero(field, a.dim, up_to);
                for (j, img) in b.images.iter().take(up_to).enumerate() {
                    for (r, s) in img.iter().enumerate() {
                        if !s.is_zero() {
                            m.set(r, j, s.clone());
                        }
                    }
                }
                (m.kernel_basis(), up_to)
            };
            for kv in kernel {
                let b = &blocks[key];
                let mut full = vec![field.zero(); b.paths.len()];
                full[..up_to].clone_from_slice(&kv);
                if b.span.contains(&full) {
                    continue;
                }
                let terms: Vec<(Scalar, Path)> = full
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero())
                    .map(|(i, s)| (s.clone(), b.paths[i].clone()))
                    .collect();
                relations.push(RelationExpr::new(quiver, field, terms)?);
                add_and_saturate(&mut blocks, *key, full)?;
            }
        }
    }
    Ok(relations)
}

/// Outcome of a presentation isomorphism search.
pub enum IsoSearch {
    /// Isomorphism from the build of the first presentation to the build
    /// of the second.
    Found(AlgebraHom),
    /// The whole search space was enumerated without success.
    NotFound,
    /// The candidate budget ran out first.
    Exhausted,
}

/// Search for an isomorphism between two presented algebras that maps
/// trivial paths to trivial paths and arrows to scalar multiples of
/// arrows: vertex bijections compatible with arrow counts, arrow
/// bijections within each block, and unit scalings, each candidate checked
/// against the relations.
pub fn find_presentation_iso(
    p1: &AlgebraPresentation,
    p2: &AlgebraPresentation,
    budget: usize,
) -> Result<IsoSearch> {
    if p1.field != p2.field {
        return Ok(IsoSearch::NotFound);
    }
    let n = p1.quiver.vertices.len();
    if n != p2.quiver.vertices.len() || p1.quiver.arrows.len() != p2.quiver.arrows.len() {
        return Ok(IsoSearch::NotFound);
    }
    let b1 = build(p1)?;
    let b2 = build(p2)?;
    if b1.dim != b2.dim {
        return Ok(IsoSearch::NotFound);
    }
    let field = p1.field;
    let units: Vec<Scalar> = match field {
        FieldTag::Q => vec![field.one(), field.from_i64(-1)],
        FieldTag::Fp(p) => (1..p as i64).map(|v| field.from_i64(v)).collect(),
    };
    let idem2 = b2.idempotent_list()?.clone();
    let arrow_elems2: Vec<AlgElem> = {
        let info = b2.path_info.as_ref().unwrap();
        p2.quiver
            .arrows
            .iter()
            .map(|ar| info.arrow_element(&ar.label))
            .collect::<Result<_>>()?
    };

    let mut spent = 0usize;
    let mut sigma: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    let mut result: Option<AlgebraHom> = None;
    search_vertices(
        &mut sigma,
        &mut used,
        n,
        p1,
        p2,
        &b1,
        &b2,
        &idem2,
        &arrow_elems2,
        &units,
        budget,
        &mut spent,
        &mut result,
    )?;
    if let Some(h) = result {
        Ok(IsoSearch::Found(h))
    } else if spent >= budget {
        Ok(IsoSearch::Exhausted)
    } else {
        Ok(IsoSearch::NotFound)
    }
}

#[allow(clippy::too_many_arguments)]
fn search_vertices(
    sigma: &mut Vec<usize>,
    used: &mut Vec<bool>,
    n: usize,
    p1: &AlgebraPresentation,
    p2: &AlgebraPresentation,
    b1: &Arc<FDAlgebra>,
    b2: &Arc<FDAlgebra>,
    idem2: &[AlgElem],
    arrow_elems2: &[AlgElem],
    units: &[Scalar],
    budget: usize,
    spent: &mut usize,
    result: &mut Option<AlgebraHom>,
) -> Result<()> {
    if result.is_some() || *spent >= budget {
        return Ok(());
    }
    if sigma.len() == n {
        return try_arrow_matchings(
            sigma, p1, p2, b1, b2, idem2, arrow_elems2, units, budget, spent, result,
        );
    }
    let v = sigma.len();
    'cand: for w in 0..n {
        if used[w] {
            continue;
        }
        // Arrow-count compatibility against already placed vertices.
        for (prev_v, &prev_w) in sigma.iter().enumerate() {
            let c_out1 = count_arrows(&p1.quiver, prev_v, v);
            let c_out2 = count_arrows(&p2.quiver, prev_w, w);
            let c_in1 = count_arrows(&p1.quiver, v, prev_v);
            let c_in2 = count_arrows(&p2.quiver, w, prev_w);
            if c_out1 != c_out2 || c_in1 != c_in2 {
                continue 'cand;
            }
        }
        if count_arrows(&p1.quiver, v, v) != count_arrows(&p2.quiver, w, w) {
            continue 'cand;
        }
        sigma.push(w);
        used[w] = true;
        search_vertices(
            sigma, used, n, p1, p2, b1, b2, idem2, arrow_elems2, units, budget, spent, result,
        )?;
        sigma.pop();
        used[w] = false;
        if result.is_some() || *spent >= budget {
            return Ok(());
        }
    }
    Ok(())
}

fn count_arrows(q: &Quiver, s: usize, t: usize) -> usize {
    q.arrows.iter().filter(|a| a.source == s && a.target == t).count()
}

#[allow(clippy::too_many_arguments)]
fn try_arrow_matchings(
    sigma: &[usize],
    p1: &AlgebraPresentation,
    p2: &AlgebraPresentation,
    b1: &Arc<FDAlgebra>,
    b2: &Arc<FDAlgebra>,
    idem2: &[AlgElem],
    arrow_elems2: &[AlgElem],
    units: &[Scalar],
    budget: usize,
    spent: &mut usize,
    result: &mut Option<AlgebraHom>,
) -> Result<()> {
    // Group arrows of p1 by (source, target) block; candidates in p2 live
    // in the image block under sigma.
    let m = p1.quiver.arrows.len();
    let mut by_block: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ai, a) in p1.quiver.arrows.iter().enumerate() {
        by_block.entry((a.source, a.target)).or_default().push(ai);
    }
    let mut targets: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ai, a) in p2.quiver.arrows.iter().enumerate() {
        targets.entry((a.source, a.target)).or_default().push(ai);
    }
    // Per-block permutations, combined by backtracking.
    let block_list: Vec<((usize, usize), Vec<usize>)> =
        by_block.iter().map(|(k, v)| (*k, v.clone())).collect();
    let mut assignment: Vec<usize> = vec![usize::MAX; m];
    assign_blocks(
        0,
        &block_list,
        sigma,
        &targets,
        &mut assignment,
        p1,
        b1,
        b2,
        idem2,
        arrow_elems2,
        units,
        budget,
        spent,
        result,
    )
}

#[allow(clippy::too_many_arguments)]
fn assign_blocks(
    bi: usize,
    blocks: &[((usize, usize), Vec<usize>)],
    sigma: &[usize],
    targets: &BTreeMap<(usize, usize), Vec<usize>>,
    assignment: &mut Vec<usize>,
    p1: &AlgebraPresentation,
    b1: &Arc<FDAlgebra>,
    b2: &Arc<FDAlgebra>,
    idem2: &[AlgElem],
    arrow_elems2: &[AlgElem],
    units: &[Scalar],
    budget: usize,
    spent: &mut usize,
    result: &mut Option<AlgebraHom>,
) -> Result<()> {
    if result.is_some() || *spent >= budget {
        return Ok(());
    }
    if bi == blocks.len() {
        return try_scalings(
            assignment, sigma, p1, b1, b2, idem2, arrow_elems2, units, budget, spent, result,
        );
    }
    let ((s, t), ref sources) = blocks[bi];
    let key = (sigma[s], sigma[t]);
    let empty = Vec::new();
    let cands = targets.get(&key).unwrap_or(&empty);
    if cands.len() != sources.len() {
        return Ok(());
    }
    // All bijections sources -> cands.
    let k = sources.len();
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        for (i, &src) in sources.iter().enumerate() {
            assignment[src] = cands[perm[i]];
        }
        assign_blocks(
            bi + 1,
            blocks,
            sigma,
            targets,
            assignment,
            p1,
            b1,
            b2,
            idem2,
            arrow_elems2,
            units,
            budget,
            spent,
            result,
        )?;
        if result.is_some() || *spent >= budget {
            return Ok(());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    for &src in sources {
        assignment[src] = usize::MAX;
    }
    Ok(())
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[allow(clippy::too_many_arguments)]
fn try_scalings(
    assignment: &[usize],
    sigma: &[usize],
    p1: &AlgebraPresentation,
    b1: &Arc<FDAlgebra>,
    b2: &Arc<FDAlgebra>,
    idem2: &[AlgElem],
    arrow_elems2: &[AlgElem],
    units: &[Scalar],
    budget: usize,
    spent: &mut usize,
    result: &mut Option<AlgebraHom>,
) -> Result<()> {
    let m = assignment.len();
    let nu = units.len();
    // Mixed-radix counter over unit choices, all-ones first.
    let mut digits = vec![0usize; m];
    loop {
        if *spent >= budget {
            return Ok(());
        }
        *spent += 1;
        let vertex_images: Vec<AlgElem> = sigma.iter().map(|&w| idem2[w].clone()).collect();
        let arrow_images: Vec<ArrowImage> = (0..m)
            .map(|ai| {
                let tgt = assignment[ai];
                let scaled = b2.scale(&units[digits[ai]], &arrow_elems2[tgt]);
                ArrowImage::Elem(scaled)
            })
            .collect();
        match hom_from_assignment(b1, b2, &vertex_images, &arrow_images) {
            Ok(h) => {
                if h.mat.rank() == b2.dim && b1.dim == b2.dim {
                    *result = Some(h);
                    return Ok(());
                }
            }
            Err(QdeError::RelationNotKilled(_)) | Err(QdeError::PreconditionFailed(_)) => {}
            Err(e) => return Err(e),
        }
        // Advance the counter.
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(());
            }
            digits[pos] += 1;
            if digits[pos] < nu {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        let _ = p1;
    }
}
