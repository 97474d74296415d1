use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::parse::{ElemExpr, PathWord};
use crate::quiver::{AlgebraPresentation, Path};
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AlgElem, FDAlgebra};

pub const DEFAULT_LENGTH_CAP: usize = 64;

/// Hard limit on enumerated paths; hit only by quivers whose path count
/// explodes before the ideal certificate is found.
const PATH_BUDGET: usize = 200_000;

/// How a built algebra's basis relates back to quiver paths: the chosen
/// normal-form path per basis element, plus per-block reduction data that
/// maps any path to its basis coordinates.
#[derive(Clone)]
pub struct PathInfo {
    pub presentation: AlgebraPresentation,
    pub basis_paths: Vec<Path>,
    /// Every path of at least this length is zero in the algebra.
    pub vanish_length: usize,
    pub dim: usize,
    blocks: BTreeMap<(usize, usize), PathBlock>,
}

#[derive(Clone)]
struct PathBlock {
    paths: Vec<Path>,
    index: BTreeMap<Path, usize>,
    ideal: Subspace,
    /// Local index -> global basis index; None for paths rewritten away.
    global_of_local: Vec<Option<usize>>,
}

impl PathInfo {
    /// Coordinates of a path's residue class in the algebra basis.
    pub fn path_element(&self, p: &Path) -> AlgElem {
        let field = self.presentation.field;
        let mut out = vec![field.zero(); self.dim];
        if p.len() >= self.vanish_length {
            return out;
        }
        let block = self
            .blocks
            .get(&(p.source, p.target))
            .expect("every short path lies in an enumerated block");
        let local = *block.index.get(p).expect("short path was enumerated");
        let mut v = vec![field.zero(); block.paths.len()];
        v[local] = field.one();
        let reduced = block.ideal.reduce(&v);
        for (l, c) in reduced.into_iter().enumerate() {
            if !c.is_zero() {
                let g = block.global_of_local[l]
                    .expect("reduced vector is supported on normal forms");
                out[g] = c;
            }
        }
        out
    }

    pub fn vertex_idempotent_elem(&self, v: usize) -> AlgElem {
        self.path_element(&Path::trivial(v))
    }

    pub fn arrow_element(&self, label: &str) -> Result<AlgElem> {
        let idx = self
            .presentation
            .quiver
            .arrow_index(label)
            .ok_or_else(|| QdeError::PreconditionFailed(format!("unknown arrow `{label}`")))?;
        Ok(self.path_element(&Path::from_arrows(&self.presentation.quiver, vec![idx])?))
    }

    fn word_path(&self, w: &PathWord) -> Result<Path> {
        let q = &self.presentation.quiver;
        match w {
            PathWord::Trivial(v) => {
                let vi = q
                    .vertex_index(v)
                    .ok_or_else(|| QdeError::PreconditionFailed(format!("unknown vertex `{v}`")))?;
                Ok(Path::trivial(vi))
            }
            PathWord::Arrows(labels) => {
                let mut idxs = Vec::with_capacity(labels.len());
                for l in labels {
                    idxs.push(q.arrow_index(l).ok_or_else(|| {
                        QdeError::PreconditionFailed(format!("unknown arrow `{l}`"))
                    })?);
                }
                Path::from_arrows(q, idxs)
            }
        }
    }

    /// Resolve a parsed element expression to algebra coordinates.
    pub fn resolve(&self, expr: &ElemExpr) -> Result<AlgElem> {
        let field = self.presentation.field;
        let mut out = vec![field.zero(); self.dim];
        for term in expr {
            let c = field.from_ratio(term.num, term.den)?;
            let p = self.word_path(&term.word)?;
            let v = self.path_element(&p);
            for (o, x) in out.iter_mut().zip(v) {
                *o = o.add(&c.mul(&x));
            }
        }
        Ok(out)
    }

    /// Whether a formal combination of paths is zero in the algebra, i.e.
    /// lies in the defining ideal.
    pub fn in_ideal(&self, expr: &ElemExpr) -> Result<bool> {
        Ok(self.resolve(expr)?.iter().all(|s| s.is_zero()))
    }
}

pub fn build(p: &AlgebraPresentation) -> Result<Arc<FDAlgebra>> {
    build_with_cap(p, DEFAULT_LENGTH_CAP)
}

/// Construct the quotient of the path algebra by the relation ideal.
///
/// Works length by length. At truncation length M it holds the span of all
/// products u*r*v (r a relation, u and v paths) whose longest component has
/// length at most M; these are genuine ideal elements, so membership tests
/// against the span are conservative. The first length d at which every
/// length-d path lies in the span certifies that the ideal contains all
/// paths of length d and the algebra lives inside the span of the shorter
/// paths; the quotient is then assembled there.
pub fn build_with_cap(p: &AlgebraPresentation, cap: usize) -> Result<Arc<FDAlgebra>> {
    let field = p.field;
    for rel in &p.relations {
        for (c, _) in &rel.terms {
            if c.field() != field {
                return Err(QdeError::MixedFields("relation coefficients".into()));
            }
        }
    }
    let q = &p.quiver;
    let nv = q.vertices.len();

    // Paths grouped by length, in a fixed enumeration order.
    let mut by_len: Vec<Vec<Path>> = Vec::new();
    by_len.push((0..nv).map(Path::trivial).collect());
    let mut total_paths = nv;

    // Certification state per (source, target) block: paths of length >= 2
    // and the accumulated ideal-element vectors over them.
    #[derive(Default)]
    struct WState {
        paths: Vec<Path>,
        index: BTreeMap<Path, usize>,
        gens: Vec<Vec<(usize, Scalar)>>,
    }
    let mut wstate: BTreeMap<(usize, usize), WState> = BTreeMap::new();

    let rel_top: Vec<usize> = p
        .relations
        .iter()
        .map(|r| r.terms.iter().map(|(_, pa)| pa.len()).max().unwrap_or(0))
        .collect();

    let mut certified: Option<usize> = None;

    for m in 1..=cap {
        // Extend enumeration to length m.
        let prev = &by_len[m - 1];
        let mut next = Vec::new();
        for path in prev {
            for (ai, a) in q.arrows.iter().enumerate() {
                if a.source == path.target {
                    let ext = path
                        .compose(&Path::from_arrows(q, vec![ai])?)
                        .expect("arrow extends path at its target");
                    next.push(ext);
                }
            }
        }
        total_paths += next.len();
        if total_paths > PATH_BUDGET {
            return Err(QdeError::BudgetExhausted(format!(
                "path enumeration exceeded {PATH_BUDGET} paths at length {m}"
            )));
        }
        for path in &next {
            if m >= 2 {
                let st = wstate.entry((path.source, path.target)).or_default();
                let idx = st.paths.len();
                st.paths.push(path.clone());
                st.index.insert(path.clone(), idx);
            }
        }
        by_len.push(next);
        if m < 2 {
            continue;
        }

        // Ideal elements u*r*v whose longest component has length exactly m.
        for (ri, rel) in p.relations.iter().enumerate() {
            let top = rel_top[ri];
            if top > m {
                continue;
            }
            let (rs, rt) = (rel.terms[0].1.source, rel.terms[0].1.target);
            for lu in 0..=(m - top) {
                let lv = m - top - lu;
                let us: Vec<&Path> = by_len[lu].iter().filter(|u| u.target == rs).collect();
                let vs: Vec<&Path> = by_len[lv].iter().filter(|v| v.source == rt).collect();
                for u in &us {
                    for v in &vs {
                        let mut vec_terms = Vec::new();
                        for (c, pa) in &rel.terms {
                            let full = u
                                .compose(pa)
                                .and_then(|up| up.compose(v))
                                .expect("relation terms share endpoints");
                            let st = wstate.get(&(full.source, full.target)).unwrap();
                            vec_terms.push((st.index[&full], c.clone()));
                        }
                        wstate
                            .get_mut(&(u.source, v.target))
                            .unwrap()
                            .gens
                            .push(vec_terms);
                    }
                }
            }
        }

        // Try to certify some length d <= m: every length-d path must lie in
        // the accumulated ideal span of its block.
        let spans: BTreeMap<(usize, usize), Subspace> = wstate
            .iter()
            .map(|(&k, st)| {
                let n = st.paths.len();
                let vecs: Vec<Vec<Scalar>> = st
                    .gens
                    .iter()
                    .map(|g| {
                        let mut v = vec![field.zero(); n];
                        for (i, c) in g {
                            v[*i] = v[*i].add(c);
                        }
                        v
                    })
                    .collect();
                (k, Subspace::span(field, n, &vecs))
            })
            .collect();
        'dsearch: for d in 2..=m {
            for path in &by_len[d] {
                let st = &wstate[&(path.source, path.target)];
                let span = &spans[&(path.source, path.target)];
                let mut v = vec![field.zero(); st.paths.len()];
                v[st.index[path]] = field.one();
                if !span.contains(&v) {
                    continue 'dsearch;
                }
            }
            certified = Some(d);
            break;
        }
        if certified.is_some() {
            break;
        }
    }

    let dstar = certified.ok_or(QdeError::NotAdmissible { cap })?;

    // Assemble the quotient on paths of length < dstar. Blocks now index
    // all short paths (including trivial ones); the truncated ideal is the
    // saturation of the relation images under arrow multiplication, with
    // products of length >= dstar dropped.
    struct QBlock {
        paths: Vec<Path>,
        index: BTreeMap<Path, usize>,
        vecs: Vec<Vec<Scalar>>,
        span: Subspace,
    }
    let mut qblocks: BTreeMap<(usize, usize), QBlock> = BTreeMap::new();
    for d in 0..dstar {
        for path in &by_len[d] {
            let b = qblocks
                .entry((path.source, path.target))
                .or_insert_with(|| QBlock {
                    paths: Vec::new(),
                    index: BTreeMap::new(),
                    vecs: Vec::new(),
                    span: Subspace::zero(field, 0),
                });
            let idx = b.paths.len();
            b.paths.push(path.clone());
            b.index.insert(path.clone(), idx);
        }
    }
    for b in qblocks.values_mut() {
        b.span = Subspace::zero(field, b.paths.len());
    }

    let truncate =
        |terms: &[(Scalar, Path)], qb: &BTreeMap<(usize, usize), QBlock>| -> Vec<Scalar> {
            let (s, t) = (terms[0].1.source, terms[0].1.target);
            let Some(b) = qb.get(&(s, t)) else {
                // No path between these vertices survives the truncation.
                return Vec::new();
            };
            let mut v = vec![field.zero(); b.paths.len()];
            for (c, pa) in terms {
                if pa.len() < dstar {
                    let i = b.index[pa];
                    v[i] = v[i].add(c);
                }
            }
            v
        };

    let mut worklist: Vec<(usize, usize, Vec<Scalar>)> = Vec::new();
    for rel in &p.relations {
        let (s, t) = (rel.terms[0].1.source, rel.terms[0].1.target);
        let v = truncate(&rel.terms, &qblocks);
        worklist.push((s, t, v));
    }
    while let Some((s, t, v)) = worklist.pop() {
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        {
            let b = qblocks.get_mut(&(s, t)).unwrap();
            if b.span.contains(&v) {
                continue;
            }
            b.vecs.push(v.clone());
            b.span = Subspace::span(field, b.paths.len(), &b.vecs);
        }
        // Multiply by arrows on both sides, reading the element as a path
        // combination in its block.
        let terms: Vec<(Scalar, Path)> = {
            let b = &qblocks[&(s, t)];
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (c.clone(), b.paths[i].clone()))
                .collect()
        };
        for (ai, a) in q.arrows.iter().enumerate() {
            let ap = Path::from_arrows(q, vec![ai])?;
            if a.target == s {
                let new_terms: Vec<(Scalar, Path)> = terms
                    .iter()
                    .map(|(c, pa)| (c.clone(), ap.compose(pa).expect("left factor composes")))
                    .collect();
                worklist.push((a.source, t, truncate(&new_terms, &qblocks)));
            }
            if a.source == t {
                let new_terms: Vec<(Scalar, Path)> = terms
                    .iter()
                    .map(|(c, pa)| (c.clone(), pa.compose(&ap).expect("right factor composes")))
                    .collect();
                worklist.push((s, a.target, truncate(&new_terms, &qblocks)));
            }
        }
    }

    // Normal forms: non-pivot paths per block, collected in global
    // enumeration order (by length, then block construction order).
    let mut basis_paths: Vec<Path> = Vec::new();
    let mut blocks: BTreeMap<(usize, usize), PathBlock> = BTreeMap::new();
    for (&key, b) in &qblocks {
        let pivots: Vec<usize> = b
            .span
            .basis_rows()
            .iter()
            .map(|row| row.iter().position(|s| !s.is_zero()).unwrap())
            .collect();
        let mut global_of_local: Vec<Option<usize>> = vec![None; b.paths.len()];
        for (l, _) in b.paths.iter().enumerate() {
            if !pivots.contains(&l) {
                global_of_local[l] = Some(usize::MAX); // patched below
            }
        }
        blocks.insert(
            key,
            PathBlock {
                paths: b.paths.clone(),
                index: b.index.clone(),
                ideal: b.span.clone(),
                global_of_local,
            },
        );
    }
    for d in 0..dstar {
        for path in &by_len[d] {
            let blk = blocks.get_mut(&(path.source, path.target)).unwrap();
            let l = blk.index[path];
            if blk.global_of_local[l].is_some() {
                blk.global_of_local[l] = Some(basis_paths.len());
                basis_paths.push(path.clone());
            }
        }
    }

    let dim = basis_paths.len();
    let info = PathInfo {
        presentation: p.clone(),
        basis_paths: basis_paths.clone(),
        vanish_length: dstar,
        dim,
        blocks,
    };

    // Structure constants via single-path reduction.
    let mut left_mult = Vec::with_capacity(dim);
    for bp in &basis_paths {
        let mut m = Matrix::zero(field, dim, dim);
        for (j, bq) in basis_paths.iter().enumerate() {
            if bp.target != bq.source {
                continue;
            }
            let prod = bp.compose(bq).expect("checked endpoints");
            let col = info.path_element(&prod);
            for (r, c) in col.iter().enumerate() {
                if !c.is_zero() {
                    m.set(r, j, c.clone());
                }
            }
        }
        left_mult.push(m);
    }

    let labels: Vec<String> = basis_paths
        .iter()
        .map(|pa| pa.display(q))
        .collect();
    let mut one = vec![field.zero(); dim];
    let mut idem = Vec::with_capacity(nv);
    for v in 0..nv {
        let e = info.vertex_idempotent_elem(v);
        one = e.iter().zip(&one).map(|(a, b)| a.add(b)).collect();
        idem.push(e);
    }
    let rad_vecs: Vec<AlgElem> = basis_paths
        .iter()
        .enumerate()
        .filter(|(_, pa)| pa.len() >= 1)
        .map(|(i, _)| {
            let mut v = vec![field.zero(); dim];
            v[i] = field.one();
            v
        })
        .collect();
    let rad = Subspace::span(field, dim, &rad_vecs);

    let alg = FDAlgebra::from_parts(field, labels, left_mult, one)?
        .with_idempotents(idem)?
        .with_radical(rad)
        .with_path_info(info);
    Ok(alg)
}
