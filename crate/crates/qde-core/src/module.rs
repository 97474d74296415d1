//! Finite-dimensional left modules over a concrete algebra: projectives,
//! Hom-spaces, tops and socles, duality, the Nakayama functor, exact
//! isomorphism testing, direct-sum decomposition, and the self-injective
//! corner cut out by the Nakayama-stable projectives.
//!
//! Conventions: module elements are column coordinate vectors; a hom is a
//! matrix applied on the left of the column; `f.then(g)` composes first f
//! then g, matching the left-to-right composition used for algebra
//! elements, so `End(A A) = A` with no opposite twist.

use crate::algebra::{
    corner, ensure_same_algebra, primitive_idempotents, AlgElem, FDAlgebra,
};
use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::{FieldTag, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

const ISO_RNG_SEED: u64 = 0x51DE_5EED;
const ISO_RANDOM_TRIES: usize = 64;
const ISO_EXHAUSTIVE_CAP: u64 = 4096;

/// A left module given by one action matrix per algebra basis element:
/// `action[k]` sends the coordinate column of m to the column of b_k · m.
#[derive(Clone)]
pub struct FDModule {
    pub algebra: Arc<FDAlgebra>,
    pub dim: usize,
    pub action: Vec<Matrix>,
}

impl FDModule {
    /// Checks shapes and that the unit acts as the identity. The full
    /// multiplicativity check is separate (`verify_representation`)
    /// because constructors in this module produce representations by
    /// construction and the pairwise check is quadratic in dim A.
    pub fn new(algebra: Arc<FDAlgebra>, action: Vec<Matrix>) -> Result<FDModule> {
        if action.len() != algebra.dim {
            return Err(QdeError::DimMismatch("one action matrix per basis element".into()));
        }
        let dim = action.first().map(|m| m.rows).unwrap_or(0);
        for m in &action {
            if m.rows != dim || m.cols != dim || m.field != algebra.field {
                return Err(QdeError::DimMismatch("action matrix shape".into()));
            }
        }
        let md = FDModule { algebra, dim, action };
        let id = Matrix::identity(md.algebra.field, md.dim);
        if md.act(&md.algebra.one) != id {
            return Err(QdeError::PreconditionFailed("unit does not act as identity".into()));
        }
        Ok(md)
    }

    pub fn zero(algebra: Arc<FDAlgebra>) -> FDModule {
        let action = (0..algebra.dim).map(|_| Matrix::zero(algebra.field, 0, 0)).collect();
        FDModule { algebra, dim: 0, action }
    }

    /// Action matrix of an arbitrary algebra element.
    pub fn act(&self, a: &[Scalar]) -> Matrix {
        let mut out = Matrix::zero(self.algebra.field, self.dim, self.dim);
        for (k, c) in a.iter().enumerate() {
            if !c.is_zero() {
                out = out.add(&self.action[k].scale(c));
            }
        }
        out
    }

    pub fn act_vec(&self, a: &[Scalar], v: &[Scalar]) -> Vec<Scalar> {
        self.act(a).apply(v)
    }

    /// Full representation check: act(b_i) act(b_j) = act(b_i b_j) on all
    /// basis pairs. Quadratic in dim A; meant for tests and acceptance.
    pub fn verify_representation(&self) -> Result<()> {
        for i in 0..self.algebra.dim {
            let bi = self.algebra.basis_elem(i);
            for j in 0..self.algebra.dim {
                let bj = self.algebra.basis_elem(j);
                let prod = self.algebra.mul(&bi, &bj);
                // act(xy) applied after: (xy)·m = x·(y·m)
                let lhs = self.action[i].mul(&self.action[j]);
                if lhs != self.act(&prod) {
                    return Err(QdeError::VerificationFailed(format!(
                        "action not multiplicative on basis pair ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn direct_sum(parts: &[&FDModule]) -> Result<FDModule> {
        let algebra = parts
            .first()
            .map(|m| m.algebra.clone())
            .ok_or_else(|| QdeError::PreconditionFailed("empty direct sum needs an algebra".into()))?;
        for m in parts {
            ensure_same_algebra(&algebra, &m.algebra, "module direct sum")?;
        }
        let dim: usize = parts.iter().map(|m| m.dim).sum();
        let field = algebra.field;
        let mut action = Vec::with_capacity(algebra.dim);
        for k in 0..algebra.dim {
            let mut m = Matrix::zero(field, dim, dim);
            let mut off = 0;
            for p in parts {
                for r in 0..p.dim {
                    for c in 0..p.dim {
                        let v = p.action[k].at(r, c).clone();
                        if !v.is_zero() {
                            m.set(off + r, off + c, v);
                        }
                    }
                }
                off += p.dim;
            }
            action.push(m);
        }
        FDModule::new(algebra, action)
    }
}

/// Module homomorphism as a matrix: `mat` has codomain.dim rows and
/// domain.dim columns and commutes with every action matrix.
#[derive(Clone)]
pub struct ModuleHom {
    pub domain: FDModule,
    pub codomain: FDModule,
    pub mat: Matrix,
}

impl ModuleHom {
    pub fn new(domain: FDModule, codomain: FDModule, mat: Matrix) -> Result<ModuleHom> {
        if mat.rows != codomain.dim || mat.cols != domain.dim {
            return Err(QdeError::DimMismatch("hom matrix shape".into()));
        }
        Ok(ModuleHom { domain, codomain, mat })
    }

    pub fn identity(m: &FDModule) -> ModuleHom {
        ModuleHom {
            domain: m.clone(),
            codomain: m.clone(),
            mat: Matrix::identity(m.algebra.field, m.dim),
        }
    }

    pub fn zero(domain: &FDModule, codomain: &FDModule) -> ModuleHom {
        ModuleHom {
            mat: Matrix::zero(domain.algebra.field, codomain.dim, domain.dim),
            domain: domain.clone(),
            codomain: codomain.clone(),
        }
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.mat.apply(v)
    }

    /// First self, then g.
    pub fn then(&self, g: &ModuleHom) -> ModuleHom {
        ModuleHom {
            domain: self.domain.clone(),
            codomain: g.codomain.clone(),
            mat: g.mat.mul(&self.mat),
        }
    }

    pub fn verify(&self) -> Result<()> {
        for k in 0..self.domain.algebra.dim {
            if self.mat.mul(&self.domain.action[k]) != self.codomain.action[k].mul(&self.mat) {
                return Err(QdeError::VerificationFailed(format!(
                    "hom does not commute with basis element {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_invertible(&self) -> bool {
        self.domain.dim == self.codomain.dim && self.mat.rank() == self.domain.dim
    }
}

/// Submodule of the regular module spanned by the given independent
/// vectors (assumed closed under the left action): the module plus the
/// inclusion columns back into A-coordinates.
fn submodule_of_regular(a: &Arc<FDAlgebra>, vectors: &[AlgElem]) -> Result<(FDModule, Matrix)> {
    let field = a.field;
    let d = vectors.len();
    let mut incl = Matrix::zero(field, a.dim, d);
    for (j, v) in vectors.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            if !x.is_zero() {
                incl.set(r, j, x.clone());
            }
        }
    }
    let mut action = Vec::with_capacity(a.dim);
    for k in 0..a.dim {
        let bk = a.basis_elem(k);
        let mut m = Matrix::zero(field, d, d);
        for (j, v) in vectors.iter().enumerate() {
            let prod = a.mul(&bk, v);
            let coords = incl.solve(&prod).ok_or_else(|| {
                QdeError::PreconditionFailed("vectors do not span a stable subspace".into())
            })?;
            for (r, x) in coords.into_iter().enumerate() {
                if !x.is_zero() {
                    m.set(r, j, x);
                }
            }
        }
        action.push(m);
    }
    Ok((FDModule::new(a.clone(), action)?, incl))
}

/// The indecomposable projective Ae_i with its basis embedded in A.
pub fn projective(a: &Arc<FDAlgebra>, i: usize) -> Result<FDModule> {
    Ok(projective_embedded(a, i)?.0)
}

/// Same, returning the chosen basis vectors inside A (paths ending at i,
/// grouped by their starting vertex) and the coordinate column of the
/// generator e_i.
pub fn projective_embedded(a: &Arc<FDAlgebra>, i: usize) -> Result<(FDModule, Vec<AlgElem>, Vec<Scalar>)> {
    let n = a.num_projectives()?;
    if i >= n {
        return Err(QdeError::PreconditionFailed(format!("no idempotent with index {i}")));
    }
    let mut vectors = Vec::new();
    for j in 0..n {
        vectors.extend(a.block(j, i)?.basis.iter().cloned());
    }
    let (module, incl) = submodule_of_regular(a, &vectors)?;
    let gen = incl
        .solve(&a.idempotent(i)?)
        .ok_or_else(|| QdeError::Internal("idempotent missing from its own projective".into()))?;
    Ok((module, vectors, gen))
}

/// The regular module A A.
pub fn regular(a: &Arc<FDAlgebra>) -> Result<FDModule> {
    let action = (0..a.dim).map(|k| a.left_mult_matrix(&a.basis_elem(k))).collect();
    FDModule::new(a.clone(), action)
}

/// Left ideal A·gen as a module with its inclusion into the regular module.
pub fn left_ideal(a: &Arc<FDAlgebra>, gen: &AlgElem) -> Result<(FDModule, Matrix)> {
    let vecs: Vec<AlgElem> = (0..a.dim).map(|k| a.mul(&a.basis_elem(k), gen)).collect();
    let span = Subspace::span(a.field, a.dim, &vecs);
    submodule_of_regular(a, &span.basis_rows())
}

/// The simple module at a primitive idempotent: one-dimensional with the
/// scalar action read off modulo the radical.
pub fn simple(a: &Arc<FDAlgebra>, i: usize) -> Result<FDModule> {
    let e = a.idempotent(i)?;
    let rad = a.radical_subspace()?;
    let field = a.field;
    // Columns: radical basis then e; the coefficient of e in e b e mod rad
    // is the scalar through which b acts on the simple top of Ae.
    let rad_rows = rad.basis_rows();
    let mut cols = Matrix::zero(field, a.dim, rad_rows.len() + 1);
    for (j, r) in rad_rows.iter().enumerate() {
        for (row, x) in r.iter().enumerate() {
            if !x.is_zero() {
                cols.set(row, j, x.clone());
            }
        }
    }
    for (row, x) in e.iter().enumerate() {
        if !x.is_zero() {
            cols.set(row, rad_rows.len(), x.clone());
        }
    }
    let mut action = Vec::with_capacity(a.dim);
    for k in 0..a.dim {
        let v = a.mul(&e, &a.mul(&a.basis_elem(k), &e));
        let coords = cols
            .solve(&v)
            .ok_or_else(|| QdeError::Internal("corner element escapes rad + span(e)".into()))?;
        let lam = coords[rad_rows.len()].clone();
        let mut m = Matrix::zero(field, 1, 1);
        m.set(0, 0, lam);
        action.push(m);
    }
    FDModule::new(a.clone(), action)
}

/// Basis of the space of module homomorphisms m -> n: kernel of the
/// commutation system H·act_m(b) = act_n(b)·H over all basis b.
pub fn hom_space(m: &FDModule, n: &FDModule) -> Result<Vec<ModuleHom>> {
    ensure_same_algebra(&m.algebra, &n.algebra, "hom space")?;
    let field = m.algebra.field;
    let (md, nd) = (m.dim, n.dim);
    if md == 0 || nd == 0 {
        return Ok(vec![]);
    }
    let unknowns = nd * md;
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for k in 0..m.algebra.dim {
        let am = &m.action[k];
        let an = &n.action[k];
        for r in 0..nd {
            for c in 0..md {
                let mut row = vec![field.zero(); unknowns];
                // (H am)[r][c] = sum_s H[r][s] am[s][c]
                for s in 0..md {
                    let v = am.at(s, c);
                    if !v.is_zero() {
                        row[r * md + s] = row[r * md + s].add(v);
                    }
                }
                // -(an H)[r][c] = -sum_s an[r][s] H[s][c]
                for s in 0..nd {
                    let v = an.at(r, s);
                    if !v.is_zero() {
                        row[s * md + c] = row[s * md + c].sub(v);
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let sys = if rows.is_empty() {
        Matrix::zero(field, 1, unknowns)
    } else {
        Matrix::from_rows(field, rows)?
    };
    let mut out = Vec::new();
    for h in sys.kernel_basis() {
        let mut mat = Matrix::zero(field, nd, md);
        for r in 0..nd {
            for c in 0..md {
                let v = h[r * md + c].clone();
                if !v.is_zero() {
                    mat.set(r, c, v);
                }
            }
        }
        out.push(ModuleHom { domain: m.clone(), codomain: n.clone(), mat });
    }
    Ok(out)
}

/// Top and socle with their structure maps.
pub struct TopSocle {
    pub top: FDModule,
    pub top_map: ModuleHom,
    pub socle: FDModule,
    pub socle_map: ModuleHom,
}

pub fn top_socle(m: &FDModule) -> Result<TopSocle> {
    let a = &m.algebra;
    let field = a.field;
    let rad_rows = a.radical_subspace()?.basis_rows();

    // rad·M as a subspace of M.
    let mut jm_vecs = Vec::new();
    for r in &rad_rows {
        let ar = m.act(r);
        for c in 0..m.dim {
            jm_vecs.push(ar.col(c));
        }
    }
    let jm = Subspace::span(field, m.dim, &jm_vecs);
    let positions = jm.complement_coords();
    let tdim = positions.len();
    let project = |v: &[Scalar]| -> Vec<Scalar> {
        let r = jm.reduce(v);
        positions.iter().map(|&p| r[p].clone()).collect()
    };
    let mut top_action = Vec::with_capacity(a.dim);
    for k in 0..a.dim {
        let mut mat = Matrix::zero(field, tdim, tdim);
        for (j, &p) in positions.iter().enumerate() {
            let mut unit = vec![field.zero(); m.dim];
            unit[p] = field.one();
            let img = project(&m.action[k].apply(&unit));
            for (r, v) in img.into_iter().enumerate() {
                if !v.is_zero() {
                    mat.set(r, j, v);
                }
            }
        }
        top_action.push(mat);
    }
    let top = FDModule::new(a.clone(), top_action)?;
    let mut tmat = Matrix::zero(field, tdim, m.dim);
    for c in 0..m.dim {
        let mut unit = vec![field.zero(); m.dim];
        unit[c] = field.one();
        for (r, v) in project(&unit).into_iter().enumerate() {
            if !v.is_zero() {
                tmat.set(r, c, v);
            }
        }
    }
    let top_map = ModuleHom { domain: m.clone(), codomain: top.clone(), mat: tmat };

    // Socle: joint kernel of the radical action; everything when the
    // algebra is semisimple.
    let soc_vecs: Vec<Vec<Scalar>> = if rad_rows.is_empty() {
        (0..m.dim)
            .map(|j| {
                let mut unit = vec![field.zero(); m.dim];
                unit[j] = field.one();
                unit
            })
            .collect()
    } else {
        let mut stacked: Option<Matrix> = None;
        for r in &rad_rows {
            let ar = m.act(r);
            stacked = Some(match stacked {
                None => ar,
                Some(s) => s.vstack(&ar),
            });
        }
        stacked.unwrap().kernel_basis()
    };
    let sdim = soc_vecs.len();
    let mut smat = Matrix::zero(field, m.dim, sdim);
    for (j, v) in soc_vecs.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            if !x.is_zero() {
                smat.set(r, j, x.clone());
            }
        }
    }
    let mut soc_action = Vec::with_capacity(a.dim);
    for k in 0..a.dim {
        let mut mat = Matrix::zero(field, sdim, sdim);
        for (j, v) in soc_vecs.iter().enumerate() {
            let img = m.action[k].apply(v);
            let coords = smat
                .solve(&img)
                .ok_or_else(|| QdeError::Internal("socle not stable under the action".into()))?;
            for (r, x) in coords.into_iter().enumerate() {
                if !x.is_zero() {
                    mat.set(r, j, x);
                }
            }
        }
        soc_action.push(mat);
    }
    let socle = FDModule::new(a.clone(), soc_action)?;
    let socle_map = ModuleHom { domain: socle.clone(), codomain: m.clone(), mat: smat };
    Ok(TopSocle { top, top_map, socle, socle_map })
}

/// k-dual as a module over the given opposite algebra: the action of the
/// k-th opposite basis element is the transpose of the original action.
pub fn dual(m: &FDModule, opposite: &Arc<FDAlgebra>) -> Result<FDModule> {
    if opposite.dim != m.algebra.dim || opposite.field != m.algebra.field {
        return Err(QdeError::AlgebraMismatch("dual needs the opposite algebra".into()));
    }
    let action = (0..m.algebra.dim).map(|k| m.action[k].transpose()).collect();
    FDModule::new(opposite.clone(), action)
}

/// Nakayama image of the projective Ae_i: the dual of the right ideal
/// e_i A, carried as a left module via (a·f)(x) = f(xa).
pub fn nakayama(a: &Arc<FDAlgebra>, i: usize) -> Result<FDModule> {
    let n = a.num_projectives()?;
    if i >= n {
        return Err(QdeError::PreconditionFailed(format!("no idempotent with index {i}")));
    }
    let field = a.field;
    // Basis of e_i A: paths starting at i, grouped by ending vertex.
    let mut vectors: Vec<AlgElem> = Vec::new();
    for j in 0..n {
        vectors.extend(a.block(i, j)?.basis.iter().cloned());
    }
    let d = vectors.len();
    let mut cols = Matrix::zero(field, a.dim, d);
    for (j, v) in vectors.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            if !x.is_zero() {
                cols.set(r, j, x.clone());
            }
        }
    }
    let mut action = Vec::with_capacity(a.dim);
    for k in 0..a.dim {
        let bk = a.basis_elem(k);
        // Right multiplication on e_i A in the chosen basis, transposed.
        let mut rmat = Matrix::zero(field, d, d);
        for (j, v) in vectors.iter().enumerate() {
            let prod = a.mul(v, &bk);
            let coords = cols
                .solve(&prod)
                .ok_or_else(|| QdeError::Internal("right ideal not stable".into()))?;
            for (r, x) in coords.into_iter().enumerate() {
                if !x.is_zero() {
                    rmat.set(r, j, x);
                }
            }
        }
        action.push(rmat.transpose());
    }
    FDModule::new(a.clone(), action)
}

/// Right-exact Nakayama image D(A) tensor_A M, used on non-projectives.
pub fn nakayama_right_exact(m: &FDModule) -> Result<FDModule> {
    let a = &m.algebra;
    let field = a.field;
    let (da, dm) = (a.dim, m.dim);
    let amb = da * dm;
    if amb == 0 {
        return Ok(FDModule::zero(a.clone()));
    }
    // Ambient: f_p (x) m_q at index p*dm + q, f_p the dual basis of A.
    // Balancing relations: (f·b)(x) m - f (x) (b·m), where (f·b)(x) = f(bx).
    let mut rel_vecs: Vec<Vec<Scalar>> = Vec::new();
    for k in 0..da {
        let lb = a.left_mult_matrix(&a.basis_elem(k));
        for p in 0..da {
            for q in 0..dm {
                let mut v = vec![field.zero(); amb];
                // f_p ∘ L_b = sum_r lb[p][r] f_r
                for r in 0..da {
                    let c = lb.at(p, r);
                    if !c.is_zero() {
                        v[r * dm + q] = v[r * dm + q].add(c);
                    }
                }
                // minus f_p (x) (b m_q)
                for r in 0..dm {
                    let c = m.action[k].at(r, q);
                    if !c.is_zero() {
                        v[p * dm + r] = v[p * dm + r].sub(c);
                    }
                }
                if v.iter().any(|x| !x.is_zero()) {
                    rel_vecs.push(v);
                }
            }
        }
    }
    let rel = Subspace::span(field, amb, &rel_vecs);
    let positions = rel.complement_coords();
    let tdim = positions.len();
    let project = |v: &[Scalar]| -> Vec<Scalar> {
        let r = rel.reduce(v);
        positions.iter().map(|&p| r[p].clone()).collect()
    };
    // Left action: b·(f (x) m) = (b f) (x) m with (b f)(x) = f(x b), i.e.
    // f_p ∘ R_b = sum_r rb[p][r] f_r.
    let mut action = Vec::with_capacity(da);
    for k in 0..da {
        let rb = a.right_mult_matrix(&a.basis_elem(k));
        let mut mat = Matrix::zero(field, tdim, tdim);
        for (j, &pos) in positions.iter().enumerate() {
            let (p, q) = (pos / dm, pos % dm);
            let mut img = vec![field.zero(); amb];
            for r in 0..da {
                let c = rb.at(p, r);
                if !c.is_zero() {
                    img[r * dm + q] = img[r * dm + q].add(c);
                }
            }
            for (r, v) in project(&img).into_iter().enumerate() {
                if !v.is_zero() {
                    mat.set(r, j, v);
                }
            }
        }
        action.push(mat);
    }
    FDModule::new(a.clone(), action)
}

/// The endomorphism algebra of a module, with multiplication f·g = first
/// f then g, together with the hom basis realizing each algebra basis
/// element.
pub fn endo_algebra(m: &FDModule) -> Result<(Arc<FDAlgebra>, Vec<ModuleHom>)> {
    let field = m.algebra.field;
    let basis = hom_space(m, m)?;
    let d = basis.len();
    if d == 0 {
        return Ok((FDAlgebra::zero_algebra(field), vec![]));
    }
    // Coordinate solver on flattened matrices.
    let mut cols = Matrix::zero(field, m.dim * m.dim, d);
    for (j, h) in basis.iter().enumerate() {
        for r in 0..m.dim {
            for c in 0..m.dim {
                let v = h.mat.at(r, c);
                if !v.is_zero() {
                    cols.set(r * m.dim + c, j, v.clone());
                }
            }
        }
    }
    let flat = |mat: &Matrix| -> Vec<Scalar> {
        let mut v = Vec::with_capacity(m.dim * m.dim);
        for r in 0..m.dim {
            for c in 0..m.dim {
                v.push(mat.at(r, c).clone());
            }
        }
        v
    };
    let coords = |mat: &Matrix| -> Result<Vec<Scalar>> {
        cols.solve(&flat(mat))
            .ok_or_else(|| QdeError::Internal("endomorphism outside the hom basis span".into()))
    };
    let mut left_mult = Vec::with_capacity(d);
    for i in 0..d {
        let mut lm = Matrix::zero(field, d, d);
        for j in 0..d {
            // product f_i f_j = first f_i then f_j
            let prod = basis[j].mat.mul(&basis[i].mat);
            for (r, v) in coords(&prod)?.into_iter().enumerate() {
                if !v.is_zero() {
                    lm.set(r, j, v);
                }
            }
        }
        left_mult.push(lm);
    }
    let one = coords(&Matrix::identity(field, m.dim))?;
    let labels = (0..d).map(|i| format!("f{i}")).collect();
    let alg = FDAlgebra::from_parts(field, labels, left_mult, one)?;
    Ok((alg, basis))
}

/// One direct summand of a module, with its section and retraction.
pub struct Summand {
    pub module: FDModule,
    pub include: ModuleHom,
    pub project: ModuleHom,
}

/// Split a module along the primitive idempotents of its endomorphism
/// algebra. Each returned summand is indecomposable.
pub fn decompose_module(m: &FDModule) -> Result<Vec<Summand>> {
    if m.dim == 0 {
        return Ok(vec![]);
    }
    let field = m.algebra.field;
    let (end, basis) = endo_algebra(m)?;
    // A local endomorphism ring with one-dimensional semisimple quotient
    // means the module is already indecomposable.
    if end.dim - end.radical_subspace()?.dim() == 1 {
        return Ok(vec![Summand {
            module: m.clone(),
            include: ModuleHom::identity(m),
            project: ModuleHom::identity(m),
        }]);
    }
    let idems = primitive_idempotents(&end)?;
    let mut out = Vec::new();
    for e in &idems {
        // Realize the idempotent as an endomorphism matrix.
        let mut emat = Matrix::zero(field, m.dim, m.dim);
        for (k, c) in e.iter().enumerate() {
            if !c.is_zero() {
                emat = emat.add(&basis[k].mat.scale(c));
            }
        }
        // Image basis: echelon of the column space.
        let col_vecs: Vec<Vec<Scalar>> = (0..m.dim).map(|c| emat.col(c)).collect();
        let image = Subspace::span(field, m.dim, &col_vecs);
        let vecs = image.basis_rows();
        let d = vecs.len();
        let mut incl = Matrix::zero(field, m.dim, d);
        for (j, v) in vecs.iter().enumerate() {
            for (r, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    incl.set(r, j, x.clone());
                }
            }
        }
        // Retraction: coordinates of e(v) in the image basis.
        let mut proj = Matrix::zero(field, d, m.dim);
        for c in 0..m.dim {
            let coords = incl
                .solve(&emat.col(c))
                .ok_or_else(|| QdeError::Internal("idempotent image coordinates".into()))?;
            for (r, x) in coords.into_iter().enumerate() {
                if !x.is_zero() {
                    proj.set(r, c, x);
                }
            }
        }
        let mut action = Vec::with_capacity(m.algebra.dim);
        for k in 0..m.algebra.dim {
            action.push(proj.mul(&m.action[k]).mul(&incl));
        }
        let sub = FDModule::new(m.algebra.clone(), action)?;
        let include = ModuleHom { domain: sub.clone(), codomain: m.clone(), mat: incl };
        let project = ModuleHom { domain: m.clone(), codomain: sub.clone(), mat: proj };
        out.push(Summand { module: sub, include, project });
    }
    Ok(out)
}

/// Exact isomorphism decision with a verified witness.
pub enum IsoOutcome {
    Iso(ModuleHom),
    NotIso(String),
}

impl IsoOutcome {
    pub fn is_iso(&self) -> bool {
        matches!(self, IsoOutcome::Iso(_))
    }

    pub fn witness(self) -> Option<ModuleHom> {
        match self {
            IsoOutcome::Iso(h) => Some(h),
            IsoOutcome::NotIso(_) => None,
        }
    }
}

pub fn is_isomorphic(m: &FDModule, n: &FDModule) -> Result<IsoOutcome> {
    ensure_same_algebra(&m.algebra, &n.algebra, "isomorphism test")?;
    if m.dim != n.dim {
        return Ok(IsoOutcome::NotIso(format!("dimensions {} and {} differ", m.dim, n.dim)));
    }
    if m.dim == 0 {
        return Ok(IsoOutcome::Iso(ModuleHom::zero(m, n)));
    }
    let field = m.algebra.field;
    let fwd = hom_space(m, n)?;
    if fwd.is_empty() {
        return Ok(IsoOutcome::NotIso("no nonzero homomorphisms".into()));
    }
    // Seeded random combinations: any invertible combination is a
    // verified witness, so failures here cost nothing but time.
    let mut rng = ChaCha8Rng::seed_from_u64(ISO_RNG_SEED ^ ((m.dim as u64) << 32 | fwd.len() as u64));
    for _ in 0..ISO_RANDOM_TRIES {
        let mut mat = Matrix::zero(field, n.dim, m.dim);
        for f in &fwd {
            let c = match field {
                FieldTag::Q => field.from_i64(rng.gen_range(-4i64..=4)),
                FieldTag::Fp(p) => field.from_i64(rng.gen_range(0..p as i64)),
            };
            if !c.is_zero() {
                mat = mat.add(&f.mat.scale(&c));
            }
        }
        if mat.rank() == m.dim {
            return Ok(IsoOutcome::Iso(ModuleHom { domain: m.clone(), codomain: n.clone(), mat }));
        }
    }
    // Exhaustive over tiny coefficient spaces.
    if let FieldTag::Fp(p) = field {
        if (p as u64).checked_pow(fwd.len() as u32).map(|t| t <= ISO_EXHAUSTIVE_CAP) == Some(true) {
            let total = (p as u64).pow(fwd.len() as u32);
            for code in 1..total {
                let mut rem = code;
                let mut mat = Matrix::zero(field, n.dim, m.dim);
                for f in &fwd {
                    let c = field.from_i64((rem % p as u64) as i64);
                    rem /= p as u64;
                    if !c.is_zero() {
                        mat = mat.add(&f.mat.scale(&c));
                    }
                }
                if mat.rank() == m.dim {
                    return Ok(IsoOutcome::Iso(ModuleHom {
                        domain: m.clone(),
                        codomain: n.clone(),
                        mat,
                    }));
                }
            }
            return Ok(IsoOutcome::NotIso("no invertible combination exists".into()));
        }
    }
    // Definitive route: decompose both sides and match indecomposable
    // summands through the radical-pairing criterion.
    let ms = decompose_module(m)?;
    let ns = decompose_module(n)?;
    if ms.len() != ns.len() {
        return Ok(IsoOutcome::NotIso(format!(
            "{} versus {} indecomposable summands",
            ms.len(),
            ns.len()
        )));
    }
    let mut used = vec![false; ns.len()];
    let mut total = Matrix::zero(field, n.dim, m.dim);
    for sm in &ms {
        let mut matched = false;
        for (j, sn) in ns.iter().enumerate() {
            if used[j] {
                continue;
            }
            if let Some(h) = indecomposable_iso(&sm.module, &sn.module)? {
                // m --proj--> S --h--> S' --incl--> n
                let piece = sn.include.mat.mul(&h.mat).mul(&sm.project.mat);
                total = total.add(&piece);
                used[j] = true;
                matched = true;
                break;
            }
        }
        if !matched {
            return Ok(IsoOutcome::NotIso("summand without a partner".into()));
        }
    }
    if total.rank() != m.dim {
        return Err(QdeError::Internal("matched summands did not assemble invertibly".into()));
    }
    let h = ModuleHom { domain: m.clone(), codomain: n.clone(), mat: total };
    h.verify()?;
    Ok(IsoOutcome::Iso(h))
}

/// For indecomposable inputs: m = n iff some basis pairing f·g avoids the
/// radical of End(m); in that case f itself is invertible.
fn indecomposable_iso(m: &FDModule, n: &FDModule) -> Result<Option<ModuleHom>> {
    if m.dim != n.dim {
        return Ok(None);
    }
    let fwd = hom_space(m, n)?;
    if fwd.is_empty() {
        return Ok(None);
    }
    let bwd = hom_space(n, m)?;
    let (end, basis) = endo_algebra(m)?;
    let rad = end.radical_subspace()?;
    let field = m.algebra.field;
    let mut cols = Matrix::zero(field, m.dim * m.dim, basis.len());
    for (j, h) in basis.iter().enumerate() {
        for r in 0..m.dim {
            for c in 0..m.dim {
                let v = h.mat.at(r, c);
                if !v.is_zero() {
                    cols.set(r * m.dim + c, j, v.clone());
                }
            }
        }
    }
    for f in &fwd {
        for g in &bwd {
            let u = g.mat.mul(&f.mat);
            let mut flatv = Vec::with_capacity(m.dim * m.dim);
            for r in 0..m.dim {
                for c in 0..m.dim {
                    flatv.push(u.at(r, c).clone());
                }
            }
            let coords = cols
                .solve(&flatv)
                .ok_or_else(|| QdeError::Internal("pairing escapes End".into()))?;
            if !rad.contains(&coords) {
                return Ok(Some(f.clone()));
            }
        }
    }
    Ok(None)
}

/// Indices i with every Nakayama iterate of Ae_i projective, plus the
/// induced successor map on those indices.
pub fn nu_stably_projectives(a: &Arc<FDAlgebra>) -> Result<(Vec<usize>, BTreeMap<usize, usize>)> {
    let n = a.num_projectives()?;
    let mut step: Vec<Option<usize>> = Vec::with_capacity(n);
    let projs: Vec<FDModule> = (0..n).map(|i| projective(a, i)).collect::<Result<_>>()?;
    for i in 0..n {
        let nu = nakayama(a, i)?;
        let mut hit = None;
        for (j, p) in projs.iter().enumerate() {
            if nu.dim == p.dim && is_isomorphic(&nu, p)?.is_iso() {
                hit = Some(j);
                break;
            }
        }
        step.push(hit);
    }
    let mut stable = Vec::new();
    for i in 0..n {
        let mut cur = i;
        let mut ok = true;
        for _ in 0..=n {
            match step[cur] {
                Some(next) => cur = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            stable.push(i);
        }
    }
    let mut perm = BTreeMap::new();
    for &i in &stable {
        perm.insert(i, step[i].expect("stable index has a successor"));
    }
    Ok((stable, perm))
}

/// The self-injective corner on one representative per isomorphism class
/// of Nakayama-stable projectives; the zero algebra when there are none.
pub fn frobenius_part(a: &Arc<FDAlgebra>) -> Result<(Arc<FDAlgebra>, Vec<usize>)> {
    let (stable, _) = nu_stably_projectives(a)?;
    if stable.is_empty() {
        return Ok((FDAlgebra::zero_algebra(a.field), vec![]));
    }
    let mut reps: Vec<usize> = Vec::new();
    for &i in &stable {
        let pi = projective(a, i)?;
        let mut fresh = true;
        for &r in &reps {
            let pr = projective(a, r)?;
            if pi.dim == pr.dim && is_isomorphic(&pi, &pr)?.is_iso() {
                fresh = false;
                break;
            }
        }
        if fresh {
            reps.push(i);
        }
    }
    let c = corner(a, &reps)?;
    Ok((c.alg, reps))
}

/// Basis of {u in e_i rad e_j : rad·u = 0 = u·rad}.
pub fn longest_elements(a: &Arc<FDAlgebra>, i: usize, j: usize) -> Result<Vec<AlgElem>> {
    let field = a.field;
    let ei = a.idempotent(i)?;
    let ej = a.idempotent(j)?;
    let rad_rows = a.radical_subspace()?.basis_rows();
    let mut window_vecs = Vec::new();
    for r in &rad_rows {
        window_vecs.push(a.mul(&ei, &a.mul(r, &ej)));
    }
    let window = Subspace::span(field, a.dim, &window_vecs);
    let basis = window.basis_rows();
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let d = basis.len();
    let mut cols = Matrix::zero(field, a.dim, d);
    for (c, v) in basis.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            if !x.is_zero() {
                cols.set(r, c, x.clone());
            }
        }
    }
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for r in &rad_rows {
        let lr = a.left_mult_matrix(r).mul(&cols);
        let rr = a.right_mult_matrix(r).mul(&cols);
        for mat in [lr, rr] {
            for row in 0..a.dim {
                let rowv: Vec<Scalar> = (0..d).map(|c| mat.at(row, c).clone()).collect();
                if rowv.iter().any(|x| !x.is_zero()) {
                    rows.push(rowv);
                }
            }
        }
    }
    if rows.is_empty() {
        return Ok(basis);
    }
    let sys = Matrix::from_rows(field, rows)?;
    let mut out = Vec::new();
    for kvec in sys.kernel_basis() {
        let mut u = vec![field.zero(); a.dim];
        for (c, x) in kvec.iter().enumerate() {
            if !x.is_zero() {
                for (r, b) in basis[c].iter().enumerate() {
                    u[r] = u[r].add(&x.mul(b));
                }
            }
        }
        out.push(u);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{algebra_from, EX56_A, SYM_KX2};

    #[test]
    fn regular_module_and_projective_sum() {
        let a = algebra_from(EX56_A).unwrap();
        let reg = regular(&a).unwrap();
        reg.verify_representation().unwrap();
        let dims: usize = (0..3).map(|i| projective(&a, i).unwrap().dim).sum();
        assert_eq!(dims, a.dim);
    }

    #[test]
    fn dual_numbers_top_socle() {
        let b = algebra_from(SYM_KX2).unwrap();
        let reg = regular(&b).unwrap();
        let ts = top_socle(&reg).unwrap();
        assert_eq!(ts.top.dim, 1);
        assert_eq!(ts.socle.dim, 1);
        ts.top_map.verify().unwrap();
        ts.socle_map.verify().unwrap();
    }
}
