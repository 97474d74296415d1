mod build;
mod derive;
mod hom;
mod idempotents;
mod presentation;
mod radical;

pub use build::{build, build_with_cap, PathInfo, DEFAULT_LENGTH_CAP};
pub use derive::{corner, opposite_algebra, product_algebra, quotient, Corner, Quotient};
pub use hom::{hom_from_assignment, pullback, AlgebraHom, ArrowImage, MilnorSquare};
pub use idempotents::primitive_idempotents;
pub use presentation::{basic_presentation, find_presentation_iso, kernel_relations, IsoSearch};
pub use radical::compute_radical;

use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::{FieldTag, Scalar};
use std::sync::{Arc, OnceLock};

/// Element of a concrete algebra: coordinates in the algebra's basis.
pub type AlgElem = Vec<Scalar>;

/// Concrete finite-dimensional associative unital algebra, given by a basis
/// and left-multiplication matrices. A complete orthogonal family of
/// primitive idempotents and the Jacobson radical are attached either at
/// construction (when the construction knows them) or on first use.
pub struct FDAlgebra {
    pub field: FieldTag,
    pub dim: usize,
    pub labels: Vec<String>,
    left_mult: Vec<Matrix>,
    pub one: AlgElem,
    idempotents: OnceLock<Vec<AlgElem>>,
    radical: OnceLock<Subspace>,
    blocks: OnceLock<Vec<Vec<BlockData>>>,
    pub path_info: Option<PathInfo>,
}

/// Basis of one idempotent block e_i A e_j together with coordinate lookup.
#[derive(Clone, Debug)]
pub struct BlockData {
    /// Basis vectors in algebra coordinates, rows of a reduced echelon form.
    pub basis: Vec<AlgElem>,
    pivots: Vec<usize>,
}

impl BlockData {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of v in the block basis; None if v lies outside.
    pub fn coords(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let mut w = v.to_vec();
        let mut out = Vec::with_capacity(self.basis.len());
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = w[p].clone();
            if !c.is_zero() {
                for (wj, rj) in w.iter_mut().zip(row.iter()) {
                    *wj = wj.sub(&c.mul(rj));
                }
            }
            out.push(c);
        }
        if w.iter().all(|s| s.is_zero()) {
            Some(out)
        } else {
            None
        }
    }

    pub fn from_vectors(field: FieldTag, ambient: usize, vecs: &[AlgElem]) -> BlockData {
        let sub = Subspace::span(field, ambient, vecs);
        let basis = sub.basis_rows();
        let pivots = basis
            .iter()
            .map(|row| row.iter().position(|s| !s.is_zero()).expect("nonzero basis row"))
            .collect();
        BlockData { basis, pivots }
    }
}

impl std::fmt::Debug for FDAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FDAlgebra(dim {}, {} idempotents over {})",
            self.dim,
            self.idempotents.get().map(|v| v.len()).unwrap_or(0),
            self.field)
    }
}

impl FDAlgebra {
    /// Assemble from left-multiplication matrices. Checks shapes and the
    /// unit; associativity is the caller's responsibility (use
    /// `verify_associativity` in tests and after untrusted constructions).
    pub fn from_parts(
        field: FieldTag,
        labels: Vec<String>,
        left_mult: Vec<Matrix>,
        one: AlgElem,
    ) -> Result<Arc<FDAlgebra>> {
        let dim = labels.len();
        if left_mult.len() != dim || one.len() != dim {
            return Err(QdeError::DimMismatch("algebra part sizes".into()));
        }
        for m in &left_mult {
            if m.rows != dim || m.cols != dim || m.field != field {
                return Err(QdeError::DimMismatch("left multiplication shape".into()));
            }
        }
        let a = FDAlgebra {
            field,
            dim,
            labels,
            left_mult,
            one,
            idempotents: OnceLock::new(),
            radical: OnceLock::new(),
            blocks: OnceLock::new(),
            path_info: None,
        };
        // Unit checks: 1*b = b and b*1 = b for all basis b.
        let lone = a.left_mult_matrix(&a.one);
        if lone != Matrix::identity(field, dim) {
            return Err(QdeError::Internal("unit does not act as identity on the left".into()));
        }
        for j in 0..dim {
            if a.mul(&a.basis_elem(j), &a.one) != a.basis_elem(j) {
                return Err(QdeError::Internal("unit does not act as identity on the right".into()));
            }
        }
        Ok(Arc::new(a))
    }

    pub fn with_idempotents(self: Arc<Self>, idem: Vec<AlgElem>) -> Result<Arc<Self>> {
        self.check_idempotent_family(&idem)?;
        let a = Arc::try_unwrap(self).unwrap_or_else(|arc| (*arc).clone_shallow());
        let _ = a.idempotents.set(idem);
        Ok(Arc::new(a))
    }

    pub fn with_radical(self: Arc<Self>, rad: Subspace) -> Arc<Self> {
        let a = Arc::try_unwrap(self).unwrap_or_else(|arc| (*arc).clone_shallow());
        let _ = a.radical.set(rad);
        Arc::new(a)
    }

    pub fn with_path_info(self: Arc<Self>, info: PathInfo) -> Arc<Self> {
        let mut a = Arc::try_unwrap(self).unwrap_or_else(|arc| (*arc).clone_shallow());
        a.path_info = Some(info);
        Arc::new(a)
    }

    fn clone_shallow(&self) -> FDAlgebra {
        FDAlgebra {
            field: self.field,
            dim: self.dim,
            labels: self.labels.clone(),
            left_mult: self.left_mult.clone(),
            one: self.one.clone(),
            idempotents: match self.idempotents.get() {
                Some(v) => {
                    let l = OnceLock::new();
                    let _ = l.set(v.clone());
                    l
                }
                None => OnceLock::new(),
            },
            radical: match self.radical.get() {
                Some(v) => {
                    let l = OnceLock::new();
                    let _ = l.set(v.clone());
                    l
                }
                None => OnceLock::new(),
            },
            blocks: OnceLock::new(),
            path_info: self.path_info.clone(),
        }
    }

    pub fn zero_algebra(field: FieldTag) -> Arc<FDAlgebra> {
        let a = FDAlgebra {
            field,
            dim: 0,
            labels: vec![],
            left_mult: vec![],
            one: vec![],
            idempotents: OnceLock::new(),
            radical: OnceLock::new(),
            blocks: OnceLock::new(),
            path_info: None,
        };
        let _ = a.idempotents.set(vec![]);
        let _ = a.radical.set(Subspace::zero(field, 0));
        Arc::new(a)
    }

    pub fn basis_elem(&self, i: usize) -> AlgElem {
        let mut v = vec![self.field.zero(); self.dim];
        v[i] = self.field.one();
        v
    }

    pub fn zero_elem(&self) -> AlgElem {
        vec![self.field.zero(); self.dim]
    }

    pub fn add(&self, x: &[Scalar], y: &[Scalar]) -> AlgElem {
        x.iter().zip(y).map(|(a, b)| a.add(b)).collect()
    }

    pub fn sub(&self, x: &[Scalar], y: &[Scalar]) -> AlgElem {
        x.iter().zip(y).map(|(a, b)| a.sub(b)).collect()
    }

    pub fn scale(&self, c: &Scalar, x: &[Scalar]) -> AlgElem {
        x.iter().map(|a| a.mul(c)).collect()
    }

    pub fn neg(&self, x: &[Scalar]) -> AlgElem {
        x.iter().map(|a| a.neg()).collect()
    }

    pub fn mul(&self, x: &[Scalar], y: &[Scalar]) -> AlgElem {
        let mut out = self.zero_elem();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let ly = self.left_mult[i].apply(y);
            for (o, l) in out.iter_mut().zip(ly) {
                if !l.is_zero() {
                    *o = o.add(&xi.mul(&l));
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &[Scalar], n: usize) -> AlgElem {
        let mut acc = self.one.clone();
        for _ in 0..n {
            acc = self.mul(&acc, x);
        }
        acc
    }

    pub fn is_zero_elem(&self, x: &[Scalar]) -> bool {
        x.iter().all(|s| s.is_zero())
    }

    /// Matrix of y |-> x*y.
    pub fn left_mult_matrix(&self, x: &[Scalar]) -> Matrix {
        let mut m = Matrix::zero(self.field, self.dim, self.dim);
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for r in 0..self.dim {
                for c in 0..self.dim {
                    let v = self.left_mult[i].at(r, c);
                    if !v.is_zero() {
                        let cur = m.at(r, c).add(&xi.mul(v));
                        m.set(r, c, cur);
                    }
                }
            }
        }
        m
    }

    /// Matrix of y |-> y*x.
    pub fn right_mult_matrix(&self, x: &[Scalar]) -> Matrix {
        let mut m = Matrix::zero(self.field, self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.left_mult[j].apply(x);
            for r in 0..self.dim {
                if !col[r].is_zero() {
                    m.set(r, j, col[r].clone());
                }
            }
        }
        m
    }

    /// Full associativity and unit verification over all basis triples.
    pub fn verify_associativity(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let bij = self.mul(&self.basis_elem(i), &self.basis_elem(j));
                let lij = self.left_mult_matrix(&bij);
                let prod = self.left_mult[i].mul(&self.left_mult[j]);
                if lij != prod {
                    return Err(QdeError::Internal(format!(
                        "associativity fails at basis pair ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_idempotent_family(&self, idem: &[AlgElem]) -> Result<()> {
        let mut sum = self.zero_elem();
        for (k, e) in idem.iter().enumerate() {
            if self.mul(e, e) != *e {
                return Err(QdeError::Internal(format!("family element {k} is not idempotent")));
            }
            for (l, f) in idem.iter().enumerate() {
                if l != k && !self.is_zero_elem(&self.mul(e, f)) {
                    return Err(QdeError::Internal(format!(
                        "idempotents {k} and {l} are not orthogonal"
                    )));
                }
            }
            sum = self.add(&sum, e);
        }
        if sum != self.one {
            return Err(QdeError::Internal("idempotents do not sum to the unit".into()));
        }
        Ok(())
    }

    /// The attached complete orthogonal primitive idempotent family,
    /// computing it if no construction supplied one.
    pub fn idempotent_list(self: &Arc<Self>) -> Result<&Vec<AlgElem>> {
        if self.idempotents.get().is_none() {
            let fam = idempotents::primitive_idempotents(self)?;
            let _ = self.idempotents.set(fam);
        }
        Ok(self.idempotents.get().unwrap())
    }

    pub fn num_projectives(self: &Arc<Self>) -> Result<usize> {
        Ok(self.idempotent_list()?.len())
    }

    pub fn idempotent(self: &Arc<Self>, k: usize) -> Result<AlgElem> {
        Ok(self.idempotent_list()?[k].clone())
    }

    /// Jacobson radical as a subspace of the algebra, computing it by the
    /// trace criterion when no construction supplied it structurally.
    pub fn radical_subspace(&self) -> Result<&Subspace> {
        if self.radical.get().is_none() {
            let r = radical::compute_radical(self)?;
            let _ = self.radical.set(r);
        }
        Ok(self.radical.get().unwrap())
    }

    pub fn radical_dim(&self) -> Result<usize> {
        Ok(self.radical_subspace()?.dim())
    }

    /// Basis data for the block e_i A e_j.
    pub fn block(self: &Arc<Self>, i: usize, j: usize) -> Result<&BlockData> {
        if self.blocks.get().is_none() {
            let idem = self.idempotent_list()?.clone();
            let n = idem.len();
            let mut table = Vec::with_capacity(n);
            for a in 0..n {
                let mut row = Vec::with_capacity(n);
                for b in 0..n {
                    let mut vecs = Vec::new();
                    for k in 0..self.dim {
                        let v = self.mul(&idem[a], &self.mul(&self.basis_elem(k), &idem[b]));
                        if !self.is_zero_elem(&v) {
                            vecs.push(v);
                        }
                    }
                    row.push(BlockData::from_vectors(self.field, self.dim, &vecs));
                }
                table.push(row);
            }
            let _ = self.blocks.set(table);
        }
        Ok(&self.blocks.get().unwrap()[i][j])
    }

    /// Structural equality: same field, labels, and multiplication tables.
    pub fn same_structure(&self, other: &FDAlgebra) -> bool {
        self.field == other.field
            && self.dim == other.dim
            && self.left_mult == other.left_mult
            && self.one == other.one
    }

    /// Nilpotency index of the radical: least m with rad^m = 0.
    pub fn radical_nilpotency(&self) -> Result<usize> {
        let rad = self.radical_subspace()?.clone();
        let mut power = rad.clone();
        let mut m = 1usize;
        while power.dim() > 0 {
            if m > self.dim + 1 {
                return Err(QdeError::Internal("radical is not nilpotent".into()));
            }
            let mut vecs = Vec::new();
            for a in power.basis_rows() {
                for b in rad.basis_rows() {
                    vecs.push(self.mul(&a, &b));
                }
            }
            power = Subspace::span(self.field, self.dim, &vecs);
            m += 1;
        }
        Ok(m)
    }
}

pub fn same_algebra(a: &Arc<FDAlgebra>, b: &Arc<FDAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a.same_structure(b)
}

pub fn ensure_same_algebra(a: &Arc<FDAlgebra>, b: &Arc<FDAlgebra>, ctx: &str) -> Result<()> {
    if same_algebra(a, b) {
        Ok(())
    } else {
        Err(QdeError::AlgebraMismatch(ctx.into()))
    }
}
