use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::parse::ElemExpr;
use crate::scalar::Scalar;
use std::sync::Arc;

use super::{AlgElem, BlockData, FDAlgebra};

/// Unital algebra homomorphism, stored as its matrix on basis coordinates
/// (codomain.dim x domain.dim).
#[derive(Clone)]
pub struct AlgebraHom {
    pub domain: Arc<FDAlgebra>,
    pub codomain: Arc<FDAlgebra>,
    pub mat: Matrix,
}

impl AlgebraHom {
    pub fn new(domain: Arc<FDAlgebra>, codomain: Arc<FDAlgebra>, mat: Matrix) -> Result<AlgebraHom> {
        if mat.rows != codomain.dim || mat.cols != domain.dim || mat.field != domain.field {
            return Err(QdeError::DimMismatch("hom matrix shape".into()));
        }
        if domain.field != codomain.field {
            return Err(QdeError::MixedFields("hom endpoints".into()));
        }
        Ok(AlgebraHom { domain, codomain, mat })
    }

    pub fn identity(a: &Arc<FDAlgebra>) -> AlgebraHom {
        AlgebraHom {
            domain: a.clone(),
            codomain: a.clone(),
            mat: Matrix::identity(a.field, a.dim),
        }
    }

    pub fn apply(&self, x: &[Scalar]) -> AlgElem {
        self.mat.apply(x)
    }

    /// self followed by g.
    pub fn then(&self, g: &AlgebraHom) -> Result<AlgebraHom> {
        super::ensure_same_algebra(&self.codomain, &g.domain, "hom composition")?;
        AlgebraHom::new(self.domain.clone(), g.codomain.clone(), g.mat.mul(&self.mat))
    }

    /// Checks unitality and multiplicativity over all basis pairs.
    pub fn verify(&self) -> Result<()> {
        if self.apply(&self.domain.one) != self.codomain.one {
            return Err(QdeError::VerificationFailed("hom does not preserve the unit".into()));
        }
        for i in 0..self.domain.dim {
            let fi = self.apply(&self.domain.basis_elem(i));
            for j in 0..self.domain.dim {
                let fj = self.apply(&self.domain.basis_elem(j));
                let lhs = self.apply(&self.domain.mul(&self.domain.basis_elem(i), &self.domain.basis_elem(j)));
                let rhs = self.codomain.mul(&fi, &fj);
                if lhs != rhs {
                    return Err(QdeError::VerificationFailed(format!(
                        "hom is not multiplicative at basis pair ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_surjective(&self) -> bool {
        self.mat.rank() == self.codomain.dim
    }

    pub fn is_injective(&self) -> bool {
        self.mat.rank() == self.domain.dim
    }

    pub fn kernel(&self) -> Subspace {
        Subspace::span(self.domain.field, self.domain.dim, &self.mat.kernel_basis())
    }
}

/// Arrow image in a homomorphism assignment.
#[derive(Clone)]
pub enum ArrowImage {
    Zero,
    Elem(AlgElem),
    Expr(ElemExpr),
}

/// Build a homomorphism out of a quiver build from images of the trivial
/// paths (an orthogonal idempotent decomposition of 1 in the codomain) and
/// of the arrows. The assignment must kill every defining relation.
pub fn hom_from_assignment(
    dom: &Arc<FDAlgebra>,
    cod: &Arc<FDAlgebra>,
    vertex_images: &[AlgElem],
    arrow_images: &[ArrowImage],
) -> Result<AlgebraHom> {
    let info = dom
        .path_info
        .as_ref()
        .ok_or_else(|| QdeError::PreconditionFailed("domain carries no quiver build".into()))?;
    let q = &info.presentation.quiver;
    if vertex_images.len() != q.vertices.len() || arrow_images.len() != q.arrows.len() {
        return Err(QdeError::DimMismatch("assignment arity".into()));
    }
    for (v, e) in vertex_images.iter().enumerate() {
        if e.len() != cod.dim {
            return Err(QdeError::DimMismatch("vertex image size".into()));
        }
        if cod.mul(e, e) != *e {
            return Err(QdeError::PreconditionFailed(format!(
                "image of e({}) is not idempotent",
                q.vertices[v]
            )));
        }
        for (w, f) in vertex_images.iter().enumerate() {
            if v != w && !cod.is_zero_elem(&cod.mul(e, f)) {
                return Err(QdeError::PreconditionFailed(format!(
                    "images of e({}) and e({}) are not orthogonal",
                    q.vertices[v], q.vertices[w]
                )));
            }
        }
    }
    let mut sum = cod.zero_elem();
    for e in vertex_images {
        sum = cod.add(&sum, e);
    }
    if sum != cod.one {
        return Err(QdeError::PreconditionFailed(
            "vertex images do not sum to the identity".into(),
        ));
    }
    let arrow_elems: Vec<AlgElem> = arrow_images
        .iter()
        .map(|ai| match ai {
            ArrowImage::Zero => Ok(cod.zero_elem()),
            ArrowImage::Elem(v) => {
                if v.len() == cod.dim {
                    Ok(v.clone())
                } else {
                    Err(QdeError::DimMismatch("arrow image size".into()))
                }
            }
            ArrowImage::Expr(expr) => {
                let cinfo = cod.path_info.as_ref().ok_or_else(|| {
                    QdeError::PreconditionFailed("codomain carries no quiver build".into())
                })?;
                cinfo.resolve(expr)
            }
        })
        .collect::<Result<_>>()?;
    for (ai, a) in q.arrows.iter().enumerate() {
        let g = &arrow_elems[ai];
        let boxed = cod.mul(&vertex_images[a.source], &cod.mul(g, &vertex_images[a.target]));
        if boxed != *g {
            return Err(QdeError::PreconditionFailed(format!(
                "image of arrow `{}` is not compatible with its endpoints",
                a.label
            )));
        }
    }
    // Image of an arbitrary path, multiplying arrow images left to right.
    let path_image = |p: &crate::quiver::Path| -> AlgElem {
        if p.len() == 0 {
            return vertex_images[p.source].clone();
        }
        let mut acc = vertex_images[p.source].clone();
        for &ai in &p.arrows {
            acc = cod.mul(&acc, &arrow_elems[ai]);
        }
        acc
    };
    for rel in &info.presentation.relations {
        let mut v = cod.zero_elem();
        for (cf, p) in &rel.terms {
            v = cod.add(&v, &cod.scale(cf, &path_image(p)));
        }
        if !cod.is_zero_elem(&v) {
            return Err(QdeError::RelationNotKilled(rel.display(q)));
        }
    }
    let mut mat = Matrix::zero(dom.field, cod.dim, dom.dim);
    for (j, bp) in info.basis_paths.iter().enumerate() {
        for (r, v) in path_image(bp).into_iter().enumerate() {
            if !v.is_zero() {
                mat.set(r, j, v);
            }
        }
    }
    AlgebraHom::new(dom.clone(), cod.clone(), mat)
}

/// A pullback square of algebras: the fibre product over two maps to the
/// same base, with at least one of them surjective.
pub struct MilnorSquare {
    pub algebra: Arc<FDAlgebra>,
    pub lam1: AlgebraHom,
    pub lam2: AlgebraHom,
    pub pi1: AlgebraHom,
    pub pi2: AlgebraHom,
}

pub fn pullback(pi1: &AlgebraHom, pi2: &AlgebraHom) -> Result<MilnorSquare> {
    super::ensure_same_algebra(&pi1.codomain, &pi2.codomain, "pullback base")?;
    if !pi1.is_surjective() && !pi2.is_surjective() {
        return Err(QdeError::PreconditionFailed(
            "pullback needs at least one surjective projection".into(),
        ));
    }
    let a1 = &pi1.domain;
    let a2 = &pi2.domain;
    let a0 = &pi1.codomain;
    let field = a1.field;
    let (d1, d2) = (a1.dim, a2.dim);
    // Kernel of (x, y) |-> pi1(x) - pi2(y).
    let glue = pi1.mat.hstack(&pi2.mat.neg());
    let kernel = glue.kernel_basis();
    let block = BlockData::from_vectors(field, d1 + d2, &kernel);
    let dim = block.dim();
    let coords = |v: &[Scalar]| -> Result<Vec<Scalar>> {
        block
            .coords(v)
            .ok_or_else(|| QdeError::Internal("product left the pullback".into()))
    };
    let split = |v: &[Scalar]| -> (Vec<Scalar>, Vec<Scalar>) {
        (v[..d1].to_vec(), v[d1..].to_vec())
    };
    let mut left_mult = Vec::with_capacity(dim);
    for i in 0..dim {
        let (xi, yi) = split(&block.basis[i]);
        let mut m = Matrix::zero(field, dim, dim);
        for j in 0..dim {
            let (xj, yj) = split(&block.basis[j]);
            let mut prod = a1.mul(&xi, &xj);
            prod.extend(a2.mul(&yi, &yj));
            for (r, v) in coords(&prod)?.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, j, v);
                }
            }
        }
        left_mult.push(m);
    }
    let labels = (0..dim)
        .map(|k| {
            let (x, y) = split(&block.basis[k]);
            match (single_label(a1, &x), single_label(a2, &y)) {
                (Some(lx), Some(ly)) => format!("({lx}|{ly})"),
                (Some(lx), None) if y.iter().all(|s| s.is_zero()) => format!("({lx}|0)"),
                (None, Some(ly)) if x.iter().all(|s| s.is_zero()) => format!("(0|{ly})"),
                _ => format!("x{k}"),
            }
        })
        .collect();
    let mut one = a1.one.clone();
    one.extend(a2.one.clone());
    let one = coords(&one)?;
    let alg = FDAlgebra::from_parts(field, labels, left_mult, one)?;

    // Structural radical: the pullback of the radicals. Valid because one
    // projection is surjective, so the semisimple quotient embeds into the
    // product of the factors' semisimple quotients.
    let r1 = a1.radical_subspace()?;
    let r2 = a2.radical_subspace()?;
    let mut emb: Vec<Vec<Scalar>> = Vec::new();
    for v in r1.basis_rows() {
        let mut w = v.clone();
        w.extend(vec![field.zero(); d2]);
        emb.push(w);
    }
    for v in r2.basis_rows() {
        let mut w = vec![field.zero(); d1];
        w.extend(v.clone());
        emb.push(w);
    }
    let r12 = Subspace::span(field, d1 + d2, &emb);
    let kspan = Subspace::span(field, d1 + d2, &kernel);
    let inter = kspan.intersect(&r12);
    let rad_vecs: Vec<Vec<Scalar>> = inter
        .basis_rows()
        .iter()
        .map(|v| coords(v))
        .collect::<Result<_>>()?;
    let alg = alg.with_radical(Subspace::span(field, dim, &rad_vecs));

    let mut m1 = Matrix::zero(field, d1, dim);
    let mut m2 = Matrix::zero(field, d2, dim);
    for (j, b) in block.basis.iter().enumerate() {
        let (x, y) = split(b);
        for (r, v) in x.into_iter().enumerate() {
            if !v.is_zero() {
                m1.set(r, j, v);
            }
        }
        for (r, v) in y.into_iter().enumerate() {
            if !v.is_zero() {
                m2.set(r, j, v);
            }
        }
    }
    let lam1 = AlgebraHom::new(alg.clone(), a1.clone(), m1)?;
    let lam2 = AlgebraHom::new(alg.clone(), a2.clone(), m2)?;
    let square = MilnorSquare {
        algebra: alg,
        lam1,
        lam2,
        pi1: pi1.clone(),
        pi2: pi2.clone(),
    };
    let _ = a0; // base is reachable through pi1.codomain
    Ok(square)
}

fn single_label(a: &FDAlgebra, v: &[Scalar]) -> Option<String> {
    let mut found = None;
    for (i, s) in v.iter().enumerate() {
        if !s.is_zero() {
            if found.is_some() || !s.is_one() {
                return None;
            }
            found = Some(i);
        }
    }
    found.map(|i| a.labels[i].clone())
}

impl MilnorSquare {
    pub fn base(&self) -> &Arc<FDAlgebra> {
        &self.pi1.codomain
    }

    /// Commutativity, the dimension identity, and both compatibility
    /// conditions of the fibre product.
    pub fn verify(&self) -> Result<()> {
        let via1 = self.lam1.then(&self.pi1)?;
        let via2 = self.lam2.then(&self.pi2)?;
        if via1.mat != via2.mat {
            return Err(QdeError::VerificationFailed("pullback square does not commute".into()));
        }
        let expect = self.pi1.domain.dim + self.pi2.domain.dim - self.base().dim;
        if self.algebra.dim != expect {
            return Err(QdeError::VerificationFailed(format!(
                "pullback dimension {} differs from {}",
                self.algebra.dim, expect
            )));
        }
        self.lam1.verify()?;
        self.lam2.verify()?;
        Ok(())
    }
}
