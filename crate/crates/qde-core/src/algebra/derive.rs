use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::Scalar;
use std::sync::Arc;

use super::{AlgElem, BlockData, FDAlgebra};

/// The opposite algebra on the same underlying space: x *op y = y x.
pub fn opposite_algebra(a: &Arc<FDAlgebra>) -> Result<Arc<FDAlgebra>> {
    let left_mult = (0..a.dim)
        .map(|i| a.right_mult_matrix(&a.basis_elem(i)))
        .collect();
    let op = FDAlgebra::from_parts(a.field, a.labels.clone(), left_mult, a.one.clone())?;
    let op = match a.idempotents.get() {
        Some(fam) => op.with_idempotents(fam.clone())?,
        None => op,
    };
    let op = match a.radical.get() {
        Some(r) => op.with_radical(r.clone()),
        None => op,
    };
    Ok(op)
}

/// Direct product: componentwise operations on the concatenated space.
pub fn product_algebra(x: &Arc<FDAlgebra>, y: &Arc<FDAlgebra>) -> Result<Arc<FDAlgebra>> {
    if x.field != y.field {
        return Err(QdeError::MixedFields("product factors".into()));
    }
    let field = x.field;
    let (dx, dy) = (x.dim, y.dim);
    let dim = dx + dy;
    let mut labels: Vec<String> = x.labels.iter().map(|l| format!("l.{l}")).collect();
    labels.extend(y.labels.iter().map(|l| format!("r.{l}")));
    let embed_x = |v: &[Scalar]| -> AlgElem {
        let mut out = vec![field.zero(); dim];
        out[..dx].clone_from_slice(v);
        out
    };
    let embed_y = |v: &[Scalar]| -> AlgElem {
        let mut out = vec![field.zero(); dim];
        out[dx..].clone_from_slice(v);
        out
    };
    let mut left_mult = Vec::with_capacity(dim);
    for i in 0..dx {
        let mut m = Matrix::zero(field, dim, dim);
        let lx = &x.left_mult[i];
        for r in 0..dx {
            for c in 0..dx {
                let v = lx.at(r, c);
                if !v.is_zero() {
                    m.set(r, c, v.clone());
                }
            }
        }
        left_mult.push(m);
    }
    for i in 0..dy {
        let mut m = Matrix::zero(field, dim, dim);
        let ly = &y.left_mult[i];
        for r in 0..dy {
            for c in 0..dy {
                let v = ly.at(r, c);
                if !v.is_zero() {
                    m.set(dx + r, dx + c, v.clone());
                }
            }
        }
        left_mult.push(m);
    }
    let mut one = embed_x(&x.one);
    for (o, v) in one[dx..].iter_mut().zip(&y.one) {
        *o = v.clone();
    }
    let prod = FDAlgebra::from_parts(field, labels, left_mult, one)?;
    let prod = match (x.idempotents.get(), y.idempotents.get()) {
        (Some(fx), Some(fy)) => {
            let mut fam: Vec<AlgElem> = fx.iter().map(|e| embed_x(e)).collect();
            fam.extend(fy.iter().map(|e| embed_y(e)));
            prod.with_idempotents(fam)?
        }
        _ => prod,
    };
    let prod = match (x.radical.get(), y.radical.get()) {
        (Some(rx), Some(ry)) => {
            let mut vecs: Vec<AlgElem> = rx.basis_rows().iter().map(|v| embed_x(v)).collect();
            vecs.extend(ry.basis_rows().iter().map(|v| embed_y(v)));
            prod.with_radical(Subspace::span(field, dim, &vecs))
        }
        _ => prod,
    };
    Ok(prod)
}

/// Corner algebra e A e for e the sum of the chosen primitive idempotents,
/// with the inclusion back into A (columns are the corner basis vectors).
pub struct Corner {
    pub alg: Arc<FDAlgebra>,
    pub inclusion: Matrix,
    pub unit_in_source: AlgElem,
    pub chosen: Vec<usize>,
}

pub fn corner(a: &Arc<FDAlgebra>, chosen: &[usize]) -> Result<Corner> {
    let idem = a.idempotent_list()?.clone();
    for &c in chosen {
        if c >= idem.len() {
            return Err(QdeError::PreconditionFailed(format!(
                "idempotent index {c} out of range"
            )));
        }
    }
    let mut e = a.zero_elem();
    for &c in chosen {
        e = a.add(&e, &idem[c]);
    }
    let mut vecs = Vec::new();
    for k in 0..a.dim {
        let v = a.mul(&e, &a.mul(&a.basis_elem(k), &e));
        if !a.is_zero_elem(&v) {
            vecs.push(v);
        }
    }
    let block = BlockData::from_vectors(a.field, a.dim, &vecs);
    let cdim = block.dim();
    let coords = |v: &[Scalar]| -> Result<Vec<Scalar>> {
        block
            .coords(v)
            .ok_or_else(|| QdeError::Internal("corner product left the corner".into()))
    };
    let mut left_mult = Vec::with_capacity(cdim);
    for i in 0..cdim {
        let mut m = Matrix::zero(a.field, cdim, cdim);
        for j in 0..cdim {
            let prod = a.mul(&block.basis[i], &block.basis[j]);
            for (r, v) in coords(&prod)?.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, j, v);
                }
            }
        }
        left_mult.push(m);
    }
    let labels = block
        .basis
        .iter()
        .enumerate()
        .map(|(k, v)| label_for_vector(a, v).unwrap_or_else(|| format!("v{k}")))
        .collect();
    let one = coords(&e)?;
    let alg = FDAlgebra::from_parts(a.field, labels, left_mult, one)?;
    let fam: Vec<AlgElem> = chosen
        .iter()
        .map(|&c| coords(&idem[c]))
        .collect::<Result<_>>()?;
    let alg = alg.with_idempotents(fam)?;
    let alg = {
        let rad = a.radical_subspace()?;
        let mut rvecs = Vec::new();
        for r in rad.basis_rows() {
            let v = a.mul(&e, &a.mul(&r, &e));
            if !a.is_zero_elem(&v) {
                rvecs.push(coords(&v)?);
            }
        }
        alg.with_radical(Subspace::span(a.field, cdim, &rvecs))
    };
    let mut inclusion = Matrix::zero(a.field, a.dim, cdim);
    for (j, b) in block.basis.iter().enumerate() {
        for (r, v) in b.iter().enumerate() {
            if !v.is_zero() {
                inclusion.set(r, j, v.clone());
            }
        }
    }
    Ok(Corner {
        alg,
        inclusion,
        unit_in_source: e,
        chosen: chosen.to_vec(),
    })
}

fn label_for_vector(a: &FDAlgebra, v: &[Scalar]) -> Option<String> {
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

/// Quotient by the two-sided ideal generated by the given elements.
pub struct Quotient {
    pub alg: Arc<FDAlgebra>,
    /// Canonical surjection, alg.dim x source.dim.
    pub projection: Matrix,
    /// The generated ideal inside the source algebra.
    pub ideal: Subspace,
    /// True when the ideal is the whole algebra (quotient is zero).
    pub is_whole: bool,
}

pub fn quotient(a: &Arc<FDAlgebra>, gens: &[AlgElem]) -> Result<Quotient> {
    let field = a.field;
    // Saturate the span of the generators under multiplication by basis
    // elements on both sides.
    let mut vecs: Vec<AlgElem> = Vec::new();
    let mut span = Subspace::zero(field, a.dim);
    let mut worklist: Vec<AlgElem> = gens.to_vec();
    while let Some(v) = worklist.pop() {
        if v.iter().all(|s| s.is_zero()) || span.contains(&v) {
            continue;
        }
        vecs.push(v.clone());
        span = Subspace::span(field, a.dim, &vecs);
        for k in 0..a.dim {
            let b = a.basis_elem(k);
            worklist.push(a.mul(&b, &v));
            worklist.push(a.mul(&v, &b));
        }
    }
    let ideal = span;
    if ideal.contains(&a.one) {
        return Ok(Quotient {
            alg: FDAlgebra::zero_algebra(field),
            projection: Matrix::zero(field, 0, a.dim),
            ideal,
            is_whole: true,
        });
    }
    let positions = ideal.complement_coords();
    let qdim = positions.len();
    let project = |v: &[Scalar]| -> Vec<Scalar> {
        let r = ideal.reduce(v);
        positions.iter().map(|&p| r[p].clone()).collect()
    };
    let lift = |v: &[Scalar]| -> AlgElem {
        let mut out = vec![field.zero(); a.dim];
        for (&p, x) in positions.iter().zip(v) {
            out[p] = x.clone();
        }
        out
    };
    let mut left_mult = Vec::with_capacity(qdim);
    for i in 0..qdim {
        let mut unit_i = vec![field.zero(); qdim];
        unit_i[i] = field.one();
        let xi = lift(&unit_i);
        let mut m = Matrix::zero(field, qdim, qdim);
        for j in 0..qdim {
            let mut unit_j = vec![field.zero(); qdim];
            unit_j[j] = field.one();
            let prod = project(&a.mul(&xi, &lift(&unit_j)));
            for (r, v) in prod.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(r, j, v);
                }
            }
        }
        left_mult.push(m);
    }
    let labels: Vec<String> = positions.iter().map(|&p| a.labels[p].clone()).collect();
    let one = project(&a.one);
    let alg = FDAlgebra::from_parts(field, labels, left_mult, one)?;
    let alg = match a.idempotents.get() {
        Some(fam) => {
            let imgs: Vec<AlgElem> = fam
                .iter()
                .map(|e| project(e))
                .filter(|v| v.iter().any(|s| !s.is_zero()))
                .collect();
            alg.with_idempotents(imgs)?
        }
        None => alg,
    };
    let alg = match a.radical.get() {
        Some(r) => {
            let imgs: Vec<AlgElem> = r.basis_rows().iter().map(|v| project(v)).collect();
            alg.with_radical(Subspace::span(field, qdim, &imgs))
        }
        None => alg,
    };
    let mut projection = Matrix::zero(field, qdim, a.dim);
    for j in 0..a.dim {
        for (r, v) in project(&a.basis_elem(j)).into_iter().enumerate() {
            if !v.is_zero() {
                projection.set(r, j, v);
            }
        }
    }
    Ok(Quotient {
        alg,
        projection,
        ideal,
        is_whole: false,
    })
}
