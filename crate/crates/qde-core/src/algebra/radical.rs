use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::{FieldTag, Scalar};
use num::bigint::BigInt;
use num::traits::ToPrimitive;

use super::{AlgElem, FDAlgebra};

/// Radical of an algebra with no structural description, via the trace
/// form of the regular representation. Over the rationals the radical is
/// exactly the kernel of (x, y) -> tr(L_x L_y). In characteristic p the
/// plain trace form is degenerate, so the kernel chain is iterated with
/// divided traces: lift to integer matrices, raise to the p^j-th power,
/// and read tr/p^j mod p. Each step is linear on the previous kernel over
/// the prime field, and the chain stabilises at the radical once p^j
/// exceeds the dimension.
pub fn compute_radical(a: &FDAlgebra) -> Result<Subspace> {
    let n = a.dim;
    if n == 0 {
        return Ok(Subspace::zero(a.field, 0));
    }
    match a.field {
        FieldTag::Q => {
            let mut g = Matrix::zero(a.field, n, n);
            let lmats: Vec<Matrix> = (0..n).map(|i| a.left_mult[i].clone()).collect();
            for r in 0..n {
                for i in 0..n {
                    g.set(r, i, trace_prod(&lmats[i], &lmats[r]));
                }
            }
            Ok(Subspace::span(a.field, n, &g.kernel_basis()))
        }
        FieldTag::Fp(p) => {
            let mut basis: Vec<AlgElem> = (0..n).map(|i| a.basis_elem(i)).collect();
            let mut pj: u64 = 1;
            while pj <= n as u64 && !basis.is_empty() {
                let k = basis.len();
                let mut f = Matrix::zero(a.field, k, k);
                for r in 0..k {
                    for i in 0..k {
                        let prod = a.mul(&basis[i], &basis[r]);
                        let l = a.left_mult_matrix(&prod);
                        f.set(r, i, divided_trace(&l, p as u64, pj)?);
                    }
                }
                let ker = f.kernel_basis();
                basis = ker
                    .iter()
                    .map(|c| {
                        let mut v = vec![a.field.zero(); n];
                        for (ci, b) in c.iter().zip(&basis) {
                            if !ci.is_zero() {
                                for (vo, bo) in v.iter_mut().zip(b) {
                                    *vo = vo.add(&ci.mul(bo));
                                }
                            }
                        }
                        v
                    })
                    .collect();
                pj = pj.saturating_mul(p as u64);
            }
            Ok(Subspace::span(a.field, n, &basis))
        }
    }
}

fn trace_prod(x: &Matrix, y: &Matrix) -> Scalar {
    let n = x.rows;
    let mut t = x.field.zero();
    for k in 0..n {
        for m in 0..n {
            let a = x.at(k, m);
            let b = y.at(m, k);
            if !a.is_zero() && !b.is_zero() {
                t = t.add(&a.mul(b));
            }
        }
    }
    t
}

/// tr(lift(m)^e) / e reduced mod p, where e = p^j and entries are lifted
/// to their least nonnegative residues.
fn divided_trace(m: &Matrix, p: u64, e: u64) -> Result<Scalar> {
    let n = m.rows;
    let mut lift = vec![vec![BigInt::from(0); n]; n];
    for r in 0..n {
        for c in 0..n {
            if let Scalar::Fp { v, .. } = m.at(r, c) {
                lift[r][c] = BigInt::from(*v);
            } else {
                return Err(QdeError::Internal("divided trace needs prime field entries".into()));
            }
        }
    }
    let powed = int_mat_pow(&lift, e);
    let mut tr = BigInt::from(0);
    for (i, row) in powed.iter().enumerate() {
        tr += &row[i];
    }
    let ebig = BigInt::from(e);
    let rem = &tr % &ebig;
    if rem != BigInt::from(0) {
        return Err(QdeError::Internal("divided trace is not integral".into()));
    }
    let q = &tr / &ebig;
    let res = ((&q % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
    Ok(Scalar::Fp {
        p: p as u32,
        v: res.to_u64().expect("residue fits"),
    })
}

fn int_mat_mul(x: &[Vec<BigInt>], y: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = x.len();
    let mut out = vec![vec![BigInt::from(0); n]; n];
    for r in 0..n {
        for k in 0..n {
            if x[r][k] == BigInt::from(0) {
                continue;
            }
            for c in 0..n {
                let t = &x[r][k] * &y[k][c];
                out[r][c] += t;
            }
        }
    }
    out
}

fn int_mat_pow(m: &[Vec<BigInt>], e: u64) -> Vec<Vec<BigInt>> {
    let n = m.len();
    let mut result = vec![vec![BigInt::from(0); n]; n];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = BigInt::from(1);
    }
    let mut base = m.to_vec();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = int_mat_mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = int_mat_mul(&base, &base);
        }
    }
    result
}
