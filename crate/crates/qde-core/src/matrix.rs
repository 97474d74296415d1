use crate::error::{QdeError, Result};
use crate::scalar::{FieldTag, Scalar};
use std::fmt;

/// Dense row-major matrix over one base field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    pub field: FieldTag,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(field: FieldTag, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: FieldTag, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: FieldTag, rows: Vec<Vec<Scalar>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(QdeError::DimMismatch("ragged rows".into()));
            }
            for s in row {
                if s.field() != field {
                    return Err(QdeError::MixedFields("matrix entries".into()));
                }
                data.push(s);
            }
        }
        Ok(Matrix { field, rows: r, cols: c, data })
    }

    pub fn from_fn(field: FieldTag, rows: usize, cols: usize, f: impl Fn(usize, usize) -> Scalar) -> Matrix {
        let mut m = Matrix::zero(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        assert_eq!(self.field, rhs.field, "matrix product field");
        let mut out = Matrix::zero(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        let mut out = vec![self.field.zero(); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.at(i, j);
                if a.is_zero() || v[j].is_zero() {
                    continue;
                }
                out[i] = out[i].add(&a.mul(&v[j]));
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape");
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).add(rhs.at(i, j)))
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).sub(rhs.at(i, j)))
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).mul(s))
    }

    pub fn neg(&self) -> Matrix {
        Matrix::from_fn(self.field, self.rows, self.cols, |i, j| self.at(i, j).neg())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }

    /// Stack vertically: self on top of other.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack width");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { field: self.field, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Stack horizontally: self left of other.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack height");
        Matrix::from_fn(self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    /// Reduced row echelon form. Returns (rref, pivot columns).
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..m.cols {
            if r >= m.rows {
                break;
            }
            let mut pivot = None;
            for i in r..m.rows {
                if !m.at(i, c).is_zero() {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != r {
                for j in 0..m.cols {
                    let a = m.at(r, j).clone();
                    let b = m.at(p, j).clone();
                    m.set(r, j, b);
                    m.set(p, j, a);
                }
            }
            let inv = m.at(r, c).inv().expect("pivot nonzero");
            for j in 0..m.cols {
                let v = m.at(r, j).mul(&inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.at(i, c).is_zero() {
                    continue;
                }
                let f = m.at(i, c).clone();
                for j in 0..m.cols {
                    let v = m.at(i, j).sub(&f.mul(m.at(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of {v : M v = 0} (column vectors), one basis vector per
    /// non-pivot column, in column order.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        let pivot_rows: Vec<(usize, usize)> =
            pivots.iter().enumerate().map(|(row, &col)| (row, col)).collect();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![self.field.zero(); self.cols];
            v[free] = self.field.one();
            for &(row, col) in &pivot_rows {
                v[col] = r.at(row, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution x of M x = b, or None when inconsistent.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(self.rows, b.len(), "solve shape");
        let bcol = Matrix::from_fn(self.field, self.rows, 1, |i, _| b[i].clone());
        let aug = self.hstack(&bcol);
        let (r, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = r.at(row, self.cols).clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix, or None when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let aug = self.hstack(&Matrix::identity(self.field, self.rows));
        let (r, pivots) = aug.rref();
        if pivots.len() != self.rows || pivots.iter().enumerate().any(|(i, &c)| i != c) {
            return None;
        }
        Some(Matrix::from_fn(self.field, self.rows, self.cols, |i, j| {
            r.at(i, self.cols + j).clone()
        }))
    }

    pub fn det(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square");
        let mut m = self.clone();
        let mut det = self.field.one();
        for c in 0..m.cols {
            let mut pivot = None;
            for i in c..m.rows {
                if !m.at(i, c).is_zero() {
                    pivot = Some(i);
                    break;
                }
            }
            let Some(p) = pivot else { return self.field.zero() };
            if p != c {
                det = det.neg();
                for j in 0..m.cols {
                    let a = m.at(c, j).clone();
                    let b = m.at(p, j).clone();
                    m.set(c, j, b);
                    m.set(p, j, a);
                }
            }
            det = det.mul(m.at(c, c));
            let inv = m.at(c, c).inv().expect("pivot nonzero");
            for i in c + 1..m.rows {
                if m.at(i, c).is_zero() {
                    continue;
                }
                let f = m.at(i, c).mul(&inv);
                for j in c..m.cols {
                    let v = m.at(i, j).sub(&f.mul(m.at(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn trace(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "trace of non-square");
        let mut t = self.field.zero();
        for i in 0..self.rows {
            t = t.add(self.at(i, i));
        }
        t
    }

    /// Characteristic polynomial coefficients, constant term first
    /// (Faddeev-LeVerrier over Q; over F_p via lifting to Q is unsound for
    /// the division by k, so use expansion of the Hessenberg form instead).
    pub fn char_poly(&self) -> Vec<Scalar> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        // Danilevsky-free approach: compute det(xI - M) by fraction-free
        // expansion over the polynomial ring, using Hessenberg reduction.
        // For the sizes in this library a direct Hessenberg determinant
        // recurrence is exact and fast over any field.
        let mut h = self.clone();
        // Reduce to upper Hessenberg by similarity transforms.
        for c in 0..n.saturating_sub(2) {
            let mut pivot = None;
            for r in c + 1..n {
                if !h.at(r, c).is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else { continue };
            if p != c + 1 {
                // Swap rows p, c+1 and columns p, c+1.
                for j in 0..n {
                    let a = h.at(c + 1, j).clone();
                    let b = h.at(p, j).clone();
                    h.set(c + 1, j, b);
                    h.set(p, j, a);
                }
                for i in 0..n {
                    let a = h.at(i, c + 1).clone();
                    let b = h.at(i, p).clone();
                    h.set(i, c + 1, b);
                    h.set(i, p, a);
                }
            }
            let inv = h.at(c + 1, c).inv().expect("nonzero");
            for r in c + 2..n {
                if h.at(r, c).is_zero() {
                    continue;
                }
                let f = h.at(r, c).mul(&inv);
                for j in 0..n {
                    let v = h.at(r, j).sub(&f.mul(h.at(c + 1, j)));
                    h.set(r, j, v);
                }
                for i in 0..n {
                    let v = h.at(i, c + 1).add(&f.mul(h.at(i, r)));
                    h.set(i, c + 1, v);
                }
            }
        }
        // p_k(x) = charpoly of leading k x k block of Hessenberg h.
        let one = self.field.one();
        let mut polys: Vec<Vec<Scalar>> = vec![vec![one.clone()]];
        for k in 1..=n {
            // p_k = (x - h[k-1][k-1]) p_{k-1} - sum_{i} h[i][k-1] *
            //       (prod subdiagonal) p_i
            let mut p = poly_mul_linear(&polys[k - 1], &h.at(k - 1, k - 1).neg(), &self.field);
            let mut prod = one.clone();
            for i in (0..k - 1).rev() {
                prod = prod.mul(h.at(i + 1, i));
                if prod.is_zero() {
                    break;
                }
                let coeff = h.at(i, k - 1).mul(&prod);
                if coeff.is_zero() {
                    continue;
                }
                let sub = poly_scale(&polys[i], &coeff);
                p = poly_sub(&p, &sub, &self.field);
            }
            polys.push(p);
        }
        polys.pop().unwrap()
    }
}

fn poly_mul_linear(p: &[Scalar], c: &Scalar, field: &FieldTag) -> Vec<Scalar> {
    // p(x) * (x + c)
    let mut out = vec![field.zero(); p.len() + 1];
    for (i, a) in p.iter().enumerate() {
        out[i + 1] = out[i + 1].add(a);
        out[i] = out[i].add(&a.mul(c));
    }
    out
}

fn poly_scale(p: &[Scalar], c: &Scalar) -> Vec<Scalar> {
    p.iter().map(|a| a.mul(c)).collect()
}

fn poly_sub(a: &[Scalar], b: &[Scalar], field: &FieldTag) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    let mut out = vec![field.zero(); n];
    for i in 0..n {
        let av = a.get(i).cloned().unwrap_or_else(|| field.zero());
        let bv = b.get(i).cloned().unwrap_or_else(|| field.zero());
        out[i] = av.sub(&bv);
    }
    out
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Row space of a matrix in canonical (reduced echelon) form. Two subspaces
/// are equal iff their canonical matrices are equal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    pub field: FieldTag,
    pub ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(field: FieldTag, ambient: usize) -> Subspace {
        Subspace { field, ambient, basis: Matrix::zero(field, 0, ambient) }
    }

    pub fn full(field: FieldTag, ambient: usize) -> Subspace {
        Subspace { field, ambient, basis: Matrix::identity(field, ambient) }
    }

    pub fn span(field: FieldTag, ambient: usize, vectors: &[Vec<Scalar>]) -> Subspace {
        let rows: Vec<Vec<Scalar>> = vectors.to_vec();
        let m = Matrix::from_rows(field, rows).expect("span input");
        assert!(m.cols == ambient || m.rows == 0, "span ambient");
        let (r, pivots) = m.rref();
        let basis = Matrix::from_fn(field, pivots.len(), ambient, |i, j| r.at(i, j).clone());
        Subspace { field, ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.basis.rows).map(|i| self.basis.row(i).to_vec()).collect()
    }

    pub fn basis_matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.to_vec();
        for i in 0..self.basis.rows {
            let lead = (0..self.ambient).find(|&j| !self.basis.at(i, j).is_zero());
            if let Some(l) = lead {
                if !w[l].is_zero() {
                    let f = w[l].clone();
                    for j in 0..self.ambient {
                        w[j] = w[j].sub(&f.mul(self.basis.at(i, j)));
                    }
                }
            }
        }
        w.iter().all(|s| s.is_zero())
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_rows().iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        let mut rows = self.basis_rows();
        rows.extend(other.basis_rows());
        Subspace::span(self.field, self.ambient, &rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.field, self.ambient);
        }
        // Solve a U + b W = 0: left kernel of the stacked matrix.
        let stacked = self.basis.vstack(&other.basis);
        let ker = stacked.transpose().kernel_basis();
        let mut vecs = Vec::new();
        for k in ker {
            let mut v = vec![self.field.zero(); self.ambient];
            for (i, c) in k.iter().take(self.dim()).enumerate() {
                if c.is_zero() {
                    continue;
                }
                for j in 0..self.ambient {
                    v[j] = v[j].add(&c.mul(self.basis.at(i, j)));
                }
            }
            vecs.push(v);
        }
        Subspace::span(self.field, self.ambient, &vecs)
    }

    /// Indices of standard coordinates that extend this subspace to the
    /// ambient space (the non-pivot columns), used to pick complements.
    pub fn complement_coords(&self) -> Vec<usize> {
        let (_, pivots) = self.basis.rref();
        (0..self.ambient).filter(|c| !pivots.contains(c)).collect()
    }

    /// Reduce v modulo the subspace: the result has zero entries in all
    /// pivot coordinates and represents the class of v canonically.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        for i in 0..self.basis.rows {
            let lead = (0..self.ambient).find(|&j| !self.basis.at(i, j).is_zero());
            if let Some(l) = lead {
                if !w[l].is_zero() {
                    let f = w[l].clone();
                    for j in 0..self.ambient {
                        w[j] = w[j].sub(&f.mul(self.basis.at(i, j)));
                    }
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qm(rows: &[&[i64]]) -> Matrix {
        Matrix::from_fn(FieldTag::Q, rows.len(), rows[0].len(), |i, j| {
            FieldTag::Q.from_i64(rows[i][j])
        })
    }

    #[test]
    fn rref_rank_kernel() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6], &[1, 1, 1]]);
        assert_eq!(m.rank(), 2);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 1);
        for v in &ker {
            assert!(m.apply(v).iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn solve_and_inverse() {
        let m = qm(&[&[2, 1], &[1, 1]]);
        let b = vec![FieldTag::Q.from_i64(3), FieldTag::Q.from_i64(2)];
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(FieldTag::Q, 2));
        let sing = qm(&[&[1, 2], &[2, 4]]);
        assert!(sing.inverse().is_none());
        assert!(sing.det().is_zero());
    }

    #[test]
    fn char_poly_matches_trace_and_det() {
        let m = qm(&[&[1, 2, 0], &[0, 3, 1], &[2, 0, 1]]);
        let cp = m.char_poly();
        assert_eq!(cp.len(), 4);
        // char poly = x^3 - tr x^2 + ... +- det
        assert!(cp[3].is_one());
        assert_eq!(cp[2], m.trace().neg());
        assert_eq!(cp[0], m.det().neg()); // (-1)^3 det
    }

    #[test]
    fn char_poly_fp() {
        let f = FieldTag::fp(5).unwrap();
        let m = Matrix::from_fn(f, 2, 2, |i, j| f.from_i64([[1, 2], [3, 4]][i][j]));
        let cp = m.char_poly();
        assert_eq!(cp[0], m.det());
        assert_eq!(cp[1], m.trace().neg());
        assert!(cp[2].is_one());
    }

    #[test]
    fn subspace_ops() {
        let f = FieldTag::Q;
        let e = |k: usize| {
            let mut v = vec![f.zero(); 3];
            v[k] = f.one();
            v
        };
        let u = Subspace::span(f, 3, &[e(0), e(1)]);
        let w = Subspace::span(f, 3, &[e(1), e(2)]);
        let i = u.intersect(&w);
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&e(1)));
        let s = u.sum(&w);
        assert_eq!(s.dim(), 3);
        assert!(u.contains_subspace(&i));
        assert_eq!(u.complement_coords(), vec![2]);
    }
}
