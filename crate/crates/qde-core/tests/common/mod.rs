//! Test-support brute-force oracle for homotopy hom dimensions.
//!
//! Everything here is assembled from first principles on raw algebra
//! coordinates: maps are stored as one full-length coefficient vector
//! per matrix entry, idempotent-window membership is imposed as linear
//! constraints, and ranks come from a local Gaussian eliminator. None
//! of the library's block-coordinate machinery is used.

// Shared across several test binaries; not every binary uses every helper.
#![allow(dead_code)]

use qde_core::algebra::FDAlgebra;
use qde_core::complex::ProjComplex;
use qde_core::scalar::Scalar;
use std::sync::Arc;

pub fn local_rank(mut rows: Vec<Vec<Scalar>>) -> usize {
    let width = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv().expect("pivot invertible");
        for j in col..width {
            rows[rank][j] = rows[rank][j].mul(&inv);
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in col..width {
                    rows[i][j] = rows[i][j].sub(&f.mul(&rows[rank][j]));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

pub fn local_nullspace(rows: &[Vec<Scalar>], width: usize, field: qde_core::scalar::FieldTag) -> Vec<Vec<Scalar>> {
    let mut m: Vec<Vec<Scalar>> = rows.iter().filter(|r| !r.iter().all(|v| v.is_zero())).cloned().collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].inv().expect("pivot invertible");
        for j in 0..width {
            m[rank][j] = m[rank][j].mul(&inv);
        }
        for i in 0..m.len() {
            if i != rank && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..width {
                    m[i][j] = m[i][j].sub(&f.mul(&m[rank][j]));
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for free in 0..width {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![field.zero(); width];
        v[free] = field.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = m[r][free].neg();
        }
        out.push(v);
    }
    out
}

/// Coordinate layout for degree-m maps x -> y: one triple per matrix
/// entry, each entry occupying a full algebra-length coefficient run.
fn layout(x: &ProjComplex, y: &ProjComplex, m: i32) -> Vec<(i32, usize, usize)> {
    let mut v = Vec::new();
    for p in x.lo..=x.hi() {
        for r in 0..x.comps(p).len() {
            for c in 0..y.comps(p + m).len() {
                v.push((p, r, c));
            }
        }
    }
    v
}

/// Rows forcing every entry into its idempotent window e_i A e_j.
fn membership_rows(
    a: &Arc<FDAlgebra>,
    x: &ProjComplex,
    y: &ProjComplex,
    slots: &[(i32, usize, usize)],
    m: i32,
) -> Vec<Vec<Scalar>> {
    let adim = a.dim;
    let field = a.field;
    let width = slots.len() * adim;
    let mut rows = Vec::new();
    for (s, &(p, r, c)) in slots.iter().enumerate() {
        let ei = a.idempotent(x.comps(p)[r]).expect("idempotent");
        let ej = a.idempotent(y.comps(p + m)[c]).expect("idempotent");
        let mut block = vec![vec![field.zero(); width]; adim];
        for t in 0..adim {
            let w = a.mul(&a.mul(&ei, &a.basis_elem(t)), &ej);
            for (u, wv) in w.into_iter().enumerate() {
                let delta = if u == t { field.one() } else { field.zero() };
                let val = wv.sub(&delta);
                if !val.is_zero() {
                    block[u][s * adim + t] = val;
                }
            }
        }
        rows.extend(block.into_iter().filter(|r| r.iter().any(|v| !v.is_zero())));
    }
    rows
}

/// Apply the hom differential to a degree-m coefficient vector, landing
/// in the degree-(m+1) layout: per output entry,
/// sum_c v[p][r][c] d_y[c][c'] - (-1)^m sum_r'' d_x[r][r''] v[p+1][r''][c'].
fn apply_diff(
    a: &Arc<FDAlgebra>,
    x: &ProjComplex,
    y: &ProjComplex,
    m: i32,
    slots_in: &[(i32, usize, usize)],
    slots_out: &[(i32, usize, usize)],
    v: &[Scalar],
) -> Vec<Scalar> {
    let adim = a.dim;
    let field = a.field;
    let sign = field.from_i64(if m.rem_euclid(2) == 0 { 1 } else { -1 });
    let entry = |slot: usize| -> Vec<Scalar> { v[slot * adim..(slot + 1) * adim].to_vec() };
    let find = |p: i32, r: usize, c: usize| slots_in.iter().position(|&t| t == (p, r, c));
    let mut out = vec![field.zero(); slots_out.len() * adim];
    for (o, &(p, r, cq)) in slots_out.iter().enumerate() {
        let mut acc = vec![field.zero(); adim];
        let dy = y.diff(p + m);
        for c in 0..y.comps(p + m).len() {
            if let Some(s) = find(p, r, c) {
                let prod = a.mul(&entry(s), &dy.entries[c][cq]);
                acc = a.add(&acc, &prod);
            }
        }
        let dx = x.diff(p);
        for rq in 0..x.comps(p + 1).len() {
            if let Some(s) = find(p + 1, rq, cq) {
                let prod = a.mul(&dx.entries[r][rq], &entry(s));
                acc = a.add(&acc, &a.scale(&sign.neg(), &prod));
            }
        }
        for (t, val) in acc.into_iter().enumerate() {
            out[o * adim + t] = val;
        }
    }
    out
}

/// Brute-force dim of the degree-n hom space in the homotopy category.
pub fn brute_hom_dim(x: &ProjComplex, y: &ProjComplex, n: i32) -> usize {
    let a = &x.algebra;
    let adim = a.dim;
    let field = a.field;
    let sl = layout(x, y, n);
    if sl.is_empty() {
        return 0;
    }
    let width = sl.len() * adim;
    let sl_out = layout(x, y, n + 1);
    let mut rows = membership_rows(a, x, y, &sl, n);
    // Chain condition rows: transpose of the differential applied to
    // unit vectors.
    let mut cols = Vec::with_capacity(width);
    for t in 0..width {
        let mut unit = vec![field.zero(); width];
        unit[t] = field.one();
        cols.push(apply_diff(a, x, y, n, &sl, &sl_out, &unit));
    }
    let out_len = sl_out.len() * adim;
    for u in 0..out_len {
        let row: Vec<Scalar> = (0..width).map(|t| cols[t][u].clone()).collect();
        if row.iter().any(|v| !v.is_zero()) {
            rows.push(row);
        }
    }
    let zdim = width - local_rank(rows);
    // Null-homotopic image: homotopies of degree n-1 under membership,
    // pushed through the differential.
    let sl_h = layout(x, y, n - 1);
    let null_rank = if sl_h.is_empty() {
        0
    } else {
        let hmem = membership_rows(a, x, y, &sl_h, n - 1);
        let hbasis = local_nullspace(&hmem, sl_h.len() * adim, field);
        let imgs: Vec<Vec<Scalar>> = hbasis
            .iter()
            .map(|h| apply_diff(a, x, y, n - 1, &sl_h, &sl, h))
            .collect();
        local_rank(imgs)
    };
    zdim - null_rank
}
