use crate::error::{QdeError, Result};
use crate::matrix::{Matrix, Subspace};
use crate::scalar::{rational_roots, FieldTag, Scalar};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::{AlgElem, FDAlgebra};

const SPLIT_RNG_SEED: u64 = 0x51DE_5EED;
const RANDOM_CANDIDATES: usize = 64;
const PAIR_CANDIDATE_CAP: usize = 200;

/// A complete orthogonal family of primitive idempotents: split the
/// semisimple quotient (center first, then matrix blocks via spectral
/// projectors at rational eigenvalues), then lift through the radical.
pub fn primitive_idempotents(a: &Arc<FDAlgebra>) -> Result<Vec<AlgElem>> {
    if a.dim == 0 {
        return Ok(vec![]);
    }
    let rad = a.radical_subspace()?.clone();
    let s = SemisimpleQuotient::new(a, &rad)?;

    // Primitive central idempotents of S.
    let centrals = split_center(&s)?;

    // Split each central block into primitive (corner) idempotents.
    let mut family_s: Vec<Vec<Scalar>> = Vec::new();
    for c in &centrals {
        family_s.extend(split_corner(&s, c, 0)?);
    }

    // Family checks inside S.
    let mut sum = vec![s.alg.field.zero(); s.alg.dim];
    for e in &family_s {
        if s.alg.mul(e, e) != *e {
            return Err(QdeError::Internal("split produced a non-idempotent".into()));
        }
        sum = s.alg.add(&sum, e);
    }
    if sum != s.alg.one {
        return Err(QdeError::Internal("split family does not sum to the identity".into()));
    }

    // Split check: each corner e S e must be one-dimensional, i.e. every
    // simple module has endomorphism ring k. A division-ring corner
    // survives every splitting attempt above, so catch it here.
    for e in &family_s {
        let corner_vecs: Vec<Vec<Scalar>> = (0..s.alg.dim)
            .map(|k| s.alg.mul(e, &s.alg.mul(&s.alg.basis_elem(k), e)))
            .collect();
        let d = Subspace::span(s.alg.field, s.alg.dim, &corner_vecs).dim();
        if d != 1 {
            return Err(QdeError::NotSplit(format!(
                "a simple block has endomorphism ring of dimension {d} over the base field"
            )));
        }
    }

    // Lift through the radical, one at a time inside shrinking corners.
    let mut lifted: Vec<AlgElem> = Vec::new();
    let mut f = a.zero_elem();
    for ebar in &family_s {
        let x = s.lift(ebar);
        let one_minus_f = a.sub(&a.one, &f);
        let mut y = a.mul(&one_minus_f, &a.mul(&x, &one_minus_f));
        let mut steps = 0;
        while a.mul(&y, &y) != y {
            // y <- 3y^2 - 2y^3 squares the defect y^2 - y, which lies in
            // the radical, so this terminates.
            let y2 = a.mul(&y, &y);
            let y3 = a.mul(&y2, &y);
            y = a.sub(&a.scale(&scalar_int(a.field, 3), &y2), &a.scale(&scalar_int(a.field, 2), &y3));
            steps += 1;
            if steps > 64 {
                return Err(QdeError::Internal("idempotent lifting did not converge".into()));
            }
        }
        f = a.add(&f, &y);
        lifted.push(y);
    }
    a.check_idempotent_family(&lifted)?;
    Ok(lifted)
}

fn scalar_int(field: FieldTag, n: i64) -> Scalar {
    field.from_i64(n)
}

/// The semisimple quotient S = A/rad as a concrete algebra, with a linear
/// section back into A.
struct SemisimpleQuotient {
    alg: Arc<FDAlgebra>,
    positions: Vec<usize>,
    ambient: usize,
}

impl SemisimpleQuotient {
    fn new(a: &Arc<FDAlgebra>, rad: &Subspace) -> Result<SemisimpleQuotient> {
        let positions = rad.complement_coords();
        let dim = positions.len();
        let field = a.field;
        let project = |v: &[Scalar]| -> Vec<Scalar> {
            let r = rad.reduce(v);
            positions.iter().map(|&p| r[p].clone()).collect()
        };
        let lift = |v: &[Scalar]| -> AlgElem {
            let mut out = vec![field.zero(); a.dim];
            for (&p, x) in positions.iter().zip(v) {
                out[p] = x.clone();
            }
            out
        };
        let mut left_mult = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut unit_i = vec![field.zero(); dim];
            unit_i[i] = field.one();
            let xi = lift(&unit_i);
            let mut m = Matrix::zero(field, dim, dim);
            for j in 0..dim {
                let mut unit_j = vec![field.zero(); dim];
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
        let labels = (0..dim).map(|i| format!("s{i}")).collect();
        let one = project(&a.one);
        let alg = FDAlgebra::from_parts(field, labels, left_mult, one)?;
        Ok(SemisimpleQuotient {
            alg,
            positions,
            ambient: a.dim,
        })
    }

    fn lift(&self, v: &[Scalar]) -> AlgElem {
        let mut out = vec![self.alg.field.zero(); self.ambient];
        for (&p, x) in self.positions.iter().zip(v) {
            out[p] = x.clone();
        }
        out
    }
}

/// Center of S: elements commuting with every basis element.
fn center_basis(s: &SemisimpleQuotient) -> Vec<Vec<Scalar>> {
    let a = &s.alg;
    let n = a.dim;
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for j in 0..n {
        let bj = a.basis_elem(j);
        let l = a.left_mult_matrix(&bj);
        let r = a.right_mult_matrix(&bj);
        let d = l.sub(&r);
        for i in 0..n {
            rows.push(d.row(i).to_vec());
        }
    }
    let m = Matrix::from_rows(a.field, rows).expect("uniform rows");
    m.kernel_basis()
}

/// Primitive idempotents of the (commutative, semisimple) center, found by
/// repeatedly splitting at rational eigenvalues of center elements.
fn split_center(s: &SemisimpleQuotient) -> Result<Vec<Vec<Scalar>>> {
    let a = &s.alg;
    let zbasis = center_basis(s);
    let mut parts: Vec<Vec<Scalar>> = vec![a.one.clone()];
    loop {
        let mut changed = false;
        'outer: for pi in 0..parts.len() {
            for z in &zbasis {
                let c = parts[pi].clone();
                let x = a.mul(&c, &a.mul(z, &c));
                if let Some(e) = try_split_once(a, &c, &x)? {
                    let rest = a.sub(&c, &e);
                    parts.remove(pi);
                    parts.push(e);
                    parts.push(rest);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            return Ok(parts);
        }
    }
}

/// Spectral-projector split of the corner c·S·c at element x = c x c: if
/// the minimal polynomial of x has a proper factor (t - r)^m, return the
/// corresponding idempotent, a proper sub-idempotent of c.
fn try_split_once(
    a: &Arc<FDAlgebra>,
    c: &[Scalar],
    x: &[Scalar],
) -> Result<Option<Vec<Scalar>>> {
    let mp = min_poly(a, c, x)?;
    let deg = mp.len() - 1;
    if deg <= 1 {
        return Ok(None);
    }
    let roots = match rational_roots(&mp) {
        Ok(r) => r,
        Err(QdeError::BudgetExhausted(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    for (lam, mult) in roots {
        if mult == deg {
            continue;
        }
        // f = (t - lam)^mult, h = mp / f; Bezout gives u f + v h = 1 and
        // e = (v h)(x) is the spectral projector onto the lam part.
        let mut f = vec![a.field.one()];
        let lin = vec![lam.neg(), a.field.one()];
        for _ in 0..mult {
            f = poly_mul(a.field, &f, &lin);
        }
        let (h, r) = poly_divmod(a.field, &mp, &f);
        debug_assert!(r.iter().all(|s| s.is_zero()));
        let (g, _u, v) = poly_ext_gcd(a.field, &f, &h);
        if g.len() != 1 {
            continue;
        }
        let vh = poly_mul(a.field, &v, &h);
        let ginv = g[0].inv().expect("gcd of coprime factors is a nonzero constant");
        let proj: Vec<Scalar> = vh.iter().map(|s| s.mul(&ginv)).collect();
        let e = poly_eval_elem(a, &proj, c, x);
        if a.is_zero_elem(&e) || e == *c {
            continue;
        }
        if a.mul(&e, &e) != e {
            return Err(QdeError::Internal("spectral projector is not idempotent".into()));
        }
        return Ok(Some(e));
    }
    Ok(None)
}

/// Recursively split the corner c·S·c into primitive idempotents using
/// candidate elements: corner basis vectors, their pairwise sums and
/// products, then seeded random combinations. A corner none of whose
/// candidates split is accepted as primitive unless it visibly contains a
/// nonzero nilpotent (which certifies a missed matrix block).
fn split_corner(s: &SemisimpleQuotient, c: &[Scalar], depth: usize) -> Result<Vec<Vec<Scalar>>> {
    let a = &s.alg;
    if depth > a.dim + 2 {
        return Err(QdeError::Internal("corner splitting recursed too deep".into()));
    }
    let mut vecs = Vec::new();
    for k in 0..a.dim {
        let v = a.mul(c, &a.mul(&a.basis_elem(k), c));
        if !a.is_zero_elem(&v) {
            vecs.push(v);
        }
    }
    let corner = Subspace::span(a.field, a.dim, &vecs);
    let cdim = corner.dim();
    if cdim <= 1 {
        return Ok(vec![c.to_vec()]);
    }
    let basis = corner.basis_rows();

    let mut candidates: Vec<Vec<Scalar>> = basis.clone();
    let mut pairs = 0usize;
    'sums: for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            candidates.push(a.add(&basis[i], &basis[j]));
            pairs += 1;
            if pairs >= PAIR_CANDIDATE_CAP {
                break 'sums;
            }
        }
    }
    pairs = 0;
    'prods: for i in 0..basis.len() {
        for j in 0..basis.len() {
            candidates.push(a.mul(&basis[i], &basis[j]));
            pairs += 1;
            if pairs >= PAIR_CANDIDATE_CAP {
                break 'prods;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_RNG_SEED ^ (cdim as u64) << 8 ^ depth as u64);
    for _ in 0..RANDOM_CANDIDATES {
        let mut v = vec![a.field.zero(); a.dim];
        for b in &basis {
            let coef = random_scalar(a.field, &mut rng);
            for (vo, bo) in v.iter_mut().zip(b) {
                *vo = vo.add(&coef.mul(bo));
            }
        }
        candidates.push(v);
    }

    let mut saw_nilpotent = false;
    for cand in &candidates {
        if a.is_zero_elem(cand) {
            continue;
        }
        let x = a.mul(c, &a.mul(cand, c));
        if a.is_zero_elem(&x) {
            continue;
        }
        let mp = min_poly(a, c, &x)?;
        if is_pure_power(&mp) && mp.len() > 2 {
            saw_nilpotent = true;
        }
        if let Some(e) = try_split_once(a, c, &x)? {
            let rest = a.sub(c, &e);
            let mut out = split_corner(s, &e, depth + 1)?;
            out.extend(split_corner(s, &rest, depth + 1)?);
            return Ok(out);
        }
    }
    if saw_nilpotent {
        return Err(QdeError::NotSplit(
            "corner contains a nilpotent but no candidate produced a splitting".into(),
        ));
    }
    Ok(vec![c.to_vec()])
}

fn is_pure_power(mp: &[Scalar]) -> bool {
    mp.iter().take(mp.len() - 1).all(|s| s.is_zero())
}

fn random_scalar(field: FieldTag, rng: &mut ChaCha8Rng) -> Scalar {
    match field {
        FieldTag::Q => field.from_i64(rng.gen_range(-3i64..=3)),
        FieldTag::Fp(p) => field.from_i64(rng.gen_range(0i64..p as i64)),
    }
}

/// Minimal polynomial of x inside the unital subalgebra with unit u
/// (powers use x^0 = u). Coefficients constant-first, monic.
pub(super) fn min_poly(a: &Arc<FDAlgebra>, u: &[Scalar], x: &[Scalar]) -> Result<Vec<Scalar>> {
    let mut powers: Vec<AlgElem> = vec![u.to_vec()];
    let mut span = Subspace::span(a.field, a.dim, &powers);
    loop {
        let next = a.mul(powers.last().unwrap(), x);
        if span.contains(&next) {
            let cols: Vec<Vec<Scalar>> = powers.clone();
            let m = Matrix::from_rows(a.field, cols).expect("uniform").transpose();
            let sol = m.solve(&next).ok_or_else(|| {
                QdeError::Internal("minimal polynomial solve failed".into())
            })?;
            let mut coeffs: Vec<Scalar> = sol.into_iter().map(|s| s.neg()).collect();
            coeffs.push(a.field.one());
            return Ok(coeffs);
        }
        powers.push(next);
        span = Subspace::span(a.field, a.dim, &powers);
        if powers.len() > a.dim + 1 {
            return Err(QdeError::Internal("minimal polynomial did not terminate".into()));
        }
    }
}

fn poly_eval_elem(a: &Arc<FDAlgebra>, coeffs: &[Scalar], unit: &[Scalar], x: &[Scalar]) -> AlgElem {
    // Horner from the top coefficient; the constant term multiplies the
    // corner unit, not the algebra unit.
    let mut acc = a.zero_elem();
    for c in coeffs.iter().rev() {
        acc = a.mul(&acc, x);
        if !c.is_zero() {
            acc = a.add(&acc, &a.scale(c, unit));
        }
    }
    acc
}

// Dense polynomial helpers, coefficients constant-first.

pub(super) fn poly_trim(mut p: Vec<Scalar>) -> Vec<Scalar> {
    while p.len() > 1 && p.last().map(|s| s.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

pub(super) fn poly_mul(field: FieldTag, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = vec![field.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    poly_trim(out)
}

pub(super) fn poly_divmod(field: FieldTag, a: &[Scalar], b: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
    let b = poly_trim(b.to_vec());
    assert!(!(b.len() == 1 && b[0].is_zero()), "division by zero polynomial");
    let mut rem = poly_trim(a.to_vec());
    let db = b.len() - 1;
    let lead_inv = b[db].inv().expect("trimmed divisor has nonzero lead");
    if rem.len() - 1 < db || (rem.len() == 1 && rem[0].is_zero()) {
        return (vec![field.zero()], rem);
    }
    let mut quot = vec![field.zero(); rem.len() - db];
    while rem.len() - 1 >= db && !(rem.len() == 1 && rem[0].is_zero()) {
        let dr = rem.len() - 1;
        let coef = rem[dr].mul(&lead_inv);
        quot[dr - db] = coef.clone();
        for i in 0..=db {
            let t = rem[dr - db + i].sub(&coef.mul(&b[i]));
            rem[dr - db + i] = t;
        }
        rem = poly_trim(rem);
        if dr == db {
            break;
        }
    }
    (poly_trim(quot), poly_trim(rem))
}

/// Extended gcd: returns (g, u, v) with u a + v b = g. The gcd is not
/// normalised; callers divide by its leading unit as needed.
pub(super) fn poly_ext_gcd(
    field: FieldTag,
    a: &[Scalar],
    b: &[Scalar],
) -> (Vec<Scalar>, Vec<Scalar>, Vec<Scalar>) {
    let zero = vec![field.zero()];
    let one = vec![field.one()];
    let mut r0 = poly_trim(a.to_vec());
    let mut r1 = poly_trim(b.to_vec());
    let (mut s0, mut s1) = (one.clone(), zero.clone());
    let (mut t0, mut t1) = (zero.clone(), one);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divmod(field, &r0, &r1);
        let ns = poly_sub(field, &s0, &poly_mul(field, &q, &s1));
        let nt = poly_sub(field, &t0, &poly_mul(field, &q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = ns;
        t0 = t1;
        t1 = nt;
    }
    (r0, s0, t0)
}

fn poly_sub(field: FieldTag, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let n = a.len().max(b.len());
    let mut out = vec![field.zero(); n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).cloned().unwrap_or_else(|| field.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| field.zero());
        *o = x.sub(&y);
    }
    poly_trim(out)
}
