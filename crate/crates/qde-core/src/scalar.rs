use crate::error::{QdeError, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// Base field of every object in a computation. `Fp` carries an odd or even
/// prime `p < 2^31`; primality is checked at construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum FieldTag {
    Q,
    Fp(u32),
}

impl FieldTag {
    pub fn fp(p: u32) -> Result<FieldTag> {
        if p < 2 || !is_prime(p) {
            return Err(QdeError::BadRelation(format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(QdeError::BadRelation(format!("prime {p} too large")));
        }
        Ok(FieldTag::Fp(p))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldTag::Q => Scalar::Q(BigRational::zero()),
            FieldTag::Fp(p) => Scalar::Fp { p: *p, v: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            FieldTag::Q => Scalar::Q(BigRational::one()),
            FieldTag::Fp(p) => Scalar::Fp { p: *p, v: 1 },
        }
    }

    /// Image of an integer in the field.
    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            FieldTag::Q => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            FieldTag::Fp(p) => {
                let p64 = *p as i64;
                let v = ((n % p64) + p64) % p64;
                Scalar::Fp { p: *p, v: v as u64 }
            }
        }
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Result<Scalar> {
        if den == 0 {
            return Err(QdeError::BadRelation("zero denominator".into()));
        }
        match self {
            FieldTag::Q => Ok(Scalar::Q(BigRational::new(
                BigInt::from(num),
                BigInt::from(den),
            ))),
            FieldTag::Fp(_) => {
                let d = self.from_i64(den);
                if d.is_zero() {
                    return Err(QdeError::BadRelation(format!(
                        "denominator {den} vanishes in {self}"
                    )));
                }
                Ok(self.from_i64(num).mul(&d.inv()?))
            }
        }
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            FieldTag::Q => 0,
            FieldTag::Fp(p) => *p,
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Q => write!(f, "Q"),
            FieldTag::Fp(p) => write!(f, "GF({p})"),
        }
    }
}

/// Exact field element. All arithmetic stays within one field; mixing tags
/// is a programming error and panics.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u32, v: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldTag {
        match self {
            Scalar::Q(_) => FieldTag::Q,
            Scalar::Fp { p, .. } => FieldTag::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { p: q, v: b }) => {
                assert_eq!(p, q, "mixed primes");
                Scalar::Fp { p: *p, v: (a + b) % (*p as u64) }
            }
            _ => panic!("mixed field tags"),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { p: q, v: b }) => {
                assert_eq!(p, q, "mixed primes");
                Scalar::Fp { p: *p, v: (a * b) % (*p as u64) }
            }
            _ => panic!("mixed field tags"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: (*p as u64 - v) % (*p as u64) },
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(QdeError::DimMismatch("inverse of zero".into()));
        }
        Ok(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { p, v } => Scalar::Fp { p: *p, v: fp_pow(*v, *p as u64 - 2, *p as u64) },
        })
    }

    pub fn div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// Exact integer value when the element is an integer (used by lattice
    /// computations that leave the base field).
    pub fn as_bigint(&self) -> Option<BigInt> {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    Some(r.numer().clone())
                } else {
                    None
                }
            }
            Scalar::Fp { v, .. } => Some(BigInt::from(*v)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

pub fn fp_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    let n = n as u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// All roots of the polynomial `coeffs[0] + coeffs[1] x + ...` lying in the
/// base field, with multiplicity. Over Q this runs the rational root test on
/// the integer-scaled polynomial; over F_p candidate roots come from
/// gcd(f, x^p - x) followed by exhaustion over the prime field.
pub fn rational_roots(coeffs: &[Scalar]) -> Result<Vec<(Scalar, usize)>> {
    let field = coeffs
        .iter()
        .map(|c| c.field())
        .next()
        .ok_or_else(|| QdeError::DimMismatch("empty polynomial".into()))?;
    if coeffs.iter().any(|c| c.field() != field) {
        return Err(QdeError::MixedFields("polynomial coefficients".into()));
    }
    let mut poly: Vec<Scalar> = coeffs.to_vec();
    while poly.last().map(|c| c.is_zero()).unwrap_or(false) {
        poly.pop();
    }
    if poly.len() <= 1 {
        // Constant polynomial: no roots reported (the zero polynomial has
        // every root; callers never pass it).
        return Ok(vec![]);
    }
    let candidates: Vec<Scalar> = match field {
        FieldTag::Q => rational_root_candidates(&poly)?,
        FieldTag::Fp(p) => fp_root_candidates(&poly, p)?,
    };
    let mut out = Vec::new();
    let mut work = poly;
    for r in candidates {
        let mut mult = 0usize;
        loop {
            match divide_out_root(&work, &r) {
                Some(q) => {
                    work = q;
                    mult += 1;
                }
                None => break,
            }
        }
        if mult > 0 {
            out.push((r, mult));
        }
    }
    Ok(out)
}

/// Synthetic division by (x - r); `None` if r is not a root.
fn divide_out_root(poly: &[Scalar], r: &Scalar) -> Option<Vec<Scalar>> {
    let n = poly.len();
    if n <= 1 {
        return None;
    }
    let mut quot = vec![poly[0].field().zero(); n - 1];
    let mut carry = poly[n - 1].clone();
    for i in (0..n - 1).rev() {
        quot[i] = carry.clone();
        carry = poly[i].add(&carry.mul(r));
    }
    if carry.is_zero() {
        Some(quot)
    } else {
        None
    }
}

fn rational_root_candidates(poly: &[Scalar]) -> Result<Vec<Scalar>> {
    // Clear denominators and divide by content.
    let mut lcm = BigInt::one();
    for c in poly {
        if let Scalar::Q(r) = c {
            lcm = num::integer::lcm(lcm.clone(), r.denom().clone());
        }
    }
    let ints: Vec<BigInt> = poly
        .iter()
        .map(|c| match c {
            Scalar::Q(r) => r.numer() * (&lcm / r.denom()),
            _ => unreachable!(),
        })
        .collect();
    let mut content = BigInt::zero();
    for v in &ints {
        content = num::integer::gcd(content.clone(), v.clone());
    }
    let ints: Vec<BigInt> = ints.iter().map(|v| v / &content).collect();
    // Trailing zero coefficients of the integer polynomial mean 0 is a root;
    // strip x-powers before listing divisors.
    let mut lead = ints.len() - 1;
    while ints[lead].is_zero() {
        lead -= 1;
    }
    let mut low = 0usize;
    while ints[low].is_zero() {
        low += 1;
    }
    let a0 = ints[low].abs();
    let an = ints[lead].abs();
    let mut cands = vec![Scalar::Q(BigRational::zero())];
    let nums = divisors(&a0);
    let dens = divisors(&an);
    for nu in &nums {
        for de in &dens {
            for sign in [1i32, -1] {
                let r = BigRational::new(nu * BigInt::from(sign), de.clone());
                let s = Scalar::Q(r);
                if !cands.contains(&s) {
                    cands.push(s);
                }
            }
        }
    }
    Ok(cands)
}

/// Positive divisors. Falls back to a bounded list for very large inputs,
/// which can only make the root list incomplete for coefficients far outside
/// the scale this library produces.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mut out = vec![];
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    if let Ok(v) = u64::try_from(n.clone()) {
        let mut d = 1u64;
        while d.saturating_mul(d) <= v {
            if v % d == 0 {
                out.push(BigInt::from(d));
                out.push(BigInt::from(v / d));
            }
            d += 1;
        }
    } else {
        for d in 1u64..=1_000_000 {
            if (n % BigInt::from(d)).is_zero() {
                out.push(BigInt::from(d));
            }
        }
        out.push(n.abs());
    }
    out.sort();
    out.dedup();
    out
}

fn fp_root_candidates(poly: &[Scalar], p: u32) -> Result<Vec<Scalar>> {
    if p as u64 > 1 << 21 {
        return Err(QdeError::BudgetExhausted(format!(
            "root exhaustion over GF({p}) unsupported"
        )));
    }
    // gcd(f, x^p - x) has the distinct in-field roots; its degree bounds the
    // number of evaluations that can succeed, but exhaustion over F_p is the
    // actual search.
    let field = FieldTag::Fp(p);
    let mut roots = vec![];
    for v in 0..p as u64 {
        let x = Scalar::Fp { p, v };
        let mut acc = field.zero();
        for c in poly.iter().rev() {
            acc = acc.mul(&x).add(c);
        }
        if acc.is_zero() {
            roots.push(x);
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        FieldTag::Q.from_ratio(n, d).unwrap()
    }

    #[test]
    fn field_arithmetic_q() {
        let a = q(3, 2);
        let b = q(-1, 3);
        assert_eq!(a.add(&b), q(7, 6));
        assert_eq!(a.mul(&b), q(-1, 2));
        assert_eq!(a.inv().unwrap(), q(2, 3));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn field_arithmetic_fp() {
        let f = FieldTag::fp(5).unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(4);
        assert_eq!(a.mul(&b), f.from_i64(2));
        assert_eq!(a.inv().unwrap(), f.from_i64(2));
        assert_eq!(f.from_i64(-1), f.from_i64(4));
        assert!(FieldTag::fp(6).is_err());
        assert!(FieldTag::fp(2).is_ok());
    }

    #[test]
    fn roots_of_quadratic_over_q() {
        // (x - 2)(x + 1/3) = x^2 - 5/3 x - 2/3
        let poly = [q(-2, 3), q(-5, 3), q(1, 1)];
        let mut roots = rational_roots(&poly).unwrap();
        roots.sort_by_key(|(_, m)| *m);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|(r, m)| *r == q(2, 1) && *m == 1));
        assert!(roots.iter().any(|(r, m)| *r == q(-1, 3) && *m == 1));
    }

    #[test]
    fn roots_with_multiplicity() {
        // x^2 (x - 1)^2
        let poly = [q(0, 1), q(0, 1), q(1, 1), q(-2, 1), q(1, 1)];
        let roots = rational_roots(&poly).unwrap();
        assert!(roots.iter().any(|(r, m)| r.is_zero() && *m == 2));
        assert!(roots.iter().any(|(r, m)| r.is_one() && *m == 2));
    }

    #[test]
    fn x2_plus_one_has_no_rational_roots_but_splits_mod_5() {
        let polyq = [q(1, 1), q(0, 1), q(1, 1)];
        assert!(rational_roots(&polyq).unwrap().is_empty());
        let f = FieldTag::fp(5).unwrap();
        let polyf = [f.from_i64(1), f.from_i64(0), f.from_i64(1)];
        let roots = rational_roots(&polyf).unwrap();
        // x^2 + 1 = (x-2)(x-3) mod 5
        assert_eq!(roots.len(), 2);
    }
}
