//! Bundled worked examples and seeded instance generators.
//!
//! The string constants are `.qa` sources shared by the test suites and the
//! command-line corpus (the corpus files on disk are byte-identical copies;
//! a test asserts the parity). The generators produce deterministic random
//! instances from a seed: every draw goes through one `ChaCha8` stream per
//! call, so a fixed seed fixes the instance.

use crate::algebra::{build, hom_from_assignment, pullback, ArrowImage, FDAlgebra, MilnorSquare};
use crate::error::{QdeError, Result};
use crate::parse::parse_source;
use crate::quiver::{AlgebraPresentation, Arrow, Path, Quiver, RelationExpr};
use crate::scalar::FieldTag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Default seed for every randomized suite; mixed with per-instance indices.
pub const DEFAULT_SEED: u64 = 0x51DE_5EED;

/// Three-vertex algebra with a zigzag of arrows and a commutativity
/// relation; dimension 12, Frobenius-free.
pub const EX56_A: &str = "\
# three-vertex algebra: zigzag quiver, one commutativity relation, dim 12
algebra A over Q {
  vertices 1 2 3;
  arrow alpha: 1 -> 2;
  arrow delta: 2 -> 1;
  arrow beta:  2 -> 3;
  arrow gamma: 3 -> 2;
  relations alpha*delta*alpha, gamma*delta, delta*alpha - beta*gamma;
}
";

/// Cyclic three-vertex algebra, dimension 13; its Frobenius part is
/// k[x]/(x^2). Derived equivalent to the algebra in `EX56_A`.
pub const EX56_APRIME: &str = "\
# cyclic three-vertex algebra, dim 13
algebra Aprime over Q {
  vertices 1 2 3;
  arrow alpha': 1 -> 2;
  arrow beta':  2 -> 3;
  arrow gamma': 3 -> 1;
  relations alpha'*beta'*gamma'*alpha', gamma'*alpha'*beta'*gamma';
}
";

/// The tilting complex realizing the derived equivalence between the two
/// algebras above: a two-term summand P(2) -> P(1) plus two shifted
/// projective stalks, all concentrated in degrees -1 and 0.
pub const EX56_T: &str = "\
# three-vertex algebra: zigzag quiver, one commutativity relation, dim 12
algebra A over Q {
  vertices 1 2 3;
  arrow alpha: 1 -> 2;
  arrow delta: 2 -> 1;
  arrow beta:  2 -> 3;
  arrow gamma: 3 -> 2;
  relations alpha*delta*alpha, gamma*delta, delta*alpha - beta*gamma;
}

# tilting complex with endomorphism algebra the cyclic three-vertex algebra
complex T over A {
  term 0: P(1);
  term -1: P(2), P(2), P(3);
  d(-1) = [ delta, 0, 0 ];
}
";

/// Six-vertex algebra with a commutative square and a detached arrow;
/// the standard input for the vertex-gluing surgery.
pub const EX41: &str = "\
# commutative square 1 -> {2,3} -> 4 plus a detached arrow 5 -> 6, dim 12
algebra A over Q {
  vertices 1 2 3 4 5 6;
  arrow alpha: 1 -> 2;
  arrow beta:  1 -> 3;
  arrow delta: 2 -> 4;
  arrow gamma: 3 -> 4;
  arrow eta:   5 -> 6;
  relations alpha*delta - beta*gamma;
}
";

/// The smallest symmetric algebra: k[x]/(x^2).
pub const SYM_KX2: &str = "\
# dual numbers: one vertex, one loop, square zero
algebra B over Q {
  vertices s;
  arrow x: s -> s;
  relations x*x;
}
";

/// Four-dimensional symmetric Nakayama algebra k[x]/(x^4).
pub const SYM_NAKAYAMA: &str = "\
# truncated polynomial algebra on one loop, dim 4
algebra B over Q {
  vertices s;
  arrow x: s -> s;
  relations x*x*x*x;
}
";

/// Three-vertex algebra = dual numbers x (path algebra of 2 -> 3): the
/// bundled host for a classical tilting module whose endomorphism algebra
/// has the same Frobenius part.
pub const TILT3: &str = "\
# dual-numbers block at vertex 1, an A2 block on vertices 2 -> 3, dim 5
algebra A over Q {
  vertices 1 2 3;
  arrow x: 1 -> 1;
  arrow b: 2 -> 3;
  relations x*x;
}
";

/// First algebra block of a `.qa` source.
pub fn first_presentation(src: &str) -> Result<AlgebraPresentation> {
    parse_source(src)?
        .into_iter()
        .find_map(|item| match item {
            crate::parse::SourceItem::Algebra(p) => Some(p),
            _ => None,
        })
        .ok_or_else(|| QdeError::PreconditionFailed("source has no algebra block".into()))
}

/// Build the first algebra block of a `.qa` source.
pub fn algebra_from(src: &str) -> Result<Arc<FDAlgebra>> {
    build(&first_presentation(src)?)
}

/// Same presentation with the base field replaced (coefficients reread as
/// small integers, which every bundled relation uses).
pub fn over_field(p: &AlgebraPresentation, field: FieldTag) -> Result<AlgebraPresentation> {
    let mut relations = Vec::new();
    for r in &p.relations {
        let mut terms = Vec::new();
        for (c, path) in &r.terms {
            let lifted = c
                .as_bigint()
                .and_then(|b| i64::try_from(b).ok())
                .ok_or_else(|| QdeError::PreconditionFailed("non-integral coefficient".into()))?;
            terms.push((field.from_i64(lifted), path.clone()));
        }
        relations.push(RelationExpr::new(&p.quiver, field, terms)?);
    }
    Ok(AlgebraPresentation { name: p.name.clone(), field, quiver: p.quiver.clone(), relations })
}

/// Random quiver presentation over `field`: a few vertices, a few arrows,
/// all paths of length `cap_len` as relations (so the quotient is always
/// admissible) plus a random set of shorter monomial relations.
fn random_presentation(
    rng: &mut ChaCha8Rng,
    field: FieldTag,
    name: &str,
    extra: &[Path],
    quiver: &Quiver,
    cap_len: usize,
) -> Result<AlgebraPresentation> {
    let mut relations = Vec::new();
    // Length-cap relations: every composable word of length cap_len.
    let mut words: Vec<Path> = quiver.vertices.iter().enumerate().map(|(v, _)| Path::trivial(v)).collect();
    for _ in 0..cap_len {
        let mut next = Vec::new();
        for w in &words {
            for (ai, a) in quiver.arrows.iter().enumerate() {
                if a.source == w.target {
                    let mut arrows = w.arrows.clone();
                    arrows.push(ai);
                    next.push(Path { source: w.source, target: a.target, arrows });
                }
            }
        }
        words = next;
    }
    for w in words {
        relations.push(RelationExpr::new(quiver, field, vec![(field.one(), w)])?);
    }
    for p in extra {
        relations.push(RelationExpr::new(quiver, field, vec![(field.one(), p.clone())])?);
    }
    let _ = rng;
    Ok(AlgebraPresentation { name: name.into(), field, quiver: quiver.clone(), relations })
}

/// All composable words of exactly length 2 in a quiver.
fn length_two_words(quiver: &Quiver) -> Vec<Path> {
    let mut out = Vec::new();
    for (ai, a) in quiver.arrows.iter().enumerate() {
        for (bi, b) in quiver.arrows.iter().enumerate() {
            if a.target == b.source {
                out.push(Path { source: a.source, target: b.target, arrows: vec![ai, bi] });
            }
        }
    }
    out
}

/// A random pullback square over GF(5): one quiver, two random monomial
/// quotients of it, and their common further quotient as the base, with the
/// identity-on-generators surjections. Constituent dimensions stay <= 12.
pub fn random_square(seed: u64) -> Result<MilnorSquare> {
    let field = FieldTag::fp(5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _attempt in 0..200 {
        let nv = rng.gen_range(2..=3usize);
        let na = rng.gen_range(2..=4usize);
        let vertices: Vec<String> = (1..=nv).map(|v| v.to_string()).collect();
        let mut arrows = Vec::new();
        for k in 0..na {
            let source = rng.gen_range(0..nv);
            let target = rng.gen_range(0..nv);
            arrows.push(Arrow { label: format!("a{k}"), source, target });
        }
        let quiver = match Quiver::new(vertices, arrows) {
            Ok(q) => q,
            Err(_) => continue,
        };
        let cap_len = 3usize;
        let pool = length_two_words(&quiver);
        let pick = |rng: &mut ChaCha8Rng, pool: &[Path]| -> Vec<Path> {
            pool.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect()
        };
        let s1 = pick(&mut rng, &pool);
        let s2 = pick(&mut rng, &pool);
        let mut s0 = s1.clone();
        for p in &s2 {
            if !s0.contains(p) {
                s0.push(p.clone());
            }
        }
        let p1 = random_presentation(&mut rng, field, "A1", &s1, &quiver, cap_len)?;
        let p2 = random_presentation(&mut rng, field, "A2", &s2, &quiver, cap_len)?;
        let p0 = random_presentation(&mut rng, field, "A0", &s0, &quiver, cap_len)?;
        let a1 = build(&p1)?;
        let a2 = build(&p2)?;
        let a0 = build(&p0)?;
        if a1.dim > 12 || a2.dim > 12 || a1.dim + a2.dim - a0.dim > 12 {
            continue;
        }
        // The base must be a proper quotient on at least one side, else the
        // square degenerates to the identity.
        if a1.dim == a0.dim && a2.dim == a0.dim {
            continue;
        }
        let pi1 = identity_on_generators(&a1, &a0)?;
        let pi2 = identity_on_generators(&a2, &a0)?;
        let square = pullback(&pi1, &pi2)?;
        square.verify()?;
        return Ok(square);
    }
    Err(QdeError::BudgetExhausted("no admissible random square found".into()))
}

/// A random bounded complex over `a` with at most three terms and all
/// differential entries inside the radical. With three terms the second
/// differential is drawn from the kernel of composition against the
/// first, so the square-zero condition holds by construction.
pub fn random_complex(a: &Arc<FDAlgebra>, seed: u64) -> Result<crate::complex::ProjComplex> {
    use crate::complex::{AMatrix, ProjComplex};
    use crate::matrix::Matrix;
    use crate::scalar::Scalar;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ seed.wrapping_mul(0xA076_1D64_78BD_642F));
    let n = a.num_projectives()?;
    let rad = a.radical_subspace()?.clone();
    let rad_block = |i: usize, j: usize| -> Vec<crate::algebra::AlgElem> {
        a.block(i, j)
            .map(|b| b.basis.iter().filter(|v| rad.contains(v)).cloned().collect())
            .unwrap_or_default()
    };
    let coeff = |rng: &mut ChaCha8Rng| -> Scalar {
        a.field.from_i64(rng.gen_range(-2..=2i64))
    };
    for _attempt in 0..50 {
        let nt = rng.gen_range(1..=3usize);
        let lo = rng.gen_range(-1..=0i32);
        let terms: Vec<Vec<usize>> = (0..nt)
            .map(|_| {
                let width = rng.gen_range(0..=2usize);
                (0..width).map(|_| rng.gen_range(0..n)).collect()
            })
            .collect();
        if terms.iter().all(|t| t.is_empty()) {
            continue;
        }
        let random_entry = |rng: &mut ChaCha8Rng, i: usize, j: usize| {
            let pool = rad_block(i, j);
            let mut v = a.zero_elem();
            for b in &pool {
                v = a.add(&v, &a.scale(&coeff(rng), b));
            }
            v
        };
        let mut diffs = Vec::new();
        if nt >= 2 {
            let mut d0 = AMatrix::zero(a, terms[0].clone(), terms[1].clone());
            for r in 0..terms[0].len() {
                for c in 0..terms[1].len() {
                    d0.entries[r][c] = random_entry(&mut rng, terms[0][r], terms[1][c]);
                }
            }
            diffs.push(d0);
        }
        if nt == 3 {
            // Unknown coefficients of d1 over the radical block bases,
            // constrained by d0 * d1 = 0.
            let pools: Vec<Vec<Vec<crate::algebra::AlgElem>>> = terms[1]
                .iter()
                .map(|&s| terms[2].iter().map(|&c| rad_block(s, c)).collect())
                .collect();
            let total: usize = pools.iter().flatten().map(|p| p.len()).sum();
            let nrows = terms[0].len() * terms[2].len() * a.dim;
            let mut sys = Matrix::zero(a.field, nrows.max(1), total.max(1));
            let mut col = 0;
            for (s, row_pools) in pools.iter().enumerate() {
                for (c, pool) in row_pools.iter().enumerate() {
                    for b in pool {
                        for r in 0..terms[0].len() {
                            let prod = a.mul(&diffs[0].entries[r][s], b);
                            let base = (r * terms[2].len() + c) * a.dim;
                            for (t, v) in prod.into_iter().enumerate() {
                                if !v.is_zero() {
                                    sys.set(base + t, col, v);
                                }
                            }
                        }
                        col += 1;
                    }
                }
            }
            let kernel = if total == 0 { vec![] } else { sys.kernel_basis() };
            let mut sol = vec![a.field.zero(); total];
            for k in &kernel {
                let c = coeff(&mut rng);
                for (t, v) in k.iter().enumerate() {
                    sol[t] = sol[t].add(&c.mul(v));
                }
            }
            let mut d1 = AMatrix::zero(a, terms[1].clone(), terms[2].clone());
            let mut col = 0;
            for (s, row_pools) in pools.iter().enumerate() {
                for (c, pool) in row_pools.iter().enumerate() {
                    let mut v = a.zero_elem();
                    for b in pool {
                        v = a.add(&v, &a.scale(&sol[col], b));
                        col += 1;
                    }
                    d1.entries[s][c] = v;
                }
            }
            diffs.push(d1);
        }
        return ProjComplex::new(a.clone(), lo, terms, diffs);
    }
    Err(QdeError::BudgetExhausted("no nonempty random complex drawn".into()))
}

/// Surjection induced by fixing every vertex and every arrow, defined when
/// the codomain is a further quotient of the same quiver presentation.
pub fn identity_on_generators(
    dom: &Arc<FDAlgebra>,
    cod: &Arc<FDAlgebra>,
) -> Result<crate::algebra::AlgebraHom> {
    let dinfo = dom
        .path_info
        .as_ref()
        .ok_or_else(|| QdeError::PreconditionFailed("domain carries no quiver build".into()))?;
    let cinfo = cod
        .path_info
        .as_ref()
        .ok_or_else(|| QdeError::PreconditionFailed("codomain carries no quiver build".into()))?;
    let q = &dinfo.presentation.quiver;
    let vertex_images: Vec<_> = (0..q.vertices.len()).map(|v| cinfo.vertex_idempotent_elem(v)).collect();
    let arrow_images: Vec<_> = q
        .arrows
        .iter()
        .map(|a| cinfo.arrow_element(&a.label).map(ArrowImage::Elem))
        .collect::<Result<_>>()?;
    hom_from_assignment(dom, cod, &vertex_images, &arrow_images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sources_parse_and_build() {
        for src in [EX56_A, EX56_APRIME, EX41, SYM_KX2, SYM_NAKAYAMA, TILT3] {
            algebra_from(src).unwrap();
        }
        let items = parse_source(EX56_T).unwrap();
        assert_eq!(items.len(), 2);
        assert!(items[1].as_complex().is_some());
    }

    #[test]
    fn random_squares_are_deterministic() {
        let s1 = random_square(7).unwrap();
        let s2 = random_square(7).unwrap();
        assert_eq!(s1.algebra.dim, s2.algebra.dim);
        assert_eq!(s1.base().dim, s2.base().dim);
        let s3 = random_square(8).unwrap();
        s3.verify().unwrap();
    }
}
