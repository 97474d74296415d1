//! Frozen expected values for the bundled algebras, computed by hand from
//! the presentations, plus cross-checks between the independent radical and
//! idempotent routes.

use qde_core::algebra::{
    build, compute_radical, corner, primitive_idempotents, pullback, quotient, ArrowImage,
    FDAlgebra, IsoSearch,
};
use qde_core::error::QdeError;
use qde_core::fixtures::{
    algebra_from, first_presentation, identity_on_generators, over_field, random_square, EX41,
    EX56_A, EX56_APRIME, SYM_KX2, SYM_NAKAYAMA, TILT3,
};
use qde_core::matrix::{Matrix, Subspace};
use qde_core::scalar::FieldTag;
use std::sync::Arc;

fn block_dim(a: &Arc<FDAlgebra>, i: usize, j: usize) -> usize {
    a.block(i, j).unwrap().dim()
}

/// dim Ae_j = number of basis paths ending at j = sum of column blocks.
fn projective_dim(a: &Arc<FDAlgebra>, j: usize) -> usize {
    (0..a.num_projectives().unwrap()).map(|i| block_dim(a, i, j)).sum()
}

#[test]
fn zigzag_algebra_frozen_values() {
    let a = algebra_from(EX56_A).unwrap();
    assert_eq!(a.dim, 12);
    assert_eq!(a.radical_dim().unwrap(), 9);
    assert_eq!(a.radical_nilpotency().unwrap(), 4);
    assert_eq!(a.path_info.as_ref().unwrap().vanish_length, 4);
    let dims: Vec<Vec<usize>> =
        (0..3).map(|i| (0..3).map(|j| block_dim(&a, i, j)).collect()).collect();
    assert_eq!(dims, vec![vec![2, 1, 1], vec![1, 2, 2], vec![0, 1, 2]]);
    assert_eq!(projective_dim(&a, 0), 3);
    assert_eq!(projective_dim(&a, 1), 4);
    assert_eq!(projective_dim(&a, 2), 5);
    a.verify_associativity().unwrap();
}

#[test]
fn cyclic_partner_frozen_values() {
    let a = algebra_from(EX56_APRIME).unwrap();
    assert_eq!(a.dim, 13);
    assert_eq!(a.radical_dim().unwrap(), 10);
    // The lone length-4 survivor keeps the radical alive to the 4th power.
    assert_eq!(a.radical_nilpotency().unwrap(), 5);
    assert_eq!(block_dim(&a, 0, 0), 2);
    // e1 A e1 is spanned by e1 and the 3-cycle through vertices 2, 3; the
    // cycle squares to zero.
    let info = a.path_info.as_ref().unwrap();
    let cyc = a.mul(
        &a.mul(&info.arrow_element("alpha'").unwrap(), &info.arrow_element("beta'").unwrap()),
        &info.arrow_element("gamma'").unwrap(),
    );
    assert!(!a.is_zero_elem(&cyc));
    assert!(a.is_zero_elem(&a.mul(&cyc, &cyc)));
    a.verify_associativity().unwrap();
}

#[test]
fn square_with_detached_arrow_frozen_values() {
    let a = algebra_from(EX41).unwrap();
    assert_eq!(a.dim, 12);
    assert_eq!(a.radical_dim().unwrap(), 6);
    assert_eq!(a.radical_nilpotency().unwrap(), 3);
}

#[test]
fn small_symmetric_algebras() {
    let b2 = algebra_from(SYM_KX2).unwrap();
    assert_eq!(b2.dim, 2);
    assert_eq!(b2.radical_dim().unwrap(), 1);
    let b4 = algebra_from(SYM_NAKAYAMA).unwrap();
    assert_eq!(b4.dim, 4);
    assert_eq!(b4.radical_dim().unwrap(), 3);
    let t3 = algebra_from(TILT3).unwrap();
    assert_eq!(t3.dim, 5);
    assert_eq!(t3.radical_dim().unwrap(), 2);
}

#[test]
fn relation_free_cycle_is_rejected() {
    let p = first_presentation(
        "algebra C over Q { vertices 1; arrow x: 1 -> 1; }",
    )
    .unwrap();
    match build(&p) {
        Err(QdeError::NotAdmissible { .. }) => {}
        other => panic!("expected NotAdmissible, got {other:?}"),
    }
}

#[test]
fn radical_routes_agree() {
    // The structural radical (non-trivial normal-form paths) must agree
    // with the trace-form route, over Q and over small prime fields.
    for (src, field) in [
        (EX56_A, FieldTag::Q),
        (EX56_A, FieldTag::fp(5).unwrap()),
        (EX56_APRIME, FieldTag::Q),
        (SYM_NAKAYAMA, FieldTag::fp(2).unwrap()),
        (EX41, FieldTag::fp(3).unwrap()),
    ] {
        let p = over_field(&first_presentation(src).unwrap(), field).unwrap();
        let a = build(&p).unwrap();
        let structural = a.radical_subspace().unwrap();
        let traced = compute_radical(&a).unwrap();
        assert_eq!(structural.dim(), traced.dim(), "radical dim over {field}");
        for row in traced.basis_rows() {
            assert!(structural.contains(&row), "trace radical inside structural over {field}");
        }
    }
}

#[test]
fn field_change_keeps_dimensions() {
    for src in [EX56_A, EX56_APRIME, EX41] {
        let p = first_presentation(src).unwrap();
        let q = algebra_from(src).unwrap();
        let f5 = build(&over_field(&p, FieldTag::fp(5).unwrap()).unwrap()).unwrap();
        assert_eq!(q.dim, f5.dim);
        assert_eq!(q.radical_dim().unwrap(), f5.radical_dim().unwrap());
    }
}

#[test]
fn matrix_algebra_idempotents_split() {
    // Full 2x2 matrix algebra: basis E11, E12, E21, E22.
    let field = FieldTag::Q;
    let dim = 4;
    // index = 2*row + col; E(rc)E(st) = delta_{cs} E(rt)
    let left_mult: Vec<Matrix> = (0..dim)
        .map(|i| {
            let (r, c) = (i / 2, i % 2);
            Matrix::from_fn(field, dim, dim, |row, col| {
                let (s, t) = (col / 2, col % 2);
                if c == s && row == 2 * r + t {
                    field.one()
                } else {
                    field.zero()
                }
            })
        })
        .collect();
    let labels: Vec<String> = vec!["E11".into(), "E12".into(), "E21".into(), "E22".into()];
    let mut one = vec![field.zero(); dim];
    one[0] = field.one();
    one[3] = field.one();
    let a = FDAlgebra::from_parts(field, labels, left_mult, one).unwrap();
    let idem = primitive_idempotents(&a).unwrap();
    assert_eq!(idem.len(), 2);
    for e in &idem {
        assert_eq!(a.mul(e, e), *e);
    }
    let s = a.add(&idem[0], &idem[1]);
    assert_eq!(s, a.one);
}

#[test]
fn division_ring_block_is_reported_unsplit() {
    // GF(4) as a 2-dimensional algebra over GF(2): no split decomposition.
    let field = FieldTag::fp(2).unwrap();
    let one = field.one();
    let zero = field.zero();
    // basis {1, w} with w^2 = w + 1
    let l1 = Matrix::identity(field, 2);
    let lw = Matrix::from_rows(
        field,
        vec![vec![zero.clone(), one.clone()], vec![one.clone(), one.clone()]],
    )
    .unwrap();
    let a = FDAlgebra::from_parts(field, vec!["1".into(), "w".into()], vec![l1, lw], vec![one, zero])
        .unwrap();
    match primitive_idempotents(&a) {
        Err(QdeError::NotSplit(_)) => {}
        other => panic!("expected NotSplit, got {:?}", other.map(|v| v.len())),
    }
}

#[test]
fn corner_of_cyclic_partner_is_dual_numbers() {
    let a = algebra_from(EX56_APRIME).unwrap();
    let c = corner(&a, &[0]).unwrap();
    assert_eq!(c.alg.dim, 2);
    assert_eq!(c.alg.radical_dim().unwrap(), 1);
    // The non-unit basis element squares to zero.
    let nil = c.alg.basis_elem(1);
    assert!(c.alg.is_zero_elem(&c.alg.mul(&nil, &nil)));
}

#[test]
fn corner_on_two_vertices_has_block_sum_dimension() {
    let a = algebra_from(EX56_A).unwrap();
    let c = corner(&a, &[0, 1]).unwrap();
    assert_eq!(c.alg.dim, 6);
    let idem = primitive_idempotents(&c.alg).unwrap();
    assert_eq!(idem.len(), 2);
}

#[test]
fn quotient_by_socle_element_drops_one_dimension() {
    let a = algebra_from(EX56_A).unwrap();
    let info = a.path_info.as_ref().unwrap();
    let cyc = info.arrow_element("alpha").unwrap();
    let cyc = a.mul(&cyc, &info.arrow_element("delta").unwrap());
    let q = quotient(&a, &[cyc]).unwrap();
    assert_eq!(q.ideal.dim(), 1);
    assert_eq!(q.alg.dim, 11);
    assert!(!q.is_whole);
}

#[test]
fn pullback_of_double_quotient() {
    let a = algebra_from(EX56_A).unwrap();
    let info = a.path_info.as_ref().unwrap();
    let cyc = a.mul(&info.arrow_element("alpha").unwrap(), &info.arrow_element("delta").unwrap());
    let q = quotient(&a, &[cyc]).unwrap();
    let pi = qde_core::algebra::AlgebraHom::new(a.clone(), q.alg.clone(), q.projection.clone())
        .unwrap();
    let square = pullback(&pi, &pi).unwrap();
    square.verify().unwrap();
    assert_eq!(square.algebra.dim, 13);
    square.algebra.verify_associativity().unwrap();

    // Universal property: every compatible pair has exactly one preimage.
    let lam1 = &square.lam1.mat;
    let lam2 = &square.lam2.mat;
    let stacked = lam1.vstack(lam2);
    assert_eq!(stacked.rank(), square.algebra.dim);
    let mut rng_state = 1u64;
    let mut next = move || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((rng_state >> 33) % 11) as i64 - 5
    };
    for _ in 0..200 {
        let x: Vec<_> = (0..a.dim).map(|_| a.field.from_i64(next())).collect();
        // Solve pi2 y = pi1 x for some y, then perturb by a kernel element.
        let target = pi.apply(&x);
        let y0 = pi.mat.solve(&target).expect("surjection solves");
        let mut y = y0;
        for k in pi.kernel().basis_rows() {
            let c = a.field.from_i64(next());
            y = a.add(&y, &a.scale(&c, &k));
        }
        let mut stacked_rhs = x.clone();
        stacked_rhs.extend(y.iter().cloned());
        let lam = stacked.solve(&stacked_rhs).expect("pair lifts");
        assert_eq!(square.lam1.apply(&lam), x);
        assert_eq!(square.lam2.apply(&lam), y);
    }
}

#[test]
fn presentation_round_trip_on_zigzag() {
    let p = first_presentation(EX56_A).unwrap();
    let a = build(&p).unwrap();
    let (p2, iso) = qde_core::algebra::basic_presentation(&a, "A.rt").unwrap();
    assert_eq!(p2.quiver.vertices.len(), 3);
    assert_eq!(p2.quiver.arrows.len(), 4);
    let rebuilt = build(&p2).unwrap();
    assert_eq!(rebuilt.dim, 12);
    iso.verify().unwrap();
    assert!(iso.is_injective() && iso.is_surjective());
    match qde_core::algebra::find_presentation_iso(&p, &p2, 100_000).unwrap() {
        IsoSearch::Found(h) => h.verify().unwrap(),
        _ => panic!("no presentation isomorphism found"),
    }
}

#[test]
fn presentation_iso_rejects_different() {
    let p1 = first_presentation(EX56_A).unwrap();
    let p2 = first_presentation(EX56_APRIME).unwrap();
    match qde_core::algebra::find_presentation_iso(&p1, &p2, 100_000).unwrap() {
        IsoSearch::NotFound => {}
        _ => panic!("distinct algebras compared equal"),
    }
}

#[test]
fn vertex_killing_surjection() {
    let a = algebra_from(EX41).unwrap();
    let semisimple = algebra_from(
        "algebra S over Q { vertices 1 2 3 4 5 6; }",
    )
    .unwrap();
    let sinfo = semisimple.path_info.as_ref().unwrap();
    let vertex_images: Vec<_> = (0..6).map(|v| sinfo.vertex_idempotent_elem(v)).collect();
    let arrow_images = vec![ArrowImage::Zero; 5];
    let pi =
        qde_core::algebra::hom_from_assignment(&a, &semisimple, &vertex_images, &arrow_images)
            .unwrap();
    pi.verify().unwrap();
    assert!(pi.is_surjective());
    assert_eq!(pi.kernel().dim(), 6);
}

#[test]
fn random_squares_satisfy_dimension_identity() {
    for seed in 0..5u64 {
        let sq = random_square(seed).unwrap();
        sq.verify().unwrap();
        let expected = sq.pi1.domain.dim + sq.pi2.domain.dim - sq.base().dim;
        assert_eq!(sq.algebra.dim, expected, "seed {seed}");
        assert!(sq.pi1.is_surjective() && sq.pi2.is_surjective());
        sq.algebra.verify_associativity().unwrap();
    }
}

#[test]
fn identity_on_generators_requires_matching_quotient() {
    let a = algebra_from(EX56_A).unwrap();
    let b = algebra_from(EX56_APRIME).unwrap();
    assert!(identity_on_generators(&a, &b).is_err());
}

#[test]
fn subspace_tools_roundtrip() {
    let f = FieldTag::Q;
    let rows = vec![
        vec![f.from_i64(1), f.from_i64(2), f.from_i64(0)],
        vec![f.from_i64(0), f.from_i64(1), f.from_i64(1)],
    ];
    let s = Subspace::span(f, 3, &rows);
    assert_eq!(s.dim(), 2);
    let m = Matrix::from_rows(f, rows).unwrap();
    assert_eq!(m.rank(), 2);
}
