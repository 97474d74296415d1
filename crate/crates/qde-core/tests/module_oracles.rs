//! Frozen expectations for the module layer, checked against values
//! worked out by hand on the bundled examples and against independent
//! second routes where one exists.

use qde_core::algebra::{
    basic_presentation, find_presentation_iso, opposite_algebra, AlgElem, FDAlgebra, IsoSearch,
};
use qde_core::fixtures::{
    algebra_from, first_presentation, EX56_A, EX56_APRIME, SYM_KX2, SYM_NAKAYAMA, TILT3,
};
use qde_core::matrix::{Matrix, Subspace};
use qde_core::module::{
    decompose_module, dual, endo_algebra, frobenius_part, hom_space, is_isomorphic, left_ideal,
    longest_elements, nakayama, nakayama_right_exact, nu_stably_projectives, projective, regular,
    simple, top_socle, FDModule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const A2_SRC: &str = "algebra A2 over Q {\n  vertices 1 2;\n  arrow a: 1 -> 2;\n}\n";

fn word(a: &Arc<FDAlgebra>, labels: &[&str]) -> AlgElem {
    let info = a.path_info.as_ref().expect("presented algebra");
    let mut acc = a.one.clone();
    for l in labels {
        acc = a.mul(&acc, &info.arrow_element(l).unwrap());
    }
    acc
}

#[test]
fn hom_dimensions_match_corner_blocks() {
    let a = algebra_from(EX56_A).unwrap();
    let expected = [[2usize, 1, 1], [1, 2, 2], [0, 1, 2]];
    for i in 0..3 {
        let pi = projective(&a, i).unwrap();
        for j in 0..3 {
            let pj = projective(&a, j).unwrap();
            assert_eq!(
                hom_space(&pi, &pj).unwrap().len(),
                expected[i][j],
                "hom({i},{j})"
            );
        }
        let reg = regular(&a).unwrap();
        let row_sum: usize = expected[i].iter().sum();
        assert_eq!(hom_space(&pi, &reg).unwrap().len(), row_sum);
    }
}

#[test]
fn regular_endomorphisms_recover_the_algebra() {
    let a = algebra_from(EX56_A).unwrap();
    let reg = regular(&a).unwrap();
    reg.verify_representation().unwrap();
    let (end, basis) = endo_algebra(&reg).unwrap();
    assert_eq!(end.dim, a.dim);
    for h in &basis {
        h.verify().unwrap();
    }
    assert_eq!(end.radical_dim().unwrap(), a.radical_dim().unwrap());
    let (pe, _) = basic_presentation(&end, "E").unwrap();
    let pa = first_presentation(EX56_A).unwrap();
    match find_presentation_iso(&pe, &pa, 1_000_000).unwrap() {
        IsoSearch::Found(h) => h.verify().unwrap(),
        _ => panic!("endomorphisms of the regular module should recover the algebra"),
    }
}

#[test]
fn projective_tops_and_socles_are_simple() {
    let a = algebra_from(EX56_A).unwrap();
    for i in 0..3 {
        let p = projective(&a, i).unwrap();
        let ts = top_socle(&p).unwrap();
        assert_eq!(ts.top.dim, 1, "top of projective {i}");
        assert_eq!(ts.socle.dim, 1, "socle of projective {i}");
        ts.top_map.verify().unwrap();
        ts.socle_map.verify().unwrap();
        let s = simple(&a, i).unwrap();
        assert!(is_isomorphic(&s, &ts.top).unwrap().is_iso());
    }
}

#[test]
fn socle_vertices_are_as_computed_by_hand() {
    // socle(Ae_1) = span{alpha delta} at vertex 1, socle(Ae_2) at vertex 2,
    // socle(Ae_3) = span{delta alpha beta} at vertex 2.
    let a = algebra_from(EX56_A).unwrap();
    let socle_vertex = [0usize, 1, 1];
    for i in 0..3 {
        let p = projective(&a, i).unwrap();
        let ts = top_socle(&p).unwrap();
        let s = simple(&a, socle_vertex[i]).unwrap();
        assert!(
            is_isomorphic(&ts.socle, &s).unwrap().is_iso(),
            "socle of projective {i}"
        );
    }
}

#[test]
fn hereditary_two_vertex_nakayama_behavior() {
    let a = algebra_from(A2_SRC).unwrap();
    assert_eq!(a.dim, 3);
    let nu1 = nakayama(&a, 0).unwrap();
    let p2 = projective(&a, 1).unwrap();
    let w = is_isomorphic(&nu1, &p2).unwrap().witness().expect("nu(Ae_1) = Ae_2");
    w.verify().unwrap();
    let nu2 = nakayama(&a, 1).unwrap();
    assert_eq!(nu2.dim, 1);
    for j in 0..2 {
        let pj = projective(&a, j).unwrap();
        assert!(!is_isomorphic(&nu2, &pj).unwrap().is_iso());
    }
    let (stable, _) = nu_stably_projectives(&a).unwrap();
    assert!(stable.is_empty());
    let (frob, reps) = frobenius_part(&a).unwrap();
    assert_eq!(frob.dim, 0);
    assert!(reps.is_empty());
}

#[test]
fn cyclic_partner_has_a_nakayama_fixed_point() {
    let a = algebra_from(EX56_APRIME).unwrap();
    let nu = nakayama(&a, 0).unwrap();
    let p = projective(&a, 0).unwrap();
    assert_eq!(nu.dim, 4);
    assert_eq!(p.dim, 4);
    let w = is_isomorphic(&nu, &p).unwrap().witness().expect("fixed point at vertex 1");
    w.verify().unwrap();
    let (stable, step) = nu_stably_projectives(&a).unwrap();
    assert_eq!(stable, vec![0]);
    assert_eq!(step.get(&0), Some(&0));
    let (frob, reps) = frobenius_part(&a).unwrap();
    assert_eq!(reps, vec![0]);
    assert_eq!(frob.dim, 2);
    assert_eq!(frob.radical_dim().unwrap(), 1);
    let (pf, _) = basic_presentation(&frob, "F").unwrap();
    let pk = first_presentation(SYM_KX2).unwrap();
    assert!(matches!(
        find_presentation_iso(&pf, &pk, 10_000).unwrap(),
        IsoSearch::Found(_)
    ));
}

#[test]
fn zigzag_has_no_stable_projectives() {
    let a = algebra_from(EX56_A).unwrap();
    let (stable, step) = nu_stably_projectives(&a).unwrap();
    assert!(stable.is_empty());
    assert!(step.is_empty());
    let (frob, reps) = frobenius_part(&a).unwrap();
    assert_eq!(frob.dim, 0);
    assert!(reps.is_empty());
}

#[test]
fn symmetric_algebras_are_their_own_frobenius_part() {
    for (src, dim) in [(SYM_KX2, 2usize), (SYM_NAKAYAMA, 4usize)] {
        let b = algebra_from(src).unwrap();
        let nu = nakayama(&b, 0).unwrap();
        let p = projective(&b, 0).unwrap();
        assert!(is_isomorphic(&nu, &p).unwrap().is_iso());
        let (stable, step) = nu_stably_projectives(&b).unwrap();
        assert_eq!(stable, vec![0]);
        assert_eq!(step.get(&0), Some(&0));
        let (frob, _) = frobenius_part(&b).unwrap();
        assert_eq!(frob.dim, dim);
    }
}

#[test]
fn loop_plus_arrow_algebra_frobenius_part() {
    let a = algebra_from(TILT3).unwrap();
    // nu fixes vertex 1 and sends the second projective to the third.
    let w = is_isomorphic(&nakayama(&a, 0).unwrap(), &projective(&a, 0).unwrap())
        .unwrap()
        .witness()
        .expect("vertex 1 fixed");
    w.verify().unwrap();
    assert!(
        is_isomorphic(&nakayama(&a, 1).unwrap(), &projective(&a, 2).unwrap())
            .unwrap()
            .is_iso()
    );
    let nu3 = nakayama(&a, 2).unwrap();
    assert_eq!(nu3.dim, 1);
    let (stable, step) = nu_stably_projectives(&a).unwrap();
    assert_eq!(stable, vec![0]);
    assert_eq!(step.get(&0), Some(&0));
    let (frob, reps) = frobenius_part(&a).unwrap();
    assert_eq!(reps, vec![0]);
    assert_eq!(frob.dim, 2);
    let (pf, _) = basic_presentation(&frob, "F").unwrap();
    let pk = first_presentation(SYM_KX2).unwrap();
    assert!(matches!(
        find_presentation_iso(&pf, &pk, 10_000).unwrap(),
        IsoSearch::Found(_)
    ));
}

#[test]
fn nakayama_routes_agree() {
    // Dual of the right ideal versus the tensor construction.
    for src in [EX56_A, EX56_APRIME, TILT3] {
        let a = algebra_from(src).unwrap();
        let n = a.num_projectives().unwrap();
        for i in 0..n {
            let direct = nakayama(&a, i).unwrap();
            direct.verify_representation().unwrap();
            let tensored = nakayama_right_exact(&projective(&a, i).unwrap()).unwrap();
            tensored.verify_representation().unwrap();
            assert_eq!(direct.dim, tensored.dim, "dims at vertex {i}");
            assert!(
                is_isomorphic(&direct, &tensored).unwrap().is_iso(),
                "routes disagree at vertex {i}"
            );
        }
    }
}

#[test]
fn dual_swaps_top_and_socle_and_is_involutive() {
    let a = algebra_from(EX56_A).unwrap();
    let aop = opposite_algebra(&a).unwrap();
    let aopop = opposite_algebra(&aop).unwrap();
    let p = projective(&a, 2).unwrap();
    let d = dual(&p, &aop).unwrap();
    d.verify_representation().unwrap();
    let ts = top_socle(&p).unwrap();
    let dts = top_socle(&d).unwrap();
    assert_eq!(ts.top.dim, dts.socle.dim);
    assert_eq!(ts.socle.dim, dts.top.dim);
    let dd = dual(&d, &aopop).unwrap();
    assert!(is_isomorphic(&dd, &p).unwrap().is_iso());
}

#[test]
fn nakayama_right_exact_of_regular_is_the_dual() {
    let a = algebra_from(EX56_A).unwrap();
    let img = nakayama_right_exact(&regular(&a).unwrap()).unwrap();
    assert_eq!(img.dim, a.dim);
    let b = algebra_from(SYM_KX2).unwrap();
    let imgb = nakayama_right_exact(&regular(&b).unwrap()).unwrap();
    assert!(is_isomorphic(&imgb, &regular(&b).unwrap()).unwrap().is_iso());
}

#[test]
fn decompose_recovers_projective_summands() {
    let a = algebra_from(EX56_A).unwrap();
    let reg = regular(&a).unwrap();
    let parts = decompose_module(&reg).unwrap();
    assert_eq!(parts.len(), 3);
    let mut seen = vec![false; 3];
    for part in &parts {
        part.include.verify().unwrap();
        part.project.verify().unwrap();
        let mut hit = None;
        for i in 0..3 {
            let p = projective(&a, i).unwrap();
            if part.module.dim == p.dim && is_isomorphic(&part.module, &p).unwrap().is_iso() {
                hit = Some(i);
                break;
            }
        }
        let i = hit.expect("summand of the regular module is projective");
        assert!(!seen[i], "each projective appears once");
        seen[i] = true;
    }
    assert!(seen.iter().all(|&b| b));
}

#[test]
fn decompose_counts_repeated_summands() {
    let a = algebra_from(EX56_A).unwrap();
    let p1 = projective(&a, 0).unwrap();
    let p2 = projective(&a, 1).unwrap();
    let m = FDModule::direct_sum(&[&p1, &p1, &p2]).unwrap();
    let parts = decompose_module(&m).unwrap();
    assert_eq!(parts.len(), 3);
    let count1 = parts
        .iter()
        .filter(|s| s.module.dim == p1.dim && is_isomorphic(&s.module, &p1).unwrap().is_iso())
        .count();
    assert_eq!(count1, 2);
}

#[test]
fn non_isomorphic_same_dimension_pairs_are_separated() {
    let a = algebra_from(EX56_A).unwrap();
    let p1 = projective(&a, 0).unwrap();
    let p2 = projective(&a, 1).unwrap();
    let p3 = projective(&a, 2).unwrap();
    let m = FDModule::direct_sum(&[&p1, &p3]).unwrap();
    let n = FDModule::direct_sum(&[&p2, &p2]).unwrap();
    assert_eq!(m.dim, n.dim);
    assert!(!is_isomorphic(&m, &n).unwrap().is_iso());
    // Same test over a small prime field exercises the exhaustive route.
    let pq = first_presentation(EX56_A).unwrap();
    let p5 = qde_core::fixtures::over_field(&pq, qde_core::scalar::FieldTag::fp(5).unwrap()).unwrap();
    let a5 = qde_core::algebra::build(&p5).unwrap();
    let q1 = projective(&a5, 0).unwrap();
    let q2 = projective(&a5, 1).unwrap();
    let q3 = projective(&a5, 2).unwrap();
    let m5 = FDModule::direct_sum(&[&q1, &q3]).unwrap();
    let n5 = FDModule::direct_sum(&[&q2, &q2]).unwrap();
    assert!(!is_isomorphic(&m5, &n5).unwrap().is_iso());
}

#[test]
fn left_ideal_of_an_arrow_is_a_radical_submodule() {
    let a = algebra_from(EX56_A).unwrap();
    let alpha = word(&a, &["alpha"]);
    let (m, _incl) = left_ideal(&a, &alpha).unwrap();
    m.verify_representation().unwrap();
    // A·alpha = span{alpha, delta·alpha ≡ beta·gamma·... } inside Ae_2.
    assert_eq!(m.dim, 2);
}

#[test]
fn longest_elements_frozen_values() {
    let a = algebra_from(EX56_A).unwrap();
    let l11 = longest_elements(&a, 0, 0).unwrap();
    assert_eq!(l11.len(), 1);
    let alpha_delta = word(&a, &["alpha", "delta"]);
    let span = Subspace::span(a.field, a.dim, &l11);
    assert!(span.contains(&alpha_delta));
    let l23 = longest_elements(&a, 1, 2).unwrap();
    assert_eq!(l23.len(), 1);
    let dab = word(&a, &["delta", "alpha", "beta"]);
    assert!(Subspace::span(a.field, a.dim, &l23).contains(&dab));

    let ap = algebra_from(EX56_APRIME).unwrap();
    let lp = longest_elements(&ap, 0, 0).unwrap();
    assert_eq!(lp.len(), 1);
    let abc = word(&ap, &["alpha'", "beta'", "gamma'"]);
    assert!(Subspace::span(ap.field, ap.dim, &lp).contains(&abc));

    let t = algebra_from(TILT3).unwrap();
    let lt = longest_elements(&t, 0, 0).unwrap();
    assert_eq!(lt.len(), 1);
    let x = word(&t, &["x"]);
    assert!(Subspace::span(t.field, t.dim, &lt).contains(&x));
}

/// The two quantified conditions from the socle characterization of
/// nu(Ae_i) = Ae_j: solvability of y·x = u over the corner windows.
fn condition_i_holds(a: &Arc<FDAlgebra>, i: usize, x: &AlgElem, u: &AlgElem) -> bool {
    // y ranges over e_i A.
    let mut vecs = Vec::new();
    let n = a.num_projectives().unwrap();
    for j in 0..n {
        vecs.extend(a.block(i, j).unwrap().basis.iter().cloned());
    }
    solvable_product(a, &vecs, x, u, true)
}

fn condition_ii_holds(a: &Arc<FDAlgebra>, j: usize, y: &AlgElem, u: &AlgElem) -> bool {
    // x ranges over A e_j.
    let mut vecs = Vec::new();
    let n = a.num_projectives().unwrap();
    for i in 0..n {
        vecs.extend(a.block(i, j).unwrap().basis.iter().cloned());
    }
    solvable_product(a, &vecs, y, u, false)
}

fn solvable_product(
    a: &Arc<FDAlgebra>,
    range: &[AlgElem],
    fixed: &AlgElem,
    u: &AlgElem,
    fixed_on_right: bool,
) -> bool {
    let field = a.field;
    let mut cols = Matrix::zero(field, a.dim, range.len());
    for (c, b) in range.iter().enumerate() {
        let prod = if fixed_on_right { a.mul(b, fixed) } else { a.mul(fixed, b) };
        for (r, v) in prod.into_iter().enumerate() {
            if !v.is_zero() {
                cols.set(r, c, v);
            }
        }
    }
    cols.solve(u).is_some()
}

#[test]
fn socle_conditions_track_nakayama_pairs() {
    // Positive pair: the cyclic partner fixes its first projective; the
    // long cycle is the distinguished socle element.
    let ap = algebra_from(EX56_APRIME).unwrap();
    let u = word(&ap, &["alpha'", "beta'", "gamma'"]);
    let mut rng = ChaCha8Rng::seed_from_u64(0x51DE_5EED);
    // Basis of A'e_1 for sampling the quantifier over x.
    let mut pe1 = Vec::new();
    for i in 0..3 {
        pe1.extend(ap.block(i, 0).unwrap().basis.iter().cloned());
    }
    let mut e1p = Vec::new();
    for j in 0..3 {
        e1p.extend(ap.block(0, j).unwrap().basis.iter().cloned());
    }
    let mut checked = 0;
    while checked < 100 {
        let x: AlgElem = {
            let mut acc = ap.zero_elem();
            for b in &pe1 {
                let c = ap.field.from_i64(rng.gen_range(-3i64..=3));
                for (r, v) in b.iter().enumerate() {
                    acc[r] = acc[r].add(&c.mul(v));
                }
            }
            acc
        };
        if ap.is_zero_elem(&x) {
            continue;
        }
        assert!(condition_i_holds(&ap, 0, &x, &u), "condition (i) sample {checked}");
        let y: AlgElem = {
            let mut acc = ap.zero_elem();
            for b in &e1p {
                let c = ap.field.from_i64(rng.gen_range(-3i64..=3));
                for (r, v) in b.iter().enumerate() {
                    acc[r] = acc[r].add(&c.mul(v));
                }
            }
            acc
        };
        if ap.is_zero_elem(&y) {
            continue;
        }
        assert!(condition_ii_holds(&ap, 0, &y, &u), "condition (ii) sample {checked}");
        checked += 1;
    }

    // Negative control: in the zigzag algebra the socle element of Ae_1
    // fails condition (ii) on the witness y = alpha beta.
    let a = algebra_from(EX56_A).unwrap();
    let u = word(&a, &["alpha", "delta"]);
    let y = word(&a, &["alpha", "beta"]);
    assert!(!a.is_zero_elem(&y));
    assert!(!condition_ii_holds(&a, 0, &y, &u));
}

#[test]
fn stable_outputs_are_deterministic() {
    let a = algebra_from(TILT3).unwrap();
    let first = nu_stably_projectives(&a).unwrap();
    let second = nu_stably_projectives(&a).unwrap();
    assert_eq!(first.0, second.0);
    assert_eq!(first.1, second.1);
}
