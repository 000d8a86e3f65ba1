//! Randomized algebraic laws: statements that must hold for every member
//! of an input class, not just the worked examples. Case counts are tuned
//! so the whole file stays in the single-digit seconds.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use twirl_core::decompose::{group_average, isotypic_decomposition};
use twirl_core::group::FiniteGroup;
use twirl_core::invariants::{
    alpha_closed, beta_closed, full_report, gamma_closed, tau_closed, LogBase,
};
use twirl_core::jsonio;
use twirl_core::linalg::{self, CMatrix, CVector};
use twirl_core::phase::{Frame, OperatorFrame};
use twirl_core::rep::Representation;
use twirl_core::seeding::{child_rng, child_seed};

fn small_group(choice: usize) -> FiniteGroup {
    match choice % 8 {
        0 => FiniteGroup::cyclic(2).unwrap(),
        1 => FiniteGroup::cyclic(3).unwrap(),
        2 => FiniteGroup::cyclic(5).unwrap(),
        3 => FiniteGroup::cyclic(6).unwrap(),
        4 => FiniteGroup::dihedral(3).unwrap(),
        5 => FiniteGroup::dihedral(4).unwrap(),
        6 => FiniteGroup::symmetric(3).unwrap(),
        _ => FiniteGroup::direct_product(
            &FiniteGroup::cyclic(2).unwrap(),
            &FiniteGroup::cyclic(3).unwrap(),
        )
        .unwrap(),
    }
}

fn complex_matrix(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[i * d + j];
        Complex64::new(re, im)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms_and_class_partition(choice in 0..8usize, g in 0..6usize, h in 0..6usize) {
        let group = small_group(choice);
        let n = group.order();
        let (g, h) = (g % n, h % n);
        let e = group.identity();
        prop_assert_eq!(group.mul(e, g), g);
        prop_assert_eq!(group.mul(g, e), g);
        prop_assert_eq!(group.mul(g, group.inverse(g)), e);
        prop_assert_eq!(group.inverse(group.inverse(g)), g);
        // (gh)^{-1} = h^{-1} g^{-1}
        prop_assert_eq!(
            group.inverse(group.mul(g, h)),
            group.mul(group.inverse(h), group.inverse(g))
        );
        let classes = group.conjugacy_classes();
        let mut seen = vec![false; n];
        for class in &classes.classes {
            for &x in class {
                prop_assert!(!seen[x], "element in two classes");
                seen[x] = true;
            }
        }
        prop_assert!(seen.iter().all(|s| *s), "classes miss an element");
        // conjugation never leaves a class
        let of = classes.class_of(n);
        let conj = group.mul(group.mul(h, g), group.inverse(h));
        prop_assert_eq!(of[g], of[conj]);
    }

    #[test]
    fn seeding_is_deterministic_and_salt_sensitive(
        seed in any::<u64>(),
        a in "[a-z]{1,12}",
        b in "[a-z]{1,12}",
    ) {
        prop_assert_eq!(child_seed(seed, &a), child_seed(seed, &a));
        let mut r1 = child_rng(seed, &a);
        let mut r2 = child_rng(seed, &a);
        prop_assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
        prop_assume!(a != b);
        prop_assert_ne!(child_seed(seed, &a), child_seed(seed, &b));
    }

    #[test]
    fn canonical_json_roundtrips_matrices_exactly(
        d in 1..4usize,
        entries in prop::collection::vec((-1e6..1e6f64, -1e6..1e6f64), 16),
    ) {
        let m = complex_matrix(d, &entries);
        let text = jsonio::to_canonical_string(&jsonio::matrix_to_json(&m));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back = jsonio::matrix_from_json(&parsed).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn rank_one_measurements_are_phase_invariant(
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 12),
        xs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        let vectors: Vec<CVector> = entries
            .chunks(3)
            .map(|c| CVector::from_iterator(3, c.iter().map(|(re, im)| Complex64::new(*re, *im))))
            .collect();
        let frame = Frame::new(vectors).unwrap();
        let measurements = OperatorFrame::from_frame(&frame);
        let x = CVector::from_iterator(3, xs.iter().map(|(re, im)| Complex64::new(*re, *im)));
        let rotated = &x * Complex64::from_polar(1.0, theta);
        let mx = measurements.measure(&x);
        let my = measurements.measure(&rotated);
        for (p, q) in mx.iter().zip(&my) {
            prop_assert!((p - q).abs() <= 1e-10 * (1.0 + p.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn twirl_projects_onto_the_commutant(
        choice in 0..8usize,
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 144),
    ) {
        let rep = Representation::regular(Arc::new(small_group(choice))).unwrap();
        let d = rep.dim();
        let t = complex_matrix(d, &entries);
        let tol = 1e-9 * d as f64 * (1.0 + linalg::fro_norm(&t));
        let avg = group_average(&rep, &t);
        // idempotent
        prop_assert!(linalg::fro_norm(&(group_average(&rep, &avg) - &avg)) <= tol);
        // trace preserving
        prop_assert!((linalg::trace(&avg) - linalg::trace(&t)).norm() <= tol);
        // lands in the commutant
        for g in 0..rep.group().order() {
            let pg = rep.matrix(g);
            prop_assert!(linalg::fro_norm(&(pg * &avg - &avg * pg)) <= tol);
        }
    }

    #[test]
    fn closed_invariants_match_planned_direct_sums(
        mults in prop::collection::vec(0..3usize, 3),
        seed in 0..1000u64,
    ) {
        let mother = isotypic_decomposition(
            &Representation::regular(Arc::new(FiniteGroup::symmetric(3).unwrap())).unwrap(),
            0,
        )
        .unwrap();
        let mut parts = Vec::new();
        let mut planned = Vec::new();
        for (ty, m) in mother.types.iter().zip(&mults) {
            if *m > 0 {
                parts.push((ty, *m));
                planned.push((*m, ty.dim()));
            }
        }
        prop_assume!(!parts.is_empty());
        let rep = Representation::direct_sum(&parts).unwrap();
        let dec = isotypic_decomposition(&rep, seed).unwrap();

        let alpha: usize = planned.iter().map(|(m, _)| *m).sum();
        let beta: usize = planned.iter().map(|(m, _)| *m).max().unwrap();
        let gamma: usize = planned.iter().map(|(_, n)| *n).sum();
        let tau: usize = planned.iter().map(|(_, n)| *n).max().unwrap();
        prop_assert_eq!(alpha_closed(&dec), alpha);
        prop_assert_eq!(beta_closed(&dec), beta);
        prop_assert_eq!(gamma_closed(&dec), gamma);
        prop_assert_eq!(tau_closed(&dec), tau);
        prop_assert!(alpha >= beta && gamma >= tau);
        // single type exactly when the bounds coincide on both axes
        prop_assert_eq!(dec.d == 1, alpha == beta && parts.len() == 1);
        let capacity = twirl_core::invariants::zero_error_capacity(&dec, LogBase::Two);
        prop_assert!((capacity - (alpha as f64).log2()).abs() <= 1e-12);

        let report = full_report(&rep, seed).unwrap();
        prop_assert_eq!(report.alpha, alpha);
        prop_assert_eq!(report.beta, beta);
        prop_assert_eq!(report.gamma, gamma);
        prop_assert_eq!(report.tau, tau);
    }

    #[test]
    fn generic_spanning_sets_are_frames(
        extra in 0..3usize,
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 18),
    ) {
        let n = 3usize;
        let count = n + extra;
        let vectors: Vec<CVector> = (0..count)
            .map(|k| {
                CVector::from_iterator(
                    n,
                    entries[k * n..(k + 1) * n]
                        .iter()
                        .map(|(re, im)| Complex64::new(*re, *im)),
                )
            })
            .collect();
        let norm: f64 = vectors.iter().map(|v| v.norm()).sum();
        prop_assume!(norm > 1e-3);
        let frame = Frame::new(vectors).unwrap();
        let analysis = twirl_core::phase::frame_analysis(&frame).unwrap();
        prop_assert!(analysis.lower_bound <= analysis.upper_bound + 1e-12);
        if analysis.is_frame {
            let parseval = Frame::new(analysis.parseval_vectors.clone().unwrap()).unwrap();
            let re_analysis = twirl_core::phase::frame_analysis(&parseval).unwrap();
            prop_assert!(re_analysis.is_parseval);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn alpha_is_multiplicative_under_outer_tensor(a in 0..4usize, b in 0..4usize) {
        let ga = small_group(a); // choices 0..4 keep the product dim at most 36
        let gb = small_group(b);
        let ra = Representation::regular(Arc::new(ga)).unwrap();
        let rb = Representation::regular(Arc::new(gb)).unwrap();
        let da = isotypic_decomposition(&ra, 0).unwrap();
        let db = isotypic_decomposition(&rb, 0).unwrap();
        let product = Representation::outer_tensor(&ra, &rb).unwrap();
        let dp = isotypic_decomposition(&product, 0).unwrap();
        prop_assert_eq!(alpha_closed(&dp), alpha_closed(&da) * alpha_closed(&db));
        prop_assert_eq!(dp.d, da.d * db.d);
    }
}
