mod common;

use common::*;
use proptest::prelude::*;
use twosystem_core::dynamics::{
    hamiltonicity_defect, lax_matrix, multivector_rhs, two_system_rhs, vector_form_rhs,
};
use twosystem_core::linalg::{j_mul, standard_j};
use twosystem_core::poisson::bracket_rhs;
use twosystem_core::structure::{compose, decompose_signature, signature_of, ZERO_EIG_TOL};
use twosystem_core::{HamiltonianModel, Mat, MultiVectorState, TwoState, VectorFormState};

proptest! {
    #[test]
    fn compose_inverts_decompose(m in sym_strategy(4)) {
        let (ys, zs) = decompose_signature(&m).unwrap();
        let back = compose(4, &ys, &zs).unwrap();
        prop_assert!((&back - &m).amax() <= 1e-12 * m.norm().max(1.0));
        let sig = signature_of(&m, ZERO_EIG_TOL).unwrap();
        prop_assert_eq!((ys.len(), zs.len()), (sig.plus, sig.minus));
    }

    #[test]
    fn commutator_stays_in_sp(seed in 0u64..1000, x in vec_strategy(4), m in sym_strategy(4)) {
        let model = random_polynomial_model(&mut rng(seed), 2, 4, 10);
        let s = TwoState::new(x, m);
        let dm = two_system_rhs(&model, &s).unwrap().m;
        prop_assert!((&dm - dm.transpose()).amax() <= 1e-13 * dm.amax().max(1.0));
        let a = lax_matrix(&model, &s.x).unwrap();
        let j = standard_j(2);
        prop_assert!((a.transpose() * &j + &j * &a).amax() <= 1e-13 * a.amax().max(1.0));
    }

    #[test]
    fn bracket_form_equals_two_system(seed in 0u64..1000, x in vec_strategy(4), m in sym_strategy(4)) {
        let model = random_polynomial_model(&mut rng(seed), 2, 4, 10);
        let s = TwoState::new(x, m);
        let a = bracket_rhs(&model, &s).unwrap();
        let b = two_system_rhs(&model, &s).unwrap();
        prop_assert!(rel_dev(a.x.as_slice(), b.x.as_slice()) <= 1e-12);
        prop_assert!(rel_dev(a.m.as_slice(), b.m.as_slice()) <= 1e-12);
    }

    #[test]
    fn vector_form_projects_onto_rank_one(seed in 0u64..1000, x in vec_strategy(4), y in vec_strategy(4)) {
        let model = random_polynomial_model(&mut rng(seed), 2, 4, 10);
        let v = vector_form_rhs(&model, &VectorFormState { x: x.clone(), y: y.clone() }).unwrap();
        let t = two_system_rhs(&model, &TwoState::new(x, &y * y.transpose())).unwrap();
        let dm = &v.y * y.transpose() + &y * v.y.transpose();
        prop_assert!(rel_dev(v.x.as_slice(), t.x.as_slice()) <= 1e-12);
        prop_assert!(rel_dev(dm.as_slice(), t.m.as_slice()) <= 1e-12);
    }

    #[test]
    fn multivector_projects_onto_two_system(
        seed in 0u64..1000,
        x in vec_strategy(4),
        y1 in vec_strategy(4),
        y2 in vec_strategy(4),
        z in vec_strategy(4),
    ) {
        let model = random_polynomial_model(&mut rng(seed), 2, 4, 10);
        let s = MultiVectorState { x, ys: vec![y1, y2], zs: vec![z] };
        let d = multivector_rhs(&model, &s).unwrap();
        let mut dm = Mat::zeros(4, 4);
        for (v, dv) in s.ys.iter().zip(&d.ys) {
            dm += dv * v.transpose() + v * dv.transpose();
        }
        for (v, dv) in s.zs.iter().zip(&d.zs) {
            dm -= dv * v.transpose() + v * dv.transpose();
        }
        let t = two_system_rhs(&model, &TwoState::new(s.x.clone(), s.moment())).unwrap();
        prop_assert!(rel_dev(d.x.as_slice(), t.x.as_slice()) <= 1e-12);
        prop_assert!(rel_dev(dm.as_slice(), t.m.as_slice()) <= 1e-12);
    }

    #[test]
    fn antisymmetric_part_does_not_move_x(x in vec_strategy(2), ms in sym_strategy(2), w in -3.0f64..3.0) {
        let model = HamiltonianModel::quartic(0.1);
        let ma = Mat::from_row_slice(2, 2, &[0.0, w, -w, 0.0]);
        let a = two_system_rhs(&model, &TwoState::new(x.clone(), ms.clone())).unwrap();
        let b = two_system_rhs(&model, &TwoState::new(x, &ms + &ma)).unwrap();
        prop_assert_eq!(a.x, b.x);
        // for n = 1 the antisymmetric part is a multiple of J and commutes with A
        let phi_a = j_mul(&ma);
        prop_assert!((&b.m - &a.m).amax() <= 1e-14 * phi_a.amax().max(1.0));
    }
}

#[test]
fn defect_vanishes_only_for_quadratic() {
    let mut r = rng(3);
    for _ in 0..10 {
        let s = random_spd(&mut r, 4);
        let b = random_vector(&mut r, 4);
        let model = HamiltonianModel::quadratic(&s, &b, 0.3).unwrap();
        let st = VectorFormState { x: random_vector(&mut r, 4), y: random_vector(&mut r, 4) };
        assert!(hamiltonicity_defect(&model, &st).unwrap() <= 1e-6);
    }
    let q = HamiltonianModel::quartic(0.1);
    let st = VectorFormState { x: random_vector(&mut r, 2), y: random_vector(&mut r, 2) };
    assert!(hamiltonicity_defect(&q, &st).unwrap() > 1e-3);
}
