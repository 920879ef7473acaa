mod common;

use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;
use twosystem_core::poisson::{bracket_poly, casimir_kernel_check, omega_matrix, MomentChart, MomentCoordinates};
use twosystem_core::{MonomialTerm, Polynomial, Vector};

fn random_poly(r: &mut StdRng, dim: usize, terms: usize) -> Polynomial {
    let terms = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..r.random_range(1..=3) {
                e[r.random_range(0..dim)] += 1;
            }
            MonomialTerm::new(r.random_range(-1.0..1.0), e)
        })
        .collect();
    Polynomial::new(dim, terms).unwrap()
}

fn point(r: &mut StdRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| r.random_range(-1.0..1.0)).collect()
}

#[test]
fn jacobi_and_leibniz_hold_symbolically() {
    let mut r = rng(21);
    for n in 1..=2 {
        let chart = MomentChart::new(n);
        let dim = chart.total_dim();
        for _ in 0..10 {
            let (u, v, w) = (random_poly(&mut r, dim, 4), random_poly(&mut r, dim, 4), random_poly(&mut r, dim, 4));
            let jac = &(&bracket_poly(&chart, &u, &bracket_poly(&chart, &v, &w))
                + &bracket_poly(&chart, &v, &bracket_poly(&chart, &w, &u)))
                + &bracket_poly(&chart, &w, &bracket_poly(&chart, &u, &v));
            let leib = &bracket_poly(&chart, &(&u * &v), &w)
                - &(&(&u * &bracket_poly(&chart, &v, &w)) + &(&bracket_poly(&chart, &u, &w) * &v));
            let anti = &bracket_poly(&chart, &u, &v) + &bracket_poly(&chart, &v, &u);
            for _ in 0..5 {
                let z = point(&mut r, dim);
                let sc = bracket_poly(&chart, &u, &v).eval(&z).abs().max(1.0);
                assert!(jac.eval(&z).abs() <= 1e-10 * sc, "Jacobi residual {}", jac.eval(&z));
                assert!(leib.eval(&z).abs() <= 1e-10 * sc, "Leibniz residual {}", leib.eval(&z));
                assert!(anti.eval(&z).abs() <= 1e-14 * sc);
            }
        }
    }
}

fn generic(r: &mut StdRng, n: usize) -> (Vector, MomentCoordinates) {
    let x = random_vector(r, 2 * n);
    let m = MomentCoordinates::from_matrix(&random_symmetric(r, 2 * n)).unwrap();
    (x, m)
}

#[test]
fn corank_equals_n_at_generic_points() {
    let mut r = rng(8);
    for n in 1..=3 {
        for _ in 0..30 {
            let (x, m) = generic(&mut r, n);
            assert_eq!(omega_matrix(&x, &m).unwrap().corank().unwrap(), n);
        }
    }
}

proptest! {
    #[test]
    fn omega_is_antisymmetric(seed in 0u64..10_000, n in 1usize..=3) {
        let (x, m) = generic(&mut rng(seed), n);
        let om = omega_matrix(&x, &m).unwrap();
        prop_assert_eq!(om.0.transpose(), -&om.0);
    }

    #[test]
    fn casimirs_lie_in_the_kernel(seed in 0u64..10_000, n in 1usize..=3) {
        let (x, m) = generic(&mut rng(seed), n);
        let sc = m.0.iter().fold(1.0f64, |a, v| a.max(v.abs())).powi(2 * n as i32);
        prop_assert!(casimir_kernel_check(&x, &m).unwrap() <= 1e-10 * sc);
    }
}
