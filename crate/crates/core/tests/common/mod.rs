#![allow(dead_code)]

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twosystem_core::{HamiltonianModel, Mat, MonomialTerm, Vector};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut StdRng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_symmetric(rng: &mut StdRng, d: usize) -> Mat {
    let a = Mat::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

pub fn random_spd(rng: &mut StdRng, d: usize) -> Mat {
    let a = Mat::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + Mat::identity(d, d) * 0.5
}

/// Random polynomial Hamiltonian of degree at most `degree` on ℝ²ⁿ.
pub fn random_polynomial_model(rng: &mut StdRng, n: usize, degree: u32, terms: usize) -> HamiltonianModel {
    let d = 2 * n;
    let terms = (0..terms)
        .map(|_| {
            let mut e = vec![0u32; d];
            let total = rng.random_range(0..=degree);
            for _ in 0..total {
                e[rng.random_range(0..d)] += 1;
            }
            MonomialTerm::new(rng.random_range(-1.0..1.0), e)
        })
        .collect();
    HamiltonianModel::from_terms(n, terms).unwrap()
}

pub fn vec_strategy(len: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, len).prop_map(Vector::from_vec)
}

pub fn sym_strategy(d: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-1.0f64..1.0, d * d).prop_map(move |v| {
        let a = Mat::from_vec(d, d, v);
        (&a + a.transpose()) * 0.5
    })
}

/// Largest entry-wise difference relative to `max(1, max |b|)`.
pub fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let sc = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / sc
}
