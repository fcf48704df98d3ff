#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use policy_game::model::{Calibration, StateSpaceModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draw around the defaults that respects every calibration bound.
pub fn random_calibration(rng: &mut ChaCha8Rng) -> Calibration {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let cal = Calibration {
        c: u(0.4, 0.8),
        sigma: u(0.5, 1.5),
        a: u(3.0, 8.0),
        w0: u(1.2, 1.8),
        kappa: u(0.1, 0.3),
        nu: u(0.3, 0.7),
        m: u(0.1, 0.35),
        lambda_p: u(0.15, 0.45),
        theta_idx: u(0.6, 1.0),
        phi_risk: u(0.05, 0.2),
        beta_tax: u(0.05, 0.2),
        b_bar: u(0.2, 0.6),
        discount: u(0.9, 0.99),
        ..Calibration::default()
    };
    cal.validate().expect("draw inside the bounds");
    cal
}

/// Stable-manifold map `x = N s` by backward iteration from `N = 0`.
///
/// Independent of any eigen-decomposition: iterating the forward-looking
/// rows backwards in time converges to the bounded solution whenever the
/// closed loop has exactly as many unstable roots as jump variables.
pub fn stable_manifold_by_iteration(a: &DMatrix<f64>, np: usize, nj: usize) -> DMatrix<f64> {
    let a11 = a.view((0, 0), (np, np)).into_owned();
    let a12 = a.view((0, np), (np, nj)).into_owned();
    let a21 = a.view((np, 0), (nj, np)).into_owned();
    let a22 = a.view((np, np), (nj, nj)).into_owned();
    let mut n = DMatrix::zeros(nj, np);
    for _ in 0..200_000 {
        let lhs = &a22 - &n * &a12;
        let rhs = &n * &a11 - &a21;
        let next = lhs.lu().solve(&rhs).expect("invertible forward block");
        let change = (&next - &n).amax();
        n = next;
        if change < 1e-15 {
            break;
        }
    }
    n
}

/// Relative agreement at twelve significant digits.
pub fn same_to_12(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 5e-12 * a.abs().max(b.abs())
}

pub fn example_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.toml")
}

pub fn max_gap(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

pub fn model_dims(m: &StateSpaceModel) -> (usize, usize) {
    (m.n_pre, m.n_jump)
}
