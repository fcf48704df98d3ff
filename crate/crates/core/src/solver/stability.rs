use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::rules::PolicyRule;
use super::schur::ComplexSchur;
use crate::error::SolverError;
use crate::model::StateSpaceModel;

pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Determinate,
    Explosive,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Moduli in decreasing order.
    pub eigenvalues: Vec<f64>,
    pub n_unstable: usize,
    pub n_jump: usize,
    pub classification: Classification,
}

impl StabilityReport {
    pub fn from_moduli(mut moduli: Vec<f64>, n_jump: usize, tol: f64) -> Self {
        moduli.sort_by(|a, b| b.total_cmp(a));
        let n_unstable = moduli.iter().filter(|m| **m > 1.0 + tol).count();
        let classification = match n_unstable.cmp(&n_jump) {
            std::cmp::Ordering::Equal => Classification::Determinate,
            std::cmp::Ordering::Greater => Classification::Explosive,
            std::cmp::Ordering::Less => Classification::Indeterminate,
        };
        Self { eigenvalues: moduli, n_unstable, n_jump, classification }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Classifies an arbitrary transition matrix with `n_jump` forward-looking rows.
pub fn classify_matrix(a: &DMatrix<f64>, n_jump: usize, tol: f64) -> Result<StabilityReport, SolverError> {
    let mut moduli = Vec::with_capacity(a.nrows());
    for block in triangular_blocks(a) {
        let mut sub = DMatrix::from_fn(block.len(), block.len(), |i, j| a[(block[i], block[j])]);
        // Radix-2 balancing is exact and undoes the units the states are
        // measured in, which otherwise decide which side of the unit
        // circle a structural unit root lands on.
        balance_parlett_reinsch(&mut sub);
        let schur = ComplexSchur::new(&sub)?;
        moduli.extend(schur.eigenvalues().iter().map(|l| l.norm()));
    }
    Ok(StabilityReport::from_moduli(moduli, n_jump, tol))
}

/// Splits off states that only feed themselves (sinks) and states driven
/// only by themselves (sources). The matrix is block triangular in that
/// ordering, so the spectrum is the union of the block spectra. Doing this
/// keeps structural unit roots, such as the price-level integrator, exact
/// instead of letting them perturb each other.
fn triangular_blocks(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut core: Vec<bool> = vec![true; n];
    let mut sinks = Vec::new();
    let mut sources = Vec::new();
    loop {
        let mut found = false;
        for k in 0..n {
            if !core[k] {
                continue;
            }
            let sink = (0..n).all(|j| j == k || !core[j] || a[(j, k)] == 0.0);
            let source = (0..n).all(|j| j == k || !core[j] || a[(k, j)] == 0.0);
            if sink || source {
                core[k] = false;
                if sink {
                    sinks.push(k);
                } else {
                    sources.push(k);
                }
                found = true;
            }
        }
        if !found {
            break;
        }
    }
    let rest: Vec<usize> = (0..n).filter(|&k| core[k]).collect();
    // Peeled states are single diagonal entries of a triangular arrangement.
    let mut blocks: Vec<Vec<usize>> = sinks.into_iter().chain(sources).map(|k| vec![k]).collect();
    if !rest.is_empty() {
        blocks.push(rest);
    }
    blocks
}

/// Spectrum of the transition map closed with `rules`.
pub fn eigen_classify(model: &StateSpaceModel, rules: &PolicyRule) -> Result<StabilityReport, SolverError> {
    let a = rules.closed_loop(model)?;
    classify_matrix(&a, model.n_jump, UNIT_CIRCLE_TOL)
}
