use nalgebra::{DMatrix, DVector};

use crate::error::SolverError;
use crate::model::StateSpaceModel;

/// Stationary linear rule `u = -gain * s` on the predetermined states.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRule {
    pub gain: DMatrix<f64>,
}

impl PolicyRule {
    /// Every instrument held at baseline.
    pub fn passive(model: &StateSpaceModel) -> Self {
        Self { gain: DMatrix::zeros(model.n_inst(), model.n_pre) }
    }

    pub fn check(&self, model: &StateSpaceModel) -> Result<(), SolverError> {
        if self.gain.shape() != (model.n_inst(), model.n_pre) {
            return Err(SolverError::DimensionMismatch(format!(
                "rule is {:?}, model needs {:?}",
                self.gain.shape(),
                (model.n_inst(), model.n_pre)
            )));
        }
        Ok(())
    }

    /// Transition matrix with the rule substituted.
    pub fn closed_loop(&self, model: &StateSpaceModel) -> Result<DMatrix<f64>, SolverError> {
        self.check(model)?;
        let mut full = DMatrix::zeros(model.n_inst(), model.n_state());
        full.columns_mut(0, model.n_pre).copy_from(&self.gain);
        Ok(&model.transition - &model.input * full)
    }

    pub fn apply(&self, s: &DVector<f64>) -> DVector<f64> {
        -(&self.gain * s)
    }
}

/// Anticipated instrument moves on top of the rule, constant from
/// `values.len()` onwards.
#[derive(Debug, Clone, PartialEq)]
pub struct AnticipatedPath {
    pub values: Vec<DVector<f64>>,
    pub settled: DVector<f64>,
}

impl AnticipatedPath {
    pub fn zero(n_inst: usize) -> Self {
        Self { values: Vec::new(), settled: DVector::zeros(n_inst) }
    }

    /// A move of `size` in instrument `k` from date `start` onwards.
    pub fn permanent(n_inst: usize, k: usize, size: f64, start: usize) -> Self {
        let mut settled = DVector::zeros(n_inst);
        settled[k] = size;
        Self { values: vec![DVector::zeros(n_inst); start], settled }
    }

    /// A move of `size` in instrument `k` at the single date `date`.
    pub fn impulse(n_inst: usize, k: usize, size: f64, date: usize) -> Self {
        let mut values = vec![DVector::zeros(n_inst); date + 1];
        values[date][k] = size;
        Self { values, settled: DVector::zeros(n_inst) }
    }

    pub fn settle_date(&self) -> usize {
        self.values.len()
    }

    pub fn at(&self, t: usize) -> &DVector<f64> {
        self.values.get(t).unwrap_or(&self.settled)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.values.len().max(other.values.len());
        Self {
            values: (0..n).map(|t| self.at(t) + other.at(t)).collect(),
            settled: &self.settled + &other.settled,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * k).collect(), settled: &self.settled * k }
    }
}
