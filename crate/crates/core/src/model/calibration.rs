use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Structural coefficients shared by both countries.
///
/// All stocks are shares of reference GDP and all rates are per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    /// Marginal propensity to spend out of disposable income.
    pub c: f64,
    /// Direct semi-elasticity of private demand to the real rate.
    pub sigma: f64,
    /// Slope of desired wealth in the real rate.
    pub a: f64,
    /// Autonomous desired wealth.
    pub w0: f64,
    /// Speed at which spending closes the wealth gap.
    pub kappa: f64,
    /// Openness share. Housed for configuration; the trade block runs on `nu` and `m`.
    pub alpha_open: f64,
    pub nu: f64,
    pub m: f64,
    pub lambda_p: f64,
    pub theta_idx: f64,
    pub phi_risk: f64,
    pub beta_tax: f64,
    pub b_bar: f64,
    /// Baseline net foreign assets. `None` means the value that clears the
    /// wealth market at a zero real rate, `w0 - b_bar`.
    pub f_bar: Option<f64>,
    pub discount: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            c: 0.6,
            sigma: 1.0,
            a: 5.0,
            w0: 1.5,
            kappa: 0.2,
            alpha_open: 0.25,
            nu: 0.5,
            m: 0.25,
            lambda_p: 0.3,
            theta_idx: 1.0,
            phi_risk: 0.1,
            beta_tax: 0.1,
            b_bar: 0.30,
            f_bar: None,
            discount: 0.96,
        }
    }
}

/// Baseline real rate around which the model is linearised.
pub const BASELINE_REAL_RATE: f64 = 0.0;

impl Calibration {
    pub fn baseline_nfa(&self) -> f64 {
        self.f_bar
            .unwrap_or(self.w0 + self.a * BASELINE_REAL_RATE - self.b_bar)
    }

    /// Checks every bound; the error names the offending field.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("c", self.c),
            ("sigma", self.sigma),
            ("a", self.a),
            ("w0", self.w0),
            ("kappa", self.kappa),
            ("alpha_open", self.alpha_open),
            ("nu", self.nu),
            ("m", self.m),
            ("lambda_p", self.lambda_p),
            ("theta_idx", self.theta_idx),
            ("phi_risk", self.phi_risk),
            ("beta_tax", self.beta_tax),
            ("b_bar", self.b_bar),
            ("discount", self.discount),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::InvalidCalibration(format!("{name} must be finite")));
            }
        }
        if let Some(f) = self.f_bar {
            if !f.is_finite() {
                return Err(ModelError::InvalidCalibration("f_bar must be finite".into()));
            }
        }
        let bad = |msg: &str| Err(ModelError::InvalidCalibration(msg.to_string()));
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad("c violates 0 < c < 1");
        }
        if self.sigma <= 0.0 {
            return bad("sigma violates sigma > 0");
        }
        if self.a <= 0.0 {
            return bad("a violates a > 0");
        }
        if self.kappa <= 0.0 {
            return bad("kappa violates kappa > 0");
        }
        if self.lambda_p <= 0.0 {
            return bad("lambda_p violates lambda_p > 0");
        }
        if !(0.0..=1.0).contains(&self.theta_idx) {
            return bad("theta_idx violates 0 <= theta_idx <= 1");
        }
        if self.phi_risk < 0.0 {
            return bad("phi_risk violates phi_risk >= 0");
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount violates 0 < discount < 1");
        }
        if self.nu < 0.0 || self.m < 0.0 || self.alpha_open < 0.0 {
            return bad("nu, m and alpha_open must be non-negative");
        }
        if self.beta_tax <= BASELINE_REAL_RATE {
            return bad("beta_tax must exceed the baseline real rate");
        }
        Ok(())
    }
}
