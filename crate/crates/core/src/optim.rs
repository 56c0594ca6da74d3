//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameworks::ParameterVector;

pub const DEFAULT_LEARNING_RATE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: DEFAULT_LEARNING_RATE,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidHyperparameter(what.to_string()));
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad(&format!("lr = {} must be positive", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return bad(&format!("beta1 = {} must lie in [0, 1)", self.beta1));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return bad(&format!("beta2 = {} must lie in [0, 1)", self.beta2));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(&format!("epsilon = {} must be positive", self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl AdamState {
    pub fn new(dim: usize, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        if dim == 0 {
            return Err(Error::InvalidHyperparameter("dimension must be at least 1".into()));
        }
        Ok(Self {
            config,
            step_count: 0,
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.first_moment.len()
    }

    /// One update; neither `self` nor `params` is modified.
    pub fn step(&self, params: &ParameterVector, grad: &[f64]) -> Result<(AdamState, ParameterVector)> {
        let dim = self.dim();
        if params.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: params.len(),
            });
        }
        if grad.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: grad.len(),
            });
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count + 1;
        let bias1 = 1.0 - beta1.powi(t as i32);
        let bias2 = 1.0 - beta2.powi(t as i32);
        let mut next = self.clone();
        next.step_count = t;
        let mut values = params.to_vec();
        for i in 0..dim {
            let m = beta1 * self.first_moment[i] + (1.0 - beta1) * grad[i];
            let v = beta2 * self.second_moment[i] + (1.0 - beta2) * grad[i] * grad[i];
            next.first_moment[i] = m;
            next.second_moment[i] = v;
            values[i] -= lr * (m / bias1) / ((v / bias2).sqrt() + epsilon);
        }
        Ok((next, ParameterVector::new(values)?))
    }
}

pub fn adam_new(dim: usize, config: AdamConfig) -> Result<AdamState> {
    AdamState::new(dim, config)
}

pub fn adam_step(state: &AdamState, params: &ParameterVector, grad: &[f64]) -> Result<(AdamState, ParameterVector)> {
    state.step(params, grad)
}
