//! Adam minimization of the potential resemblance loss over prototype
//! positions.

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::clustering::AnchorSet;
use crate::data::ClassTag;
use crate::error::{Error, Result};
use crate::potential::{normalized_potential, Gamma, ResemblanceObjective};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Adam moment estimates for one parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Array2<f64>,
    pub second_moment: Array2<f64>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Zeroed moments with the default hyperparameters.
    pub fn new(shape: (usize, usize)) -> Self {
        Self {
            first_moment: Array2::zeros(shape),
            second_moment: Array2::zeros(shape),
            step_count: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut Array2<f64>, grad: ArrayView2<f64>, lr: f64) -> Result<()> {
        if params.dim() != grad.dim() || params.dim() != self.first_moment.dim() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                found: grad.len(),
            });
        }
        if !(lr > 0.0) {
            return Err(Error::InvalidParameter(format!("learning rate must be positive, got {lr}")));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient);
        }
        self.step_count += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let t = self.step_count as i32;
        let bias1 = 1.0 - b1.powi(t);
        let bias2 = 1.0 - b2.powi(t);
        Zip::from(params)
            .and(&mut self.first_moment)
            .and(&mut self.second_moment)
            .and(grad)
            .for_each(|p, m, v, &g| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        Ok(())
    }
}

/// Functional form of [`AdamState::step`].
pub fn adam_step(
    mut state: AdamState,
    mut params: Array2<f64>,
    grad: ArrayView2<f64>,
    lr: f64,
) -> Result<(AdamState, Array2<f64>)> {
    state.step(&mut params, grad, lr)?;
    Ok((state, params))
}

/// Prototype positions being optimized, and the frozen positions they were
/// sampled at.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    pub current: Array2<f64>,
    start: Array2<f64>,
    pub class_tag: ClassTag,
}

impl PrototypeSet {
    pub fn new(current: Array2<f64>, start: Array2<f64>, class_tag: ClassTag) -> Result<Self> {
        if current.dim() != start.dim() {
            return Err(Error::DimensionMismatch {
                expected: start.len(),
                found: current.len(),
            });
        }
        Ok(Self {
            current,
            start,
            class_tag,
        })
    }

    pub fn start(&self) -> &Array2<f64> {
        &self.start
    }

    pub fn len(&self) -> usize {
        self.current.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.current.nrows() == 0
    }

    /// Mean Euclidean distance between current and starting positions.
    pub fn mean_displacement(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .current
            .rows()
            .into_iter()
            .zip(self.start.rows())
            .map(|(p, p0)| crate::neighbors::squared_distance(p, p0).sqrt())
            .sum();
        total / self.len() as f64
    }
}

/// Settings shared by every optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeParams {
    pub gamma: Gamma,
    pub lambda: f64,
    pub iterations: usize,
    pub lr: f64,
}

/// Runs exactly `params.iterations` full-batch Adam steps on the prototypes.
pub fn optimize_prototypes(
    data: ArrayView2<f64>,
    anchors: &AnchorSet,
    protos: PrototypeSet,
    params: OptimizeParams,
) -> Result<PrototypeSet> {
    optimize_prototypes_traced(data, anchors, protos, params, None)
}

/// As [`optimize_prototypes`], additionally pushing the loss before each step
/// and after the last one into `trace` (so `iterations + 1` values).
pub fn optimize_prototypes_traced(
    data: ArrayView2<f64>,
    anchors: &AnchorSet,
    mut protos: PrototypeSet,
    params: OptimizeParams,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<PrototypeSet> {
    if protos.is_empty() || (params.iterations == 0 && trace.is_none()) {
        return Ok(protos);
    }
    if params.lambda < 0.0 || !params.lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be non-negative, got {}",
            params.lambda
        )));
    }
    let target = normalized_potential(data, anchors, params.gamma)?;
    let objective = ResemblanceObjective::new(target, anchors, params.gamma, params.lambda);
    let mut adam = AdamState::new(protos.current.dim());
    for iteration in 0..params.iterations {
        let (loss, grad) = objective
            .loss_and_gradient(protos.current.view(), protos.start.view())
            .map_err(|e| e.at_iteration(iteration))?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(loss);
        }
        adam.step(&mut protos.current, grad.view(), params.lr)
            .map_err(|e| e.at_iteration(iteration))?;
    }
    if let Some(t) = trace {
        let loss = objective
            .loss(protos.current.view(), protos.start.view())
            .map_err(|e| e.at_iteration(params.iterations))?;
        t.push(loss);
    }
    Ok(protos)
}
