//! Gaussian RBF class potential, its normalized anchor profile, the potential
//! resemblance loss and the analytic gradient of that loss.
//!
//! For a point set `X` the potential at `x` is `sum_i exp(-(|X_i - x| / gamma)^2)`.
//! The normalized profile evaluates the potential at each of the `k` anchors
//! and divides by the total. The loss compares the profile of the original
//! data with that of the prototypes (plain sum of squared differences over
//! anchors) and adds `lambda * sum_j exp(-(|P_j - P0_j| / gamma)^2)`, which
//! rewards prototypes for moving away from where they were sampled.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::clustering::AnchorSet;
use crate::error::{Error, Result};
use crate::neighbors::squared_distance;

/// Smallest admissible sum of anchor potentials.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-30;

/// RBF spread, in standardized feature units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "gamma must be positive and finite, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `exp(-d^2 / gamma^2)` for a squared distance `d^2`.
    #[inline]
    fn rbf(self, sq_dist: f64) -> f64 {
        (-sq_dist / (self.0 * self.0)).exp()
    }
}

impl TryFrom<f64> for Gamma {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Gamma::new(v)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

/// Normalized potentials at the anchors; non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub values: Array1<f64>,
}

impl PotentialProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Potential of the point set `points` at `query`.
pub fn potential(points: ArrayView2<f64>, query: ArrayView1<f64>, gamma: Gamma) -> Result<f64> {
    if points.nrows() == 0 {
        return Err(Error::InvalidParameter("potential of an empty point set".into()));
    }
    check_dims(points.ncols(), query.len())?;
    Ok(points
        .rows()
        .into_iter()
        .map(|row| gamma.rbf(squared_distance(row, query)))
        .sum())
}

/// Unnormalized potentials of `points` at every anchor.
fn anchor_potentials(points: ArrayView2<f64>, anchors: ArrayView2<f64>, gamma: Gamma) -> Array1<f64> {
    anchors
        .rows()
        .into_iter()
        .map(|a| {
            points
                .rows()
                .into_iter()
                .map(|p| gamma.rbf(squared_distance(p, a)))
                .sum()
        })
        .collect()
}

/// Normalized potential profile of `points` over the anchor set.
pub fn normalized_potential(
    points: ArrayView2<f64>,
    anchors: &AnchorSet,
    gamma: Gamma,
) -> Result<PotentialProfile> {
    let a = anchors.points.view();
    if points.nrows() == 0 {
        return Err(Error::InvalidParameter("profile of an empty point set".into()));
    }
    check_dims(a.ncols(), points.ncols())?;
    let mut phi = anchor_potentials(points, a, gamma);
    let total = phi.sum();
    if !(total >= DEGENERATE_DENOMINATOR) {
        return Err(Error::DegeneratePotential { denominator: total });
    }
    phi /= total;
    Ok(PotentialProfile { values: phi })
}

fn check_loss_inputs(
    data: ArrayView2<f64>,
    anchors: &AnchorSet,
    protos: ArrayView2<f64>,
    start: ArrayView2<f64>,
) -> Result<()> {
    let d = anchors.points.ncols();
    check_dims(d, data.ncols())?;
    check_dims(d, protos.ncols())?;
    check_dims(d, start.ncols())?;
    check_dims(protos.nrows(), start.nrows())?;
    Ok(())
}

/// Potential resemblance loss of prototypes `protos` (sampled at `start`)
/// against the original `data`.
pub fn resemblance_loss(
    data: ArrayView2<f64>,
    anchors: &AnchorSet,
    protos: ArrayView2<f64>,
    start: ArrayView2<f64>,
    gamma: Gamma,
    lambda: f64,
) -> Result<f64> {
    check_loss_inputs(data, anchors, protos, start)?;
    let target = normalized_potential(data, anchors, gamma)?;
    ResemblanceObjective::new(target, anchors, gamma, lambda).loss(protos, start)
}

/// Analytic gradient of [`resemblance_loss`] with respect to `protos`.
pub fn loss_gradient(
    data: ArrayView2<f64>,
    anchors: &AnchorSet,
    protos: ArrayView2<f64>,
    start: ArrayView2<f64>,
    gamma: Gamma,
    lambda: f64,
) -> Result<Array2<f64>> {
    check_loss_inputs(data, anchors, protos, start)?;
    let target = normalized_potential(data, anchors, gamma)?;
    ResemblanceObjective::new(target, anchors, gamma, lambda)
        .loss_and_gradient(protos, start)
        .map(|(_, g)| g)
}

/// The loss with the data profile precomputed, for repeated evaluation during
/// optimization.
#[derive(Debug, Clone)]
pub struct ResemblanceObjective<'a> {
    target: PotentialProfile,
    anchors: &'a AnchorSet,
    gamma: Gamma,
    lambda: f64,
}

impl<'a> ResemblanceObjective<'a> {
    pub fn new(target: PotentialProfile, anchors: &'a AnchorSet, gamma: Gamma, lambda: f64) -> Self {
        Self {
            target,
            anchors,
            gamma,
            lambda,
        }
    }

    pub fn target(&self) -> &PotentialProfile {
        &self.target
    }

    fn profile_term(&self, protos: ArrayView2<f64>) -> Result<f64> {
        if protos.nrows() == 0 {
            return Ok(0.0);
        }
        let profile = normalized_potential(protos, self.anchors, self.gamma)?;
        Ok(Zip::from(&self.target.values)
            .and(&profile.values)
            .fold(0.0, |acc, t, p| acc + (t - p) * (t - p)))
    }

    fn regularization_term(&self, protos: ArrayView2<f64>, start: ArrayView2<f64>) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let sum: f64 = protos
            .rows()
            .into_iter()
            .zip(start.rows())
            .map(|(p, p0)| self.gamma.rbf(squared_distance(p, p0)))
            .sum();
        self.lambda * sum
    }

    pub fn loss(&self, protos: ArrayView2<f64>, start: ArrayView2<f64>) -> Result<f64> {
        Ok(self.profile_term(protos)? + self.regularization_term(protos, start))
    }

    /// Loss and its gradient in one pass over the prototype/anchor pairs.
    ///
    /// The profile term couples every prototype through the normalization
    /// denominator `S = sum_l phi_l`: with `g_i = -2 (t_i - psi_i)`,
    /// `dL/dphi_l = (g_l - sum_i g_i psi_i) / S`.
    pub fn loss_and_gradient(
        &self,
        protos: ArrayView2<f64>,
        start: ArrayView2<f64>,
    ) -> Result<(f64, Array2<f64>)> {
        let mut grad = Array2::zeros(protos.raw_dim());
        if protos.nrows() == 0 {
            return Ok((0.0, grad));
        }
        let anchors = self.anchors.points.view();
        let inv_g2 = 1.0 / (self.gamma.value() * self.gamma.value());

        // weights[j, l] = exp(-|P_j - A_l|^2 / gamma^2)
        let mut weights = Array2::zeros((protos.nrows(), anchors.nrows()));
        Zip::from(weights.rows_mut())
            .and(protos.rows())
            .for_each(|mut w, p| {
                for (l, a) in anchors.rows().into_iter().enumerate() {
                    w[l] = self.gamma.rbf(squared_distance(p, a));
                }
            });
        let phi = weights.sum_axis(ndarray::Axis(0));
        let total = phi.sum();
        if !(total >= DEGENERATE_DENOMINATOR) {
            return Err(Error::DegeneratePotential { denominator: total });
        }
        let psi = &phi / total;
        let diff = &self.target.values - &psi;
        let mut loss = diff.dot(&diff);

        let g = diff.mapv(|d| -2.0 * d);
        let g_dot_psi = g.dot(&psi);
        let coeff = g.mapv(|gl| (gl - g_dot_psi) / total);

        Zip::from(grad.rows_mut())
            .and(protos.rows())
            .and(weights.rows())
            .for_each(|mut out, p, w| {
                for (l, a) in anchors.rows().into_iter().enumerate() {
                    let c = coeff[l] * w[l] * (-2.0 * inv_g2);
                    if c != 0.0 {
                        Zip::from(&mut out).and(&p).and(&a).for_each(|o, &pv, &av| {
                            *o += c * (pv - av);
                        });
                    }
                }
            });

        if self.lambda != 0.0 {
            let mut reg = 0.0;
            Zip::from(grad.rows_mut())
                .and(protos.rows())
                .and(start.rows())
                .for_each(|mut out, p, p0| {
                    let e = self.gamma.rbf(squared_distance(p, p0));
                    reg += e;
                    let c = self.lambda * e * (-2.0 * inv_g2);
                    Zip::from(&mut out).and(&p).and(&p0).for_each(|o, &pv, &sv| {
                        *o += c * (pv - sv);
                    });
                });
            loss += self.lambda * reg;
        }
        Ok((loss, grad))
    }
}
