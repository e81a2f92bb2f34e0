//! Monte Carlo maximum likelihood, log-likelihood estimation and the fit record.

use intrafirm_core::Graph;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::model::ErgmModel;
use crate::mple::{design, mple, softplus};
use crate::sampler::{derive_seed, effective_sample_size, sample_networks, McmcParams, Sample, SamplerError};
use crate::terms::TermSpec;
use crate::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("collinear change statistics: {}", .0.join(", "))]
    Collinear(Vec<String>),
    #[error("pseudo-likelihood has no finite maximum (separation)")]
    Separation,
    #[error("observed graph has {edges} of {dyads} possible edges; the likelihood has no finite maximum")]
    EmptyOrComplete { edges: usize, dyads: usize },
    #[error("sampled statistics have a singular covariance at iteration {0}")]
    SingularCovariance(usize),
    #[error("no convergence after {iterations} iterations (largest standardized difference {max_std_diff:.3})")]
    NotConverged { iterations: usize, max_std_diff: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Converged once every |mean difference| / sd falls below this.
    pub tolerance: f64,
    /// Further updates taken after the criterion is first met.
    pub refine: usize,
    /// Largest Mahalanobis length of the predicted moment shift per update.
    pub step_cap: f64,
    /// Starting point; the pseudo-likelihood estimate when absent.
    pub init: Option<Vec<f64>>,
    /// Bridges for the stepping-stone log-likelihood.
    pub bridges: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 40,
            tolerance: 0.1,
            refine: 1,
            step_cap: 3.0,
            init: None,
            bridges: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikelihoodMethod {
    Exact,
    SteppingStone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub acceptance_rate: f64,
    pub proposals: u64,
    pub sample_size: usize,
    /// Per term, summed over chains.
    pub effective_sample_size: Vec<f64>,
    /// (observed - simulated mean) / sd at the estimate.
    pub standardized_difference: Vec<f64>,
    /// Largest |standardized difference| per iteration.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgmFit {
    pub labels: Vec<String>,
    pub terms: Vec<TermSpec>,
    pub theta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub p_values: Vec<f64>,
    pub observed: Vec<f64>,
    pub mple: Option<Vec<f64>>,
    pub log_likelihood: f64,
    pub likelihood_method: LikelihoodMethod,
    pub aic: f64,
    pub bic: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub iterations: usize,
    pub diagnostics: McmcDiagnostics,
    pub seed: u64,
}

/// `(AIC, BIC)` for `k` parameters on `n` nodes, with `n(n-1)/2` dyads as
/// the BIC sample size.
pub fn information_criteria(k: usize, log_likelihood: f64, n: usize) -> (f64, f64) {
    let k = k as f64;
    let dyads = (n * n.saturating_sub(1) / 2) as f64;
    (2.0 * k - 2.0 * log_likelihood, k * dyads.ln() - 2.0 * log_likelihood)
}

/// Two-sided normal p-value of `z`.
pub fn p_value(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

fn log_mean_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + (v.iter().map(|x| (x - max).exp()).sum::<f64>() / v.len() as f64).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact log-likelihood of a dyad-independent model.
pub fn exact_independent_log_likelihood(model: &ErgmModel, g: &Graph, theta: &[f64]) -> Result<f64, EstimationError> {
    let (x, y) = design(model, g)?;
    let eta = &x * DVector::from_column_slice(theta);
    Ok(eta.iter().zip(y.iter()).map(|(e, yy)| yy * e - softplus(*e)).sum())
}

/// `log k(theta)` by stepping from the uniform model `theta = 0`, where
/// `k(0) = 2^dyads`, through `bridges` equally spaced intermediate models.
pub fn stepping_stone_log_k(
    model: &ErgmModel,
    theta: &[f64],
    start: &Graph,
    params: &McmcParams,
    bridges: usize,
) -> Result<f64, EstimationError> {
    let bridges = bridges.max(1);
    let mut log_k = model.dyad_count() as f64 * std::f64::consts::LN_2;
    let step: Vec<f64> = theta.iter().map(|t| t / bridges as f64).collect();
    for b in 0..bridges {
        let at: Vec<f64> = theta.iter().map(|t| t * b as f64 / bridges as f64).collect();
        let p = McmcParams {
            seed: derive_seed(params.seed, &format!("bridge-{b}")),
            ..*params
        };
        let sample = sample_networks(model, &at, start, &p, false)?;
        log_k += log_mean_exp(sample.stats.iter().map(|z| dot(&step, z)));
    }
    Ok(log_k)
}

struct Moments {
    diff: DVector<f64>,
    std_diff: Vec<f64>,
    cov: DMatrix<f64>,
}

fn moments(sample: &Sample, z_obs: &[f64]) -> Moments {
    let p = z_obs.len();
    let mean = sample.mean();
    let cov = DMatrix::from_row_slice(p, p, &sample.covariance());
    let diff = DVector::from_iterator(p, z_obs.iter().zip(&mean).map(|(o, m)| o - m));
    let std_diff = (0..p)
        .map(|k| {
            let sd = cov[(k, k)].sqrt();
            match (diff[k] == 0.0, sd > 0.0) {
                (true, _) => 0.0,
                (false, true) => diff[k] / sd,
                (false, false) => diff[k].signum() * f64::INFINITY,
            }
        })
        .collect();
    Moments { diff, std_diff, cov }
}

/// Cholesky factor of the correlation matrix. Statistics on very different
/// scales would otherwise defeat the factorisation of the covariance.
struct ScaledCholesky {
    chol: Cholesky<f64, Dyn>,
    scale: DVector<f64>,
}

impl ScaledCholesky {
    fn new(cov: &DMatrix<f64>) -> Option<Self> {
        let p = cov.nrows();
        let scale = DVector::from_iterator(p, (0..p).map(|k| cov[(k, k)].sqrt()));
        if scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return None;
        }
        let corr = DMatrix::from_fn(p, p, |i, j| cov[(i, j)] / (scale[i] * scale[j]));
        corr.cholesky().map(|chol| Self { chol, scale })
    }

    /// `C^-1 b`
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol
            .solve(&b.component_div(&self.scale))
            .component_div(&self.scale)
    }

    fn inverse(&self) -> DMatrix<f64> {
        let inv = self.chol.inverse();
        DMatrix::from_fn(inv.nrows(), inv.ncols(), |i, j| {
            inv[(i, j)] / (self.scale[i] * self.scale[j])
        })
    }
}

/// Last accepted estimate, its Mahalanobis distance to the observed
/// statistics, and the update taken from it with that update's length.
struct Accepted {
    theta: Vec<f64>,
    distance: f64,
    length: f64,
    step: DVector<f64>,
}

/// Consecutive step halvings before an overshooting update is accepted or
/// its failure reported.
const MAX_HALVINGS: usize = 8;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Monte Carlo maximum likelihood by Newton updates
/// `theta <- theta + C^-1 (z_obs - mean)` from sampled moments at the
/// current estimate, inside a trust region on the update's Mahalanobis
/// length. Every chain starts at the observed graph.
pub fn mcmc_mle(
    model: &ErgmModel,
    g: &Graph,
    params: &McmcParams,
    opts: &MleOptions,
) -> Result<ErgmFit, EstimationError> {
    params.validate()?;
    model.check_graph(g)?;
    let (edges, dyads) = (g.edge_count(), model.dyad_count());
    if edges == 0 || edges == dyads {
        return Err(EstimationError::EmptyOrComplete { edges, dyads });
    }
    let z_obs = model.statistics(g)?;
    let (mple_theta, mut theta) = match &opts.init {
        Some(init) => {
            if init.len() != model.len() {
                return Err(ModelError::ThetaLength {
                    expected: model.len(),
                    got: init.len(),
                }
                .into());
            }
            (mple(model, g).ok().map(|f| f.theta), init.clone())
        }
        None => {
            let t = mple(model, g)?.theta;
            (Some(t.clone()), t)
        }
    };

    let mut trace = Vec::new();
    let mut hits = 0;
    // Trust region on the Mahalanobis length of each update: an update that
    // lands in a degenerate or much worse region is halved and the radius
    // shrinks to match; every accepted update lets it grow again.
    let mut radius = opts.step_cap;
    let mut accepted: Option<Accepted> = None;
    let mut halvings = 0;
    for iter in 0..opts.max_iterations {
        let p = McmcParams {
            seed: derive_seed(params.seed, &format!("iteration-{iter}")),
            ..*params
        };
        let assessed = sample_networks(model, &theta, g, &p, false)
            .map_err(EstimationError::from)
            .and_then(|sample| {
                let m = moments(&sample, &z_obs);
                let chol = ScaledCholesky::new(&m.cov).ok_or(EstimationError::SingularCovariance(iter))?;
                let step = chol.solve(&m.diff);
                let distance = m.diff.dot(&step).max(0.0).sqrt();
                Ok((m, step, distance))
            });
        trace.push(
            assessed
                .as_ref()
                .map_or(f64::INFINITY, |(m, _, _)| max_abs(&m.std_diff)),
        );
        let overshoot = match (&assessed, &accepted) {
            (Err(_), Some(_)) => true,
            (Ok((_, _, d)), Some(a)) => *d > 2.0 * a.distance + 1.0,
            (_, None) => false,
        };
        if overshoot && halvings < MAX_HALVINGS {
            halvings += 1;
            let a = accepted.as_mut().expect("overshoot needs a previous estimate");
            a.step *= 0.5;
            a.length *= 0.5;
            radius = a.length;
            theta = a.theta.iter().zip(a.step.iter()).map(|(b, s)| b + s).collect();
            continue;
        }
        let (m, mut step, distance) = assessed?;
        if halvings == 0 {
            radius = (radius * 1.5).min(opts.step_cap);
        }
        halvings = 0;
        if max_abs(&m.std_diff) < opts.tolerance {
            hits += 1;
        }
        if hits > opts.refine {
            for (t, s) in theta.iter_mut().zip(step.iter()) {
                *t += s;
            }
            return finish(
                model,
                g,
                params,
                opts,
                FinishState {
                    theta,
                    z_obs,
                    mple: mple_theta,
                    iterations: iter + 1,
                    trace,
                },
            );
        }
        if distance > radius {
            step *= radius / distance;
        }
        accepted = Some(Accepted {
            theta: theta.clone(),
            distance,
            length: distance.min(radius),
            step: step.clone(),
        });
        for (t, s) in theta.iter_mut().zip(step.iter()) {
            *t += s;
        }
    }
    Err(EstimationError::NotConverged {
        iterations: opts.max_iterations,
        max_std_diff: trace.last().copied().unwrap_or(f64::INFINITY),
    })
}

struct FinishState {
    theta: Vec<f64>,
    z_obs: Vec<f64>,
    mple: Option<Vec<f64>>,
    iterations: usize,
    trace: Vec<f64>,
}

fn finish(
    model: &ErgmModel,
    g: &Graph,
    params: &McmcParams,
    opts: &MleOptions,
    state: FinishState,
) -> Result<ErgmFit, EstimationError> {
    let FinishState {
        theta,
        z_obs,
        mple,
        iterations,
        trace,
    } = state;
    let p = McmcParams {
        seed: derive_seed(params.seed, "final"),
        ..*params
    };
    let sample = sample_networks(model, &theta, g, &p, false)?;
    let m = moments(&sample, &z_obs);
    let inv = ScaledCholesky::new(&m.cov)
        .ok_or(EstimationError::SingularCovariance(iterations))?
        .inverse();
    let k = model.len();
    let std_errors: Vec<f64> = (0..k).map(|i| inv[(i, i)].max(0.0).sqrt()).collect();
    let z_scores: Vec<f64> = theta.iter().zip(&std_errors).map(|(t, s)| t / s).collect();
    let p_values = z_scores.iter().map(|&z| p_value(z)).collect();
    let ess = (0..k)
        .map(|term| {
            sample
                .chains()
                .map(|c| effective_sample_size(&c.iter().map(|z| z[term]).collect::<Vec<_>>()))
                .sum()
        })
        .collect();

    let (log_likelihood, likelihood_method) = if model.dyad_independent() {
        (
            exact_independent_log_likelihood(model, g, &theta)?,
            LikelihoodMethod::Exact,
        )
    } else {
        let lp = McmcParams {
            seed: derive_seed(params.seed, "likelihood"),
            ..*params
        };
        let log_k = stepping_stone_log_k(model, &theta, g, &lp, opts.bridges)?;
        (dot(&theta, &z_obs) - log_k, LikelihoodMethod::SteppingStone)
    };
    let (aic, bic) = information_criteria(k, log_likelihood, model.node_count());
    Ok(ErgmFit {
        labels: model.labels().to_vec(),
        terms: model.specs().to_vec(),
        theta,
        std_errors,
        z_scores,
        p_values,
        observed: z_obs,
        mple,
        log_likelihood,
        likelihood_method,
        aic,
        bic,
        n_nodes: model.node_count(),
        n_edges: g.edge_count(),
        iterations,
        diagnostics: McmcDiagnostics {
            acceptance_rate: sample.acceptance_rate,
            proposals: sample.proposals,
            sample_size: sample.len(),
            effective_sample_size: ess,
            standardized_difference: m.std_diff,
            trace,
        },
        seed: params.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn information_criteria_identities() {
        let (aic, bic) = information_criteria(17, -33.1709, 15);
        assert!((aic - 100.3418).abs() < 1e-9);
        assert!((bic - 145.4591).abs() < 1e-3);
        let (aic, bic) = information_criteria(17, -283.8415, 39);
        assert!((aic - 601.683).abs() < 1e-9);
        assert!((bic - 680.019).abs() < 1e-3);
    }

    #[test]
    fn p_values() {
        assert!((p_value(1.959964) - 0.05).abs() < 1e-6);
        assert!((p_value(-1.959964) - 0.05).abs() < 1e-6);
        assert_eq!(p_value(0.0), 1.0);
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_mean_exp(v.into_iter()) - 1000.0).abs() < 1e-12);
    }
}
