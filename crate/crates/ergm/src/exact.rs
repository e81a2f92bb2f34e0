//! Exact computations by enumerating every labelled graph on a small node set.

use std::collections::BTreeMap;

use intrafirm_core::Graph;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::model::ErgmModel;
use crate::ModelError;

pub const MAX_EXACT_NODES: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("exact enumeration supports at most {MAX_EXACT_NODES} nodes, got {0}")]
    TooLarge(usize),
    #[error("observed statistics lie on the boundary of the attainable set; the MLE diverges")]
    Boundary,
    #[error("exact MLE did not converge")]
    NotConverged,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Every attainable statistic vector with the number of graphs attaining it.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    n: usize,
    dyads: Vec<(usize, usize)>,
    support: Vec<(Vec<f64>, f64)>,
}

/// Dyads `i < j` in row-major order; bit `d` of a graph index is dyad `d`.
pub fn dyad_list(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

impl ExactOracle {
    pub fn new(model: &ErgmModel) -> Result<Self, OracleError> {
        let n = model.node_count();
        if n > MAX_EXACT_NODES {
            return Err(OracleError::TooLarge(n));
        }
        let dyads = dyad_list(n);
        let total: u64 = 1 << dyads.len();
        let chunk = (total / 64).max(1);
        let parts: Vec<BTreeMap<Vec<u64>, u64>> = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut counts = BTreeMap::new();
                for index in c * chunk..((c + 1) * chunk).min(total) {
                    let g = graph_from_index(n, &dyads, index);
                    let z = model.statistics(&g).expect("graph built for the model");
                    *counts.entry(z.iter().map(|v| v.to_bits()).collect()).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        let mut merged: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for part in parts {
            for (k, c) in part {
                *merged.entry(k).or_insert(0) += c;
            }
        }
        let support = merged
            .into_iter()
            .map(|(bits, c)| (bits.into_iter().map(f64::from_bits).collect(), c as f64))
            .collect();
        Ok(Self { n, dyads, support })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dyads(&self) -> &[(usize, usize)] {
        &self.dyads
    }

    pub fn graph_count(&self) -> u64 {
        1 << self.dyads.len()
    }

    /// Distinct statistic vectors and their multiplicities.
    pub fn support(&self) -> &[(Vec<f64>, f64)] {
        &self.support
    }

    fn log_weights(&self, theta: &[f64]) -> Vec<f64> {
        self.support
            .iter()
            .map(|(z, c)| c.ln() + z.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// `log sum_y exp(theta . z(y))`
    pub fn log_k(&self, theta: &[f64]) -> f64 {
        let w = self.log_weights(theta);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        max + w.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
    }

    /// Mean and covariance of the statistics under `theta`.
    pub fn moments(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let p = theta.len();
        let w = self.log_weights(theta);
        let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let probs: Vec<f64> = w.iter().map(|x| (x - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        let mut mean = DVector::zeros(p);
        for ((z, _), q) in self.support.iter().zip(&probs) {
            mean += DVector::from_column_slice(z) * (q / total);
        }
        let mut cov = DMatrix::zeros(p, p);
        for ((z, _), q) in self.support.iter().zip(&probs) {
            let d = DVector::from_column_slice(z) - &mean;
            cov += &d * d.transpose() * (q / total);
        }
        (mean, cov)
    }

    pub fn expected_statistics(&self, theta: &[f64]) -> Vec<f64> {
        self.moments(theta).0.iter().copied().collect()
    }

    /// `theta . z - log k(theta)`
    pub fn log_likelihood(&self, theta: &[f64], z: &[f64]) -> f64 {
        z.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>() - self.log_k(theta)
    }

    /// Probability of one specific graph with statistics `z`.
    pub fn graph_probability(&self, theta: &[f64], z: &[f64]) -> f64 {
        self.log_likelihood(theta, z).exp()
    }

    /// Maximises the exact log-likelihood by Newton steps until the gradient
    /// norm drops below 1e-8.
    pub fn mle(&self, z_obs: &[f64]) -> Result<Vec<f64>, OracleError> {
        let p = z_obs.len();
        for k in 0..p {
            let (lo, hi) = self
                .support
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (z, _)| {
                    (lo.min(z[k]), hi.max(z[k]))
                });
            if z_obs[k] <= lo || z_obs[k] >= hi {
                return Err(OracleError::Boundary);
            }
        }
        let zo = DVector::from_column_slice(z_obs);
        let mut theta = DVector::zeros(p);
        for _ in 0..500 {
            let t: Vec<f64> = theta.iter().copied().collect();
            let (mean, cov) = self.moments(&t);
            let grad = &zo - mean;
            if grad.norm() < 1e-8 {
                return Ok(t);
            }
            let Some(chol) = cov.cholesky() else {
                return Err(OracleError::Boundary);
            };
            let step = chol.solve(&grad);
            let f0 = self.log_likelihood(&t, z_obs);
            let mut s = 1.0;
            loop {
                let cand = &theta + &step * s;
                let c: Vec<f64> = cand.iter().copied().collect();
                if self.log_likelihood(&c, z_obs) >= f0 - 1e-12 || s < 1e-8 {
                    theta = cand;
                    break;
                }
                s *= 0.5;
            }
            if theta.amax() > 1e3 {
                return Err(OracleError::Boundary);
            }
        }
        Err(OracleError::NotConverged)
    }
}

/// Graph whose edge set is the set bits of `index` over `dyads`.
pub fn graph_from_index(n: usize, dyads: &[(usize, usize)], index: u64) -> Graph {
    let mut g = Graph::empty(n);
    for (d, &(i, j)) in dyads.iter().enumerate() {
        if index >> d & 1 == 1 {
            g.add_edge(i, j).expect("valid dyad");
        }
    }
    g
}

/// Inverse of [`graph_from_index`].
pub fn graph_index(g: &Graph, dyads: &[(usize, usize)]) -> u64 {
    dyads
        .iter()
        .enumerate()
        .filter(|(_, &(i, j))| g.has_edge(i, j))
        .fold(0, |acc, (d, _)| acc | 1 << d)
}

pub fn exact_log_k(oracle: &ExactOracle, theta: &[f64]) -> f64 {
    oracle.log_k(theta)
}

pub fn exact_mle(oracle: &ExactOracle, model: &ErgmModel, observed: &Graph) -> Result<Vec<f64>, OracleError> {
    let z = model.statistics(observed)?;
    oracle.mle(&z)
}
