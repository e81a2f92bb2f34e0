//! Metropolis-Hastings sampling with uniform single-dyad toggles.

use intrafirm_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ErgmModel;
use crate::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcParams {
    /// Proposals discarded before the first retained sample.
    pub burn_in: u64,
    /// Proposals between retained samples.
    pub interval: u64,
    /// Retained samples, split across chains.
    pub sample_size: usize,
    pub chains: usize,
    pub seed: u64,
    /// Chains accepting fewer proposals than this fraction are degenerate.
    pub min_acceptance: f64,
    /// Consecutive proposals spent at the empty or complete graph that count
    /// as absorption.
    pub absorb_limit: u64,
}

impl Default for McmcParams {
    fn default() -> Self {
        Self {
            burn_in: 20_000,
            interval: 1_000,
            sample_size: 2_000,
            chains: 4,
            seed: 0,
            min_acceptance: 0.05,
            absorb_limit: 1_000,
        }
    }
}

impl McmcParams {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidParams(m.to_string()));
        if self.interval == 0 {
            return bad("interval must be positive");
        }
        if self.sample_size == 0 {
            return bad("sample_size must be positive");
        }
        if self.chains == 0 {
            return bad("chains must be positive");
        }
        if !(0.0..1.0).contains(&self.min_acceptance) {
            return bad("min_acceptance must be in [0, 1)");
        }
        if self.absorb_limit == 0 {
            return bad("absorb_limit must be positive");
        }
        Ok(())
    }

    fn chain_share(&self, chain: usize) -> usize {
        self.sample_size / self.chains + usize::from(chain < self.sample_size % self.chains)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    LowAcceptance,
    AbsorbedEmpty,
    AbsorbedComplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub kind: Degeneracy,
    pub chain: usize,
    pub proposals: u64,
    pub acceptance_rate: f64,
    pub edges: usize,
}

impl std::fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            Degeneracy::LowAcceptance => "acceptance rate below threshold",
            Degeneracy::AbsorbedEmpty => "chain absorbed at the empty graph",
            Degeneracy::AbsorbedComplete => "chain absorbed at the complete graph",
        };
        write!(
            f,
            "{what} (chain {}, {} proposals, acceptance {:.4}, {} edges)",
            self.chain, self.proposals, self.acceptance_rate, self.edges
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("invalid MCMC parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate sampling: {0}")]
    Degenerate(DegeneracyReport),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `tag` under `master`; distinct tags give unrelated seeds.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, then mixed with the master seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix(master ^ mix(h))
}

/// One Metropolis-Hastings chain owning its graph and random stream.
pub struct Chain<'m> {
    model: &'m ErgmModel,
    theta: Vec<f64>,
    graph: Graph,
    stats: Vec<f64>,
    delta: Vec<f64>,
    rng: ChaCha8Rng,
    proposals: u64,
    accepted: u64,
    absorbed_run: u64,
}

impl<'m> Chain<'m> {
    /// Chain `stream` of the generator seeded with `seed`, started at `start`.
    pub fn new(model: &'m ErgmModel, theta: &[f64], start: Graph, seed: u64, stream: u64) -> Result<Self, ModelError> {
        if theta.len() != model.len() {
            return Err(ModelError::ThetaLength {
                expected: model.len(),
                got: theta.len(),
            });
        }
        if model.node_count() < 2 {
            return Err(ModelError::GraphSize {
                expected: 2,
                got: model.node_count(),
            });
        }
        let stats = model.statistics(&start)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            model,
            theta: theta.to_vec(),
            graph: start,
            stats,
            delta: vec![0.0; model.len()],
            rng,
            proposals: 0,
            accepted: 0,
            absorbed_run: 0,
        })
    }

    /// One proposal; returns whether the toggle was accepted.
    pub fn step(&mut self) -> bool {
        let n = self.model.node_count();
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let present = self.graph.has_edge(i, j);
        self.model.change_into(&self.graph, i, j, &mut self.delta);
        let sign = if present { -1.0 } else { 1.0 };
        let log_ratio = sign * self.theta.iter().zip(&self.delta).map(|(t, d)| t * d).sum::<f64>();
        self.proposals += 1;
        let accept = log_ratio >= 0.0 || self.rng.random::<f64>() < log_ratio.exp();
        if accept {
            self.graph.toggle(i, j);
            for (s, d) in self.stats.iter_mut().zip(&self.delta) {
                *s += sign * d;
            }
            self.accepted += 1;
        }
        let m = self.graph.edge_count();
        if m == 0 || m == self.graph.dyad_count() {
            self.absorbed_run += 1;
        } else {
            self.absorbed_run = 0;
        }
        accept
    }

    /// Runs `k` proposals, stopping early if the chain is absorbed.
    pub fn advance(&mut self, k: u64, absorb_limit: u64) -> Result<(), Degeneracy> {
        for _ in 0..k {
            self.step();
            if self.absorbed_run >= absorb_limit {
                return Err(if self.graph.edge_count() == 0 {
                    Degeneracy::AbsorbedEmpty
                } else {
                    Degeneracy::AbsorbedComplete
                });
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Running statistics of the current graph.
    pub fn stats(&self) -> &[f64] {
        &self.stats
    }

    /// Recomputes the statistics from scratch, discarding accumulated rounding.
    pub fn resync(&mut self) -> &[f64] {
        self.stats = self
            .model
            .statistics(&self.graph)
            .expect("graph shape fixed at construction");
        &self.stats
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn report(&self, kind: Degeneracy, chain: usize) -> DegeneracyReport {
        DegeneracyReport {
            kind,
            chain,
            proposals: self.proposals,
            acceptance_rate: self.acceptance_rate(),
            edges: self.graph.edge_count(),
        }
    }
}

/// Retained draws from all chains, concatenated in chain order.
#[derive(Clone, Debug)]
pub struct Sample {
    pub stats: Vec<Vec<f64>>,
    /// Empty unless graphs were requested.
    pub graphs: Vec<Graph>,
    pub chain_lengths: Vec<usize>,
    pub acceptance_rate: f64,
    pub proposals: u64,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Per-chain slices of the statistic draws.
    pub fn chains(&self) -> impl Iterator<Item = &[Vec<f64>]> {
        let mut offset = 0;
        self.chain_lengths.iter().map(move |&len| {
            let s = &self.stats[offset..offset + len];
            offset += len;
            s
        })
    }

    pub fn mean(&self) -> Vec<f64> {
        let p = self.stats.first().map_or(0, Vec::len);
        let mut m = vec![0.0; p];
        for row in &self.stats {
            for (a, b) in m.iter_mut().zip(row) {
                *a += b;
            }
        }
        let n = self.stats.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Sample covariance with divisor `len - 1`, row-major `p x p`.
    pub fn covariance(&self) -> Vec<f64> {
        let mean = self.mean();
        let p = mean.len();
        let mut c = vec![0.0; p * p];
        for row in &self.stats {
            for a in 0..p {
                let da = row[a] - mean[a];
                for b in a..p {
                    c[a * p + b] += da * (row[b] - mean[b]);
                }
            }
        }
        let denom = (self.stats.len().max(2) - 1) as f64;
        for a in 0..p {
            for b in a..p {
                c[a * p + b] /= denom;
                c[b * p + a] = c[a * p + b];
            }
        }
        c
    }
}

struct ChainOutput {
    stats: Vec<Vec<f64>>,
    graphs: Vec<Graph>,
    proposals: u64,
    accepted: f64,
}

/// Draws `params.sample_size` graphs from the model at `theta`, every chain
/// starting from `start`. Chains run in parallel; the result depends only on
/// the inputs.
pub fn sample_networks(
    model: &ErgmModel,
    theta: &[f64],
    start: &Graph,
    params: &McmcParams,
    keep_graphs: bool,
) -> Result<Sample, SamplerError> {
    params.validate()?;
    model.check_graph(start)?;
    let outputs: Vec<Result<ChainOutput, SamplerError>> = (0..params.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain = Chain::new(model, theta, start.clone(), params.seed, c as u64)?;
            let share = params.chain_share(c);
            let degenerate = |chain: &Chain, kind| SamplerError::Degenerate(chain.report(kind, c));
            chain
                .advance(params.burn_in, params.absorb_limit)
                .map_err(|k| degenerate(&chain, k))?;
            let mut stats = Vec::with_capacity(share);
            let mut graphs = Vec::new();
            for _ in 0..share {
                chain
                    .advance(params.interval, params.absorb_limit)
                    .map_err(|k| degenerate(&chain, k))?;
                stats.push(chain.resync().to_vec());
                if keep_graphs {
                    graphs.push(chain.graph().clone());
                }
            }
            if chain.acceptance_rate() < params.min_acceptance {
                return Err(degenerate(&chain, Degeneracy::LowAcceptance));
            }
            Ok(ChainOutput {
                stats,
                graphs,
                proposals: chain.proposals(),
                accepted: chain.acceptance_rate() * chain.proposals() as f64,
            })
        })
        .collect();

    let mut sample = Sample {
        stats: Vec::with_capacity(params.sample_size),
        graphs: Vec::new(),
        chain_lengths: Vec::with_capacity(params.chains),
        acceptance_rate: 0.0,
        proposals: 0,
    };
    let mut accepted = 0.0;
    for out in outputs {
        let out = out?;
        sample.chain_lengths.push(out.stats.len());
        sample.stats.extend(out.stats);
        sample.graphs.extend(out.graphs);
        sample.proposals += out.proposals;
        accepted += out.accepted;
    }
    sample.acceptance_rate = accepted / sample.proposals.max(1) as f64;
    Ok(sample)
}

/// Effective sample size of one series by Geyer's initial positive sequence.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return n as f64;
    }
    let acf = |lag: usize| {
        series[..n - lag]
            .iter()
            .zip(&series[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / (n as f64 * var)
    };
    let mut sum = 0.0;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = acf(lag) + acf(lag + 1);
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        lag += 2;
    }
    (n as f64 / (1.0 + 2.0 * sum)).min(n as f64)
}
