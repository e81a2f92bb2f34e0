//! Simulation envelopes for degree, shared-partner, geodesic and model
//! statistic distributions.

use std::path::Path;

use intrafirm_core::Graph;
use serde::{Deserialize, Serialize};

use crate::model::ErgmModel;
use crate::sampler::{sample_networks, McmcParams, SamplerError};
use crate::tally::Tallies;

pub const MIN_SIMULATIONS: usize = 20;
pub const FAMILIES: [&str; 4] = ["degree", "esp", "geodesic", "model"];
pub const GOF_HEADER: [&str; 8] = ["bin", "observed", "mean", "min", "q05", "median", "q95", "max"];

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofBin {
    pub bin: String,
    pub observed: f64,
    pub mean: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl GofBin {
    fn new(bin: String, observed: f64, mut simulated: Vec<f64>) -> Self {
        simulated.sort_by(f64::total_cmp);
        Self {
            bin,
            observed,
            mean: simulated.iter().sum::<f64>() / simulated.len() as f64,
            min: simulated[0],
            q05: quantile(&simulated, 0.05),
            median: quantile(&simulated, 0.5),
            q95: quantile(&simulated, 0.95),
            max: simulated[simulated.len() - 1],
        }
    }

    pub fn inside(&self) -> bool {
        self.q05 <= self.observed && self.observed <= self.q95
    }

    /// False when the bin is zero in the observed and every simulated graph.
    pub fn in_support(&self) -> bool {
        self.observed != 0.0 || self.max != 0.0 || self.min != 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofFamily {
    pub name: String,
    pub bins: Vec<GofBin>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub n_simulations: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub families: Vec<GofFamily>,
}

impl GofReport {
    pub fn family(&self, name: &str) -> Option<&GofFamily> {
        self.families.iter().find(|f| f.name == name)
    }

    /// `(inside, total)` over bins in the support of the named families.
    pub fn coverage(&self, names: &[&str]) -> (usize, usize) {
        self.families
            .iter()
            .filter(|f| names.contains(&f.name.as_str()))
            .flat_map(|f| &f.bins)
            .filter(|b| b.in_support())
            .fold((0, 0), |(i, t), b| (i + usize::from(b.inside()), t + 1))
    }

    /// Writes `gof_<family>.csv` for every family into `dir`.
    pub fn write_csv(&self, dir: &Path, preamble: Option<&str>) -> Result<(), csv::Error> {
        for f in &self.families {
            let rows = f
                .bins
                .iter()
                .map(|b| (b.bin.as_str(), b.observed, b.mean, b.min, b.q05, b.median, b.q95, b.max));
            intrafirm_core::csvio::write(&dir.join(format!("gof_{}.csv", f.name)), preamble, &GOF_HEADER, rows)?;
        }
        Ok(())
    }
}

fn histogram_family(
    name: &str,
    observed: &[u64],
    simulated: &[Vec<u64>],
    labels: impl Fn(usize) -> String,
) -> GofFamily {
    // trim trailing bins that are empty everywhere
    let len = simulated
        .iter()
        .chain(std::iter::once(&observed.to_vec()))
        .map(|h| h.iter().rposition(|&c| c > 0).map_or(0, |p| p + 1))
        .max()
        .unwrap_or(0)
        .max(1);
    let bins = (0..len)
        .map(|k| {
            let sim = simulated
                .iter()
                .map(|h| h.get(k).copied().unwrap_or(0) as f64)
                .collect();
            GofBin::new(labels(k), observed.get(k).copied().unwrap_or(0) as f64, sim)
        })
        .collect();
    GofFamily {
        name: name.to_string(),
        bins,
    }
}

/// Geodesic counts at distances `1..n`, then the unreachable count.
fn geodesics(g: &Graph) -> Vec<u64> {
    let h = g.geodesic_distribution();
    let n = g.node_count();
    let mut v: Vec<u64> = (1..n.max(2)).map(|d| h.get(d)).collect();
    v.push(h.unreachable);
    v
}

/// Simulates `n_sim` graphs at `theta` (chains start at `g`) and tabulates
/// each family against the observed graph.
pub fn goodness_of_fit(
    g: &Graph,
    model: &ErgmModel,
    theta: &[f64],
    n_sim: usize,
    params: &McmcParams,
) -> Result<GofReport, SamplerError> {
    if n_sim < MIN_SIMULATIONS {
        return Err(SamplerError::InvalidParams(format!(
            "goodness of fit needs at least {MIN_SIMULATIONS} simulations, got {n_sim}"
        )));
    }
    let p = McmcParams {
        sample_size: n_sim,
        ..*params
    };
    let sample = sample_networks(model, theta, g, &p, true)?;
    let obs = Tallies::of(g);
    let sims: Vec<Tallies> = sample.graphs.iter().map(Tallies::of).collect();

    let degree = histogram_family(
        "degree",
        &obs.degree,
        &sims.iter().map(|t| t.degree.clone()).collect::<Vec<_>>(),
        |k| k.to_string(),
    );
    let esp = histogram_family(
        "esp",
        &obs.esp,
        &sims.iter().map(|t| t.esp.clone()).collect::<Vec<_>>(),
        |k| k.to_string(),
    );
    let n = g.node_count();
    let last = n.max(2) - 1;
    let obs_geo = geodesics(g);
    let sim_geo: Vec<Vec<u64>> = sample.graphs.iter().map(geodesics).collect();
    let geodesic = GofFamily {
        name: "geodesic".into(),
        bins: (0..obs_geo.len())
            .map(|k| {
                let label = if k + 1 > last {
                    "inf".to_string()
                } else {
                    (k + 1).to_string()
                };
                GofBin::new(label, obs_geo[k] as f64, sim_geo.iter().map(|h| h[k] as f64).collect())
            })
            .collect(),
    };
    let z_obs = model.statistics(g)?;
    let model_family = GofFamily {
        name: "model".into(),
        bins: model
            .labels()
            .iter()
            .enumerate()
            .map(|(k, label)| GofBin::new(label.clone(), z_obs[k], sample.stats.iter().map(|z| z[k]).collect()))
            .collect(),
    };
    Ok(GofReport {
        n_simulations: n_sim,
        seed: params.seed,
        acceptance_rate: sample.acceptance_rate,
        families: vec![degree, esp, geodesic, model_family],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert!((quantile(&v, 0.95) - 4.8).abs() < 1e-12);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn geodesic_bins_cover_all_dyads() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2)]).unwrap();
        let v = geodesics(&g);
        assert_eq!(v.len(), 5);
        assert_eq!(v.iter().sum::<u64>(), 10);
        assert_eq!(v, vec![2, 1, 0, 0, 7]);
    }
}
