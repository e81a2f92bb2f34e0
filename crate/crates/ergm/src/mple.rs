//! Maximum pseudo-likelihood: logistic regression of dyad indicators on
//! their change statistics.

use intrafirm_core::Graph;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::mle::EstimationError;
use crate::model::ErgmModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpleFit {
    pub theta: Vec<f64>,
    /// From the inverse logistic information; not valid ERGM standard errors
    /// unless the model is dyad-independent.
    pub std_errors: Vec<f64>,
    pub log_pseudo_likelihood: f64,
    pub iterations: usize,
}

/// Change statistics of every dyad `i < j` (rows) and the observed indicators.
pub fn design(model: &ErgmModel, g: &Graph) -> Result<(DMatrix<f64>, DVector<f64>), EstimationError> {
    model.check_graph(g)?;
    let n = model.node_count();
    let p = model.len();
    let rows = model.dyad_count();
    let mut x = DMatrix::zeros(rows, p);
    let mut y = DVector::zeros(rows);
    let mut buf = vec![0.0; p];
    let mut r = 0;
    for i in 0..n {
        for j in i + 1..n {
            model.change_into(g, i, j, &mut buf);
            for (k, v) in buf.iter().enumerate() {
                x[(r, k)] = *v;
            }
            y[r] = f64::from(u8::from(g.has_edge(i, j)));
            r += 1;
        }
    }
    Ok((x, y))
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(e, yy)| yy * e - softplus(*e)).sum()
}

/// Labels of the terms spanning a near-null direction of the design, or
/// `None` when the scaled design has full column rank.
fn collinear_terms(x: &DMatrix<f64>, labels: &[String]) -> Option<Vec<String>> {
    let p = x.ncols();
    if x.nrows() < p {
        return Some(labels.to_vec());
    }
    let mut scaled = x.clone();
    for k in 0..p {
        let norm = scaled.column(k).norm();
        if norm == 0.0 {
            return Some(vec![labels[k].clone()]);
        }
        scaled.column_mut(k).unscale_mut(norm);
    }
    let svd = scaled.svd(false, true);
    let s = &svd.singular_values;
    let (imin, smin) = s
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let smax = s.max();
    if smin > 1e-9 * smax {
        return None;
    }
    let v_t = svd.v_t.expect("requested");
    let null = v_t.row(imin);
    Some(
        (0..p)
            .filter(|&k| null[k].abs() > 1e-3)
            .map(|k| labels[k].clone())
            .collect(),
    )
}

/// Logistic maximum likelihood by damped Newton iterations.
pub(crate) fn logistic_fit(x: &DMatrix<f64>, y: &DVector<f64>, labels: &[String]) -> Result<MpleFit, EstimationError> {
    if let Some(terms) = collinear_terms(x, labels) {
        return Err(EstimationError::Collinear(terms));
    }
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    let mut ll = log_likelihood(x, y, &beta);
    const MAX_ITER: usize = 200;
    const BOUND: f64 = 1e4;
    const SATURATED: f64 = 20.0;
    for iter in 1..=MAX_ITER {
        let eta = x * &beta;
        let prob = eta.map(sigmoid);
        let grad = x.transpose() * (y - &prob);
        let w = prob.map(|q| q * (1.0 - q));
        let mut xw = x.clone();
        for (r, wr) in w.iter().enumerate() {
            xw.row_mut(r).scale_mut(*wr);
        }
        let info = x.transpose() * xw;
        let Some(step) = info.clone().cholesky().map(|c| c.solve(&grad)) else {
            return Err(EstimationError::Separation);
        };
        let mut t = 1.0;
        let mut next = &beta + &step * t;
        let mut next_ll = log_likelihood(x, y, &next);
        while next_ll < ll - 1e-12 * ll.abs().max(1.0) && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
            next_ll = log_likelihood(x, y, &next);
        }
        let moved = (&next - &beta).amax();
        beta = next;
        ll = next_ll;
        if beta.amax() > BOUND {
            return Err(EstimationError::Separation);
        }
        if moved < 1e-10 * (1.0 + beta.amax()) || grad.amax() < 1e-11 {
            // fitted probabilities pinned at 0 or 1 mean the optimum is at infinity
            if (x * &beta).amax() > SATURATED {
                return Err(EstimationError::Separation);
            }
            let cov = info.try_inverse().ok_or(EstimationError::Separation)?;
            return Ok(MpleFit {
                theta: beta.iter().copied().collect(),
                std_errors: (0..p).map(|k| cov[(k, k)].max(0.0).sqrt()).collect(),
                log_pseudo_likelihood: ll,
                iterations: iter,
            });
        }
    }
    Err(EstimationError::Separation)
}

/// Maximum pseudo-likelihood estimate at the observed graph.
pub fn mple(model: &ErgmModel, g: &Graph) -> Result<MpleFit, EstimationError> {
    let (x, y) = design(model, g)?;
    logistic_fit(&x, &y, model.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{Covariates, TermSpec};

    fn edges_model(n: usize) -> ErgmModel {
        ErgmModel::new(n, vec![TermSpec::new("edges")], &Covariates::new(n)).unwrap()
    }

    #[test]
    fn half_density_gives_zero() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let fit = mple(&edges_model(4), &g).unwrap();
        assert!(fit.theta[0].abs() < 1e-9);
    }

    #[test]
    fn logit_of_density() {
        let mut g = Graph::empty(15);
        let mut k = 0;
        'outer: for i in 0..15 {
            for j in i + 1..15 {
                if k == 16 {
                    break 'outer;
                }
                g.add_edge(i, j).unwrap();
                k += 1;
            }
        }
        let fit = mple(&edges_model(15), &g).unwrap();
        assert!((fit.theta[0] - (16.0f64 / 89.0).ln()).abs() < 1e-9);
        assert!((fit.theta[0] + 1.7160).abs() < 5e-5);
    }

    #[test]
    fn collinear_terms_are_named() {
        let n = 5;
        let mut cov = Covariates::new(n);
        cov.insert_node("x", vec![1.0; n]).unwrap();
        let specs = vec![TermSpec::new("edges"), TermSpec::new("activity").covariate("x")];
        let model = ErgmModel::new(n, specs, &cov).unwrap();
        let g = Graph::from_edges(n, [(0, 1), (2, 3)]).unwrap();
        match mple(&model, &g) {
            Err(EstimationError::Collinear(terms)) => assert_eq!(terms.len(), 2),
            other => panic!("expected collinearity, got {other:?}"),
        }
    }

    #[test]
    fn empty_graph_is_separated() {
        let err = mple(&edges_model(4), &Graph::empty(4)).unwrap_err();
        assert!(matches!(err, EstimationError::Separation));
    }
}
