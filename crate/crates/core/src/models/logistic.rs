//! Logistic regression fitted by iteratively reweighted least squares.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::math::{clamp_prob, sigmoid, softplus};

/// Ridge used when the data turn out to be separable.
pub const MIN_RIDGE: f64 = 1e-6;

/// Linear predictors beyond this magnitude saturate double precision; seeing
/// one while fitting without a penalty is taken as a sign of separation.
const SEPARATION_ETA: f64 = 35.0;

/// Relative precision to which the log-likelihood sum is trusted.
const LL_RESOLUTION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    /// Convergence when the gradient max-norm falls to this value.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// L2 penalty on the weights (never on the intercept).
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 100, ridge: MIN_RIDGE }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub ridge: f64,
    pub separation_detected: bool,
    /// Penalised log-likelihood after each accepted step, starting at zero
    /// weights. Non-decreasing up to a relative 1e-12 rounding band.
    pub log_likelihood_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl LogisticModel {
    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), got: x.len() });
        }
        Ok(self.intercept + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Probability of bad, kept strictly inside (0, 1).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(clamp_prob(sigmoid(self.linear_predictor(x)?)))
    }
}

struct Objective<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    ridge: f64,
}

impl Objective<'_> {
    fn eta(&self, beta: &[f64], i: usize) -> f64 {
        beta[0] + self.x.row(i).iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>()
    }

    fn log_likelihood(&self, beta: &[f64]) -> f64 {
        let mut ll = 0.0;
        for i in 0..self.x.rows() {
            let eta = self.eta(beta, i);
            ll += if self.y[i] { eta } else { 0.0 } - softplus(eta);
        }
        ll - 0.5 * self.ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
    }

    /// Gradient, Hessian of the negative log-likelihood, and max |eta|.
    fn derivatives(&self, beta: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let p = beta.len();
        let mut grad = vec![0.0; p];
        let mut hess = vec![0.0; p * p];
        let mut max_eta: f64 = 0.0;
        let mut z = vec![1.0; p];
        for i in 0..self.x.rows() {
            let eta = self.eta(beta, i);
            max_eta = max_eta.max(eta.abs());
            let mu = sigmoid(eta);
            let w = mu * (1.0 - mu);
            let r = if self.y[i] { 1.0 } else { 0.0 } - mu;
            z[1..].copy_from_slice(self.x.row(i));
            for a in 0..p {
                grad[a] += r * z[a];
                let wa = w * z[a];
                for b in 0..=a {
                    hess[a * p + b] += wa * z[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[b * p + a] = hess[a * p + b];
            }
        }
        for j in 1..p {
            grad[j] -= self.ridge * beta[j];
            hess[j * p + j] += self.ridge;
        }
        (grad, hess, max_eta)
    }
}

enum Attempt {
    Done(LogisticModel),
    Separated,
}

/// Maximises the (ridge-penalised) log-likelihood from zero weights with
/// Newton steps and step-halving.
///
/// Fitting with `ridge = 0` on separable data is detected from saturating
/// linear predictors (or a singular Hessian) and restarted with
/// [`MIN_RIDGE`]; the diagnostics record that this happened.
pub fn train_logistic(x: &Matrix, y: &[bool], config: &LogisticConfig) -> Result<LogisticModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), got: y.len() });
    }
    if !(config.ridge >= 0.0) || !(config.tolerance > 0.0) {
        return Err(Error::InvalidConfig("ridge must be >= 0 and tolerance > 0".into()));
    }
    if !y.iter().any(|&v| v) || y.iter().all(|&v| v) {
        return Err(Error::SingleClass("train_logistic".into()));
    }
    match fit(x, y, config, config.ridge, false)? {
        Attempt::Done(m) => Ok(m),
        Attempt::Separated => match fit(x, y, config, MIN_RIDGE, true)? {
            Attempt::Done(m) => Ok(m),
            Attempt::Separated => unreachable!("penalised fits never report separation"),
        },
    }
}

fn fit(x: &Matrix, y: &[bool], config: &LogisticConfig, ridge: f64, separation_detected: bool) -> Result<Attempt> {
    let unpenalised = ridge == 0.0;
    let obj = Objective { x, y, ridge };
    let p = x.cols() + 1;
    let mut beta = vec![0.0; p];
    let mut ll = obj.log_likelihood(&beta);
    let mut trace = vec![ll];
    let mut gnorm = f64::INFINITY;

    for iter in 0..=config.max_iterations {
        let (grad, hess, max_eta) = obj.derivatives(&beta);
        if unpenalised && max_eta > SEPARATION_ETA {
            return Ok(Attempt::Separated);
        }
        gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm <= config.tolerance {
            return Ok(Attempt::Done(LogisticModel {
                intercept: beta[0],
                features: x.names().to_vec(),
                weights: beta[1..].to_vec(),
                diagnostics: FitDiagnostics {
                    iterations: iter,
                    gradient_norm: gnorm,
                    ridge,
                    separation_detected,
                    log_likelihood_trace: trace,
                },
            }));
        }
        if iter == config.max_iterations {
            break;
        }
        let step = match linalg::solve_spd(&hess, p, &grad) {
            Ok(s) => s,
            Err(Error::Singular) if unpenalised => return Ok(Attempt::Separated),
            Err(e) => return Err(e),
        };
        // Below this expected gain the objective cannot resolve the step
        // any more; Newton is then in its quadratic region and is trusted.
        let gain: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        if 0.5 * gain <= LL_RESOLUTION * (1.0 + ll.abs()) {
            for (b, s) in beta.iter_mut().zip(&step) {
                *b += s;
            }
            ll = obj.log_likelihood(&beta);
            trace.push(ll);
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let ll_c = obj.log_likelihood(&cand);
            if ll_c >= ll {
                beta = cand;
                ll = ll_c;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no representable ascent left along the Newton direction
            break;
        }
        trace.push(ll);
    }
    Err(Error::NotConverged { iterations: config.max_iterations, gradient_norm: gnorm })
}

/// Standard errors from the inverse observed information at the fitted model.
pub fn standard_errors(model: &LogisticModel, x: &Matrix) -> Result<Vec<f64>> {
    let mut beta = vec![model.intercept];
    beta.extend_from_slice(&model.weights);
    let dummy = vec![false; x.rows()];
    let obj = Objective { x, y: &dummy, ridge: model.diagnostics.ridge };
    let (_, hess, _) = obj.derivatives(&beta);
    Ok(linalg::spd_inverse_diagonal(&hess, beta.len())?.into_iter().map(crate::math::sqrt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::logit;

    #[test]
    fn saturated_binary_feature_matches_closed_form() {
        // group 0: 30 bad of 100; group 1: 60 bad of 150
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            rows.push(vec![0.0]);
            y.push(i < 30);
        }
        for i in 0..150 {
            rows.push(vec![2.0]);
            y.push(i < 60);
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_logistic(&x, &y, &LogisticConfig { ridge: 0.0, ..Default::default() }).unwrap();
        let expected = logit(0.4) - logit(0.3);
        assert!((m.weights[0] * 2.0 - expected).abs() < 1e-9);
        assert!((m.intercept - logit(0.3)).abs() < 1e-9);
        assert!(m.diagnostics.gradient_norm <= 1e-8);
        assert!(!m.diagnostics.separation_detected);
    }

    #[test]
    fn separable_data_falls_back_to_ridge() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 10.0]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_logistic(&x, &y, &LogisticConfig { ridge: 0.0, ..Default::default() }).unwrap();
        assert!(m.diagnostics.separation_detected);
        assert_eq!(m.diagnostics.ridge, MIN_RIDGE);
        assert!(m.weights[0].is_finite() && m.weights[0] > 0.0);
        assert!(m.diagnostics.gradient_norm <= 1e-8);
    }

    #[test]
    fn log_likelihood_never_decreases() {
        let rows: Vec<Vec<f64>> = (0..300).map(|i| vec![(i % 17) as f64 / 5.0 - 1.0, (i % 7) as f64]).collect();
        let y: Vec<bool> = (0..300).map(|i| (i * 7919) % 10 < 3 + (i % 17) / 6).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = train_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert!(m.diagnostics.log_likelihood_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs())));
    }

    #[test]
    fn predict_examples() {
        let m = LogisticModel {
            intercept: logit(0.273),
            features: vec!["a".into(), "b".into()],
            weights: vec![0.7, -0.2],
            diagnostics: FitDiagnostics::default(),
        };
        assert!((m.predict(&[0.0, 0.0]).unwrap() - 0.273).abs() < 1e-15);
        assert!(m.predict(&[1.0, 0.0]).unwrap() > m.predict(&[0.5, 0.0]).unwrap());
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
        let zero = LogisticModel { intercept: 0.0, weights: vec![0.0, 0.0], ..m };
        assert_eq!(zero.predict(&[3.0, -1.0]).unwrap(), 0.5);
    }

    #[test]
    fn non_convergence_reports_gradient() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 5) as f64]).collect();
        let y: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let err =
            train_logistic(&x, &y, &LogisticConfig { max_iterations: 1, tolerance: 1e-14, ridge: 0.0 }).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 1, gradient_norm } if gradient_norm > 0.0));
    }
}
