//! Logistic maximum likelihood on fixed designs, confidence widths and
//! one-dimensional bias oracles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::fisher::fisher_counts;
use crate::link::{log_mu, mu, mudot, softplus};
use crate::pulls::PullLog;
use crate::types::{Arm, ArmSet, Theta};
use crate::SpdMatrix;

const GAMMA_CONST: f64 = 6.1 * 6.1;

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= (-1.0f64).exp() {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

/// `gamma(d, n, delta) = max{d + L, 6.1^2 L}` with `L = ln(6 (2 + n) / delta)`.
pub fn gamma(d: usize, n: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "gamma needs d, n >= 1 (got d={d}, n={n})"
        )));
    }
    let l = (6.0 * (2.0 + n as f64) / delta).ln();
    Ok((d as f64 + l).max(GAMMA_CONST * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub d: usize,
    pub n: usize,
    pub delta: f64,
}

impl GammaParams {
    pub fn value(&self) -> Result<f64> {
        gamma(self.d, self.n, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub l2_eps: f64,
    /// Constrain the fit to the ball of this radius.
    pub norm_cap: Option<f64>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            l2_eps: 1e-9,
            norm_cap: None,
        }
    }
}

impl MleOptions {
    pub fn with_cap(mut self, s: f64) -> Self {
        self.norm_cap = Some(s);
        self
    }

    pub fn with_l2(mut self, l2: f64) -> Self {
        self.l2_eps = l2;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub theta_hat: Theta,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub regularizer_used: f64,
}

/// Negative regularized log-likelihood over the pulled arms.
struct Objective<'a> {
    xs: Vec<&'a [f64]>,
    n: Vec<f64>,
    s: Vec<f64>,
    l2: f64,
    d: usize,
}

impl Objective<'_> {
    fn value(&self, theta: &DVector<f64>) -> f64 {
        let mut f = 0.5 * self.l2 * theta.norm_squared();
        for ((x, n), s) in self.xs.iter().zip(&self.n).zip(&self.s) {
            let z = dot_v(x, theta);
            f += n * softplus(z) - s * z;
        }
        f
    }

    fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let mut g = theta * self.l2;
        for ((x, n), s) in self.xs.iter().zip(&self.n).zip(&self.s) {
            let z = dot_v(x, theta);
            // n mu(z) - s, written so that saturated arms do not cancel badly
            let r = if z >= 0.0 {
                (n - s) - n * mu(-z)
            } else {
                n * mu(z) - s
            };
            for (gi, xi) in g.iter_mut().zip(x.iter()) {
                *gi += r * xi;
            }
        }
        g
    }

    fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::<f64>::identity(self.d, self.d) * self.l2;
        for (x, n) in self.xs.iter().zip(&self.n) {
            let w = n * mudot(dot_v(x, theta));
            for i in 0..self.d {
                for j in 0..self.d {
                    h[(i, j)] += w * x[i] * x[j];
                }
            }
        }
        h
    }
}

fn dot_v(x: &[f64], theta: &DVector<f64>) -> f64 {
    x.iter().zip(theta.iter()).map(|(a, b)| a * b).sum()
}

fn project(theta: &mut DVector<f64>, cap: Option<f64>) {
    if let Some(s) = cap {
        let n = theta.norm();
        if n > s {
            *theta *= s / n;
        }
    }
}

/// Minimizer over `||y|| <= s` of the Newton model
/// `g^T (y - theta) + (y - theta)^T H (y - theta) / 2`, i.e. of
/// `y^T H y / 2 - b^T y` with `b = H theta - g`.
fn ball_model_minimizer(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    theta: &DVector<f64>,
    s: f64,
) -> DVector<f64> {
    let b = h * theta - g;
    let eig = h.clone().symmetric_eigen();
    let c = eig.eigenvectors.transpose() * &b;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let norm_at = |nu: f64| -> f64 {
        c.iter()
            .zip(&lam)
            .map(|(ci, li)| {
                let den = li + nu;
                if den > 0.0 {
                    (ci / den).powi(2)
                } else if *ci == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let nu = if norm_at(0.0) <= s {
        0.0
    } else {
        // ||y(nu)|| decreases in nu and is at most ||b|| / nu
        let (mut lo, mut hi) = (0.0, b.norm() / s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_at(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    };
    let coef = DVector::from_iterator(
        c.len(),
        c.iter()
            .zip(&lam)
            .map(|(ci, li)| if li + nu > 0.0 { ci / (li + nu) } else { 0.0 }),
    );
    let mut y = &eig.eigenvectors * coef;
    project(&mut y, Some(s));
    y
}

/// Stationarity measure: plain gradient norm, or the projected-gradient norm
/// when the iterate sits on the boundary of the norm ball.
fn stationarity(theta: &DVector<f64>, g: &DVector<f64>, cap: Option<f64>) -> f64 {
    match cap {
        Some(s) if theta.norm() >= s * (1.0 - 1e-12) => {
            let mut p = theta - g;
            project(&mut p, cap);
            (theta - p).norm()
        }
        _ => g.norm(),
    }
}

/// Damped-Newton logistic MLE from aggregated counts.
///
/// Non-convergence is reported through `converged = false` on the returned
/// best iterate rather than as an error.
pub fn fit_mle(arms: &ArmSet, pulls: &PullLog, opts: &MleOptions) -> Result<MleResult> {
    if pulls.num_arms() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: pulls.num_arms(),
        });
    }
    if pulls.total() == 0 {
        return Err(Error::InvalidArgument(
            "fit_mle needs at least one pull".into(),
        ));
    }
    let d = arms.dim();
    let pulled = pulls.pulled_arms();
    if opts.l2_eps <= 0.0 && arms.rank_of(&pulled) < d {
        return Err(Error::DegenerateDesign);
    }
    let obj = Objective {
        xs: pulled.iter().map(|&i| arms.get(i).coords()).collect(),
        n: pulled.iter().map(|&i| pulls.pulls()[i] as f64).collect(),
        s: pulled
            .iter()
            .map(|&i| pulls.successes()[i] as f64)
            .collect(),
        l2: opts.l2_eps.max(0.0),
        d,
    };

    let mut theta = DVector::<f64>::zeros(d);
    let mut f = obj.value(&theta);
    let mut g = obj.gradient(&theta);
    let mut stat = stationarity(&theta, &g, opts.norm_cap);
    let mut iterations = 0;
    while stat > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let h = obj.hessian(&theta);
        let step = match opts.norm_cap {
            Some(s) => ball_model_minimizer(&h, &g, &theta, s) - &theta,
            None => match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    let fac = SpdMatrix::from_matrix(h)?.factor(1e-12)?;
                    -fac.solve(g.as_slice())
                }
            },
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand = &theta + &step * t;
            project(&mut cand, opts.norm_cap);
            let fc = obj.value(&cand);
            let decrease = g.dot(&(&cand - &theta));
            if fc <= f + 1e-4 * decrease {
                accepted = Some((cand, fc));
                break;
            }
            // near the optimum f is flat to rounding; fall back to the gradient
            if fc - f <= 64.0 * f64::EPSILON * f.abs().max(1.0)
                && stationarity(&cand, &obj.gradient(&cand), opts.norm_cap) < stat
            {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, fc)) = accepted else {
            break;
        };
        let moved = (&cand - &theta).norm();
        theta = cand;
        f = fc;
        g = obj.gradient(&theta);
        stat = stationarity(&theta, &g, opts.norm_cap);
        if moved == 0.0 {
            break;
        }
    }
    Ok(MleResult {
        theta_hat: Theta::from_raw(theta.iter().copied().collect()),
        converged: stat <= opts.tol,
        iterations,
        grad_norm: stat,
        regularizer_used: obj.l2,
    })
}

/// Mean-parameter confidence width
/// `4.8 mudot(x^T theta) ||x||_{H^{-1}} sqrt(ln(2 (2 + t_eff) K / delta))`.
pub fn mean_conf_width(
    x: &Arm,
    h: &SpdMatrix,
    t_eff: usize,
    k: usize,
    delta: f64,
    theta: &Theta,
) -> Result<f64> {
    check_delta(delta)?;
    let q = h.inv_quad(x.coords(), 0.0)?;
    let log_term = (2.0 * (2.0 + t_eff as f64) * k as f64 / delta).ln();
    Ok(4.8 * mudot(x.dot(theta)) * q.sqrt() * log_term.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmupCheck {
    pub xi2: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Evaluates the warmup condition `max_s ||x_s||^2_{H_t(theta)^{-1}} <= 1/gamma(d, t_eff, delta)`.
pub fn warmup_check(
    arms: &ArmSet,
    pulls: &PullLog,
    theta: &Theta,
    delta: f64,
) -> Result<WarmupCheck> {
    if pulls.total() == 0 {
        return Err(Error::InvalidArgument(
            "warmup_check needs at least one pull".into(),
        ));
    }
    let h = fisher_counts(arms, pulls, theta)?;
    let f = h.factor(0.0)?;
    let xi2 = pulls
        .pulled_arms()
        .into_iter()
        .map(|i| f.inv_quad(arms.get(i).coords()))
        .fold(0.0, f64::max);
    let threshold = 1.0 / gamma(arms.dim(), pulls.t_eff(), delta)?;
    Ok(WarmupCheck {
        xi2,
        threshold,
        satisfied: xi2 <= threshold,
    })
}

/// Krichevsky–Trofimov natural-parameter estimate `ln((H + 1/2) / (N - H + 1/2))`.
pub fn kt_estimate(successes: u64, n: u64) -> f64 {
    assert!(n >= 1 && successes <= n);
    ((successes as f64 + 0.5) / ((n - successes) as f64 + 0.5)).ln()
}

/// One-dimensional MLE `logit(H/N)`, with all-0s / all-1s outcomes mapped to
/// `0.5/N` and `(N - 0.5)/N`.
pub fn mle_1d_natural(successes: u64, n: u64) -> f64 {
    assert!(n >= 1 && successes <= n);
    let (h, t) = if successes == 0 {
        (0.5, n as f64 - 0.5)
    } else if successes == n {
        (n as f64 - 0.5, 0.5)
    } else {
        (successes as f64, (n - successes) as f64)
    };
    (h / t).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Mle,
    Kt,
}

impl Estimator {
    pub fn estimate(self, successes: u64, n: u64) -> f64 {
        match self {
            Estimator::Mle => mle_1d_natural(successes, n),
            Estimator::Kt => kt_estimate(successes, n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Mle => "mle",
            Estimator::Kt => "kt",
        }
    }
}

/// Exact bias `E[estimate] - c` for `N` Bernoulli(mu(c)) draws, by
/// enumerating the binomial pmf in the log domain.
pub fn exact_bias_1d(estimator: Estimator, c: f64, n: u64) -> f64 {
    assert!(n >= 1, "exact_bias_1d needs N >= 1");
    let nn = n as usize;
    let lp = log_mu(c);
    let lq = log_mu(-c);
    // ln C(N, h), filled symmetrically so that c -> -c is an exact relabelling
    let lg_n = ln_gamma(n as f64 + 1.0);
    let mut lb = vec![0.0; nn + 1];
    for h in 0..=nn / 2 {
        let v = lg_n - ln_gamma(h as f64 + 1.0) - ln_gamma((nn - h) as f64 + 1.0);
        lb[h] = v;
        lb[nn - h] = v;
    }
    let logs: Vec<f64> = (0..=nn)
        .map(|h| lb[h] + h as f64 * lp + (nn - h) as f64 * lq)
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut acc = 0.0;
    for (h, l) in logs.iter().enumerate() {
        let p = (l - m).exp();
        z += p;
        acc += p * (estimator.estimate(h as u64, n) - c);
    }
    acc / z
}

/// First-order MLE bias `(mu(c) - mu(-c)) / (2 N mudot(c))`.
pub fn mle_bias_first_order(c: f64, n: u64) -> f64 {
    (mu(c) - mu(-c)) / (2.0 * n as f64 * mudot(c))
}
