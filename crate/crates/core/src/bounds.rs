//! Closed-form gamma-approximation bounds.
//!
//! Given a nonnegative law with mean `mu` and variance `sigma2`, the matched
//! gamma target has rate `alpha = mu/sigma2` and shape `r = mu^2/sigma2`.
//! With `Theta` the Wasserstein distance between the size-biased and
//! zero-biased laws, the distances to the gamma target satisfy
//!
//! - Wasserstein: `8 sqrt(3 mu / (r+2)) Theta^{1/2} + (8r/(r+2)) Theta`;
//! - Kolmogorov: `a Theta^{m/(m+2)} + b Theta^{(m+1)/(m+2)}` with
//!   `m = min(r, 1)` and constants `a`, `b` piecewise in the shape.
//!
//! The module also provides the gamma-pair comparison bound, the gamma
//! concentration inequality, the worked closed forms for the truncated
//! gamma-process example and the negative binomial construction, and a Monte
//! Carlo estimator for the discrepancy of gamma convolutions.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SteinError};
use crate::metrics::{DistanceEstimate, Method, Metric};
use crate::rng;
use crate::special;
use crate::transforms::IndexLaw;

/// Shape regime selecting the piecewise Kolmogorov constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "r<1")]
    ShapeBelowOne,
    #[serde(rename = "r>=1")]
    ShapeAtLeastOne,
}

/// Full bound evaluation for one law/Theta pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub mu: f64,
    pub sigma2: f64,
    pub r: f64,
    pub alpha: f64,
    pub theta: f64,
    pub w_bound: f64,
    pub k_bound: f64,
    pub a_const: f64,
    pub b_const: f64,
    pub regime: Regime,
}

impl BoundReport {
    pub fn new(mu: f64, sigma2: f64, theta: f64) -> Result<BoundReport> {
        let (r, alpha) = gamma_params_from_moments(mu, sigma2)?;
        let (a_const, b_const) = kolmogorov_constants(r, alpha)?;
        Ok(BoundReport {
            mu,
            sigma2,
            r,
            alpha,
            theta,
            w_bound: wasserstein_bound(mu, sigma2, theta)?,
            k_bound: kolmogorov_bound(mu, sigma2, theta)?,
            a_const,
            b_const,
            regime: if r < 1.0 {
                Regime::ShapeBelowOne
            } else {
                Regime::ShapeAtLeastOne
            },
        })
    }
}

fn check_pos(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SteinError::domain(format!("{what} must be > 0, got {v}")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(SteinError::domain(format!(
            "theta must be >= 0, got {theta}"
        )))
    }
}

/// Moment-matched gamma parameters `(r, alpha) = (mu^2/sigma2, mu/sigma2)`.
pub fn gamma_params_from_moments(mu: f64, sigma2: f64) -> Result<(f64, f64)> {
    check_pos(mu, "mean")?;
    check_pos(sigma2, "variance")?;
    Ok((mu * mu / sigma2, mu / sigma2))
}

/// Wasserstein bound `8 sqrt(3 mu / (r+2)) Theta^{1/2} + (8r/(r+2)) Theta`.
pub fn wasserstein_bound(mu: f64, sigma2: f64, theta: f64) -> Result<f64> {
    let (r, _) = gamma_params_from_moments(mu, sigma2)?;
    check_theta(theta)?;
    Ok(8.0 * (3.0 * mu / (r + 2.0)).sqrt() * theta.sqrt() + 8.0 * r / (r + 2.0) * theta)
}

/// Density maximum of `Gamma(r, alpha)` for `r >= 1`:
/// `(alpha/Gamma(r)) ((r-1)/e)^{r-1}`, with the continuous limit `alpha`
/// at `r = 1` (the exponential density maximum).
fn density_max(r: f64, alpha: f64) -> f64 {
    let pow = if r == 1.0 {
        1.0
    } else {
        ((r - 1.0) / std::f64::consts::E).powf(r - 1.0)
    };
    alpha / special::gamma_fn(r) * pow
}

/// Piecewise Kolmogorov constants `(a, b)`.
pub fn kolmogorov_constants(r: f64, alpha: f64) -> Result<(f64, f64)> {
    check_pos(r, "shape")?;
    check_pos(alpha, "rate")?;
    let mu = r / alpha;
    if r < 1.0 {
        let gr = special::gamma_fn(r);
        let a = (0.5 + 1.0 / r)
            * (48.0 * mu / (r + 2.0)).powf(r / (r + 2.0))
            * (alpha.powf(r) / gr).powf(2.0 / (r + 2.0));
        let b = 8.0
            * alpha
            * (mu / (r + 2.0)).powf((r + 1.0) / (r + 2.0))
            * (alpha.powf(r) / (48.0 * gr)).powf(1.0 / (r + 2.0));
        Ok((a, b))
    } else {
        let m = density_max(r, alpha);
        let a = 3.0 * (6.0 * mu / (r + 2.0)).powf(1.0 / 3.0) * m.powf(2.0 / 3.0);
        let b = 4.0 * alpha * (mu / (r + 2.0)).powf(2.0 / 3.0) * (m / 6.0).powf(1.0 / 3.0);
        Ok((a, b))
    }
}

/// Kolmogorov bound `a Theta^{m/(m+2)} + b Theta^{(m+1)/(m+2)}`,
/// `m = min(r, 1)`.
pub fn kolmogorov_bound(mu: f64, sigma2: f64, theta: f64) -> Result<f64> {
    let (r, alpha) = gamma_params_from_moments(mu, sigma2)?;
    check_theta(theta)?;
    let (a, b) = kolmogorov_constants(r, alpha)?;
    let m = r.min(1.0);
    Ok(a * theta.powf(m / (m + 2.0)) + b * theta.powf((m + 1.0) / (m + 2.0)))
}

/// Wasserstein bound between two gamma laws:
/// `|r1-r2| / max(a1,a2) + max(r1,r2) |1/a1 - 1/a2|`.
pub fn gamma_pair_bound(r1: f64, alpha1: f64, r2: f64, alpha2: f64) -> Result<f64> {
    check_pos(r1, "shape")?;
    check_pos(alpha1, "rate")?;
    check_pos(r2, "shape")?;
    check_pos(alpha2, "rate")?;
    Ok((r1 - r2).abs() / alpha1.max(alpha2)
        + r1.max(r2) * (1.0 / alpha1 - 1.0 / alpha2).abs())
}

/// Gamma concentration: `P(z < Z <= z + delta) <= eps(delta)` for every
/// `z >= 0`, with `eps(delta) = (alpha delta)^r / Gamma(r+1)` when `r < 1`
/// and the density maximum times `delta` when `r >= 1`.
pub fn concentration_eps(r: f64, alpha: f64, delta: f64) -> Result<f64> {
    check_pos(r, "shape")?;
    check_pos(alpha, "rate")?;
    check_pos(delta, "delta")?;
    if r < 1.0 {
        Ok((alpha * delta).powf(r) / special::gamma_fn(r + 1.0))
    } else {
        Ok(density_max(r, alpha) * delta)
    }
}

/// Closed forms for the compound Poisson law with truncated gamma-process
/// jumps: `(theta, w_bound, exact)` where `theta = delta(1+delta/2)/(1+delta)`,
/// `w_bound = 8 sqrt(delta) + (17/3) delta`, and the exact Wasserstein
/// distance to `Gamma(1,1)` is `1 - e^{-delta}`.
pub fn example1_values(delta: f64) -> Result<(f64, f64, f64)> {
    check_pos(delta, "delta")?;
    let theta = delta * (1.0 + delta / 2.0) / (1.0 + delta);
    let w_bound = 8.0 * delta.sqrt() + 17.0 / 3.0 * delta;
    let exact = -(-delta).exp_m1();
    Ok((theta, w_bound, exact))
}

/// Negative binomial construction: `p W` for `W ~ NB(kappa, p)` against
/// `Gamma(kappa(1-p), 1)`. Returns `(theta, w_bound, k_bound)` with
/// `theta = p/2`.
pub fn nb_bounds(kappa: f64, p: f64) -> Result<(f64, f64, f64)> {
    check_pos(kappa, "kappa")?;
    if !(p > 0.0 && p < 1.0) {
        return Err(SteinError::domain(format!("p must be in (0,1), got {p}")));
    }
    let theta = 0.5 * p;
    // mean and variance of the rescaled law both equal kappa(1-p)
    let m = kappa * (1.0 - p);
    Ok((
        theta,
        wasserstein_bound(m, m, theta)?,
        kolmogorov_bound(m, m, theta)?,
    ))
}

/// Sum-coupling corollary for the negative binomial construction: the
/// Wasserstein part of [`nb_bounds`] plus `nu sqrt(kappa(1-p)p) + p kappa`.
pub fn nb_sum_bound(kappa: f64, p: f64, nu: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(SteinError::domain(format!("nu must be >= 0, got {nu}")));
    }
    let (_, w_bound, _) = nb_bounds(kappa, p)?;
    Ok(w_bound + nu * (kappa * (1.0 - p) * p).sqrt() + p * kappa)
}

/// Monte Carlo discrepancy for a convolution of gamma laws
/// `Gamma(r_i, alpha_i)`: estimates `E|Y_{I1} - Y_{I2}|` where
/// `Y_i ~ Exp(alpha_i)`, `I1` is drawn with weights `r_i / alpha_i` and `I2`
/// with weights `r_i / alpha_i^2`. The two exponentials are drawn
/// independently even when the indices coincide.
pub fn conv_theta(params: &[(f64, f64)], seed: u64, n: usize) -> Result<DistanceEstimate> {
    if params.is_empty() {
        return Err(SteinError::domain("need at least one gamma component"));
    }
    if n == 0 {
        return Err(SteinError::domain("draw count must be >= 1"));
    }
    for &(r, alpha) in params {
        check_pos(r, "shape")?;
        check_pos(alpha, "rate")?;
    }
    let w1: Vec<f64> = params.iter().map(|&(r, a)| r / a).collect();
    let w2: Vec<f64> = params.iter().map(|&(r, a)| r / (a * a)).collect();
    let idx1 = IndexLaw::from_unnormalized(&w1)?;
    let idx2 = IndexLaw::from_unnormalized(&w2)?;
    let mut rng_i1 = rng::split_stream(seed, 0);
    let mut rng_i2 = rng::split_stream(seed, 1);
    let mut rng_y1 = rng::split_stream(seed, 2);
    let mut rng_y2 = rng::split_stream(seed, 3);
    let draw_exp = |rng: &mut rng::Rng, alpha: f64| -> f64 {
        use rand::Rng as _;
        let u: f64 = rng.sample(rand::distributions::Open01);
        -u.ln() / alpha
    };
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let a1 = params[idx1.sample(&mut rng_i1)].1;
        let a2 = params[idx2.sample(&mut rng_i2)].1;
        let gap = (draw_exp(&mut rng_y1, a1) - draw_exp(&mut rng_y2, a2)).abs();
        sum += gap;
        sum2 += gap * gap;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum2 - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    Ok(DistanceEstimate {
        value: mean,
        metric: Metric::Wasserstein,
        method: Method::Empirical,
        error: (var / nf).sqrt(),
        n: Some(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn moment_matching() {
        assert_eq!(gamma_params_from_moments(1.0, 1.0).unwrap(), (1.0, 1.0));
        let (r, a) = gamma_params_from_moments(2.0 / 3.0, 2.0 / 9.0).unwrap();
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a, 3.0, epsilon = 1e-14);
        assert!(gamma_params_from_moments(1.0, 0.0).is_err());
    }

    #[test]
    fn wasserstein_bound_values() {
        assert_eq!(wasserstein_bound(1.0, 1.0, 0.0).unwrap(), 0.0);
        // r = 1: 8 sqrt(0.01) + (8/3)(0.01)
        assert_abs_diff_eq!(
            wasserstein_bound(1.0, 1.0, 0.01).unwrap(),
            0.826_666_666_666_666_7,
            epsilon = 1e-14
        );
        assert!(wasserstein_bound(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn kolmogorov_constants_frozen_values() {
        // r = 1, alpha = 1: a = 3 * 2^{1/3}, b = 4 * 3^{-2/3} * 6^{-1/3}
        let (a, b) = kolmogorov_constants(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(a, 3.779_763_149_684_619_5, epsilon = 1e-13);
        assert_abs_diff_eq!(b, 1.058_267_367_978_799_7, epsilon = 1e-13);
        let (a, b) = kolmogorov_constants(0.5, 1.0).unwrap();
        assert_abs_diff_eq!(a, 2.486_189_947_949_928_0, epsilon = 1e-13);
        assert_abs_diff_eq!(b, 0.514_969_508_270_142_5, epsilon = 1e-13);
    }

    #[test]
    fn kolmogorov_bound_values() {
        assert_eq!(kolmogorov_bound(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kolmogorov_bound(1.0, 1.0, 0.01).unwrap(),
            0.863_445_704_960_343_8,
            epsilon = 1e-13
        );
        // r < 1 uses exponents (r/(r+2), (r+1)/(r+2)): check the power law
        // by evaluating at two theta values
        let (a, b) = kolmogorov_constants(0.5, 1.0).unwrap();
        let theta = 0.01f64;
        let expect = a * theta.powf(0.2) + b * theta.powf(0.6);
        assert_abs_diff_eq!(
            kolmogorov_bound(0.5, 0.5, theta).unwrap(),
            expect,
            epsilon = 1e-14
        );
    }

    #[test]
    fn bound_report_consistency() {
        let rep = BoundReport::new(2.0, 0.5, 0.02).unwrap();
        assert_abs_diff_eq!(rep.r, rep.mu * rep.mu / rep.sigma2, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.alpha, rep.mu / rep.sigma2, epsilon = 1e-12);
        assert!(rep.w_bound >= 0.0 && rep.k_bound >= 0.0);
        assert_eq!(rep.regime, Regime::ShapeAtLeastOne);
        let rep0 = BoundReport::new(0.5, 1.0, 0.0).unwrap();
        assert_eq!(rep0.w_bound, 0.0);
        assert_eq!(rep0.k_bound, 0.0);
        assert_eq!(rep0.regime, Regime::ShapeBelowOne);
    }

    #[test]
    fn bounds_are_monotone_in_theta() {
        for &(mu, s2) in &[(1.0, 1.0), (0.5, 1.0), (3.0, 0.5)] {
            let mut prev_w = 0.0;
            let mut prev_k = 0.0;
            for i in 1..=50 {
                let theta = 0.01 * i as f64;
                let w = wasserstein_bound(mu, s2, theta).unwrap();
                let k = kolmogorov_bound(mu, s2, theta).unwrap();
                assert!(w.is_finite() && k.is_finite());
                assert!(w >= prev_w && k >= prev_k);
                prev_w = w;
                prev_k = k;
            }
        }
    }

    #[test]
    fn gamma_pair_bound_values() {
        assert_eq!(gamma_pair_bound(2.0, 3.0, 2.0, 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(gamma_pair_bound(1.0, 1.0, 2.0, 1.0).unwrap(), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(
            gamma_pair_bound(2.0, 3.0, 1.0, 1.0).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            gamma_pair_bound(0.5, 1.0, 2.0, 2.0).unwrap(),
            1.75,
            epsilon = 1e-15
        );
        // symmetric in argument swap
        assert_eq!(
            gamma_pair_bound(0.7, 1.3, 2.1, 0.4).unwrap(),
            gamma_pair_bound(2.1, 0.4, 0.7, 1.3).unwrap()
        );
    }

    #[test]
    fn gamma_pair_bound_dominates_distance() {
        // same rate: pure shape shift, stochastically ordered, so the exact
        // distance is the mean gap and the bound is tight
        let d = crate::metrics::wasserstein(
            &crate::Dist::Gamma { r: 1.0, alpha: 1.0 },
            &crate::Dist::Gamma { r: 2.0, alpha: 1.0 },
            1e-9,
        )
        .unwrap();
        assert_abs_diff_eq!(gamma_pair_bound(1.0, 1.0, 2.0, 1.0).unwrap(), d.value, epsilon = 1e-8);
        for &(r1, a1, r2, a2) in &[
            (2.0, 3.0, 1.0, 1.0),
            (0.5, 1.0, 2.0, 2.0),
            (5.0, 2.0, 0.5, 0.5),
        ] {
            let d = crate::metrics::wasserstein(
                &crate::Dist::Gamma { r: r1, alpha: a1 },
                &crate::Dist::Gamma { r: r2, alpha: a2 },
                1e-9,
            )
            .unwrap();
            assert!(
                gamma_pair_bound(r1, a1, r2, a2).unwrap() >= d.value - 1e-8,
                "({r1},{a1}) vs ({r2},{a2})"
            );
        }
    }

    #[test]
    fn concentration_values() {
        assert_abs_diff_eq!(concentration_eps(1.0, 1.0, 0.1).unwrap(), 0.1, epsilon = 1e-15);
        // r = 0.5: sqrt(0.01) / Gamma(1.5)
        assert_abs_diff_eq!(
            concentration_eps(0.5, 1.0, 0.01).unwrap(),
            0.112_837_916_709_551_26,
            epsilon = 1e-14
        );
    }

    #[test]
    fn concentration_dominates_gamma_increments() {
        // P(z < Z <= z + delta) <= eps(delta) against the exact CDF
        for &r in &[0.3, 0.5, 1.0, 2.0, 5.0] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let g = crate::Dist::Gamma { r, alpha };
                let hi = g.quantile(0.999).unwrap();
                for &delta in &[1e-3, 1e-2, 0.1, 1.0] {
                    let eps = concentration_eps(r, alpha, delta).unwrap();
                    for i in 0..50 {
                        let z = hi * i as f64 / 49.0;
                        let inc = g.cdf(z + delta).unwrap() - g.cdf(z).unwrap();
                        assert!(
                            inc <= eps + 1e-12,
                            "r={r} alpha={alpha} z={z} delta={delta}: {inc} > {eps}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn example1_frozen_values() {
        let (theta, w_bound, exact) = example1_values(0.01).unwrap();
        assert_abs_diff_eq!(theta, 0.009_950_495_049_504_95, epsilon = 1e-15);
        assert_abs_diff_eq!(w_bound, 0.856_666_666_666_666_7, epsilon = 1e-14);
        assert_abs_diff_eq!(exact, 0.009_950_166_250_831_946, epsilon = 1e-16);
        // exact <= delta <= bound on (0, 1]
        for i in 1..=100 {
            let delta = i as f64 / 100.0;
            let (_, w_bound, exact) = example1_values(delta).unwrap();
            assert!(exact <= delta && delta <= w_bound);
        }
    }

    #[test]
    fn nb_frozen_values() {
        let (theta, w_bound, k_bound) = nb_bounds(1.0, 0.1).unwrap();
        assert_abs_diff_eq!(theta, 0.05, epsilon = 0.0);
        assert_abs_diff_eq!(w_bound, 1.850_205_816_381_865_7, epsilon = 1e-13);
        assert_abs_diff_eq!(k_bound, 1.538_854_975_480_556_6, epsilon = 1e-13);
        let (theta, _, _) = nb_bounds(2.0, 0.5).unwrap();
        assert_abs_diff_eq!(theta, 0.25, epsilon = 0.0);
        // w_bound is O(sqrt(p)) as p -> 0
        let (_, w1, _) = nb_bounds(1.0, 1e-4).unwrap();
        let (_, w2, _) = nb_bounds(1.0, 1e-6).unwrap();
        assert!(w2 < w1 / 9.0);
    }

    #[test]
    fn nb_sum_values() {
        assert_abs_diff_eq!(
            nb_sum_bound(1.0, 0.1, 1.0).unwrap(),
            2.250_205_816_381_865_7,
            epsilon = 1e-13
        );
        let (_, w_bound, _) = nb_bounds(1.0, 0.1).unwrap();
        assert_abs_diff_eq!(
            nb_sum_bound(1.0, 0.1, 0.0).unwrap(),
            w_bound + 0.1,
            epsilon = 1e-15
        );
        assert!(nb_sum_bound(1.0, 0.1, 2.0).unwrap() > nb_sum_bound(1.0, 0.1, 1.0).unwrap());
    }

    /// E|Y_a - Y_b| for independent exponentials with rates a, b.
    fn exp_gap(a: f64, b: f64) -> f64 {
        1.0 / a + 1.0 / b - 2.0 / (a + b)
    }

    #[test]
    fn conv_theta_single_component() {
        // one gamma component: two independent Exp(alpha) draws, E gap = 1/alpha
        let est = conv_theta(&[(2.0, 1.0)], 3, 200_000).unwrap();
        assert!((est.value - exp_gap(1.0, 1.0)).abs() < 3.0 * est.error);
        assert_eq!(est.n, Some(200_000));
    }

    #[test]
    fn conv_theta_two_rates_matches_mixture_oracle() {
        // components (1,1), (1,2): index weights (2/3, 1/3) and (0.8, 0.2)
        let w1 = [2.0 / 3.0, 1.0 / 3.0];
        let w2 = [0.8, 0.2];
        let rates = [1.0, 2.0];
        let mut oracle = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                oracle += w1[i] * w2[j] * exp_gap(rates[i], rates[j]);
            }
        }
        assert_abs_diff_eq!(oracle, 0.9, epsilon = 1e-15);
        let est = conv_theta(&[(1.0, 1.0), (1.0, 2.0)], 9, 400_000).unwrap();
        assert!(
            (est.value - oracle).abs() < 3.0 * est.error,
            "{} vs {oracle} (se {})",
            est.value,
            est.error
        );
    }

    #[test]
    fn conv_theta_is_deterministic() {
        let a = conv_theta(&[(1.0, 1.0), (2.0, 3.0)], 7, 1000).unwrap();
        let b = conv_theta(&[(1.0, 1.0), (2.0, 3.0)], 7, 1000).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.error, b.error);
    }
}
