//! Reference values the trained solver is judged against: the closed-form
//! option portfolio price and a Monte Carlo evaluation of the control
//! problem's exact solution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal::normal_cdf;
use crate::problems::{hjb_terminal, BlackScholesParams, HjbParams};
use crate::rng::{CounterRng, Stream};

/// Relative error |predicted - reference| / |reference|.
pub fn relative_error(predicted: f64, reference: f64) -> f64 {
    (predicted - reference).abs() / reference.abs()
}

/// Closed-form value of the option portfolio: `num_options` times the
/// single-asset European price.
pub fn bs_closed_form(params: &BlackScholesParams, horizon: f64) -> Result<f64> {
    params.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(
            "closed form needs a positive horizon".into(),
        ));
    }
    let BlackScholesParams {
        rate,
        vol,
        strike,
        spot,
        is_call,
        num_options,
    } = *params;
    let sqrt_t = horizon.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * vol * vol) * horizon) / (vol * sqrt_t);
    let d2 = d1 - vol * sqrt_t;
    let discounted_strike = strike * (-rate * horizon).exp();
    let single = if is_call {
        spot * normal_cdf(d1) - discounted_strike * normal_cdf(d2)
    } else {
        discounted_strike * normal_cdf(-d2) - spot * normal_cdf(-d1)
    };
    Ok(num_options as f64 * single)
}

/// Monte Carlo estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo evaluation of the control problem's exact solution
/// u(t, x) = -(1/λ) ln E[exp(-λ g(x + √2 (W_T - W_t)))].
///
/// The inner expectation is reduced with a log-sum-exp shift so large λ does
/// not underflow. The returned standard error comes from the delta method
/// applied to the log of the sample mean.
pub fn hjb_exact(
    params: &HjbParams,
    horizon: f64,
    x: &[f64],
    t: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    params.validate()?;
    if x.len() != params.dim {
        return Err(Error::DimensionMismatch(format!(
            "evaluation point has {} coordinates, problem has {}",
            x.len(),
            params.dim
        )));
    }
    if !(t >= 0.0) || t > horizon {
        return Err(Error::InvalidArgument(format!(
            "evaluation time {t} must lie in [0, {horizon}]"
        )));
    }
    if mc_samples == 0 {
        return Err(Error::InvalidArgument(
            "at least one Monte Carlo sample is required".into(),
        ));
    }

    // Degenerate horizon: u(T, x) = g(x), no sampling needed.
    if t == horizon {
        return Ok(McEstimate {
            value: hjb_terminal(x),
            std_error: 0.0,
        });
    }

    let rng = CounterRng::new(seed, Stream::OracleNoise);
    let dim = params.dim;
    let scale = (2.0 * (horizon - t)).sqrt();

    // Terminal values g(x + √2 (W_T - W_t)), one per sample. The draws only
    // depend on (seed, sample, coordinate), so a fixed seed gives common
    // random numbers across different λ.
    let terminal_values: Vec<f64> = (0..mc_samples)
        .into_par_iter()
        .map(|sample| {
            let mut shifted = vec![0.0; dim];
            for (coord, v) in shifted.iter_mut().enumerate() {
                *v = x[coord] + scale * rng.normal(sample as u64, coord as u64, 0);
            }
            hjb_terminal(&shifted)
        })
        .collect();

    // Log-sum-exp with the minimum of g as the shift: exp(-λ (g - min g))
    // is at most one, so nothing underflows even for λ in the tens.
    let lambda = params.lambda;
    let g_min = terminal_values.iter().copied().fold(f64::INFINITY, f64::min);
    let n = mc_samples as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &g in &terminal_values {
        let w = (-lambda * (g - g_min)).exp();
        sum += w;
        sum_sq += w * w;
    }
    let mean_w = sum / n;
    let value = g_min - mean_w.ln() / lambda;
    let var_w = (sum_sq - n * mean_w * mean_w) / (n - 1.0).max(1.0);
    let std_error = var_w.sqrt() / (mean_w * lambda * n.sqrt());

    Ok(McEstimate { value, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(is_call: bool, strike: f64) -> BlackScholesParams {
        BlackScholesParams {
            rate: 0.1,
            vol: 0.2,
            strike,
            spot: 100.0,
            is_call,
            num_options: 1,
        }
    }

    /// Independent quadrature evaluation of the single-asset call:
    /// C = e^{-rT} ∫ max(S e^{(r-σ²/2)T + σ√T u} - K, 0) φ(u) du.
    fn call_by_quadrature(p: &BlackScholesParams, horizon: f64) -> f64 {
        let n = 400_000;
        let lo = -10.0;
        let hi = 10.0;
        let h = (hi - lo) / n as f64;
        let pdf = |u: f64| (-u * u / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let payoff = |u: f64| {
            let s = p.spot * ((p.rate - 0.5 * p.vol * p.vol) * horizon + p.vol * horizon.sqrt() * u).exp();
            (s - p.strike).max(0.0) * pdf(u)
        };
        let mut acc = payoff(lo) + payoff(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * payoff(lo + i as f64 * h);
        }
        (-p.rate * horizon).exp() * acc * h / 3.0
    }

    #[test]
    fn call_value_matches_quadrature() {
        let p = params(true, 100.0);
        let expected = call_by_quadrature(&p, 1.0);
        let value = bs_closed_form(&p, 1.0).unwrap();
        assert!(
            (value - expected).abs() < 1e-6,
            "closed form {value}, quadrature {expected}"
        );
        // four-decimal figure for the standard parameter set
        assert!((value - 13.2697).abs() < 2e-4, "value {value}");
    }

    #[test]
    fn put_call_parity_across_strikes() {
        for k in (70..=140).step_by(10) {
            let strike = k as f64;
            let call = bs_closed_form(&params(true, strike), 1.0).unwrap();
            let put = bs_closed_form(&params(false, strike), 1.0).unwrap();
            let forward = 100.0 - strike * (-0.1f64).exp();
            assert!(
                (call - put - forward).abs() < 1e-10,
                "strike {strike}: parity residual {}",
                call - put - forward
            );
        }
    }

    #[test]
    fn deep_in_the_money_call_approaches_spot() {
        let p = params(true, 1e-9);
        let value = bs_closed_form(&p, 1.0).unwrap();
        assert!((value - 100.0).abs() < 1e-6, "value {value}");
    }

    #[test]
    fn call_decreases_and_put_increases_in_strike() {
        let mut last_call = f64::INFINITY;
        let mut last_put = f64::NEG_INFINITY;
        for k in (70..=140).step_by(10) {
            let call = bs_closed_form(&params(true, k as f64), 1.0).unwrap();
            let put = bs_closed_form(&params(false, k as f64), 1.0).unwrap();
            assert!(call < last_call);
            assert!(put > last_put);
            last_call = call;
            last_put = put;
        }
    }

    #[test]
    fn portfolio_scales_single_option() {
        let mut p = params(true, 100.0);
        let single = bs_closed_form(&p, 1.0).unwrap();
        p.num_options = 100;
        let portfolio = bs_closed_form(&p, 1.0).unwrap();
        assert!((portfolio - 100.0 * single).abs() < 1e-9);
    }

    #[test]
    fn closed_form_rejects_degenerate_horizon() {
        assert!(bs_closed_form(&params(true, 100.0), 0.0).is_err());
        assert!(bs_closed_form(&params(true, 100.0), -1.0).is_err());
    }

    #[test]
    fn control_value_at_terminal_time_is_terminal_condition() {
        let p = HjbParams { lambda: 5.0, dim: 3 };
        let x = [0.3, -0.2, 1.0];
        let est = hjb_exact(&p, 1.0, &x, 1.0, 10, 0).unwrap();
        assert_eq!(est.value, hjb_terminal(&x));
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn control_value_rejects_time_past_horizon() {
        let p = HjbParams { lambda: 1.0, dim: 1 };
        assert!(hjb_exact(&p, 1.0, &[0.0], 1.5, 10, 0).is_err());
    }

    #[test]
    fn estimates_from_two_seeds_agree() {
        let p = HjbParams { lambda: 1.0, dim: 10 };
        let x = vec![0.0; 10];
        let a = hjb_exact(&p, 1.0, &x, 0.0, 100_000, 1).unwrap();
        let b = hjb_exact(&p, 1.0, &x, 0.0, 100_000, 2).unwrap();
        let combined = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
        assert!(
            (a.value - b.value).abs() <= 4.0 * combined,
            "{} vs {} (combined se {combined})",
            a.value,
            b.value
        );
    }

    #[test]
    fn value_is_non_increasing_in_lambda_with_common_samples() {
        let x = vec![0.0; 20];
        let mut last = f64::INFINITY;
        for &lambda in &[1.0, 2.0, 5.0, 20.0, 60.0] {
            let p = HjbParams { lambda, dim: 20 };
            let est = hjb_exact(&p, 1.0, &x, 0.0, 50_000, 7).unwrap();
            assert!(
                est.value <= last + 1e-12,
                "λ={lambda}: {} after {last}",
                est.value
            );
            last = est.value;
        }
    }

    #[test]
    fn value_is_bounded_by_plain_mean() {
        // Jensen: -(1/λ) ln E[e^{-λ G}] ≤ E[G], with shared draws.
        let p = HjbParams { lambda: 3.0, dim: 8 };
        let x = vec![0.1; 8];
        let est = hjb_exact(&p, 1.0, &x, 0.0, 50_000, 3).unwrap();

        // plain mean of the same terminal draws
        let rng = CounterRng::new(3, Stream::OracleNoise);
        let scale = (2.0f64).sqrt();
        let mut sum = 0.0;
        for sample in 0..50_000u64 {
            let mut shifted = [0.0; 8];
            for coord in 0..8 {
                shifted[coord] = 0.1 + scale * rng.normal(sample, coord as u64, 0);
            }
            sum += hjb_terminal(&shifted);
        }
        let plain_mean = sum / 50_000.0;
        assert!(est.value <= plain_mean + 1e-12);
    }

    #[test]
    fn large_lambda_does_not_underflow() {
        let p = HjbParams { lambda: 60.0, dim: 100 };
        let x = vec![0.0; 100];
        let est = hjb_exact(&p, 1.0, &x, 0.0, 20_000, 5).unwrap();
        assert!(est.value.is_finite());
        assert!(est.std_error.is_finite() && est.std_error >= 0.0);
    }
}
