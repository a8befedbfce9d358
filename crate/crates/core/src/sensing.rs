//! Closed-form energy-detection probabilities under Rayleigh fading, BPSK
//! reporting errors, and OR-rule fusion at a coalition head.
//!
//! Every function here is pure; probabilities are returned as plain `f64`
//! in `[0, 1]`.

use crate::error::{Error, Result};
use crate::network::RadioParams;

/// Path-loss gain `kappa / d^mu` at distance `d` meters.
pub fn path_loss(d: f64, kappa: f64, mu: f64) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::domain(format!("path loss needs a positive distance, got {d}")));
    }
    Ok(kappa / d.powf(mu))
}

/// Average received SNR (linear) of a `tx_power` mW transmission over `d` meters.
pub fn avg_snr(tx_power: f64, d: f64, params: &RadioParams) -> Result<f64> {
    Ok(tx_power * path_loss(d, params.kappa, params.mu)? / params.noise)
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-x} sum_{n=0}^{k} x^n / n!`, the Poisson CDF, evaluated term by term in log space.
fn poisson_cdf(k: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let lx = x.ln();
    let mut ln_fact = 0.0;
    let terms = (0..=k).map(|n| {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        (-x + n as f64 * lx - ln_fact).exp()
    });
    compensated_sum(terms).min(1.0)
}

/// Non-cooperative false-alarm probability `Gamma(m, lambda/2) / Gamma(m)`.
///
/// For integer `m` this is the Poisson CDF `e^{-lambda/2} sum_{n<m} (lambda/2)^n / n!`.
/// Requires `lambda >= 0` and `m >= 1`.
pub fn false_alarm_probability(lambda: f64, m: u32) -> f64 {
    debug_assert!(lambda >= 0.0 && m >= 1);
    poisson_cdf(m.saturating_sub(1), lambda.max(0.0) / 2.0)
}

/// Detection probability of an energy detector under Rayleigh fading with
/// average SNR `snr_pu`, threshold `lambda` and time-bandwidth product `m`.
///
/// The bracketed difference of the textbook form cancels catastrophically for
/// small SNR, where it is multiplied by `((1+snr)/snr)^{m-1}`. With
/// `x = lambda/2` and `z = x * snr / (1 + snr)` the second term equals
/// `e^{-x} x^{m-1} sum_{k>=0} z^k / (m-1+k)!`, a sum of positive terms that
/// is evaluated directly.
pub fn detection_probability(snr_pu: f64, lambda: f64, m: u32) -> Result<f64> {
    if snr_pu.is_nan() || snr_pu <= 0.0 {
        return Err(Error::domain(format!("detection needs a positive SNR, got {snr_pu}")));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::domain(format!("threshold must be >= 0, got {lambda}")));
    }
    if m < 2 {
        return Err(Error::domain(format!("time-bandwidth product must be >= 2, got {m}")));
    }
    let x = lambda / 2.0;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let head = poisson_cdf(m - 2, x);

    let z = if snr_pu.is_infinite() { x } else { x * (snr_pu / (1.0 + snr_pu)) };
    let order = m - 1;
    let log_lead = -x + order as f64 * x.ln() - ln_factorial(order);

    // Relative terms t_k = z^k (m-1)! / (m-1+k)!, rescaled to stay finite.
    const RESCALE: f64 = 1e280;
    let mut log_scale = 0.0;
    let mut term = 1.0f64;
    let mut tail = 1.0f64;
    let mut k = 0u64;
    loop {
        k += 1;
        term *= z / (order as f64 + k as f64);
        tail += term;
        if tail > RESCALE {
            tail /= RESCALE;
            term /= RESCALE;
            log_scale += RESCALE.ln();
        }
        if (k as f64 > z && term <= tail * 1e-17) || term == 0.0 {
            break;
        }
    }
    let body = (log_lead + tail.ln() + log_scale).exp();
    Ok((head + body).clamp(0.0, 1.0))
}

/// `1 - detection_probability`.
pub fn missing_probability(snr_pu: f64, lambda: f64, m: u32) -> Result<f64> {
    Ok(1.0 - detection_probability(snr_pu, lambda, m)?)
}

/// BPSK bit-error probability over a Rayleigh channel with average SNR `snr_link`.
///
/// Computed as `0.5 / ((1 + snr)(1 + sqrt(snr / (1 + snr))))`, algebraically
/// equal to `0.5 (1 - sqrt(snr / (1 + snr)))` without the cancellation at high SNR.
pub fn reporting_error_probability(snr_link: f64) -> f64 {
    let snr = snr_link.max(0.0);
    if snr.is_infinite() {
        return 0.0;
    }
    let root = (snr / (1.0 + snr)).sqrt();
    0.5 / ((1.0 + snr) * (1.0 + root))
}

/// OR-fusion missing probability from `(P_m, P_e)` pairs, in iteration order.
pub(crate) fn fused_missing(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs
        .into_iter()
        .map(|(pm, pe)| pm * (1.0 - pe) + (1.0 - pm) * pe)
        .product()
}

/// OR-fusion false-alarm probability for a common `pf` and per-member reporting errors.
pub(crate) fn fused_false_alarm(pf: f64, report_errs: impl IntoIterator<Item = f64>) -> f64 {
    let silent: f64 = report_errs
        .into_iter()
        .map(|pe| (1.0 - pf) * (1.0 - pe) + pf * pe)
        .product();
    1.0 - silent
}

fn check_probabilities(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::domain(format!("{name} must not be empty")));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::domain(format!("{name} entry {v} is not a probability")));
    }
    Ok(())
}

/// Missing probability of a coalition whose members report to the head over
/// noisy links. The head's own entry carries `report_err = 0`.
pub fn coalition_missing_probability(member_miss: &[f64], member_report_err: &[f64]) -> Result<f64> {
    check_probabilities("member_miss", member_miss)?;
    check_probabilities("member_report_err", member_report_err)?;
    if member_miss.len() != member_report_err.len() {
        return Err(Error::domain("member lists differ in length"));
    }
    Ok(fused_missing(member_miss.iter().copied().zip(member_report_err.iter().copied())))
}

/// False-alarm probability of a coalition with common local false alarm `pf`.
pub fn coalition_false_alarm_probability(pf: f64, member_report_err: &[f64]) -> Result<f64> {
    check_probabilities("pf", &[pf])?;
    check_probabilities("member_report_err", member_report_err)?;
    Ok(fused_false_alarm(pf, member_report_err.iter().copied()))
}

/// Inverts [`false_alarm_probability`] by bisection: the threshold at which an
/// SU's local false-alarm probability equals `pf_target`.
pub fn lambda_for_target_pf(pf_target: f64, m: u32) -> Result<f64> {
    if !(pf_target > 0.0 && pf_target < 1.0) {
        return Err(Error::domain(format!("target false alarm must lie in (0, 1), got {pf_target}")));
    }
    if m < 1 {
        return Err(Error::domain("time-bandwidth product must be >= 1"));
    }
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while false_alarm_probability(hi, m) >= pf_target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("threshold search diverged"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if false_alarm_probability(mid, m) >= pf_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
