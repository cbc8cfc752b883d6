//! Achievable-rate analysis: exact rate from the power matrix, the
//! trace-based closed-form approximation, and the counting upper bound.

use crate::beamforming::{assemble_t, bs_beam, compute_damped_matrices, PowerMatrix, Scenario};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::AngleEstimate;
use crate::geometry::steering_vector;
use crate::linalg::{quad_form, C64};

/// Rates in bits/s/Hz plus the effective SNR of the exact expression.
#[derive(Debug, Clone, Copy)]
pub struct RateReport {
    pub rate_exact: f64,
    pub rate_approx: f64,
    pub rate_upper: f64,
    pub snr_effective: f64,
}

/// Exact achievable rate `log₂(1 + wᴴTw/σ₀²)` with `w` the eigen beam of
/// `T` at power `p_bs`.
pub fn achievable_rate(t: &PowerMatrix, p_bs: f64, noise: f64) -> Result<f64> {
    if !(noise > 0.0) {
        return Err(Error::Config("noise power must be positive".into()));
    }
    let w = bs_beam(t, p_bs)?;
    Ok((1.0 + quad_form(&t.t, &w) / noise).log2())
}

/// Trace-route rate approximation: `log₂(1 + P_BS Ω/σ₀²)` where `Ω` is the
/// explicit double sum over the damped matrices and the BS→IRS steering
/// vectors (algebraically the trace of `T`, computed here without
/// assembling `T`).
pub fn approx_rate(estimate: &AngleEstimate, xi: &[C64], config: &SystemConfig) -> Result<f64> {
    let n = config.n_bs;
    let m = config.m_irs;
    if xi.len() != m {
        return Err(Error::Contract(format!(
            "xi has {} entries for an IRS of {m} elements",
            xi.len()
        )));
    }
    let stats = config.link_stats()?;
    let dm = compute_damped_matrices(estimate, n, m)?;

    let mut omega = C64::new(
        n as f64 * stats.beta_b2u + n as f64 * stats.sigma_nlos_sq,
        0.0,
    );
    if m > 0 {
        let b2i = config.true_angles()?.b2i;
        let b_arr = steering_vector(b2i, m)?.elements;
        let a_dep = steering_vector(b2i, n)?.elements;

        let mut cascade = C64::new(0.0, 0.0);
        for r in 0..m {
            for c in 0..m {
                cascade += xi[r].conj() * xi[c] * dm.b.get(r, c) * b_arr[r].conj() * b_arr[c];
            }
        }
        omega += n as f64 * stats.beta_b2i2u * cascade;

        let mut cross = C64::new(0.0, 0.0);
        for r in 0..m {
            let mut inner = C64::new(0.0, 0.0);
            for c in 0..n {
                inner += dm.c.get(r, c) * a_dep[c].conj();
            }
            cross += xi[r].conj() * b_arr[r].conj() * inner;
        }
        omega += 2.0 * (stats.beta_b2i2u * stats.beta_b2u).sqrt() * cross.re;
    }

    if omega.im.abs() > 1e-9 * omega.re.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "imaginary residue {} in the rate approximation",
            omega.im
        )));
    }
    Ok((1.0 + config.p_bs_mw() * omega.re / config.noise_mw()).log2())
}

/// Upper bound `log₂(1 + P_BS N (β_c M² + 2√(β_c β_d) M + β_d + σ²_NLOS)/σ₀²)`.
pub fn upper_bound_rate(config: &SystemConfig) -> Result<f64> {
    let stats = config.link_stats()?;
    let n = config.n_bs as f64;
    let m = config.m_irs as f64;
    let omega_bound = n
        * (stats.beta_b2i2u * m * m
            + 2.0 * (stats.beta_b2i2u * stats.beta_b2u).sqrt() * m
            + stats.beta_b2u
            + stats.sigma_nlos_sq);
    Ok((1.0 + config.p_bs_mw() * omega_bound / config.noise_mw()).log2())
}

/// Full report for an optimized solution.
pub fn rate_report(
    config: &SystemConfig,
    estimate: &AngleEstimate,
    xi: &[C64],
) -> Result<RateReport> {
    let scenario = Scenario::from_config(config)?;
    let dm = compute_damped_matrices(estimate, config.n_bs, config.m_irs)?;
    let t = assemble_t(&dm, xi, &scenario.h_bar, &scenario.stats)?;
    let noise = config.noise_mw();
    let w = bs_beam(&t, config.p_bs_mw())?;
    let snr_effective = quad_form(&t.t, &w) / noise;
    Ok(RateReport {
        rate_exact: (1.0 + snr_effective).log2(),
        rate_approx: approx_rate(estimate, xi, config)?,
        rate_upper: upper_bound_rate(config)?,
        snr_effective,
    })
}
