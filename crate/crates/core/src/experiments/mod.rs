//! Monte Carlo experiment harness: parameter sweeps over reproducible
//! trials, reduced into [`ResultTable`]s that serialize to CSV or JSON.

mod runs;
mod table;
pub mod validate;

pub use runs::{
    run_beam_pattern, run_convergence, run_mse_b2u, run_mse_i2u, run_rate_curves,
    CONVERGENCE_IRS_SIZES,
};
pub use table::{fnv1a64, ResultTable, TableMetadata};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Which scenario knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Pilot receive SNR at the BS in dB (adjusts the pilot power).
    RxSnrDb,
    NBs,
    MIrs,
    PBsDbm,
    /// Distance ratio d_B2U/d_I2U (moves the IRS along its direction).
    RatioRa,
}

impl SweepVariable {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepVariable::RxSnrDb => "rx_snr_db",
            SweepVariable::NBs => "n_bs",
            SweepVariable::MIrs => "m_irs",
            SweepVariable::PBsDbm => "p_bs_dbm",
            SweepVariable::RatioRa => "ratio_ra",
        }
    }
}

/// A one-variable sweep with a fixed trial budget per point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials_per_point: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, trials_per_point: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if trials_per_point == 0 {
            return Err(Error::Config("sweep needs at least one trial per point".into()));
        }
        Ok(Self {
            variable,
            values,
            trials_per_point,
        })
    }
}

/// Derive the scenario at one sweep point; the base config is never
/// mutated.
pub fn derive_config(base: &SystemConfig, variable: SweepVariable, value: f64) -> Result<SystemConfig> {
    let mut cfg = base.clone();
    match variable {
        SweepVariable::RxSnrDb => {
            // rx_snr = alpha_b2u * P_q / noise  =>  solve for the pilot power
            let alpha_db = 10.0 * base.alpha_b2u()?.log10();
            cfg.p_q_dbm = value + base.noise_dbm - alpha_db;
        }
        SweepVariable::NBs => {
            if value <= 0.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("n_bs sweep value {value} is not a positive integer")));
            }
            cfg.n_bs = value as usize;
        }
        SweepVariable::MIrs => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("m_irs sweep value {value} is not a non-negative integer")));
            }
            cfg.m_irs = value as usize;
        }
        SweepVariable::PBsDbm => {
            cfg.p_bs_dbm = value;
        }
        SweepVariable::RatioRa => {
            cfg.irs_spherical.distance_m = irs_distance_for_ratio(base, value)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Radial IRS distance along the configured IRS direction that puts the
/// IRS at `d_I2U = d_B2U / ratio` from the user.
fn irs_distance_for_ratio(base: &SystemConfig, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::Config(format!("distance ratio must be positive, got {ratio}")));
    }
    let d_b2u = base.d_b2u();
    let target = d_b2u / ratio;
    let el = base.irs_spherical.elevation_deg.to_radians();
    let az = base.irs_spherical.azimuth_deg.to_radians();
    let dir = [el.cos() * az.cos(), el.cos() * az.sin(), -el.sin()];
    let user = base.user_pos()?;
    let b = dir[0] * user.x + dir[1] * user.y + dir[2] * user.z;
    let disc = b * b - d_b2u * d_b2u + target * target;
    if disc < 0.0 {
        return Err(Error::Config(format!(
            "no IRS placement along ({}, {})° reaches distance ratio {ratio}",
            base.irs_spherical.elevation_deg, base.irs_spherical.azimuth_deg
        )));
    }
    let r = b + disc.sqrt();
    if !(r > 0.0) {
        return Err(Error::Config(format!(
            "distance ratio {ratio} puts the IRS behind the BS"
        )));
    }
    Ok(r)
}

/// Hash of the canonical JSON encoding of a config.
pub fn config_hash(cfg: &SystemConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serialization cannot fail");
    format!("{:016x}", fnv1a64(canonical.as_bytes()))
}
