//! Rician channel realizations for the three links and the power-scale
//! conversions feeding them.
//!
//! Each channel mixes a steering-vector LOS part with an i.i.d. CN(0,1)
//! NLOS part:
//!
//! ```text
//! h = √(α v/(v+1)) · h_los + √(α/(v+1)) · h_nlos
//! ```
//!
//! The BS→IRS matrix LOS is the rank-one outer product of the IRS arrival
//! and BS departure steering vectors.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{LinkAngles, SystemConfig};
use crate::error::{Error, Result};
use crate::geometry::{steering_vector_on, UraGrid};
use crate::linalg::{CMat, C64};

/// Large-scale gain `distance^(−exponent)` (linear).
pub fn path_loss(distance: f64, exponent: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Config(format!(
            "path loss needs a positive distance, got {distance}"
        )));
    }
    Ok(distance.powf(-exponent))
}

/// dBm to linear milliwatts.
pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Per-link fading parameters.
#[derive(Debug, Clone, Copy)]
pub struct LinkParams {
    pub rician_k: f64,
    pub path_loss_exp: f64,
    pub distance: f64,
}

impl LinkParams {
    pub fn new(rician_k: f64, path_loss_exp: f64, distance: f64) -> Result<Self> {
        if !(rician_k >= 0.0) {
            return Err(Error::Config("Rician factor must be >= 0".into()));
        }
        if !(distance > 0.0) {
            return Err(Error::Config("link distance must be positive".into()));
        }
        Ok(Self {
            rician_k,
            path_loss_exp,
            distance,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.distance.powf(-self.path_loss_exp)
    }
}

/// One draw of all three channels plus their LOS components and gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// BS→IRS, M×N.
    pub h_b2i: CMat,
    /// IRS→user, length M.
    pub h_i2u: Vec<C64>,
    /// BS→user, length N.
    pub h_b2u: Vec<C64>,
    pub los_h_b2i: CMat,
    pub los_h_i2u: Vec<C64>,
    pub los_h_b2u: Vec<C64>,
    /// (α_B2I, α_I2U, α_B2U).
    pub alphas: (f64, f64, f64),
}

/// One CN(0, 1) sample: two independent real normals scaled by 1/√2.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unscaled LOS outer product of the BS→IRS link, `b(arrival) a(departure)ᵀ`
/// at the true geometric angles (M×N).
pub fn b2i_los_outer(config: &SystemConfig) -> Result<CMat> {
    let angles = config.true_angles()?;
    let grid_m = UraGrid::new(config.m_irs)?;
    let grid_n = UraGrid::new(config.n_bs)?;
    let b = steering_vector_on(&grid_m, angles.b2i);
    let a = steering_vector_on(&grid_n, angles.b2i);
    Ok(CMat::outer(&b.elements, &a.elements))
}

/// Draw a realization with the LOS parts at the true geometric angles.
pub fn sample_channels<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let angles = config.true_angles()?;
    sample_channels_with_angles(config, &angles, rng)
}

/// Draw a realization with caller-supplied link angles. The Monte Carlo
/// power oracle uses this to re-draw user-side angles per trial while the
/// infrastructure BS→IRS angles stay fixed.
pub fn sample_channels_with_angles<R: Rng + ?Sized>(
    config: &SystemConfig,
    angles: &LinkAngles,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let n = config.n_bs;
    let m = config.m_irs;
    let grid_n = UraGrid::new(n)?;
    let grid_m = if m > 0 { Some(UraGrid::new(m)?) } else { None };

    let alpha_b2i = config.alpha_b2i()?;
    let alpha_i2u = config.alpha_i2u()?;
    let alpha_b2u = config.alpha_b2u()?;

    let (v_b2i, v_i2u, v_b2u) = (config.rician.b2i, config.rician.i2u, config.rician.b2u);

    // BS→IRS
    let (los_h_b2i, h_b2i) = if let Some(grid_m) = &grid_m {
        let b = steering_vector_on(grid_m, angles.b2i);
        let a = steering_vector_on(&grid_n, angles.b2i);
        let los = CMat::outer(&b.elements, &a.elements);
        let w_los = (alpha_b2i * v_b2i / (v_b2i + 1.0)).sqrt();
        let w_nlos = (alpha_b2i / (v_b2i + 1.0)).sqrt();
        let full = CMat::from_fn(m, n, |r, c| {
            w_los * los.get(r, c) + w_nlos * complex_normal(rng)
        });
        (los, full)
    } else {
        (CMat::zeros(0, n), CMat::zeros(0, n))
    };

    // IRS→user
    let (los_h_i2u, h_i2u) = if let Some(grid_m) = &grid_m {
        let b = steering_vector_on(grid_m, angles.i2u);
        let w_los = (alpha_i2u * v_i2u / (v_i2u + 1.0)).sqrt();
        let w_nlos = (alpha_i2u / (v_i2u + 1.0)).sqrt();
        let full = b
            .elements
            .iter()
            .map(|e| w_los * e + w_nlos * complex_normal(rng))
            .collect();
        (b.elements, full)
    } else {
        (Vec::new(), Vec::new())
    };

    // BS→user
    let a = steering_vector_on(&grid_n, angles.b2u);
    let w_los = (alpha_b2u * v_b2u / (v_b2u + 1.0)).sqrt();
    let w_nlos = (alpha_b2u / (v_b2u + 1.0)).sqrt();
    let h_b2u = a
        .elements
        .iter()
        .map(|e| w_los * e + w_nlos * complex_normal(rng))
        .collect();

    Ok(ChannelRealization {
        h_b2i,
        h_i2u,
        h_b2u,
        los_h_b2i,
        los_h_i2u,
        los_h_b2u: a.elements,
        alphas: (alpha_b2i, alpha_i2u, alpha_b2u),
    })
}

impl ChannelRealization {
    /// Effective channel `g = h_B2U + (h_I2Uᵀ Θ H_B2I)ᵀ` for IRS phases ξ.
    pub fn effective_channel(&self, xi: &[C64]) -> Vec<C64> {
        let n = self.h_b2u.len();
        let m = self.h_i2u.len();
        assert_eq!(xi.len(), m, "phase vector length must match IRS size");
        let mut g = self.h_b2u.clone();
        for r in 0..m {
            let s = self.h_i2u[r] * xi[r];
            let row = self.h_b2i.row(r);
            for c in 0..n {
                g[c] += s * row[c];
            }
        }
        g
    }
}
