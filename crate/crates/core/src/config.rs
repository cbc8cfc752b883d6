//! Scenario configuration: array sizes, powers, fading statistics, node
//! placements, optimizer knobs and the Monte Carlo seed.
//!
//! Powers are configured in dBm and converted to linear milliwatts exactly
//! once, at this boundary; everything downstream works in mW.

use serde::{Deserialize, Serialize};

use crate::channel::{dbm_to_linear, LinkParams};
use crate::error::{Error, Result};
use crate::geometry::{cartesian_from_spherical, effective_angles, EffectiveAnglePair, Position};

/// Rician K-factors of the three links.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicianFactors {
    pub b2u: f64,
    pub i2u: f64,
    pub b2i: f64,
}

/// Path-loss exponents of the three links.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossExponents {
    pub b2u: f64,
    pub i2u: f64,
    pub b2i: f64,
}

/// Node placement in spherical coordinates relative to the BS.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphericalPlacement {
    pub distance_m: f64,
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

impl SphericalPlacement {
    pub fn new(distance_m: f64, elevation_deg: f64, azimuth_deg: f64) -> Self {
        Self {
            distance_m,
            elevation_deg,
            azimuth_deg,
        }
    }

    pub fn position(&self) -> Result<Position> {
        cartesian_from_spherical(
            self.distance_m,
            self.elevation_deg.to_radians(),
            self.azimuth_deg.to_radians(),
        )
    }
}

/// Knobs of the projected-gradient IRS optimizer.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerParams {
    /// ℓp exponent approximating the ℓ∞ modulus bound; even, ≥ 4.
    pub p: f64,
    /// Barrier scale.
    pub kappa: f64,
    /// Relative halting threshold on the objective / iterate change.
    pub eps: f64,
    pub n_iter_inner: usize,
    pub n_iter_outer: usize,
    /// Grid points of the [0, 1] line search (one golden-section refinement
    /// runs around the best grid point).
    pub line_search_grid: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            p: 20.0,
            kappa: 100.0,
            eps: 1e-4,
            n_iter_inner: 200,
            n_iter_outer: 30,
            line_search_grid: 64,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 4.0) || self.p.fract() != 0.0 || (self.p as u64) % 2 != 0 {
            return Err(Error::Config(format!(
                "optimizer p must be an even integer >= 4, got {}",
                self.p
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::Config("optimizer kappa must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config("optimizer eps must be positive".into()));
        }
        if self.n_iter_inner == 0 || self.n_iter_outer == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if self.line_search_grid < 2 {
            return Err(Error::Config("line search needs at least 2 grid points".into()));
        }
        Ok(())
    }
}

/// Full scenario description. The BS is fixed at the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// BS antennas; even perfect square.
    pub n_bs: usize,
    /// IRS elements; even perfect square, or 0 for a no-IRS baseline.
    pub m_irs: usize,
    pub p_bs_dbm: f64,
    /// Uplink pilot power.
    pub p_q_dbm: f64,
    /// Receiver noise power, used at both the BS (pilot) and the user (data).
    pub noise_dbm: f64,
    pub rician: RicianFactors,
    pub chi: PathLossExponents,
    pub irs_spherical: SphericalPlacement,
    pub user_spherical: SphericalPlacement,
    pub optimizer: OptimizerParams,
    pub seed: u64,
    pub trials: usize,
}

impl Default for SystemConfig {
    /// Desk-scale defaults: canonical scenario at 2.45 GHz with the IRS at
    /// (42 m, 63°, −16°) and the user at (41 m, 47°, −16°). The IRS size is
    /// shrunk to 64 elements and trials to 10⁴ so every experiment finishes
    /// in seconds; larger values are one config edit away.
    fn default() -> Self {
        Self {
            n_bs: 16,
            m_irs: 64,
            p_bs_dbm: 10.0,
            p_q_dbm: 10.0,
            noise_dbm: -60.0,
            rician: RicianFactors {
                b2u: 5.0,
                i2u: 5.0,
                b2i: 5.0,
            },
            chi: PathLossExponents {
                b2u: 2.5,
                i2u: 2.5,
                b2i: 2.5,
            },
            irs_spherical: SphericalPlacement::new(42.0, 63.0, -16.0),
            user_spherical: SphericalPlacement::new(41.0, 47.0, -16.0),
            optimizer: OptimizerParams::default(),
            seed: 1,
            trials: 10_000,
        }
    }
}

fn even_perfect_square(n: usize) -> bool {
    let side = (n as f64).sqrt().round() as usize;
    side * side == n && side % 2 == 0
}

impl SystemConfig {
    /// Default scenario for angle-estimation experiments: the user is moved
    /// near boresight (elevation 88°) so every antipodal pair difference
    /// stays inside the principal branch for N up to 64. Estimating far
    /// off-boresight users aliases the pair phases and biases the estimator.
    pub fn estimation_default() -> Self {
        Self {
            user_spherical: SphericalPlacement::new(41.0, 88.0, -16.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !even_perfect_square(self.n_bs) {
            return Err(Error::Config(format!(
                "n_bs must be an even perfect square (4, 16, 36, 64, ...), got {}",
                self.n_bs
            )));
        }
        if self.m_irs != 0 && !even_perfect_square(self.m_irs) {
            return Err(Error::Config(format!(
                "m_irs must be 0 or an even perfect square, got {}",
                self.m_irs
            )));
        }
        for (name, v) in [
            ("p_bs_dbm", self.p_bs_dbm),
            ("p_q_dbm", self.p_q_dbm),
            ("noise_dbm", self.noise_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        for (name, v) in [
            ("rician.b2u", self.rician.b2u),
            ("rician.i2u", self.rician.i2u),
            ("rician.b2i", self.rician.b2i),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0")));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.irs_spherical.position()?;
        self.user_spherical.position()?;
        self.optimizer.validate()?;
        Ok(())
    }

    pub fn bs_pos(&self) -> Position {
        Position::origin()
    }

    pub fn irs_pos(&self) -> Result<Position> {
        self.irs_spherical.position()
    }

    pub fn user_pos(&self) -> Result<Position> {
        self.user_spherical.position()
    }

    pub fn d_b2u(&self) -> f64 {
        self.user_spherical.distance_m
    }

    pub fn d_b2i(&self) -> f64 {
        self.irs_spherical.distance_m
    }

    pub fn d_i2u(&self) -> Result<f64> {
        Ok(self.irs_pos()?.distance_to(&self.user_pos()?))
    }

    pub fn p_bs_mw(&self) -> f64 {
        dbm_to_linear(self.p_bs_dbm)
    }

    pub fn p_q_mw(&self) -> f64 {
        dbm_to_linear(self.p_q_dbm)
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_linear(self.noise_dbm)
    }

    /// Fading parameters of the BS→user link.
    pub fn link_b2u(&self) -> Result<LinkParams> {
        LinkParams::new(self.rician.b2u, self.chi.b2u, self.d_b2u())
    }

    /// Fading parameters of the BS→IRS link.
    pub fn link_b2i(&self) -> Result<LinkParams> {
        LinkParams::new(self.rician.b2i, self.chi.b2i, self.d_b2i())
    }

    /// Fading parameters of the IRS→user link.
    pub fn link_i2u(&self) -> Result<LinkParams> {
        LinkParams::new(self.rician.i2u, self.chi.i2u, self.d_i2u()?)
    }

    pub fn alpha_b2u(&self) -> Result<f64> {
        Ok(self.link_b2u()?.alpha())
    }

    pub fn alpha_b2i(&self) -> Result<f64> {
        Ok(self.link_b2i()?.alpha())
    }

    pub fn alpha_i2u(&self) -> Result<f64> {
        Ok(self.link_i2u()?.alpha())
    }

    /// Linear receive SNR of the uplink pilot at one BS antenna,
    /// `α_B2U · P_q / σ²`.
    pub fn rx_snr_linear(&self) -> Result<f64> {
        Ok(self.alpha_b2u()? * self.p_q_mw() / self.noise_mw())
    }

    /// True effective angles of the three links.
    pub fn true_angles(&self) -> Result<LinkAngles> {
        let bs = self.bs_pos();
        let irs = self.irs_pos()?;
        let user = self.user_pos()?;
        Ok(LinkAngles {
            b2u: effective_angles(&bs, &user)?,
            b2i: effective_angles(&bs, &irs)?,
            i2u: effective_angles(&irs, &user)?,
        })
    }

    /// Second-order statistics feeding the power matrix.
    pub fn link_stats(&self) -> Result<LinkStats> {
        LinkStats::from_alphas(
            self.m_irs,
            self.alpha_b2u()?,
            self.alpha_i2u()?,
            self.alpha_b2i()?,
            &self.rician,
        )
    }

    /// Stats with the direct BS→user link removed (its gain set to zero).
    pub fn link_stats_no_direct(&self) -> Result<LinkStats> {
        LinkStats::from_alphas(
            self.m_irs,
            0.0,
            self.alpha_i2u()?,
            self.alpha_b2i()?,
            &self.rician,
        )
    }
}

/// Effective angles of the three links (departure = arrival convention).
#[derive(Debug, Clone, Copy)]
pub struct LinkAngles {
    pub b2u: EffectiveAnglePair,
    pub b2i: EffectiveAnglePair,
    pub i2u: EffectiveAnglePair,
}

/// LOS power coefficients of the cascaded and direct links plus the total
/// NLOS floor:
///
/// * `beta_b2i2u = α_I2U α_B2I v_B2I v_I2U / ((v_B2I+1)(v_I2U+1))`
/// * `beta_b2u   = α_B2U v_B2U / (v_B2U+1)`
/// * `sigma_nlos_sq = M α_I2U α_B2I/(v_B2I+1) · (1 + v_B2I/(v_I2U+1))
///    + α_B2U/(v_B2U+1)`
#[derive(Debug, Clone, Copy)]
pub struct LinkStats {
    pub beta_b2i2u: f64,
    pub beta_b2u: f64,
    pub sigma_nlos_sq: f64,
    pub alpha_b2u: f64,
    pub v_b2u: f64,
}

impl LinkStats {
    pub fn from_alphas(
        m: usize,
        alpha_b2u: f64,
        alpha_i2u: f64,
        alpha_b2i: f64,
        rician: &RicianFactors,
    ) -> Result<Self> {
        let (vb, vi, vd) = (rician.b2i, rician.i2u, rician.b2u);
        if vb < 0.0 || vi < 0.0 || vd < 0.0 {
            return Err(Error::Config("Rician factors must be >= 0".into()));
        }
        let beta_b2i2u = alpha_i2u * alpha_b2i * vb * vi / ((vb + 1.0) * (vi + 1.0));
        let beta_b2u = vd * alpha_b2u / (vd + 1.0);
        let sigma_nlos_sq = m as f64 * alpha_i2u * alpha_b2i / (vb + 1.0) * (1.0 + vb / (vi + 1.0))
            + alpha_b2u / (vd + 1.0);
        Ok(Self {
            beta_b2i2u,
            beta_b2u,
            sigma_nlos_sq,
            alpha_b2u,
            v_b2u: vd,
        })
    }
}
