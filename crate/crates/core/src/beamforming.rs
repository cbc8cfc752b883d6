//! Joint BS/IRS beamforming on estimated angles.
//!
//! The average received power for a BS beam `w` and IRS phases `ξ` is the
//! quadratic form `wᴴ T w`, where `T` combines steering outer products at
//! the *estimated* angles, damped entrywise by the Gaussian angle-error
//! statistics, with the known BS→IRS rank-one LOS factor `H̄`:
//!
//! ```text
//! T = β_c (ΘH̄)ᴴ B (ΘH̄) + √(β_c β_d) ((ΘH̄)ᴴ C + Cᴴ ΘH̄) + β_d A + σ²_NLOS I
//! ```
//!
//! The BS beam is the scaled dominant eigenvector of `T`; the IRS phases
//! are optimized by a projected gradient on the relaxed problem (trace
//! sphere + ℓp barrier for the modulus bound) with a grid-plus-golden line
//! search of the power along the update segment, and a final projection
//! back to unit modulus.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::channel::{b2i_los_outer, sample_channels_with_angles};
use crate::config::{LinkAngles, LinkStats, OptimizerParams, SystemConfig};
use crate::error::{Error, Result};
use crate::estimation::AngleEstimate;
use crate::geometry::{steering_vector_on, EffectiveAnglePair, UraGrid};
use crate::linalg::{dot, hdot, norm, quad_form, CMat, C64};
use crate::rngstream::trial_rng;

/// Error-damped correlation matrices of the two user-side links.
///
/// `a` and `b` are Hermitian with unit diagonal and entries of modulus ≤ 1;
/// `c` is the cross matrix between them.
#[derive(Debug, Clone)]
pub struct DampedMatrices {
    /// N×N, BS→user.
    pub a: CMat,
    /// M×M, IRS→user.
    pub b: CMat,
    /// M×N cross term.
    pub c: CMat,
}

/// Expected-received-power matrix plus the scalars that built it.
#[derive(Debug, Clone)]
pub struct PowerMatrix {
    /// Hermitian N×N matrix with `E{received power} = wᴴ T w`.
    pub t: CMat,
    pub beta_b2i2u: f64,
    pub beta_b2u: f64,
    pub sigma_nlos_sq: f64,
}

/// Result of the joint optimization.
#[derive(Debug, Clone)]
pub struct BeamformingSolution {
    /// BS beam, ‖w‖² = P_BS.
    pub w: Vec<C64>,
    /// IRS phases, |ξ_m| = 1.
    pub xi: Vec<C64>,
    /// Received power after every half-step (BS update, IRS update, …).
    pub objective_trace: Vec<f64>,
}

/// Outer products of steering vectors at the estimated angles, damped
/// entrywise by `exp(−½ σ_est² q(indices))` where `q` is the squared error
/// transferred through the propagation coefficients.
pub fn compute_damped_matrices(
    estimate: &AngleEstimate,
    n: usize,
    m: usize,
) -> Result<DampedMatrices> {
    let (phi1, phi2, phi3) = estimate.phi;
    let s2 = estimate.sigma_est_sq;
    if !(s2 >= 0.0) {
        return Err(Error::Domain(format!(
            "sigma_est_sq must be non-negative, got {s2}"
        )));
    }

    let grid_n = UraGrid::new(n)?;
    let a_hat = steering_vector_on(&grid_n, estimate.b2u).elements;
    let a = CMat::from_fn(n, n, |r, c| {
        let (ir, jr) = grid_n.coords(r);
        let (ic, jc) = grid_n.coords(c);
        let di = (ic - ir) as f64;
        let dj = (jc - jr) as f64;
        a_hat[r].conj() * a_hat[c] * (-0.5 * s2 * (di * di + dj * dj)).exp()
    });

    let (b, c) = if m > 0 {
        let grid_m = UraGrid::new(m)?;
        let b_hat = steering_vector_on(&grid_m, estimate.i2u).elements;
        let b = CMat::from_fn(m, m, |r, c| {
            let (ir, jr) = grid_m.coords(r);
            let (ic, jc) = grid_m.coords(c);
            let di = (ic - ir) as f64;
            let dj = (jc - jr) as f64;
            let ex = di * phi1 + dj * phi2;
            let ey = di * phi2 + dj * phi3;
            b_hat[r].conj() * b_hat[c] * (-0.5 * s2 * (ex * ex + ey * ey)).exp()
        });
        let c = CMat::from_fn(m, n, |r, col| {
            let (im, jm) = grid_m.coords(r);
            let (in_, jn) = grid_n.coords(col);
            let ex = im as f64 * phi1 + jm as f64 * phi2 - in_ as f64;
            let ey = im as f64 * phi2 + jm as f64 * phi3 - jn as f64;
            b_hat[r].conj() * a_hat[col] * (-0.5 * s2 * (ex * ex + ey * ey)).exp()
        });
        (b, c)
    } else {
        (CMat::zeros(0, 0), CMat::zeros(0, n))
    };

    Ok(DampedMatrices { a, b, c })
}

fn check_unit_modulus(xi: &[C64], what: &str) -> Result<()> {
    for (k, x) in xi.iter().enumerate() {
        if (x.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "{what}[{k}] has modulus {} instead of 1",
                x.norm()
            )));
        }
    }
    Ok(())
}

/// Assemble the Hermitian power matrix for IRS phases `ξ`.
///
/// `h_bar` is the unscaled BS→IRS LOS outer product at the true
/// infrastructure angles (see [`crate::channel::b2i_los_outer`]).
pub fn assemble_t(
    dm: &DampedMatrices,
    xi: &[C64],
    h_bar: &CMat,
    stats: &LinkStats,
) -> Result<PowerMatrix> {
    let n = dm.a.nrows();
    let m = dm.b.nrows();
    if xi.len() != m || h_bar.nrows() != m || h_bar.ncols() != n {
        return Err(Error::Contract(
            "dimension mismatch between damped matrices, xi and the LOS factor".into(),
        ));
    }
    check_unit_modulus(xi, "xi")?;

    let mut t = dm.a.scale(stats.beta_b2u);
    let id = CMat::identity(n).scale(stats.sigma_nlos_sq);
    t = t.add(&id);

    if m > 0 {
        // ΘH̄ (M×N): row r of H̄ scaled by ξ_r; kept as columns
        let th_cols: Vec<Vec<C64>> = (0..n)
            .map(|c| (0..m).map(|r| xi[r] * h_bar.get(r, c)).collect())
            .collect();
        // columns of B(ΘH̄) and of C
        let bth_cols: Vec<Vec<C64>> = th_cols.iter().map(|col| dm.b.matvec(col)).collect();
        let c_cols: Vec<Vec<C64>> = (0..n).map(|c| column(&dm.c, c)).collect();
        // (ΘH̄)ᴴ B (ΘH̄)
        let quad = CMat::from_fn(n, n, |r, c| hdot(&th_cols[r], &bth_cols[c]));
        // (ΘH̄)ᴴ C and its adjoint
        let cross = CMat::from_fn(n, n, |r, c| hdot(&th_cols[r], &c_cols[c]));
        let root = (stats.beta_b2i2u * stats.beta_b2u).sqrt();
        t = t.add(&quad.scale(stats.beta_b2i2u));
        t = t.add(&CMat::from_fn(n, n, |r, c| {
            root * (cross.get(r, c) + cross.get(c, r).conj())
        }));
    }

    Ok(PowerMatrix {
        t: t.hermitian_part(),
        beta_b2i2u: stats.beta_b2i2u,
        beta_b2u: stats.beta_b2u,
        sigma_nlos_sq: stats.sigma_nlos_sq,
    })
}

fn column(m: &CMat, c: usize) -> Vec<C64> {
    (0..m.nrows()).map(|r| m.get(r, c)).collect()
}

/// Brute-force check of the power matrix: sample mean of `|gᵀw|²` over
/// fresh channel draws, with the angle-estimation error redrawn per trial
/// from the Gaussian model and pushed through the propagation coefficients.
pub fn monte_carlo_received_power(
    config: &SystemConfig,
    estimate: &AngleEstimate,
    w: &[C64],
    xi: &[C64],
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let angles = config.true_angles()?;
    let (phi1, phi2, phi3) = estimate.phi;
    let sigma = estimate.sigma_est_sq.sqrt();
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;

    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = trial_rng(seed, t as u64);
            let ex = sigma * normal.sample(&mut rng);
            let ey = sigma * normal.sample(&mut rng);
            let drawn = LinkAngles {
                b2u: EffectiveAnglePair::new(
                    estimate.b2u.theta_x + ex,
                    estimate.b2u.theta_y + ey,
                ),
                i2u: EffectiveAnglePair::new(
                    estimate.i2u.theta_x + phi1 * ex + phi2 * ey,
                    estimate.i2u.theta_y + phi2 * ex + phi3 * ey,
                ),
                b2i: angles.b2i,
            };
            let ch = sample_channels_with_angles(config, &drawn, &mut rng)?;
            let g = ch.effective_channel(xi);
            Ok(dot(&g, w).norm_sqr())
        })
        .collect::<Result<_>>()?;

    // fixed-order reduction keeps the result independent of thread timing
    Ok(samples.iter().sum::<f64>() / trials as f64)
}

/// Dominant eigenpair `(λ_max, v)` of a Hermitian matrix by shifted power
/// iteration.
///
/// The spectrum is shifted by the Frobenius norm so the most positive
/// eigenvalue dominates in magnitude even for indefinite input; the shift
/// is removed from the reported eigenvalue. Halts when the Rayleigh
/// quotient changes by less than 1e−10 (relative) on three consecutive
/// iterations, capped at 5000.
pub fn dominant_eigenpair(t: &CMat) -> Result<(f64, Vec<C64>)> {
    let n = t.nrows();
    if n != t.ncols() {
        return Err(Error::Contract("eigenpair needs a square matrix".into()));
    }
    if n == 0 {
        return Err(Error::Contract("eigenpair of an empty matrix".into()));
    }
    // deterministic start; the ramp avoids starts orthogonal to the
    // dominant eigenvector for structured matrices
    let mut v: Vec<C64> = (0..n)
        .map(|k| C64::new(1.0 + 1e-3 * k as f64, 1e-3 * ((k % 7) as f64)))
        .collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let shift = t.frobenius_norm();
    if shift == 0.0 {
        return Ok((0.0, v)); // zero matrix: any unit vector
    }

    let apply = |x: &[C64]| -> Vec<C64> {
        let mut y = t.matvec(x);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += shift * xi;
        }
        y
    };

    let mut rho_prev = f64::NAN;
    let mut hits = 0u32;
    for iter in 0..5000 {
        let w = apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            // v is in the kernel of the shifted matrix
            return Ok((-shift, v));
        }
        v = w.into_iter().map(|x| x / nw).collect();
        let rho = hdot(&v, &apply(&v)).re;
        if iter > 0 && (rho - rho_prev).abs() <= 1e-10 * rho.abs().max(f64::MIN_POSITIVE) {
            hits += 1;
            if hits >= 3 {
                return Ok((rho - shift, gauge_fix(v)));
            }
        } else {
            hits = 0;
        }
        rho_prev = rho;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge; last Rayleigh quotient {}",
        rho_prev - shift
    )))
}

/// Rotate a vector so its largest-magnitude component is real positive;
/// removes the arbitrary global phase of an eigenvector.
fn gauge_fix(mut v: Vec<C64>) -> Vec<C64> {
    let k = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
        .map(|(k, _)| k)
        .unwrap_or(0);
    let phase = v[k].arg();
    let rot = C64::from_polar(1.0, -phase);
    v.iter_mut().for_each(|x| *x *= rot);
    v
}

/// Power-constrained BS beam: `w = √P_BS · t_max`.
pub fn bs_beam(t: &PowerMatrix, p_bs: f64) -> Result<Vec<C64>> {
    if !(p_bs >= 0.0) {
        return Err(Error::Config("transmit power must be non-negative".into()));
    }
    let (_, v) = dominant_eigenpair(&t.t)?;
    let nv = norm(&v);
    let scale = p_bs.sqrt() / nv;
    Ok(v.into_iter().map(|x| x * scale).collect())
}

/// ℓp norm computed scale-free so huge intermediate iterates do not
/// overflow `|x|^p`.
fn lp_norm(x: &[C64], p: f64) -> f64 {
    let peak = x.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.norm() / peak).powf(p)).sum();
    peak * s.powf(1.0 / p)
}

/// The fixed data of one IRS phase optimization: `P(ξ) = β_c ξᴴRξ +
/// 2√(β_c β_d) Re(ξᴴu) + const` plus the barrier bookkeeping.
pub struct IrsObjective {
    r_mat: CMat,
    u: Vec<C64>,
    constant: f64,
    beta_c: f64,
    cross: f64,
    p: f64,
    kappa: f64,
}

impl IrsObjective {
    pub fn new(
        w: &[C64],
        dm: &DampedMatrices,
        h_bar: &CMat,
        stats: &LinkStats,
        params: &OptimizerParams,
    ) -> Self {
        let m = dm.b.nrows();
        let hw = h_bar.matvec(w);
        // B ⊙ (H̄ w wᴴ H̄ᴴ)ᵀ
        let r_mat = CMat::from_fn(m, m, |r, c| dm.b.get(r, c) * hw[c] * hw[r].conj());
        let cw = dm.c.matvec(w);
        let u: Vec<C64> = hw.iter().zip(&cw).map(|(h, c)| h.conj() * c).collect();
        let constant =
            stats.beta_b2u * quad_form(&dm.a, w) + stats.sigma_nlos_sq * norm(w).powi(2);
        Self {
            r_mat,
            u,
            constant,
            beta_c: stats.beta_b2i2u,
            cross: (stats.beta_b2i2u * stats.beta_b2u).sqrt(),
            p: params.p,
            kappa: params.kappa,
        }
    }

    /// Received power `P(ξ) = wᴴ T(ξ) w` for this beam.
    pub fn power(&self, xi: &[C64]) -> f64 {
        self.beta_c * quad_form(&self.r_mat, xi)
            + 2.0 * self.cross * hdot(xi, &self.u).re
            + self.constant
    }

    /// Barrier objective `G(ξ) = −ln(1−‖ξ‖_p)/(2κ) − (ξ-dependent part of P)`.
    ///
    /// The barrier carries 1/(2κ) so the printed gradient below is exactly
    /// the vector of real/imaginary partials of `G`.
    pub fn objective_g(&self, xi: &[C64]) -> Result<f64> {
        let nrm = lp_norm(xi, self.p);
        if nrm >= 1.0 {
            return Err(Error::BarrierDomain(format!(
                "lp norm {nrm} is outside the barrier domain"
            )));
        }
        Ok(-(1.0 - nrm).ln() / (2.0 * self.kappa)
            - self.beta_c * quad_form(&self.r_mat, xi)
            - 2.0 * self.cross * hdot(xi, &self.u).re)
    }

    /// Gradient of `G`:
    /// `−2β_c Rξ − 2√(β_c β_d) u + ‖ξ‖_p^{1−p} ζ / (2κ(1−‖ξ‖_p))`
    /// with `ζ_m = ξ_m |ξ_m|^{p−2}`.
    pub fn gradient(&self, xi: &[C64]) -> Result<Vec<C64>> {
        let nrm = lp_norm(xi, self.p);
        if nrm >= 1.0 {
            return Err(Error::BarrierDomain(format!(
                "lp norm {nrm} is outside the barrier domain"
            )));
        }
        let rx = self.r_mat.matvec(xi);
        let mut g: Vec<C64> = rx
            .iter()
            .zip(&self.u)
            .map(|(r, u)| -2.0 * self.beta_c * r - 2.0 * self.cross * u)
            .collect();
        if nrm > 0.0 {
            let coeff = nrm.powf(1.0 - self.p) / (2.0 * self.kappa * (1.0 - nrm));
            for (gm, xm) in g.iter_mut().zip(xi) {
                let zeta = xm * xm.norm().powf(self.p - 2.0);
                *gm += coeff * zeta;
            }
        }
        Ok(g)
    }

    /// Coefficients `(a, b)` of the quadratic `P(ξ + t d) = a t² + b t + P(ξ)`.
    fn segment_coeffs(&self, xi: &[C64], d: &[C64]) -> (f64, f64) {
        let rd = self.r_mat.matvec(d);
        let a = self.beta_c * hdot(d, &rd).re;
        let rx = self.r_mat.matvec(xi);
        let b = 2.0 * self.beta_c * hdot(d, &rx).re + 2.0 * self.cross * hdot(d, &self.u).re;
        (a, b)
    }
}

/// Gradient of the barrier objective at `xi` (must satisfy `‖xi‖_p < 1`).
pub fn irs_gradient(
    xi: &[C64],
    w: &[C64],
    dm: &DampedMatrices,
    h_bar: &CMat,
    stats: &LinkStats,
    params: &OptimizerParams,
) -> Result<Vec<C64>> {
    IrsObjective::new(w, dm, h_bar, stats, params).gradient(xi)
}

/// Project a direction onto the tangent plane of the sphere `tr(ξξᴴ) = M`
/// at `xi`: `g − (gᵀξ*) ξ / ‖ξ‖²`.
pub fn project_tangent(g: &[C64], xi: &[C64]) -> Result<Vec<C64>> {
    let n2 = norm(xi).powi(2);
    if n2 == 0.0 {
        return Err(Error::Domain("cannot project at xi = 0".into()));
    }
    let coef = hdot(xi, g) / n2;
    Ok(g.iter().zip(xi).map(|(gm, xm)| gm - coef * xm).collect())
}

fn phase_project(xi: &[C64]) -> Vec<C64> {
    xi.iter().map(|x| C64::from_polar(1.0, x.arg())).collect()
}

/// Maximize the quadratic `q(t) = a t² + b t + c0` over the grid plus one
/// golden-section refinement around the best grid point.
fn line_search(a: f64, b: f64, c0: f64, grid: usize) -> (f64, f64) {
    let q = |t: f64| a * t * t + b * t + c0;
    let mut best_t = 0.0;
    let mut best_v = c0;
    for k in 0..grid {
        let t = k as f64 / (grid - 1) as f64;
        let v = q(t);
        if v > best_v {
            best_v = v;
            best_t = t;
        }
    }
    // golden-section refinement in the bracket around the best grid point
    let step = 1.0 / (grid - 1) as f64;
    let mut lo = (best_t - step).max(0.0);
    let mut hi = (best_t + step).min(1.0);
    let inv_phi = 0.618_033_988_749_894_9;
    let mut t1 = hi - inv_phi * (hi - lo);
    let mut t2 = lo + inv_phi * (hi - lo);
    let mut q1 = q(t1);
    let mut q2 = q(t2);
    for _ in 0..60 {
        if hi - lo < 1e-14 {
            break;
        }
        if q1 < q2 {
            lo = t1;
            t1 = t2;
            q1 = q2;
            t2 = lo + inv_phi * (hi - lo);
            q2 = q(t2);
        } else {
            hi = t2;
            t2 = t1;
            q2 = q1;
            t1 = hi - inv_phi * (hi - lo);
            q1 = q(t1);
        }
    }
    let t_mid = 0.5 * (lo + hi);
    if q(t_mid) > best_v {
        (t_mid, q(t_mid))
    } else {
        (best_t, best_v)
    }
}

/// Projected-gradient ascent of the IRS phases for a fixed BS beam.
///
/// Returns the best unit-modulus phase vector found (never worse than the
/// start) and the trace of the relaxed objective, which is non-decreasing
/// because the line-search grid contains t = 0.
pub fn optimize_irs(
    w: &[C64],
    xi0: &[C64],
    dm: &DampedMatrices,
    h_bar: &CMat,
    stats: &LinkStats,
    params: &OptimizerParams,
) -> Result<(Vec<C64>, Vec<f64>)> {
    check_unit_modulus(xi0, "xi0")?;
    let m = xi0.len();
    let obj = IrsObjective::new(w, dm, h_bar, stats, params);
    let mut xi: Vec<C64> = xi0.to_vec();
    let mut trace = vec![obj.power(&xi)];
    let mut best = xi.clone();
    let mut best_val = trace[0];
    let sqrt_m = (m as f64).sqrt();
    let m_root = (m as f64).powf(1.0 / params.p);

    for _ in 0..params.n_iter_inner {
        // rescale into the barrier domain before evaluating the gradient;
        // the iterate itself stays unscaled
        let scale = m_root.max(lp_norm(&xi, params.p)) * (1.0 + 1e-3);
        let scaled: Vec<C64> = xi.iter().map(|x| x / scale).collect();
        let g = obj.gradient(&scaled)?;
        let g_gd: Vec<C64> = g.iter().map(|x| -x).collect();
        if norm(&xi) < 1e-300 {
            break;
        }
        let g_p = project_tangent(&g_gd, &xi)?;
        let gpn = norm(&g_p);
        // a vanishing tangent component (absolute, or pure cancellation
        // noise relative to the raw gradient) means a stationary point
        if gpn < 1e-300 || gpn < 1e-13 * norm(&g_gd) {
            break;
        }
        let target: Vec<C64> = g_p.iter().map(|x| x * (sqrt_m / (gpn * gpn))).collect();
        let d: Vec<C64> = target.iter().zip(&xi).map(|(y, x)| y - x).collect();
        let (qa, qb) = obj.segment_coeffs(&xi, &d);
        let prev = *trace.last().unwrap();
        let (t_star, p_new) = line_search(qa, qb, prev, params.line_search_grid);
        for (x, dd) in xi.iter_mut().zip(&d) {
            *x += t_star * dd;
        }
        trace.push(p_new);
        let feasible = phase_project(&xi);
        let fv = obj.power(&feasible);
        if fv > best_val {
            best_val = fv;
            best = feasible;
        }
        if (p_new - prev).abs() <= params.eps * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok((best, trace))
}

/// Everything [`joint_optimize`] derives from the configuration.
pub struct Scenario {
    pub n: usize,
    pub m: usize,
    pub p_bs_mw: f64,
    pub h_bar: CMat,
    pub stats: LinkStats,
    pub params: OptimizerParams,
}

impl Scenario {
    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        Ok(Self {
            n: config.n_bs,
            m: config.m_irs,
            p_bs_mw: config.p_bs_mw(),
            h_bar: if config.m_irs > 0 {
                b2i_los_outer(config)?
            } else {
                CMat::zeros(0, config.n_bs)
            },
            stats: config.link_stats()?,
            params: config.optimizer,
        })
    }

    /// Scenario with the direct BS→user link removed.
    pub fn from_config_no_direct(config: &SystemConfig) -> Result<Self> {
        let mut s = Self::from_config(config)?;
        s.stats = config.link_stats_no_direct()?;
        Ok(s)
    }
}

/// Alternate the eigen BS beam and the IRS phase optimization until both
/// stop moving (relative change below the optimizer eps) or the outer cap
/// is reached. The objective trace records the received power after every
/// half-step and is non-decreasing: the BS half-step is exactly optimal
/// for the current phases, and the IRS half-step never returns a worse
/// unit-modulus vector than it was given.
pub fn joint_optimize(config: &SystemConfig, estimate: &AngleEstimate) -> Result<BeamformingSolution> {
    joint_optimize_in(&Scenario::from_config(config)?, estimate)
}

/// [`joint_optimize`] on a prebuilt scenario.
pub fn joint_optimize_in(
    scenario: &Scenario,
    estimate: &AngleEstimate,
) -> Result<BeamformingSolution> {
    let Scenario {
        n,
        m,
        p_bs_mw,
        h_bar,
        stats,
        params,
    } = scenario;
    let (n, m) = (*n, *m);
    let dm = compute_damped_matrices(estimate, n, m)?;

    let mut xi = vec![C64::new(1.0, 0.0); m];
    let mut w: Vec<C64> = vec![C64::new((p_bs_mw / n as f64).sqrt(), 0.0); n];
    let mut trace = Vec::new();

    for _ in 0..params.n_iter_outer {
        let t = assemble_t(&dm, &xi, h_bar, stats)?;
        let w_new = bs_beam(&t, *p_bs_mw)?;
        trace.push(quad_form(&t.t, &w_new));

        let xi_new = if m > 0 {
            let obj = IrsObjective::new(&w_new, &dm, h_bar, stats, params);
            let (xi_new, _) = optimize_irs(&w_new, &xi, &dm, h_bar, stats, params)?;
            trace.push(obj.power(&xi_new));
            xi_new
        } else {
            xi.clone()
        };

        let dw = {
            let diff: Vec<C64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
            norm(&diff) / p_bs_mw.sqrt().max(f64::MIN_POSITIVE)
        };
        let dxi = if m > 0 {
            let diff: Vec<C64> = xi_new.iter().zip(&xi).map(|(a, b)| a - b).collect();
            norm(&diff) / (m as f64).sqrt()
        } else {
            0.0
        };
        w = w_new;
        xi = xi_new;
        if dw < params.eps && dxi < params.eps {
            break;
        }
    }

    Ok(BeamformingSolution {
        w,
        xi,
        objective_trace: trace,
    })
}

/// Draw a unit-modulus phase vector uniformly; test helper for feasible
/// starting points.
pub fn random_unit_modulus<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<C64> {
    (0..m)
        .map(|_| C64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect()
}
