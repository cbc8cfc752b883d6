//! Fast self-validation suite behind the `validate` CLI subcommand: one
//! cheap numerical check per core invariant, reported as pass/fail lines
//! and a result table.

use rand::Rng;

use super::{config_hash, ResultTable, TableMetadata};
use crate::beamforming::{
    assemble_t, bs_beam, compute_damped_matrices, dominant_eigenpair, joint_optimize,
    project_tangent, random_unit_modulus, IrsObjective, Scenario,
};
use crate::channel::{dbm_to_linear, path_loss, sample_channels};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::estimation::{localize_user, ml_estimate_b2u, AngleEstimate};
use crate::geometry::{
    cartesian_from_spherical, effective_angles, spherical_from_cartesian, steering_vector,
    ura_index, EffectiveAnglePair, Position, UraGrid,
};
use crate::linalg::{hdot, norm, quad_form, CMat, C64};
use crate::rate::{approx_rate, upper_bound_rate};
use crate::rngstream::trial_rng;

/// One validation check: `observed` must stay within `bound`.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub observed: f64,
    pub bound: f64,
    pub passed: bool,
}

fn check(name: &'static str, observed: f64, bound: f64) -> CheckResult {
    CheckResult {
        name,
        observed,
        bound,
        passed: observed.is_finite() && observed <= bound,
    }
}

/// Run every check; deterministic for a fixed seed.
pub fn run_validation(seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut rng = trial_rng(seed, 0);

    // URA pairing sums match N(N−1)/6 exactly
    let mut worst = 0.0f64;
    for n_total in [4usize, 16, 36, 64] {
        let mut qi = 0i64;
        let mut qj = 0i64;
        for n in 1..=n_total / 2 {
            let (i1, j1) = ura_index(n, n_total)?;
            let (i2, j2) = ura_index(n_total - n + 1, n_total)?;
            qi += (i1 - i2).pow(2);
            qj += (j1 - j2).pow(2);
        }
        let expect = (n_total * (n_total - 1) / 6) as i64;
        worst = worst.max((qi - expect).abs() as f64).max((qj - expect).abs() as f64);
    }
    out.push(check("ura_pairing_sums", worst, 0.0));

    // steering vectors are unit modulus with an all-ones anchor
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let ang = EffectiveAnglePair::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let sv = steering_vector(ang, 16)?;
        for e in &sv.elements {
            worst = worst.max((e.norm() - 1.0).abs());
        }
    }
    let ones = steering_vector(EffectiveAnglePair::new(0.0, 0.0), 16)?;
    for e in &ones.elements {
        worst = worst.max((e - C64::new(1.0, 0.0)).norm());
    }
    out.push(check("steering_unit_modulus", worst, 1e-12));

    // spherical conversion round trip
    let p = cartesian_from_spherical(42.0, 1.1, -0.28)?;
    let (d, el, az) = spherical_from_cartesian(&p)?;
    let worst = (d - 42.0).abs().max((el - 1.1).abs()).max((az + 0.28).abs());
    out.push(check("spherical_round_trip", worst, 1e-9));

    // effective angles stay in the physical disk
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..16 {
        let to = Position::new(
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(-80.0..-1.0),
        );
        let a = effective_angles(&Position::origin(), &to)?;
        worst = worst.max(a.theta_x * a.theta_x + a.theta_y * a.theta_y);
    }
    out.push(check(
        "effective_angles_in_disk",
        worst - std::f64::consts::PI.powi(2),
        1e-12,
    ));

    // power conversions
    let worst = (path_loss(1.0, 2.5)? - 1.0)
        .abs()
        .max((dbm_to_linear(0.0) - 1.0).abs())
        .max((dbm_to_linear(-60.0) - 1e-6).abs());
    out.push(check("power_conversions", worst, 1e-15));

    // channel determinism
    let cfg = SystemConfig::default();
    let a = sample_channels(&cfg, &mut trial_rng(seed, 1))?;
    let b = sample_channels(&cfg, &mut trial_rng(seed, 1))?;
    let det = if a == b { 0.0 } else { 1.0 };
    out.push(check("channel_determinism", det, 0.0));

    // rank-one LOS factor: all 2x2 minors vanish
    let mut worst = 0.0f64;
    for r in 0..a.los_h_b2i.nrows().saturating_sub(1) {
        for c in 0..a.los_h_b2i.ncols() - 1 {
            let det = a.los_h_b2i.get(r, c) * a.los_h_b2i.get(r + 1, c + 1)
                - a.los_h_b2i.get(r, c + 1) * a.los_h_b2i.get(r + 1, c);
            worst = worst.max(det.norm());
        }
    }
    out.push(check("los_rank_one", worst, 1e-12));

    // ML estimator inverts the noiseless linear model
    let n = 16;
    let grid = UraGrid::new(n)?;
    let truth = EffectiveAnglePair::new(0.2, -0.3);
    let diffs: Vec<f64> = (0..n / 2)
        .map(|k| {
            let (i1, j1) = grid.coords(k);
            let (i2, j2) = grid.coords(n - 1 - k);
            -((i1 - i2) as f64) * truth.theta_x - ((j1 - j2) as f64) * truth.theta_y
        })
        .collect();
    let est = ml_estimate_b2u(&diffs, n)?;
    let worst = (est.theta_x - truth.theta_x)
        .abs()
        .max((est.theta_y - truth.theta_y).abs());
    out.push(check("ml_inverts_noiseless", worst, 1e-12));

    // localization round trip at the configured user placement
    let cfg_angles = cfg.true_angles()?;
    let loc = localize_user(cfg_angles.b2u, cfg.d_b2u())?;
    out.push(check(
        "localization_round_trip",
        loc.distance_to(&cfg.user_pos()?),
        1e-9,
    ));

    // beamforming fixture: small N/M scenario
    let mut small = SystemConfig::default();
    small.n_bs = 4;
    small.m_irs = 16;
    let estimate = AngleEstimate::from_true_geometry(&small)?;
    let scenario = Scenario::from_config(&small)?;
    let dm = compute_damped_matrices(&estimate, 4, 16)?;
    let xi = random_unit_modulus(16, &mut rng);
    let t = assemble_t(&dm, &xi, &scenario.h_bar, &scenario.stats)?;

    out.push(check("t_hermitian", t.t.adjoint_deviation(&t.t), 1e-12));

    let damp_dev = (0..16)
        .map(|k| (dm.b.get(k, k) - C64::new(1.0, 0.0)).norm())
        .fold(0.0f64, f64::max);
    out.push(check("damped_unit_diagonal", damp_dev, 1e-12));

    // eigen solve against a closed-form 2x2
    let two = CMat::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => C64::new(2.0, 0.0),
        (1, 1) => C64::new(1.0, 0.0),
        (0, 1) => C64::new(0.5, 0.25),
        (1, 0) => C64::new(0.5, -0.25),
        _ => unreachable!(),
    });
    let (lmax, _) = dominant_eigenpair(&two)?;
    // λ = (tr + √(tr² − 4 det))/2 for a 2x2 Hermitian
    let tr = 3.0;
    let det = 2.0 - (0.5f64 * 0.5 + 0.25 * 0.25);
    let expect = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
    out.push(check("eigen_closed_form_2x2", (lmax - expect).abs(), 1e-10));

    // BS beam feasibility
    let w = bs_beam(&t, small.p_bs_mw())?;
    out.push(check(
        "bs_beam_power",
        (norm(&w).powi(2) - small.p_bs_mw()).abs() / small.p_bs_mw(),
        1e-10,
    ));

    // projection lands in the tangent plane
    let g: Vec<C64> = (0..16).map(|_| crate::channel::complex_normal(&mut rng)).collect();
    let gp = project_tangent(&g, &xi)?;
    out.push(check("tangent_projection", hdot(&xi, &gp).norm(), 1e-10));

    // analytic gradient against central differences at one feasible point
    let obj = IrsObjective::new(&w, &dm, &scenario.h_bar, &scenario.stats, &small.optimizer);
    let m_root = 16f64.powf(1.0 / small.optimizer.p);
    let feas: Vec<C64> = xi.iter().map(|x| x / (m_root * 1.2)).collect();
    let gan = obj.gradient(&feas)?;
    let h = 1e-6;
    let gscale = gan.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for k in 0..16 {
        for re in [true, false] {
            let delta = if re { C64::new(h, 0.0) } else { C64::new(0.0, h) };
            let mut xp = feas.clone();
            let mut xm = feas.clone();
            xp[k] += delta;
            xm[k] -= delta;
            let fd = (obj.objective_g(&xp)? - obj.objective_g(&xm)?) / (2.0 * h);
            let analytic = if re { gan[k].re } else { gan[k].im };
            worst = worst.max((fd - analytic).abs());
        }
    }
    out.push(check("gradient_central_difference", worst / gscale, 1e-6));

    // joint optimization: monotone trace and feasible output
    let sol = joint_optimize(&small, &estimate)?;
    let mut dip = 0.0f64;
    for k in 1..sol.objective_trace.len() {
        dip = dip.max(sol.objective_trace[k - 1] - sol.objective_trace[k]);
    }
    let scale = sol.objective_trace.last().copied().unwrap_or(1.0).abs();
    out.push(check("joint_trace_monotone", dip / scale.max(1e-300), 1e-9));
    let modulus_dev = sol
        .xi
        .iter()
        .map(|x| (x.norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    out.push(check("xi_unit_modulus", modulus_dev, 1e-12));
    out.push(check(
        "w_power_constraint",
        (norm(&sol.w).powi(2) - small.p_bs_mw()).abs() / small.p_bs_mw(),
        1e-10,
    ));

    // trace identity: double-sum Ω equals tr(T)
    let r_approx = approx_rate(&estimate, &xi, &small)?;
    let omega = (2f64.powf(r_approx) - 1.0) * small.noise_mw() / small.p_bs_mw();
    let tr_t = t.t.trace().re;
    out.push(check(
        "rate_trace_identity",
        (omega - tr_t).abs() / tr_t.abs(),
        1e-8,
    ));

    // exact rate below the upper bound
    let t_opt = assemble_t(&dm, &sol.xi, &scenario.h_bar, &scenario.stats)?;
    let w_opt = bs_beam(&t_opt, small.p_bs_mw())?;
    let rate = (1.0 + quad_form(&t_opt.t, &w_opt) / small.noise_mw()).log2();
    let upper = upper_bound_rate(&small)?;
    out.push(check("rate_upper_bound", rate - upper, 1e-9));

    Ok(out)
}

/// Result table mirroring the pass/fail lines (check ids follow the order
/// of [`run_validation`]).
pub fn validation_table(checks: &[CheckResult], seed: u64) -> Result<ResultTable> {
    let cfg = SystemConfig::default();
    let mut table = ResultTable::new(
        vec![
            "check_id".into(),
            "passed".into(),
            "observed".into(),
            "bound".into(),
        ],
        TableMetadata::new(config_hash(&cfg), seed),
    );
    for (k, c) in checks.iter().enumerate() {
        let observed = if c.observed.is_finite() { c.observed } else { f64::MAX };
        table.push_row(vec![
            k as f64,
            if c.passed { 1.0 } else { 0.0 },
            observed,
            c.bound,
        ])?;
    }
    Ok(table)
}
