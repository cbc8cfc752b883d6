//! The experiment runners behind the CLI subcommands.

use rayon::prelude::*;

use super::{config_hash, derive_config, ResultTable, SweepSpec, SweepVariable, TableMetadata};
use crate::beamforming::{assemble_t, compute_damped_matrices, joint_optimize, joint_optimize_in, Scenario};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimation::{estimate_all, max_abs_pair_difference, AngleEstimate};
use crate::geometry::{steering_vector, EffectiveAnglePair};
use crate::linalg::dot;
use crate::rate::{achievable_rate, approx_rate, upper_bound_rate};
use crate::rngstream::trial_rng;

/// IRS sizes compared by the convergence experiment.
pub const CONVERGENCE_IRS_SIZES: [usize; 3] = [16, 64, 144];

/// Inflated angle-error variance standing in for "no usable angle
/// information" in the no-direct-link rate curve.
const BLIND_SIGMA_EST_SQ: f64 = 1e3;

fn warn_if_aliasing(cfg: &SystemConfig) {
    if let Ok(angles) = cfg.true_angles() {
        if let Ok(worst) = max_abs_pair_difference(angles.b2u, cfg.n_bs) {
            if worst > std::f64::consts::PI - 0.3 {
                eprintln!(
                    "warning: user direction gives pair phase differences up to {worst:.2} rad for N={}; \
                     estimates will be aliased (keep |angles| small for estimation runs)",
                    cfg.n_bs
                );
            }
        }
    }
}

enum TrialOutcome {
    Included { ex: f64, ey: f64 },
    Excluded,
}

fn angle_error_trials<F>(cfg: &SystemConfig, trials: usize, extract: F) -> Result<(f64, f64, usize)>
where
    F: Fn(&AngleEstimate) -> (f64, f64) + Sync,
{
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<TrialOutcome> {
            let mut rng = trial_rng(cfg.seed, t as u64);
            match estimate_all(cfg, &mut rng) {
                Ok(est) => {
                    let (ex, ey) = extract(&est);
                    Ok(TrialOutcome::Included { ex, ey })
                }
                Err(Error::EstimationFailure(_)) => Ok(TrialOutcome::Excluded),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut included = 0usize;
    for o in &outcomes {
        if let TrialOutcome::Included { ex, ey } = o {
            sum_x += ex * ex;
            sum_y += ey * ey;
            included += 1;
        }
    }
    if included == 0 {
        return Err(Error::Numerical(
            "every trial failed localization; no statistics to report".into(),
        ));
    }
    Ok((
        sum_x / included as f64,
        sum_y / included as f64,
        trials - included,
    ))
}

/// BS→user angle estimation error sweep: empirical MSE per axis against
/// the analytic variance, plus the count of excluded (localization-failed)
/// trials.
pub fn run_mse_b2u(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = ResultTable::new(
        vec![
            sweep.variable.column_name().into(),
            "mse_x_b2u".into(),
            "mse_y_b2u".into(),
            "sigma_est_sq".into(),
            "excluded_trials".into(),
        ],
        TableMetadata::new(config_hash(cfg), cfg.seed),
    );
    for &value in &sweep.values {
        let point = derive_config(cfg, sweep.variable, value)?;
        warn_if_aliasing(&point);
        let truth = point.true_angles()?.b2u;
        let (mse_x, mse_y, excluded) =
            angle_error_trials(&point, sweep.trials_per_point, |est| {
                (
                    est.b2u.theta_x - truth.theta_x,
                    est.b2u.theta_y - truth.theta_y,
                )
            })?;
        let analytic = AngleEstimate::from_true_geometry(&point)?.sigma_est_sq;
        table.push_row(vec![value, mse_x, mse_y, analytic, excluded as f64])?;
    }
    Ok(table)
}

/// IRS→user angle error sweep: empirical MSE per axis against the
/// first-order propagation prediction `(φ₁²+φ₂²)σ²` / `(φ₂²+φ₃²)σ²`.
pub fn run_mse_i2u(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = ResultTable::new(
        vec![
            sweep.variable.column_name().into(),
            "mse_x_i2u".into(),
            "mse_y_i2u".into(),
            "predicted_x_i2u".into(),
            "predicted_y_i2u".into(),
            "excluded_trials".into(),
        ],
        TableMetadata::new(config_hash(cfg), cfg.seed),
    );
    for &value in &sweep.values {
        let point = derive_config(cfg, sweep.variable, value)?;
        warn_if_aliasing(&point);
        let truth = point.true_angles()?.i2u;
        let (mse_x, mse_y, excluded) =
            angle_error_trials(&point, sweep.trials_per_point, |est| {
                (
                    est.i2u.theta_x - truth.theta_x,
                    est.i2u.theta_y - truth.theta_y,
                )
            })?;
        let nominal = AngleEstimate::from_true_geometry(&point)?;
        let (p1, p2, p3) = nominal.phi;
        let s2 = nominal.sigma_est_sq;
        table.push_row(vec![
            value,
            mse_x,
            mse_y,
            (p1 * p1 + p2 * p2) * s2,
            (p2 * p2 + p3 * p3) * s2,
            excluded as f64,
        ])?;
    }
    Ok(table)
}

/// Joint-optimization convergence: received SNR after every half-step for
/// each IRS size in [`CONVERGENCE_IRS_SIZES`]. Shorter traces are padded
/// with their converged value to keep the table rectangular.
pub fn run_convergence(cfg: &SystemConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let noise = cfg.noise_mw();
    let mut columns = vec!["iteration".to_string()];
    let mut traces: Vec<Vec<f64>> = Vec::new();
    for &m in &CONVERGENCE_IRS_SIZES {
        let point = derive_config(cfg, SweepVariable::MIrs, m as f64)?;
        let est = AngleEstimate::from_true_geometry(&point)?;
        let sol = joint_optimize(&point, &est)?;
        columns.push(format!("snr_m{m}"));
        traces.push(sol.objective_trace.iter().map(|p| p / noise).collect());
    }
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    let mut table = ResultTable::new(columns, TableMetadata::new(config_hash(cfg), cfg.seed));
    for k in 0..len {
        let mut row = vec![(k + 1) as f64];
        for tr in &traces {
            row.push(*tr.get(k).unwrap_or_else(|| tr.last().unwrap()));
        }
        table.push_row(row)?;
    }
    Ok(table)
}

/// Transmit beam pattern `|aᵀ(θ̄(θ,φ)) w|²` of the optimized beam over an
/// elevation × azimuth grid.
pub fn run_beam_pattern(cfg: &SystemConfig, elev_points: usize, azim_points: usize) -> Result<ResultTable> {
    cfg.validate()?;
    if elev_points < 2 || azim_points < 2 {
        return Err(Error::Config("beam pattern grid needs at least 2 points per axis".into()));
    }
    let est = AngleEstimate::from_true_geometry(cfg)?;
    let sol = joint_optimize(cfg, &est)?;
    let mut table = ResultTable::new(
        vec![
            "elevation_deg".into(),
            "azimuth_deg".into(),
            "pattern_linear".into(),
            "pattern_db".into(),
        ],
        TableMetadata::new(config_hash(cfg), cfg.seed),
    );
    for ei in 0..elev_points {
        let elev = 180.0 * ei as f64 / (elev_points - 1) as f64;
        for ai in 0..azim_points {
            let azim = -180.0 + 360.0 * ai as f64 / azim_points as f64;
            let (el, az) = (elev.to_radians(), azim.to_radians());
            let angles = EffectiveAnglePair::new(
                -std::f64::consts::PI * el.cos() * az.cos(),
                -std::f64::consts::PI * el.cos() * az.sin(),
            );
            let a = steering_vector(angles, cfg.n_bs)?;
            let p = dot(&a.elements, &sol.w).norm_sqr();
            table.push_row(vec![elev, azim, p, 10.0 * p.max(1e-300).log10()])?;
        }
    }
    Ok(table)
}

/// Achievable-rate curves over a sweep: optimized with IRS, without the
/// IRS, with the direct link removed (angle information destroyed), plus
/// the closed-form approximation and upper bound.
pub fn run_rate_curves(cfg: &SystemConfig, sweep: &SweepSpec) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = ResultTable::new(
        vec![
            sweep.variable.column_name().into(),
            "rate_with_irs".into(),
            "rate_without_irs".into(),
            "rate_no_direct".into(),
            "rate_approx".into(),
            "rate_upper".into(),
        ],
        TableMetadata::new(config_hash(cfg), cfg.seed),
    );
    for &value in &sweep.values {
        let point = derive_config(cfg, sweep.variable, value)?;
        let noise = point.noise_mw();
        let p_bs = point.p_bs_mw();

        let est = AngleEstimate::from_true_geometry(&point)?;
        let sol = joint_optimize(&point, &est)?;
        let scenario = Scenario::from_config(&point)?;
        let dm = compute_damped_matrices(&est, point.n_bs, point.m_irs)?;
        let t = assemble_t(&dm, &sol.xi, &scenario.h_bar, &scenario.stats)?;
        let with_irs = achievable_rate(&t, p_bs, noise)?;
        let approx = approx_rate(&est, &sol.xi, &point)?;
        let upper = upper_bound_rate(&point)?;

        let without_irs = {
            let mut no_irs = point.clone();
            no_irs.m_irs = 0;
            let est0 = AngleEstimate::from_true_geometry(&no_irs)?;
            let sol0 = joint_optimize(&no_irs, &est0)?;
            let sc0 = Scenario::from_config(&no_irs)?;
            let dm0 = compute_damped_matrices(&est0, no_irs.n_bs, 0)?;
            let t0 = assemble_t(&dm0, &sol0.xi, &sc0.h_bar, &sc0.stats)?;
            achievable_rate(&t0, p_bs, noise)?
        };

        let no_direct = {
            let scenario_nd = Scenario::from_config_no_direct(&point)?;
            let est_nd = est.clone().with_sigma_est_sq(BLIND_SIGMA_EST_SQ);
            let sol_nd = joint_optimize_in(&scenario_nd, &est_nd)?;
            let dm_nd = compute_damped_matrices(&est_nd, point.n_bs, point.m_irs)?;
            let t_nd = assemble_t(&dm_nd, &sol_nd.xi, &scenario_nd.h_bar, &scenario_nd.stats)?;
            achievable_rate(&t_nd, p_bs, noise)?
        };

        table.push_row(vec![value, with_irs, without_irs, no_direct, approx, upper])?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepVariable;

    fn quick_estimation_cfg() -> SystemConfig {
        let mut cfg = SystemConfig::estimation_default();
        cfg.n_bs = 16;
        cfg.m_irs = 16;
        cfg
    }

    #[test]
    fn mse_b2u_table_shape_and_analytic_column() {
        let cfg = quick_estimation_cfg();
        let sweep = SweepSpec::new(SweepVariable::RxSnrDb, vec![10.0, 20.0], 400).unwrap();
        let t = run_mse_b2u(&cfg, &sweep).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.columns.len(), 5);
        // the analytic column is exactly the closed-form variance at each point
        for (row, &snr) in t.rows.iter().zip(&sweep.values) {
            let point = derive_config(&cfg, SweepVariable::RxSnrDb, snr).unwrap();
            let expect = crate::estimation::estimation_error_variance(
                crate::estimation::phase_uncertainty_variance(
                    point.rician.b2u,
                    point.rx_snr_linear().unwrap(),
                )
                .unwrap(),
                point.n_bs,
            );
            assert_eq!(row[3], expect);
        }
        // higher SNR shrinks the error
        assert!(t.rows[1][1] < t.rows[0][1]);
    }

    #[test]
    fn mse_b2u_decreases_with_n() {
        let cfg = quick_estimation_cfg();
        let sweep = SweepSpec::new(SweepVariable::NBs, vec![16.0, 64.0], 600).unwrap();
        let t = run_mse_b2u(&cfg, &sweep).unwrap();
        assert!(
            t.rows[1][1] < t.rows[0][1],
            "MSE did not shrink with N: {:?}",
            t.rows
        );
    }

    #[test]
    fn mse_b2u_is_deterministic() {
        let cfg = quick_estimation_cfg();
        let sweep = SweepSpec::new(SweepVariable::RxSnrDb, vec![15.0], 200).unwrap();
        let a = run_mse_b2u(&cfg, &sweep).unwrap().to_csv();
        let b = run_mse_b2u(&cfg, &sweep).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn mse_i2u_grows_with_ratio() {
        let cfg = quick_estimation_cfg();
        let sweep = SweepSpec::new(SweepVariable::RatioRa, vec![0.5, 1.0, 2.0], 600).unwrap();
        let t = run_mse_i2u(&cfg, &sweep).unwrap();
        assert!(t.rows[0][1] < t.rows[1][1] && t.rows[1][1] < t.rows[2][1],
            "i2u MSE not increasing in the distance ratio: {:?}", t.rows);
        // prediction column grows too
        assert!(t.rows[0][3] < t.rows[1][3] && t.rows[1][3] < t.rows[2][3]);
    }

    #[test]
    fn convergence_trace_is_monotone_and_ordered_in_m() {
        let mut cfg = SystemConfig::default();
        cfg.n_bs = 16;
        let t = run_convergence(&cfg).unwrap();
        assert_eq!(t.columns.len(), 1 + CONVERGENCE_IRS_SIZES.len());
        for col in 1..t.columns.len() {
            for k in 1..t.rows.len() {
                assert!(
                    t.rows[k][col] >= t.rows[k - 1][col] * (1.0 - 1e-9),
                    "column {col} dipped at row {k}"
                );
            }
        }
        let last = t.rows.last().unwrap();
        assert!(last[1] < last[2] && last[2] < last[3], "final SNRs: {last:?}");
    }

    /// The pattern lives in effective-angle space: a square array cannot
    /// tell `(el, az)` from `(180°−el, az±180°)`, so peak positions are
    /// compared by direction cosines.
    fn angle_distance(elev_deg: f64, azim_deg: f64, target: EffectiveAnglePair) -> f64 {
        let (el, az) = (elev_deg.to_radians(), azim_deg.to_radians());
        let tx = -std::f64::consts::PI * el.cos() * az.cos();
        let ty = -std::f64::consts::PI * el.cos() * az.sin();
        ((tx - target.theta_x).powi(2) + (ty - target.theta_y).powi(2)).sqrt()
    }

    #[test]
    fn beam_pattern_peaks_at_user_without_irs() {
        let mut cfg = SystemConfig::default();
        cfg.m_irs = 0;
        let t = run_beam_pattern(&cfg, 31, 24).unwrap();
        let best = t
            .rows
            .iter()
            .max_by(|a, b| a[2].partial_cmp(&b[2]).unwrap())
            .unwrap();
        let user = cfg.true_angles().unwrap().b2u;
        // within one grid cell of the user direction (6°/15° resolution)
        assert!(
            angle_distance(best[0], best[1], user) < 0.35,
            "peak at ({}, {}), user angles ({}, {})",
            best[0],
            best[1],
            user.theta_x,
            user.theta_y
        );
        // matched-beam value at the exact user direction bounds the grid max
        let n = cfg.n_bs as f64;
        assert!(best[2] <= n * cfg.p_bs_mw() * (1.0 + 1e-9));
    }

    #[test]
    fn beam_pattern_symmetry_when_azimuths_align() {
        let mut cfg = SystemConfig::default();
        cfg.m_irs = 16;
        cfg.irs_spherical.azimuth_deg = 0.0;
        cfg.user_spherical.azimuth_deg = 0.0;
        let t = run_beam_pattern(&cfg, 13, 24).unwrap();
        let peak = t
            .rows
            .iter()
            .map(|r| r[2])
            .fold(f64::NEG_INFINITY, f64::max);
        // azimuth grid is symmetric around 0; compare mirrored pairs.
        // the optimizer leaves a small symmetric-breaking residual, so the
        // tolerance is relative to the pattern peak.
        let mut by_key = std::collections::HashMap::new();
        for row in &t.rows {
            by_key.insert(((row[0] * 10.0) as i64, (row[1] * 10.0) as i64), row[2]);
        }
        for row in &t.rows {
            let mirrored = ((row[0] * 10.0) as i64, (-row[1] * 10.0) as i64);
            if let Some(v) = by_key.get(&mirrored) {
                assert!(
                    (v - row[2]).abs() < 1e-3 * peak,
                    "asymmetry at {:?}: {} vs {} (peak {peak})",
                    (row[0], row[1]),
                    row[2],
                    v
                );
            }
        }
    }

    #[test]
    fn rate_curves_ordering() {
        let mut cfg = SystemConfig::default();
        cfg.n_bs = 4; // keep the run snappy
        cfg.m_irs = 16;
        let sweep = SweepSpec::new(SweepVariable::PBsDbm, vec![0.0, 10.0], 1).unwrap();
        let t = run_rate_curves(&cfg, &sweep).unwrap();
        for row in &t.rows {
            let (with_irs, without, no_direct, upper) = (row[1], row[2], row[3], row[5]);
            assert!(with_irs > without, "IRS should help: {row:?}");
            assert!(with_irs <= upper + 1e-9, "exact above bound: {row:?}");
            assert!(no_direct < with_irs, "blind link should be worse: {row:?}");
        }
        // rates grow with transmit power
        assert!(t.rows[1][1] > t.rows[0][1]);
    }
}
