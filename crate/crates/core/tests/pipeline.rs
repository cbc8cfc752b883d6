//! End-to-end pipeline checks that cross module boundaries.

use irslink::beamforming::joint_optimize;
use irslink::config::SphericalPlacement;
use irslink::estimation::{estimate_all, AngleEstimate};
use irslink::geometry::spherical_from_cartesian;
use irslink::rate::rate_report;
use irslink::rngstream::trial_rng;
use irslink::SystemConfig;

#[test]
fn estimate_optimize_rate_end_to_end() {
    let mut cfg = SystemConfig::estimation_default();
    cfg.n_bs = 16;
    cfg.m_irs = 16;
    let est = estimate_all(&cfg, &mut trial_rng(cfg.seed, 0)).unwrap();
    let sol = joint_optimize(&cfg, &est).unwrap();
    let report = rate_report(&cfg, &est, &sol.xi).unwrap();
    assert!(report.rate_exact > 0.0);
    assert!(report.rate_exact <= report.rate_upper + 1e-9);
    assert!(report.snr_effective > 0.0);

    // byte-exact reproducibility of the whole chain
    let est2 = estimate_all(&cfg, &mut trial_rng(cfg.seed, 0)).unwrap();
    let sol2 = joint_optimize(&cfg, &est2).unwrap();
    let report2 = rate_report(&cfg, &est2, &sol2.xi).unwrap();
    assert_eq!(report.rate_exact.to_bits(), report2.rate_exact.to_bits());
    assert_eq!(sol.w.len(), sol2.w.len());
    for (a, b) in sol.w.iter().zip(&sol2.w) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

/// First-order error propagation into the IRS→user angles: with the IRS
/// placed so the IRS→user path runs near its boresight, the sample
/// covariance of the transferred angle errors matches the φ-coefficient
/// prediction in the small-error regime.
#[test]
fn angle_transfer_linearization_matches_phi_prediction() {
    let mut cfg = SystemConfig::estimation_default();
    // IRS almost straight above the user at the same range (ratio 1)
    let user = cfg.user_pos().unwrap();
    let mut dir = [1.2, 0.8, 41.0];
    let nrm = f64::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    dir.iter_mut().for_each(|d| *d *= 41.0 / nrm);
    let irs = irslink::geometry::Position::new(user.x + dir[0], user.y + dir[1], user.z + dir[2]);
    let (d, el, az) = spherical_from_cartesian(&irs).unwrap();
    cfg.irs_spherical = SphericalPlacement::new(d, el.to_degrees(), az.to_degrees());

    let truth = cfg.true_angles().unwrap();
    let nominal = AngleEstimate::from_true_geometry(&cfg).unwrap();
    let (p1, p2, p3) = nominal.phi;
    let sigma_est_sq: f64 = 1e-4;
    let sigma = sigma_est_sq.sqrt();

    let trials = 40_000u64;
    let mut acc = [0.0f64; 3]; // var x, var y, cov xy
    let mut included = 0usize;
    for t in 0..trials {
        let mut rng = trial_rng(5, t);
        let ex = sigma * normal_draw(&mut rng);
        let ey = sigma * normal_draw(&mut rng);
        let est_pair = irslink::geometry::EffectiveAnglePair::new(
            truth.b2u.theta_x - ex,
            truth.b2u.theta_y - ey,
        );
        let Ok(pos) = irslink::estimation::localize_user(est_pair, cfg.d_b2u()) else {
            continue;
        };
        let (i2u, _) = irslink::estimation::irs_user_angles(&pos, &cfg.irs_pos().unwrap()).unwrap();
        let dx = truth.i2u.theta_x - i2u.theta_x;
        let dy = truth.i2u.theta_y - i2u.theta_y;
        acc[0] += dx * dx;
        acc[1] += dy * dy;
        acc[2] += dx * dy;
        included += 1;
    }
    let n = included as f64;
    let (vx, vy, cxy) = (acc[0] / n, acc[1] / n, acc[2] / n);
    let pred_x = (p1 * p1 + p2 * p2) * sigma_est_sq;
    let pred_y = (p2 * p2 + p3 * p3) * sigma_est_sq;
    let pred_xy = (p1 * p2 + p2 * p3) * sigma_est_sq;
    assert!(
        (vx - pred_x).abs() / pred_x < 0.15,
        "var x {vx:.4e} vs predicted {pred_x:.4e}"
    );
    assert!(
        (vy - pred_y).abs() / pred_y < 0.15,
        "var y {vy:.4e} vs predicted {pred_y:.4e}"
    );
    // covariance prediction, against the error scale
    assert!(
        (cxy - pred_xy).abs() < 0.15 * (pred_x * pred_y).sqrt(),
        "cov {cxy:.4e} vs predicted {pred_xy:.4e}"
    );
}

fn normal_draw<R: rand::Rng>(rng: &mut R) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}
