//! Coordinates, URA index maps, effective angles and steering vectors.
//!
//! Conventions used throughout the crate:
//!
//! * the BS sits at the origin; positions are Cartesian metres;
//! * a spherical placement `(d, elevation, azimuth)` maps to
//!   `(d cosθ cosφ, d cosθ sinφ, −d sinθ)`, so positive elevation points
//!   below the array plane;
//! * element spacing is λ/2 (2.45 GHz nominal carrier), which reduces the
//!   effective angles (adjacent element phase differences along x and y)
//!   to `−π · direction cosine` — the wavelength itself cancels out of
//!   every formula downstream;
//! * departure and arrival share the same effective-angle pair for a link:
//!   the arrival angles use the reversed ray direction with positive sign,
//!   which cancels the departure sign flip.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Cartesian position in metres, BS at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let dz = other.z - self.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Effective angle pair `(θ̄_x, θ̄_y)` in radians: the phase difference
/// between adjacent array elements along each axis.
///
/// A physical direction always satisfies `θ̄_x² + θ̄_y² ≤ π²` at λ/2
/// spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveAnglePair {
    pub theta_x: f64,
    pub theta_y: f64,
}

impl EffectiveAnglePair {
    pub fn new(theta_x: f64, theta_y: f64) -> Self {
        Self { theta_x, theta_y }
    }

    /// Whether the pair lies inside the physical disk of radius π.
    pub fn is_physical(&self) -> bool {
        self.theta_x * self.theta_x + self.theta_y * self.theta_y
            <= std::f64::consts::PI * std::f64::consts::PI
    }
}

/// Unit-modulus steering vector of a square URA.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub elements: Vec<C64>,
}

/// Grid coordinates of every element of a √N×√N URA, precomputed.
///
/// Element `n` (1-based) maps to `i = (n−1) mod √N` (remainder) and
/// `j = ⌊(n−1)/√N⌋` (quotient).
#[derive(Debug, Clone)]
pub struct UraGrid {
    side: usize,
    i: Vec<i64>,
    j: Vec<i64>,
}

impl UraGrid {
    pub fn new(n: usize) -> Result<Self> {
        let side = perfect_square_side(n)?;
        let mut i = Vec::with_capacity(n);
        let mut j = Vec::with_capacity(n);
        for k in 0..n {
            i.push((k % side) as i64);
            j.push((k / side) as i64);
        }
        Ok(Self { side, i, j })
    }

    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Grid coordinates of the 0-based element `k`.
    #[inline]
    pub fn coords(&self, k: usize) -> (i64, i64) {
        (self.i[k], self.j[k])
    }
}

fn perfect_square_side(n: usize) -> Result<usize> {
    let side = (n as f64).sqrt().round() as usize;
    if n == 0 || side * side != n {
        return Err(Error::Config(format!(
            "array size {n} is not a positive perfect square"
        )));
    }
    Ok(side)
}

/// Grid coordinates `(i, j)` of the 1-based element `n` of an N-element URA.
pub fn ura_index(n: usize, n_total: usize) -> Result<(i64, i64)> {
    let side = perfect_square_side(n_total)?;
    if n < 1 || n > n_total {
        return Err(Error::Config(format!(
            "element index {n} outside 1..={n_total}"
        )));
    }
    let k = n - 1;
    Ok(((k % side) as i64, (k / side) as i64))
}

/// Steering vector with elements `exp(j(i_n θ̄_x + j_n θ̄_y))`.
pub fn steering_vector(angles: EffectiveAnglePair, n: usize) -> Result<SteeringVector> {
    let grid = UraGrid::new(n)?;
    Ok(steering_vector_on(&grid, angles))
}

/// Same as [`steering_vector`] but reuses a precomputed grid.
pub fn steering_vector_on(grid: &UraGrid, angles: EffectiveAnglePair) -> SteeringVector {
    let elements = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.coords(k);
            C64::from_polar(1.0, i as f64 * angles.theta_x + j as f64 * angles.theta_y)
        })
        .collect();
    SteeringVector { elements }
}

/// Cartesian position from `(distance, elevation, azimuth)`.
///
/// `x = d cosθ cosφ`, `y = d cosθ sinφ`, `z = −d sinθ`, so that the
/// departure effective angles from the origin reduce to `−π x/d`, `−π y/d`.
pub fn cartesian_from_spherical(d: f64, elevation: f64, azimuth: f64) -> Result<Position> {
    if !(d > 0.0) {
        return Err(Error::Config(format!("distance must be positive, got {d}")));
    }
    let ce = elevation.cos();
    Ok(Position::new(
        d * ce * azimuth.cos(),
        d * ce * azimuth.sin(),
        -d * elevation.sin(),
    ))
}

/// Inverse of [`cartesian_from_spherical`]: `(distance, elevation, azimuth)`.
pub fn spherical_from_cartesian(p: &Position) -> Result<(f64, f64, f64)> {
    let d = Position::origin().distance_to(p);
    if d == 0.0 {
        return Err(Error::Geometry("position coincides with the origin".into()));
    }
    Ok(((d), (-p.z / d).asin(), p.y.atan2(p.x)))
}

/// Effective angle pair of the link `from → to`.
///
/// The same pair serves as departure angles at `from` and arrival angles at
/// `to` (reversed ray direction, positive sign).
pub fn effective_angles(from: &Position, to: &Position) -> Result<EffectiveAnglePair> {
    let d = from.distance_to(to);
    if d == 0.0 {
        return Err(Error::Geometry(
            "effective angles undefined for coincident positions".into(),
        ));
    }
    Ok(EffectiveAnglePair::new(
        -std::f64::consts::PI * (to.x - from.x) / d,
        -std::f64::consts::PI * (to.y - from.y) / d,
    ))
}

/// Brute-force sums `Σₙ (iₙ − i_{N−n+1})²` and the j-analogue over the
/// first N/2 elements; both equal `N(N−1)/6` for even array sides, the
/// normalization constant of the antipodal-pair estimator.
pub fn antipodal_index_sums(n_total: usize) -> Result<(i64, i64)> {
    let grid = UraGrid::new(n_total)?;
    let mut qi = 0i64;
    let mut qj = 0i64;
    for k in 0..n_total / 2 {
        let (i1, j1) = grid.coords(k);
        let (i2, j2) = grid.coords(n_total - 1 - k);
        qi += (i1 - i2) * (i1 - i2);
        qj += (j1 - j2) * (j1 - j2);
    }
    Ok((qi, qj))
}

/// Wrap an angle to the principal branch `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y - two_pi
    } else {
        y
    }
}
