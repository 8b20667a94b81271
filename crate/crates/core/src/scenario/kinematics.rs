use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Velocities and accelerations derived from a position series.
///
/// Velocities are raw finite differences of the positions; accelerations
/// are finite differences of the moving-average-smoothed velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub v_lon: Vec<f64>,
    pub v_lat: Vec<f64>,
    pub a_lon: Vec<f64>,
    pub a_lat: Vec<f64>,
}

/// First derivative of a uniformly sampled series: central differences in
/// the interior, second-order one-sided differences at the ends (first-order
/// when only two samples exist).
pub fn differentiate(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let d = (values[1] - values[0]) / dt;
            vec![d, d]
        }
        _ => {
            let mut out = Vec::with_capacity(n);
            out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt));
            for i in 1..n - 1 {
                out.push((values[i + 1] - values[i - 1]) / (2.0 * dt));
            }
            out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt));
            out
        }
    }
}

/// Centred moving average over `window` samples (odd). Near the ends the
/// window shrinks symmetrically, so linear signals pass through unchanged.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &values[i - h..=i + h];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Derive `(v_lon, v_lat, a_lon, a_lat)` from road-frame positions.
pub fn derive_kinematics(positions: &[Vec2], dt: f64, window: usize) -> Result<Kinematics> {
    if positions.len() < 3 {
        return Err(Error::TooShort(format!(
            "derive_kinematics needs at least 3 samples, got {}",
            positions.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    check_window(window)?;
    let xs: Vec<f64> = positions.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = positions.iter().map(|p| p.y).collect();
    let v_lon = differentiate(&xs, dt);
    let v_lat = differentiate(&ys, dt);
    let (a_lon, a_lat) = accelerations(&v_lon, &v_lat, dt, window)?;
    Ok(Kinematics {
        v_lon,
        v_lat,
        a_lon,
        a_lat,
    })
}

pub(crate) fn accelerations(
    v_lon: &[f64],
    v_lat: &[f64],
    dt: f64,
    window: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_window(window)?;
    Ok((
        differentiate(&moving_average(v_lon, window), dt),
        differentiate(&moving_average(v_lat, window), dt),
    ))
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "smoothing window must be a positive odd sample count, got {window}"
        )));
    }
    Ok(())
}
