use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimensionError {
    #[error("need at least 3 distinct scales, got {0}")]
    TooFewScales(usize),
    #[error("scales span a factor {0:.3}, need at least one decade")]
    NarrowRange(f64),
    #[error("scales must be positive and finite")]
    BadScale,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub x: [f64; 3],
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionReport {
    /// Least-squares slope of `ln N(r)` against `ln(1/r)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// `(r, N(r))` for every scale used.
    pub scales: Vec<(f64, usize)>,
}

/// Number of parabolic boxes (side `r` in space, `r²` in time) that meet the
/// point set.
pub fn parabolic_box_count(points: &[SpaceTimePoint], r: f64) -> usize {
    let r2 = r * r;
    let boxes: HashSet<[i64; 4]> = points
        .iter()
        .map(|p| {
            [
                (p.x[0] / r).floor() as i64,
                (p.x[1] / r).floor() as i64,
                (p.x[2] / r).floor() as i64,
                (p.t / r2).floor() as i64,
            ]
        })
        .collect();
    boxes.len()
}

/// Box-counting dimension in the parabolic metric. `Ok(None)` for an empty
/// point set.
pub fn parabolic_dimension_estimate(
    points: &[SpaceTimePoint],
    radii: &[f64],
) -> Result<Option<DimensionReport>, DimensionError> {
    let mut rs: Vec<f64> = radii.to_vec();
    if rs.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(DimensionError::BadScale);
    }
    rs.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    rs.dedup();
    if rs.len() < 3 {
        return Err(DimensionError::TooFewScales(rs.len()));
    }
    let span = rs[0] / rs[rs.len() - 1];
    if span < 10.0 * (1.0 - 1e-9) {
        return Err(DimensionError::NarrowRange(span));
    }
    if points.is_empty() {
        return Ok(None);
    }
    let scales: Vec<(f64, usize)> = rs.iter().map(|&r| (r, parabolic_box_count(points, r))).collect();
    let xs: Vec<f64> = scales.iter().map(|s| (1.0 / s.0).ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|s| (s.1 as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(Some(DimensionReport { slope, intercept, residual, scales }))
}

/// `n` logarithmically spaced scales from `r_max` down to `r_min`.
pub fn log_scales(r_max: f64, r_min: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| r_max * (r_min / r_max).powf(i as f64 / (n - 1) as f64))
        .collect()
}
