//! Small, dependency-free curve-analysis helpers shared by tests and scan
//! post-processing: peak width extraction, local maxima with parabolic
//! refinement, straight-line fits, and the two-segment saturation-knee fit.

use crate::error::{Error, Result};

/// Full width at half maximum of a single-peaked series, measured between the
/// outermost half-level crossings with linear interpolation. The half level is
/// (max + baseline)/2 with baseline = min of the series.
pub fn fwhm(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Model("FWHM needs at least 3 points".into()));
    }
    let (mut y_min, mut y_max, mut i_max) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for (i, &(_, y)) in points.iter().enumerate() {
        if y < y_min {
            y_min = y;
        }
        if y > y_max {
            y_max = y;
            i_max = i;
        }
    }
    if !(y_max > y_min) {
        return Err(Error::Model("FWHM undefined for a flat series".into()));
    }
    let half = 0.5 * (y_max + y_min);
    let cross = |a: (f64, f64), b: (f64, f64)| -> f64 {
        a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1)
    };
    // Walk outward from the peak to the first crossings on each side.
    let mut left = None;
    for i in (1..=i_max).rev() {
        let (prev, here) = (points[i - 1], points[i]);
        if prev.1 < half && here.1 >= half {
            left = Some(cross(prev, here));
            break;
        }
    }
    let mut right = None;
    for i in i_max..points.len() - 1 {
        let (here, next) = (points[i], points[i + 1]);
        if here.1 >= half && next.1 < half {
            right = Some(cross(next, here));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok((r - l).abs()),
        _ => Err(Error::Model(
            "FWHM: peak does not fall to half level inside the scanned range".into(),
        )),
    }
}

/// Local maxima of a series, refined by fitting a parabola through each
/// maximum and its two neighbours. Returns (x, y) per maximum, in x order.
/// Plateau edges and series endpoints are not counted as maxima.
pub fn local_maxima_refined(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        let (xl, yl) = points[i - 1];
        let (x0, y0) = points[i];
        let (xr, yr) = points[i + 1];
        if y0 > yl && y0 >= yr && (y0 > yr || i + 2 == points.len() || points[i + 2].1 < y0) {
            // Parabolic vertex through three points (uniform or not).
            let d1 = (y0 - yl) / (x0 - xl);
            let d2 = (yr - y0) / (xr - x0);
            let curv = (d2 - d1) / (0.5 * (xr - xl));
            if curv < 0.0 {
                let x_peak = 0.5 * (xl + x0) + (d1 / -curv);
                let x_peak = x_peak.clamp(xl, xr);
                // Evaluate the parabola at the vertex.
                let y_peak = y0 - 0.5 * curv * (x_peak - x0).powi(2)
                    + (0.5 * (d1 + d2)) * (x_peak - x0);
                out.push((x_peak, y_peak.max(y0)));
            } else {
                out.push((x0, y0));
            }
        }
    }
    out
}

/// Least-squares straight line y = a + b·x. Returns (intercept a, slope b).
pub fn linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Model("linear fit needs at least 2 points".into()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::numerical("linear fit is degenerate (all x equal)", det));
    }
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    Ok((a, b))
}

/// Power-law exponent from a log-log straight-line fit of y = c·xᵖ.
/// All x and y must be positive.
pub fn power_law_exponent(points: &[(f64, f64)]) -> Result<f64> {
    let logged: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 {
                Ok((x.ln(), y.ln()))
            } else {
                Err(Error::Model("power-law fit needs positive x and y".into()))
            }
        })
        .collect::<Result<_>>()?;
    linear_fit(&logged).map(|(_, slope)| slope)
}

/// Saturation-onset extractor: fit the hinge model
/// y = a + b·x + c·max(0, x − k) by least squares, scanning the knee k over a
/// fine grid between interior data points, and return the best k.
/// Intended use: x = log(power), y = SNR in dB.
pub fn knee_two_segment(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::Model("knee fit needs at least 5 points".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite x"));
    let x_lo = pts[1].0;
    let x_hi = pts[pts.len() - 2].0;
    if !(x_hi > x_lo) {
        return Err(Error::Model("knee fit needs distinct x values".into()));
    }
    let sse_for = |k: f64| -> f64 {
        // Linear LS in (a, b, c) for fixed k via 3×3 normal equations.
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for &(x, y) in &pts {
            let basis = [1.0, x, (x - k).max(0.0)];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += basis[r] * basis[c];
                }
                rhs[r] += basis[r] * y;
            }
        }
        let mat = nalgebra::Matrix3::from_fn(|r, c| m[r][c]);
        let v = nalgebra::Vector3::from_row_slice(&rhs);
        match mat.lu().solve(&v) {
            Some(coef) => pts
                .iter()
                .map(|&(x, y)| {
                    let fit = coef[0] + coef[1] * x + coef[2] * (x - k).max(0.0);
                    (y - fit) * (y - fit)
                })
                .sum(),
            None => f64::INFINITY,
        }
    };
    // Coarse grid scan, then golden-section refinement in the best bracket.
    let grid = 200usize;
    let mut best_k = x_lo;
    let mut best_sse = f64::INFINITY;
    for i in 0..=grid {
        let k = x_lo + (x_hi - x_lo) * i as f64 / grid as f64;
        let sse = sse_for(k);
        if sse < best_sse {
            best_sse = sse;
            best_k = k;
        }
    }
    let step = (x_hi - x_lo) / grid as f64;
    let (mut lo, mut hi) = ((best_k - step).max(x_lo), (best_k + step).min(x_hi));
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if sse_for(m1) <= sse_for(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok(0.5 * (lo + hi))
}
