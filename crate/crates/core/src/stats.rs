//! Small descriptive-statistics helpers shared across modules.

/// Percentile with linear interpolation between closest ranks
/// (the `(n - 1) * q` convention). `q` is in `[0, 1]`.
///
/// Returns `None` for an empty slice. NaNs must be filtered by the caller.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(percentile_sorted(&sorted, q))
}

/// Same as [`percentile`] on already-sorted input.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Root-mean-square after removing the mean.
pub fn rms_about_mean(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / values.len() as f64).sqrt())
}

/// Population standard deviation.
pub fn population_std(values: &[f64]) -> Option<f64> {
    rms_about_mean(values)
}

/// Robust standard deviation estimate: 1.4826 × median absolute deviation.
pub fn robust_sigma(values: &[f64]) -> Option<f64> {
    let med = median(values)?;
    let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    median(&dev).map(|mad| 1.4826 * mad)
}

/// Centered moving median over a time window of total width `window`.
///
/// Each output value is the median of all samples whose timestamp lies in
/// `[t_i - window/2, t_i + window/2]`. `times` must be sorted.
pub fn moving_median(times: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    let half = window / 2.0;
    let mut out = Vec::with_capacity(values.len());
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut buf = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        while times[lo] < t - half {
            lo += 1;
        }
        if hi < i {
            hi = i;
        }
        while hi + 1 < times.len() && times[hi + 1] <= t + half {
            hi += 1;
        }
        buf.clear();
        buf.extend_from_slice(&values[lo..=hi]);
        buf.sort_by(f64::total_cmp);
        out.push(percentile_sorted(&buf, 0.5));
    }
    out
}

/// Ordinary or weighted least-squares line `y = intercept + slope * x`.
///
/// Returns `(intercept, slope)`, or `None` when fewer than two points carry
/// weight or all abscissae coincide.
pub fn weighted_line_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = weights.iter().sum();
    let used = weights.iter().filter(|w| **w > 0.0).count();
    if used < 2 || sw <= 0.0 {
        return None;
    }
    let mx = xs.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(weights).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), Some(1.0));
        assert_eq!(percentile(&v, 1.0), Some(4.0));
        assert!((percentile(&v, 0.5).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(percentile(&[], 0.5), None);
    }

    #[test]
    fn moving_median_rejects_spike() {
        let t: Vec<f64> = (0..11).map(f64::from).collect();
        let mut v = vec![1.0; 11];
        v[5] = 100.0;
        let m = moving_median(&t, &v, 4.0);
        assert!(m.iter().all(|x| *x == 1.0));
    }

    #[test]
    fn line_fit_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (a, b) = weighted_line_fit(&xs, &ys, &[1.0; 4]).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
    }

    #[test]
    fn robust_sigma_of_symmetric_set() {
        let v = [-1.0, 0.0, 1.0];
        assert!((robust_sigma(&v).unwrap() - 1.4826).abs() < 1e-12);
    }
}
