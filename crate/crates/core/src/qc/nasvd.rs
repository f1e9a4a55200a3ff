use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{QcError, QcReport, Result};

/// Multichannel counts, one row per sample and one column per energy channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectraMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SpectraMatrix {
    /// Row-major constructor; counts must be finite and non-negative.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QcError::InvalidSpectra("empty matrix".into()));
        }
        if data.len() != rows * cols {
            return Err(QcError::InvalidSpectra(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(QcError::InvalidSpectra(format!(
                "count {} at row {}, channel {}",
                data[i],
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(QcError::InvalidSpectra("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mean_spectrum(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for r in self.data.chunks(self.cols) {
            for (a, v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|a| *a /= self.rows as f64);
        m
    }

    /// Drops rows with no counts; returns the kept original row indices.
    pub fn filter_zero_rows(&self) -> Result<(SpectraMatrix, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.rows).filter(|&i| self.row(i).iter().any(|v| *v > 0.0)).collect();
        let data: Vec<f64> = kept.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Ok((SpectraMatrix::new(kept.len(), self.cols, data)?, kept))
    }

    pub fn rms_diff(&self, other: &SpectraMatrix) -> f64 {
        let n = self.data.len().max(1) as f64;
        (self.data.iter().zip(&other.data).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n).sqrt()
    }

    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NasvdResult {
    pub denoised: SpectraMatrix,
    /// singular values of the noise-adjusted matrix, descending
    pub singular_values: Vec<f64>,
    pub k: usize,
    /// reconstructed cells that came out negative and were set to zero
    pub clamped: usize,
    /// per-channel scale `1/sqrt(mean)`, 0 for empty channels
    pub scale: Vec<f64>,
}

impl NasvdResult {
    /// Fraction of scaled-space energy kept by the first `k` components.
    pub fn retained_energy(&self) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 1.0;
        }
        self.singular_values[..self.k].iter().map(|s| s * s).sum::<f64>() / total
    }

    pub fn report(&self, noisy: &SpectraMatrix) -> QcReport {
        let chi = counting_residual_ratio(noisy, &self.denoised, self.k);
        let mut r = QcReport::new("nasvd")
            .stat("k", self.k as f64)
            .stat("rows", noisy.rows() as f64)
            .stat("channels", noisy.cols() as f64)
            .stat("clamped", self.clamped as f64)
            .stat("retained_energy", self.retained_energy())
            .stat("rms_change", noisy.rms_diff(&self.denoised))
            .stat("reduced_chi_square", chi)
            .note("columns scaled by 1/sqrt(mean spectrum) before rank-k SVD truncation")
            .note("pass when the residual reduced chi-square lies in [0.5, 2]");
        r.pass = (0.5..=2.0).contains(&chi);
        r
    }
}

/// Noise-adjusted SVD: scale channels by `1/sqrt(mean)`, keep the leading
/// `k` components, unscale and clamp negative counts to zero.
pub fn nasvd(spectra: &SpectraMatrix, k: usize) -> Result<NasvdResult> {
    let (m, n) = (spectra.rows, spectra.cols);
    let max = m.min(n);
    if k == 0 || k > max {
        return Err(QcError::InvalidRank { k, max });
    }
    let mean = spectra.mean_spectrum();
    let scale: Vec<f64> = mean.iter().map(|&s| if s > 0.0 { 1.0 / s.sqrt() } else { 0.0 }).collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| {
        let s = scale[j];
        if s > 0.0 {
            spectra.get(i, j) * s
        } else {
            0.0
        }
    });
    let svd = scaled.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let mut recon = DMatrix::<f64>::zeros(m, n);
    for &c in &order[..k] {
        let s = svd.singular_values[c];
        recon += (u.column(c) * s) * vt.row(c);
    }

    let mut clamped = 0;
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let v = if scale[j] > 0.0 { recon[(i, j)] / scale[j] } else { spectra.get(i, j) };
            if v < 0.0 {
                clamped += 1;
                data.push(0.0);
            } else {
                data.push(v);
            }
        }
    }
    Ok(NasvdResult { denoised: SpectraMatrix { rows: m, cols: n, data }, singular_values, k, clamped, scale })
}

pub fn nasvd_denoise(spectra: &SpectraMatrix, k: usize) -> Result<SpectraMatrix> {
    nasvd(spectra, k).map(|r| r.denoised)
}

/// Reduced chi-square of the residual under Poisson counting noise.
///
/// Each cell contributes `(noisy - model)^2 / model` over cells with a
/// positive model value; the sum is divided by the cell count less the
/// `k(m + n - k)` degrees of freedom of a rank-k fit. Values near 1 mean the
/// removed part is consistent with counting noise.
pub fn counting_residual_ratio(noisy: &SpectraMatrix, denoised: &SpectraMatrix, k: usize) -> f64 {
    let (m, n) = (noisy.rows as f64, noisy.cols as f64);
    let mut chi = 0.0;
    let mut cells = 0usize;
    for (o, e) in noisy.data.iter().zip(&denoised.data) {
        if *e > 0.0 {
            chi += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    let k = k as f64;
    let dof = cells as f64 - k * (m + n - k);
    if dof <= 0.0 {
        return f64::NAN;
    }
    chi / dof
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank1(m: usize, n: usize) -> SpectraMatrix {
        let profile: Vec<f64> = (0..n).map(|j| 50.0 * (-(j as f64) / 10.0).exp() + 2.0).collect();
        let intensity: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * (i as f64 * 0.3).sin()).collect();
        let data = intensity.iter().flat_map(|a| profile.iter().map(move |p| a * p)).collect();
        SpectraMatrix::new(m, n, data).unwrap()
    }

    fn rel_err(a: &SpectraMatrix, b: &SpectraMatrix) -> f64 {
        a.rms_diff(b) / b.rms()
    }

    #[test]
    fn full_rank_identity() {
        let data: Vec<f64> = (0..6 * 4).map(|i| ((i * 7919) % 23) as f64 + 0.5).collect();
        let s = SpectraMatrix::new(6, 4, data).unwrap();
        let out = nasvd_denoise(&s, 4).unwrap();
        assert!(rel_err(&out, &s) < 1e-8);
    }

    #[test]
    fn rank1_noiseless_recovery() {
        let s = rank1(20, 8);
        let r = nasvd(&s, 1).unwrap();
        assert!(rel_err(&r.denoised, &s) < 1e-8);
        assert!(r.singular_values[1] < 1e-8 * r.singular_values[0]);
        assert_eq!(r.clamped, 0);
    }

    #[test]
    fn zero_channel_passes_through() {
        let mut rows = vec![vec![3.0, 0.0, 5.0], vec![6.0, 0.0, 10.0], vec![1.0, 0.0, 2.0]];
        rows[2][2] = 1.7;
        let s = SpectraMatrix::from_rows(&rows).unwrap();
        let out = nasvd_denoise(&s, 1).unwrap();
        for i in 0..3 {
            assert_eq!(out.get(i, 1), 0.0);
        }
    }

    #[test]
    fn rank_bounds() {
        let s = rank1(5, 3);
        assert_eq!(nasvd(&s, 0).unwrap_err(), QcError::InvalidRank { k: 0, max: 3 });
        assert_eq!(nasvd(&s, 4).unwrap_err(), QcError::InvalidRank { k: 4, max: 3 });
    }

    #[test]
    fn rejects_negative_counts() {
        assert!(SpectraMatrix::new(1, 2, vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn filter_zero_rows_keeps_indices() {
        let s = SpectraMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 2.0]])
            .unwrap();
        let (f, kept) = s.filter_zero_rows().unwrap();
        assert_eq!(kept, vec![1, 3]);
        assert_eq!(f.rows(), 2);
    }

    #[test]
    fn output_non_negative() {
        let data: Vec<f64> = (0..10 * 6).map(|i| if i % 5 == 0 { 0.0 } else { (i % 9) as f64 }).collect();
        let s = SpectraMatrix::new(10, 6, data).unwrap();
        for k in 1..=6 {
            assert!(nasvd_denoise(&s, k).unwrap().data().iter().all(|v| *v >= 0.0));
        }
    }
}
