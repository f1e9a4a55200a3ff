use serde::{Deserialize, Serialize};

use super::{Grid, GridError, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stretch {
    MinMax,
    /// percentiles in 0..=100
    Percentile {
        lo: f64,
        hi: f64,
    },
}

/// How two grids are brought to grayscale for comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// each grid stretched over its own range
    #[default]
    Independent,
    /// both grids stretched over their pooled range
    Shared,
}

/// 8-bit image stored north row first, as displayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pixels: Vec<u8>,
    valid: Vec<bool>,
    /// value mapped to 0
    pub lo: f64,
    /// value mapped to 255
    pub hi: f64,
    /// set when `lo == hi` and every valid pixel is mid-gray
    pub degenerate: bool,
}

impl GrayImage {
    /// Fully valid image from row-major pixels.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(GridError::InvalidParameter(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            valid: vec![true; pixels.len()],
            pixels,
            lo: 0.0,
            hi: 255.0,
            degenerate: false,
        })
    }

    /// Pixel at column `x`, row `y` (row 0 is north); `None` for nodata.
    pub fn get(&self, x: usize, y: usize) -> Option<u8> {
        let k = y * self.width + x;
        self.valid[k].then(|| self.pixels[k])
    }

    /// Raw pixels with nodata written as 0.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn valid_pixels(&self) -> Vec<u8> {
        self.pixels.iter().zip(&self.valid).filter(|(_, ok)| **ok).map(|(p, _)| *p).collect()
    }

    pub fn transposed(&self) -> GrayImage {
        let mut out = self.clone();
        out.width = self.height;
        out.height = self.width;
        for y in 0..self.height {
            for x in 0..self.width {
                let (src, dst) = (y * self.width + x, x * self.height + y);
                out.pixels[dst] = self.pixels[src];
                out.valid[dst] = self.valid[src];
            }
        }
        out
    }

    pub fn flipped_horizontal(&self) -> GrayImage {
        let mut out = self.clone();
        for y in 0..self.height {
            let r = y * self.width..(y + 1) * self.width;
            out.pixels[r.clone()].reverse();
            out.valid[r].reverse();
        }
        out
    }
}

fn stretch_bounds(values: &[f64], stretch: Stretch) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(GridError::NoValidCells);
    }
    match stretch {
        Stretch::MinMax => Ok((
            values.iter().cloned().fold(f64::INFINITY, f64::min),
            values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )),
        Stretch::Percentile { lo, hi } => {
            if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo >= hi {
                return Err(GridError::InvalidParameter(format!("percentile stretch {lo}..{hi}")));
            }
            let q = |p: f64| stats::percentile(values, p / 100.0).expect("non-empty");
            Ok((q(lo), q(hi)))
        }
    }
}

fn render(grid: &Grid, lo: f64, hi: f64) -> GrayImage {
    let degenerate = lo == hi;
    let (w, h) = (grid.nx, grid.ny);
    let mut pixels = vec![0u8; w * h];
    let mut valid = vec![false; w * h];
    for row in 0..h {
        let j = h - 1 - row;
        for i in 0..w {
            if let Some(v) = grid.get(i, j) {
                let k = row * w + i;
                valid[k] = true;
                pixels[k] = if degenerate {
                    128
                } else {
                    ((v - lo) / (hi - lo) * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
                };
            }
        }
    }
    GrayImage { width: w, height: h, pixels, valid, lo, hi, degenerate }
}

/// Affine map of `[lo, hi]` onto `0..=255` with half-up rounding and clipping.
///
/// Nodata cells become 0 and are excluded from statistics. A constant grid
/// yields a uniform 128 image with `degenerate` set.
pub fn to_grayscale(grid: &Grid, stretch: Stretch) -> Result<GrayImage> {
    let (lo, hi) = stretch_bounds(&grid.valid_values(), stretch)?;
    Ok(render(grid, lo, hi))
}

/// Population standard deviation of the valid pixels.
pub fn intensity_stddev(img: &GrayImage) -> Result<f64> {
    let px: Vec<f64> = img.valid_pixels().into_iter().map(f64::from).collect();
    if px.len() < 2 {
        return Err(GridError::TooFewPixels(px.len()));
    }
    Ok(stats::population_std(&px).expect("non-empty"))
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut h = [0u64; 256];
    for p in img.valid_pixels() {
        h[p as usize] += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridComparison {
    pub normalization: Normalization,
    pub stddev_a: f64,
    pub stddev_b: f64,
    /// `stddev_b - stddev_a`
    pub delta: f64,
    pub histogram_a: Vec<u64>,
    pub histogram_b: Vec<u64>,
    /// `log10(1 + count)` per bin
    pub log_histogram_a: Vec<f64>,
    pub log_histogram_b: Vec<f64>,
}

/// Grayscale comparison with each grid stretched independently.
pub fn compare_grids(a: &Grid, b: &Grid, stretch: Stretch) -> Result<GridComparison> {
    compare_grids_with(a, b, stretch, Normalization::Independent)
}

pub fn compare_grids_with(
    a: &Grid,
    b: &Grid,
    stretch: Stretch,
    norm: Normalization,
) -> Result<GridComparison> {
    let (ia, ib) = match norm {
        Normalization::Independent => (to_grayscale(a, stretch)?, to_grayscale(b, stretch)?),
        Normalization::Shared => {
            let mut pooled = a.valid_values();
            pooled.extend(b.valid_values());
            let (lo, hi) = stretch_bounds(&pooled, stretch)?;
            if a.valid_count() == 0 || b.valid_count() == 0 {
                return Err(GridError::NoValidCells);
            }
            (render(a, lo, hi), render(b, lo, hi))
        }
    };
    let stddev_a = intensity_stddev(&ia)?;
    let stddev_b = intensity_stddev(&ib)?;
    let (ha, hb) = (histogram(&ia), histogram(&ib));
    let log = |h: &[u64; 256]| h.iter().map(|c| (1.0 + *c as f64).log10()).collect();
    Ok(GridComparison {
        normalization: norm,
        stddev_a,
        stddev_b,
        delta: stddev_b - stddev_a,
        log_histogram_a: log(&ha),
        log_histogram_b: log(&hb),
        histogram_a: ha.to_vec(),
        histogram_b: hb.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UtmPoint;
    use proptest::prelude::*;

    fn grid(nx: usize, ny: usize, v: Vec<f64>) -> Grid {
        Grid::new(UtmPoint::flat(0.0, 0.0), 1.0, nx, ny, v.into_iter().map(Some).collect()).unwrap()
    }

    #[test]
    fn three_values_round_half_up() {
        let img = to_grayscale(&grid(3, 1, vec![0.0, 50.0, 100.0]), Stretch::MinMax).unwrap();
        assert_eq!(img.pixels(), &[0, 128, 255]);
    }

    #[test]
    fn constant_grid_is_mid_gray() {
        let img = to_grayscale(&grid(2, 2, vec![7.0; 4]), Stretch::MinMax).unwrap();
        assert!(img.degenerate);
        assert!(img.pixels().iter().all(|p| *p == 128));
    }

    #[test]
    fn ramp_spans_full_range() {
        let img =
            to_grayscale(&grid(256, 1, (0..256).map(|i| i as f64 * 0.3 - 5.0).collect()), Stretch::MinMax)
                .unwrap();
        assert_eq!(img.pixels().iter().min(), Some(&0));
        assert_eq!(img.pixels().iter().max(), Some(&255));
    }

    #[test]
    fn north_row_first() {
        let img = to_grayscale(&grid(1, 2, vec![0.0, 1.0]), Stretch::MinMax).unwrap();
        assert_eq!(img.pixels(), &[255, 0]);
    }

    #[test]
    fn nodata_excluded() {
        let g = Grid::new(UtmPoint::flat(0.0, 0.0), 1.0, 3, 1, vec![Some(0.0), None, Some(10.0)]).unwrap();
        let img = to_grayscale(&g, Stretch::MinMax).unwrap();
        assert_eq!(img.pixels(), &[0, 0, 255]);
        assert_eq!(img.valid_pixels(), vec![0, 255]);
        assert_eq!(intensity_stddev(&img).unwrap(), 127.5);
    }

    #[test]
    fn stddev_examples() {
        let uni = GrayImage::from_pixels(4, 4, vec![77; 16]).unwrap();
        assert_eq!(intensity_stddev(&uni).unwrap(), 0.0);
        let half = GrayImage::from_pixels(4, 2, [vec![0; 4], vec![255; 4]].concat()).unwrap();
        assert_eq!(intensity_stddev(&half).unwrap(), 127.5);
        let checker = (0..64 * 64).map(|k| if (k / 64 + k % 64) % 2 == 0 { 100 } else { 200 }).collect();
        let img = GrayImage::from_pixels(64, 64, checker).unwrap();
        assert_eq!(intensity_stddev(&img).unwrap(), 50.0);
        assert!(matches!(
            intensity_stddev(&GrayImage::from_pixels(1, 1, vec![3]).unwrap()),
            Err(GridError::TooFewPixels(1))
        ));
    }

    #[test]
    fn percentile_stretch_clips() {
        let g = grid(101, 1, (0..=100).map(f64::from).collect());
        let img = to_grayscale(&g, Stretch::Percentile { lo: 10.0, hi: 90.0 }).unwrap();
        assert_eq!(img.get(5, 0), Some(0));
        assert_eq!(img.get(95, 0), Some(255));
        assert_eq!(img.get(50, 0), Some(128));
    }

    #[test]
    fn self_comparison() {
        let g = grid(4, 3, (0..12).map(|i| (i as f64).sin()).collect());
        let c = compare_grids(&g, &g, Stretch::MinMax).unwrap();
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.histogram_a, c.histogram_b);
    }

    #[test]
    fn affine_contrast_invariance() {
        let g = grid(5, 4, (0..20).map(|i| ((i * 37) % 11) as f64).collect());
        let h = g.map_values(|v| 4.0 * v - 16.0);
        assert_eq!(
            to_grayscale(&g, Stretch::MinMax).unwrap().pixels(),
            to_grayscale(&h, Stretch::MinMax).unwrap().pixels()
        );
        assert_eq!(compare_grids(&g, &h, Stretch::MinMax).unwrap().delta, 0.0);
    }

    proptest! {
        #[test]
        fn monotone_mapping(vals in proptest::collection::vec(-1e4f64..1e4, 2..60)) {
            let n = vals.len();
            let img = to_grayscale(&grid(n, 1, vals.clone()), Stretch::MinMax).unwrap();
            for a in 0..n {
                for b in 0..n {
                    if vals[a] <= vals[b] {
                        prop_assert!(img.get(a, 0) <= img.get(b, 0));
                    }
                }
            }
        }

        #[test]
        fn stddev_invariant_under_transpose_and_flip(
            w in 2usize..12, h in 1usize..12, seed in any::<u64>(),
        ) {
            let px = (0..w * h).map(|k| ((seed.wrapping_mul(k as u64 + 1) >> 7) % 256) as u8).collect();
            let img = GrayImage::from_pixels(w, h, px).unwrap();
            let s = intensity_stddev(&img).unwrap();
            prop_assert!((intensity_stddev(&img.transposed()).unwrap() - s).abs() < 1e-9);
            prop_assert!((intensity_stddev(&img.flipped_horizontal()).unwrap() - s).abs() < 1e-9);
        }
    }
}
