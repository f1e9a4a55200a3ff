//! Gridding of located samples and grayscale intensity statistics.

mod image;
mod io;

pub use image::{
    compare_grids, compare_grids_with, histogram, intensity_stddev, to_grayscale, GrayImage, GridComparison,
    Normalization, Stretch,
};
pub use io::{read_asc, write_asc, write_pgm, ASC_NODATA};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ScalarSample, UtmPoint};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("cell size must be > 0, got {0}")]
    InvalidCellSize(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid has no valid cells")]
    NoValidCells,
    #[error("need at least 2 valid pixels, got {0}")]
    TooFewPixels(usize),
    #[error("grid dimensions differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GridError> = std::result::Result<T, E>;

/// Regular raster. `origin` is the lower-left (south-west) corner; cell
/// `(i, j)` has column `i` counted east and row `j` counted north.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: UtmPoint,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl Grid {
    /// `values` row-major from the southern row; `None` marks nodata.
    pub fn new(
        origin: UtmPoint,
        cell_size: f64,
        nx: usize,
        ny: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(GridError::InvalidCellSize(cell_size));
        }
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(GridError::InvalidParameter(format!("{} values for a {nx}x{ny} grid", values.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GridError::InvalidParameter("non-finite cell value".into()));
        }
        let valid = values.iter().map(Option::is_some).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
        Ok(Self { origin, cell_size, nx, ny, values, valid })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = j * self.nx + i;
        self.valid[k].then(|| self.values[k])
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.easting + (i as f64 + 0.5) * self.cell_size,
            self.origin.northing + (j as f64 + 0.5) * self.cell_size,
        )
    }

    /// Cell values row-major from the south; `None` for nodata.
    pub fn cells(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values.iter().zip(&self.valid).map(|(v, ok)| ok.then_some(*v))
    }

    pub fn valid_values(&self) -> Vec<f64> {
        self.cells().flatten().collect()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Applies `f` to every valid cell.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Grid {
        let mut g = self.clone();
        for (v, ok) in g.values.iter_mut().zip(&g.valid) {
            if *ok {
                *v = f(*v);
            }
        }
        g
    }
}

/// Explicit raster placement for [`grid_idw`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridExtent {
    pub x_ll: f64,
    pub y_ll: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridExtent {
    /// Cells centred on a lattice anchored at the south-west sample, covering all samples.
    pub fn covering(samples: &[ScalarSample], cell_size: f64) -> Option<Self> {
        let first = samples.first()?;
        let (mut x0, mut y0) = (first.position.easting, first.position.northing);
        let (mut x1, mut y1) = (x0, y0);
        for s in samples {
            x0 = x0.min(s.position.easting);
            x1 = x1.max(s.position.easting);
            y0 = y0.min(s.position.northing);
            y1 = y1.max(s.position.northing);
        }
        Some(Self {
            x_ll: x0 - cell_size / 2.0,
            y_ll: y0 - cell_size / 2.0,
            nx: ((x1 - x0) / cell_size).round() as usize + 1,
            ny: ((y1 - y0) / cell_size).round() as usize + 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdwOptions {
    pub cell_size: f64,
    pub power: f64,
    pub search_radius: f64,
    /// `None` covers the sample bounding box
    pub extent: Option<GridExtent>,
}

impl IdwOptions {
    /// Power 2 and a search radius of four line spacings.
    pub fn for_line_spacing(cell_size: f64, line_spacing: f64) -> Self {
        Self { cell_size, power: 2.0, search_radius: 4.0 * line_spacing, extent: None }
    }
}

/// Inverse-distance-weighted gridding.
///
/// Samples within `search_radius` of a cell centre contribute with weight
/// `d^-power`; a sample sitting on the centre (within 1e-9 m) sets the
/// cell value outright, averaging if several coincide. Cells with no
/// sample in range are nodata.
pub fn grid_idw(samples: &[ScalarSample], opts: &IdwOptions) -> Result<Grid> {
    if samples.len() < 3 {
        return Err(GridError::TooFewSamples(samples.len()));
    }
    let c = opts.cell_size;
    if !(c > 0.0) || !c.is_finite() {
        return Err(GridError::InvalidCellSize(c));
    }
    if !(opts.search_radius > 0.0) || !(opts.power > 0.0) {
        return Err(GridError::InvalidParameter(format!(
            "power {} and search radius {} must be > 0",
            opts.power, opts.search_radius
        )));
    }
    if samples.iter().any(|s| !s.value.is_finite()) {
        return Err(GridError::InvalidParameter("non-finite sample value".into()));
    }
    let ext = match opts.extent {
        Some(e) => e,
        None => GridExtent::covering(samples, c).expect("non-empty"),
    };
    let r = opts.search_radius;
    let bucket = |x: f64, y: f64| ((x / r).floor() as i64, (y / r).floor() as i64);
    let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, s) in samples.iter().enumerate() {
        index.entry(bucket(s.position.easting, s.position.northing)).or_default().push(k);
    }

    let mut values = Vec::with_capacity(ext.nx * ext.ny);
    for j in 0..ext.ny {
        for i in 0..ext.nx {
            let cx = ext.x_ll + (i as f64 + 0.5) * c;
            let cy = ext.y_ll + (j as f64 + 0.5) * c;
            let (bx, by) = bucket(cx, cy);
            let (mut wsum, mut vsum) = (0.0, 0.0);
            let (mut exact_n, mut exact_sum) = (0usize, 0.0);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(list) = index.get(&(bx + dx, by + dy)) else {
                        continue;
                    };
                    for &k in list {
                        let s = &samples[k];
                        let d = (s.position.easting - cx).hypot(s.position.northing - cy);
                        if d <= 1e-9 {
                            exact_n += 1;
                            exact_sum += s.value;
                        } else if d <= r {
                            let w = d.powf(-opts.power);
                            wsum += w;
                            vsum += w * s.value;
                        }
                    }
                }
            }
            values.push(if exact_n > 0 {
                Some(exact_sum / exact_n as f64)
            } else if wsum > 0.0 {
                Some(vsum / wsum)
            } else {
                None
            });
        }
    }
    let origin = UtmPoint::flat(ext.x_ll, ext.y_ll);
    Grid::new(origin, c, ext.nx, ext.ny, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: f64, y: f64, v: f64) -> ScalarSample {
        ScalarSample { position: UtmPoint::flat(x, y), value: v }
    }

    fn one_cell() -> GridExtent {
        GridExtent { x_ll: 0.0, y_ll: 0.0, nx: 1, ny: 1 }
    }

    #[test]
    fn sample_at_center_is_exact() {
        let opts = IdwOptions { cell_size: 10.0, power: 2.0, search_radius: 20.0, extent: Some(one_cell()) };
        let g = grid_idw(&[s(5.0, 5.0, 42.0), s(8.0, 5.0, 0.0), s(5.0, 9.0, -7.0)], &opts).unwrap();
        assert_eq!(g.get(0, 0), Some(42.0));
    }

    #[test]
    fn equidistant_pair_averages() {
        let opts = IdwOptions { cell_size: 10.0, power: 2.0, search_radius: 4.0, extent: Some(one_cell()) };
        // the third sample lies outside the search radius
        let g = grid_idw(&[s(2.0, 5.0, 0.0), s(8.0, 5.0, 10.0), s(100.0, 100.0, 99.0)], &opts).unwrap();
        assert!((g.get(0, 0).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn constant_samples() {
        let pts: Vec<ScalarSample> =
            (0..30).map(|k| s((k % 6) as f64 * 7.0, (k / 6) as f64 * 9.0, 3.25)).collect();
        let g = grid_idw(&pts, &IdwOptions::for_line_spacing(5.0, 9.0)).unwrap();
        assert!(g.valid_count() > 0);
        assert!(g.valid_values().iter().all(|v| (v - 3.25).abs() < 1e-12));
    }

    #[test]
    fn unreachable_cells_are_nodata() {
        let opts = IdwOptions {
            cell_size: 10.0,
            power: 2.0,
            search_radius: 6.0,
            extent: Some(GridExtent { x_ll: 0.0, y_ll: 0.0, nx: 5, ny: 1 }),
        };
        let g = grid_idw(&[s(5.0, 5.0, 1.0), s(6.0, 5.0, 1.0), s(5.0, 6.0, 1.0)], &opts).unwrap();
        assert!(g.get(0, 0).is_some());
        assert!(g.get(4, 0).is_none());
    }

    #[test]
    fn automatic_extent_centres_on_samples() {
        let pts = [s(100.0, 200.0, 1.0), s(130.0, 200.0, 2.0), s(100.0, 220.0, 3.0)];
        let g = grid_idw(&pts, &IdwOptions::for_line_spacing(10.0, 10.0)).unwrap();
        assert_eq!((g.nx, g.ny), (4, 3));
        assert_eq!(g.cell_center(0, 0), (100.0, 200.0));
        assert_eq!(g.get(3, 0), Some(2.0));
    }

    #[test]
    fn too_few_samples() {
        let e = grid_idw(&[s(0.0, 0.0, 1.0), s(1.0, 0.0, 1.0)], &IdwOptions::for_line_spacing(1.0, 1.0));
        assert!(matches!(e, Err(GridError::TooFewSamples(2))));
    }

    proptest! {
        #[test]
        fn convex_combination(
            vals in proptest::collection::vec(-1e3f64..1e3, 3..40),
            seed in 0u64..1000,
        ) {
            let pts: Vec<ScalarSample> = vals
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let a = (k as f64 + seed as f64) * 2.399;
                    s(50.0 + 40.0 * a.cos() * (k as f64 / 40.0), 50.0 + 40.0 * a.sin() * (k as f64 / 40.0), *v)
                })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let g = grid_idw(&pts, &IdwOptions::for_line_spacing(7.0, 5.0)).unwrap();
            for v in g.valid_values() {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}
