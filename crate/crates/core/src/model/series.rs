use super::{ModelError, Result};

/// Linear interpolation between two values of the same kind.
pub trait Lerp {
    fn lerp(&self, other: &Self, frac: f64) -> Self;
}

impl Lerp for f64 {
    fn lerp(&self, other: &Self, frac: f64) -> Self {
        if frac == 0.0 {
            *self
        } else if frac == 1.0 {
            *other
        } else {
            self + (other - self) * frac
        }
    }
}

/// How ingestion treats timestamps that fail to increase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    /// Error on the first repeated or decreasing timestamp.
    Strict,
    /// Keep the first occurrence, drop any later sample that does not advance time.
    #[default]
    Lenient,
}

/// Values indexed by strictly increasing timestamps (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<V> {
    timestamps: Vec<f64>,
    values: Vec<V>,
}

impl<V> TimeSeries<V> {
    /// Builds a series; timestamps must be finite and strictly increasing.
    pub fn new(timestamps: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(ModelError::LengthMismatch(timestamps.len(), values.len()));
        }
        for (i, t) in timestamps.iter().enumerate() {
            if !t.is_finite() {
                return Err(ModelError::InvalidValue(format!("non-finite timestamp at {i}")));
            }
            if i > 0 && *t <= timestamps[i - 1] {
                return Err(ModelError::NonMonotoneTime { row: i + 1, t: *t });
            }
        }
        Ok(Self { timestamps, values })
    }

    /// Builds a series from `(t, value)` records in file order.
    ///
    /// Row numbers in errors are 1-based data rows.
    pub fn from_records(records: Vec<(f64, V)>, mode: IngestMode) -> Result<Self> {
        let mut timestamps = Vec::with_capacity(records.len());
        let mut values = Vec::with_capacity(records.len());
        for (i, (t, v)) in records.into_iter().enumerate() {
            if !t.is_finite() {
                return Err(ModelError::InvalidValue(format!("row {}: non-finite timestamp", i + 1)));
            }
            if let Some(&last) = timestamps.last() {
                if t <= last {
                    match mode {
                        IngestMode::Strict => return Err(ModelError::NonMonotoneTime { row: i + 1, t }),
                        IngestMode::Lenient => continue,
                    }
                }
            }
            timestamps.push(t);
            values.push(v);
        }
        Ok(Self { timestamps, values })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &V)> {
        self.timestamps.iter().copied().zip(self.values.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&V) -> U) -> TimeSeries<U> {
        TimeSeries { timestamps: self.timestamps.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn start(&self) -> Option<f64> {
        self.timestamps.first().copied()
    }

    pub fn end(&self) -> Option<f64> {
        self.timestamps.last().copied()
    }

    pub fn duration(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Sample rate if every interval matches the mean interval to `rel_tol`.
    pub fn uniform_rate(&self, rel_tol: f64) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let dt = self.duration() / (self.len() - 1) as f64;
        let ok = self.timestamps.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= rel_tol * dt);
        ok.then(|| 1.0 / dt)
    }

    /// Sub-series with timestamps in `[t0, t1]`.
    pub fn slice_time(&self, t0: f64, t1: f64) -> TimeSeries<V>
    where
        V: Clone,
    {
        let lo = self.timestamps.partition_point(|t| *t < t0);
        let hi = self.timestamps.partition_point(|t| *t <= t1);
        TimeSeries { timestamps: self.timestamps[lo..hi].to_vec(), values: self.values[lo..hi].to_vec() }
    }
}

impl<V: Lerp + Clone> TimeSeries<V> {
    /// Linear interpolation at `t`; `None` outside the covered range.
    pub fn interpolate_at(&self, t: f64) -> Option<V> {
        let (first, last) = (self.start()?, self.end()?);
        if t < first || t > last {
            return None;
        }
        let idx = self.timestamps.partition_point(|x| *x <= t);
        if idx == 0 {
            return Some(self.values[0].clone());
        }
        let i = idx - 1;
        if i + 1 >= self.len() || self.timestamps[i] == t {
            return Some(self.values[i].clone());
        }
        let (t0, t1) = (self.timestamps[i], self.timestamps[i + 1]);
        let frac = (t - t0) / (t1 - t0);
        Some(self.values[i].lerp(&self.values[i + 1], frac))
    }
}

/// Linearly resamples `series` onto `t0 + k / rate_hz` spanning its range.
pub fn resample_uniform<V: Lerp + Clone>(series: &TimeSeries<V>, rate_hz: f64) -> Result<TimeSeries<V>> {
    if series.len() < 2 {
        return Err(ModelError::TooFewSamples { needed: 2, got: series.len() });
    }
    if !(rate_hz > 0.0) || !rate_hz.is_finite() {
        return Err(ModelError::InvalidValue(format!("rate must be > 0, got {rate_hz}")));
    }
    let t0 = series.timestamps[0];
    let span = series.duration();
    let n = (span * rate_hz + 1e-9).floor() as usize + 1;
    let mut timestamps = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let t = t0 + k as f64 / rate_hz;
        while seg + 2 < series.len() && series.timestamps[seg + 1] <= t {
            seg += 1;
        }
        let (ta, tb) = (series.timestamps[seg], series.timestamps[seg + 1]);
        let frac = ((t - ta) / (tb - ta)).min(1.0);
        timestamps.push(t);
        values.push(series.values[seg].lerp(&series.values[seg + 1], frac));
    }
    Ok(TimeSeries { timestamps, values })
}
