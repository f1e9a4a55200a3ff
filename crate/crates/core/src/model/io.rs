//! CSV schemas: comma separated, one header row, `.` decimal point.
//!
//! | schema    | columns |
//! |-----------|---------|
//! | accel     | `t_s,ax_ms2,ay_ms2,az_ms2` |
//! | mag       | `t_s,easting_m,northing_m,alt_m,tmi_nT` |
//! | base      | `t_s,tmi_nT` |
//! | vlf       | `t_s,easting_m,northing_m,alt_m,inphase_pct,outphase_pct,h1_pct,h2_pct,pT_nT,roll_deg,pitch_deg` |
//! | rad       | `t_s,easting_m,northing_m,alt_m,k_pct,u_ppm[,th_ppm][,ch0..chN]` |
//! | crossover | `x_utm,y_utm,flights_k_pct,tie_k_pct,flights_u_ppm,tie_u_ppm` |
//!
//! Columns are located by name, so extra columns are ignored. Numbers are
//! written in shortest round-trip form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use csv::StringRecord;
use serde::{Deserialize, Serialize};

use super::{
    AccelSample, IngestMode, MagSample, ModelError, RadSample, Result, ScalarSample, TimeSeries, UtmPoint,
    VlfSample,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaKind {
    Accel,
    Mag,
    Base,
    Vlf,
    Rad,
    Crossover,
}

impl SchemaKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemaKind::Accel => "accel",
            SchemaKind::Mag => "mag",
            SchemaKind::Base => "base",
            SchemaKind::Vlf => "vlf",
            SchemaKind::Rad => "rad",
            SchemaKind::Crossover => "crossover",
        }
    }

    /// Required columns, in canonical order.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            SchemaKind::Accel => &["t_s", "ax_ms2", "ay_ms2", "az_ms2"],
            SchemaKind::Mag => &["t_s", "easting_m", "northing_m", "alt_m", "tmi_nT"],
            SchemaKind::Base => &["t_s", "tmi_nT"],
            SchemaKind::Vlf => &[
                "t_s",
                "easting_m",
                "northing_m",
                "alt_m",
                "inphase_pct",
                "outphase_pct",
                "h1_pct",
                "h2_pct",
                "pT_nT",
                "roll_deg",
                "pitch_deg",
            ],
            SchemaKind::Rad => &["t_s", "easting_m", "northing_m", "alt_m", "k_pct", "u_ppm"],
            SchemaKind::Crossover => {
                &["x_utm", "y_utm", "flights_k_pct", "tie_k_pct", "flights_u_ppm", "tie_u_ppm"]
            }
        }
    }
}

/// Parsed content of a file, tagged by schema.
#[derive(Debug, Clone)]
pub enum Dataset {
    Accel(TimeSeries<AccelSample>),
    Mag(TimeSeries<MagSample>),
    Base(TimeSeries<f64>),
    Vlf(TimeSeries<VlfSample>),
    Rad(TimeSeries<RadSample>),
    Crossover(Vec<CrossoverFixtureRow>),
}

/// One row of a point-paired flight/tie comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverFixtureRow {
    pub location: UtmPoint,
    pub flights_k: f64,
    pub tie_k: f64,
    pub flights_u: f64,
    pub tie_u: f64,
    /// printed K difference, from the optional `diff_k_pct` column
    #[serde(default)]
    pub stated_diff_k: Option<f64>,
    /// printed U difference, from the optional `diff_u_ppm` column
    #[serde(default)]
    pub stated_diff_u: Option<f64>,
}

pub fn ingest_csv(path: &Path, schema: SchemaKind, mode: IngestMode) -> Result<Dataset> {
    let f = BufReader::new(File::open(path)?);
    Ok(match schema {
        SchemaKind::Accel => Dataset::Accel(read_accel(f, mode)?),
        SchemaKind::Mag => Dataset::Mag(read_mag(f, mode)?),
        SchemaKind::Base => Dataset::Base(read_base(f, mode)?),
        SchemaKind::Vlf => Dataset::Vlf(read_vlf(f, mode)?),
        SchemaKind::Rad => Dataset::Rad(read_rad(f, mode)?),
        SchemaKind::Crossover => Dataset::Crossover(read_crossover_fixture(f)?),
    })
}

struct Table {
    headers: Vec<String>,
    rows: Vec<StringRecord>,
    schema: &'static str,
}

impl Table {
    fn load<R: Read>(reader: R, schema: &'static str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = match rdr.headers() {
            Ok(h) => h.iter().map(str::to_owned).collect::<Vec<_>>(),
            Err(_) => return Err(ModelError::EmptyFile),
        };
        let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        let rows: Vec<_> = rows.into_iter().filter(|r| !(r.len() == 1 && r[0].is_empty())).collect();
        if headers.iter().all(|h| h.is_empty()) || rows.is_empty() {
            return Err(ModelError::EmptyFile);
        }
        Ok(Self { headers, rows, schema })
    }

    fn col(&self, name: &str) -> Result<usize> {
        self.find(name)
            .ok_or_else(|| ModelError::MissingColumn { column: name.to_owned(), schema: self.schema })
    }

    fn find(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn num(&self, row: usize, col: usize) -> Result<f64> {
        let raw = self.rows[row].get(col).unwrap_or("");
        raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| ModelError::ParseField {
            row: row + 1,
            column: self.headers[col].clone(),
            value: raw.to_owned(),
        })
    }

    fn opt_num(&self, row: usize, col: usize) -> Result<Option<f64>> {
        match self.rows[row].get(col) {
            None | Some("") => Ok(None),
            Some(_) => self.num(row, col).map(Some),
        }
    }

    fn point(&self, row: usize, cols: [usize; 3]) -> Result<UtmPoint> {
        let p = UtmPoint::new(self.num(row, cols[0])?, self.num(row, cols[1])?, self.num(row, cols[2])?);
        p.map_err(|e| ModelError::InvalidValue(format!("row {}: {e}", row + 1)))
    }

    fn position_cols(&self) -> Result<[usize; 3]> {
        Ok([self.col("easting_m")?, self.col("northing_m")?, self.col("alt_m")?])
    }

    /// `chN` columns sorted by channel number.
    fn channel_cols(&self) -> Vec<usize> {
        let mut chans: Vec<(usize, usize)> = self
            .headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.strip_prefix("ch").and_then(|n| n.parse::<usize>().ok()).map(|n| (n, i)))
            .collect();
        chans.sort();
        chans.into_iter().map(|(_, i)| i).collect()
    }
}

pub fn read_accel<R: Read>(reader: R, mode: IngestMode) -> Result<TimeSeries<AccelSample>> {
    let tab = Table::load(reader, SchemaKind::Accel.name())?;
    let [t, x, y, z] = [tab.col("t_s")?, tab.col("ax_ms2")?, tab.col("ay_ms2")?, tab.col("az_ms2")?];
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        recs.push((
            tab.num(r, t)?,
            AccelSample { ax: tab.num(r, x)?, ay: tab.num(r, y)?, az: tab.num(r, z)? },
        ));
    }
    TimeSeries::from_records(recs, mode)
}

pub fn read_mag<R: Read>(reader: R, mode: IngestMode) -> Result<TimeSeries<MagSample>> {
    let tab = Table::load(reader, SchemaKind::Mag.name())?;
    let t = tab.col("t_s")?;
    let pos = tab.position_cols()?;
    let tmi = tab.col("tmi_nT")?;
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        recs.push((tab.num(r, t)?, MagSample { position: tab.point(r, pos)?, tmi: tab.num(r, tmi)? }));
    }
    TimeSeries::from_records(recs, mode)
}

pub fn read_base<R: Read>(reader: R, mode: IngestMode) -> Result<TimeSeries<f64>> {
    read_scalar_column(reader, "tmi_nT", mode)
}

/// Any `t_s` + named numeric column.
pub fn read_scalar_column<R: Read>(reader: R, column: &str, mode: IngestMode) -> Result<TimeSeries<f64>> {
    let tab = Table::load(reader, "scalar")?;
    let t = tab.col("t_s")?;
    let v = tab.col(column)?;
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        recs.push((tab.num(r, t)?, tab.num(r, v)?));
    }
    TimeSeries::from_records(recs, mode)
}

/// Any positioned file (`t_s,easting_m,northing_m,alt_m,...`) reduced to one column.
///
/// Rows whose value cell is empty are skipped.
pub fn read_located_column<R: Read>(
    reader: R,
    column: &str,
    mode: IngestMode,
) -> Result<TimeSeries<ScalarSample>> {
    let tab = Table::load(reader, "located")?;
    let t = tab.col("t_s")?;
    let pos = tab.position_cols()?;
    let v = tab.col(column)?;
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        if let Some(value) = tab.opt_num(r, v)? {
            recs.push((tab.num(r, t)?, ScalarSample { position: tab.point(r, pos)?, value }));
        }
    }
    TimeSeries::from_records(recs, mode)
}

pub fn read_vlf<R: Read>(reader: R, mode: IngestMode) -> Result<TimeSeries<VlfSample>> {
    let tab = Table::load(reader, SchemaKind::Vlf.name())?;
    let t = tab.col("t_s")?;
    let pos = tab.position_cols()?;
    let c: Vec<usize> = SchemaKind::Vlf.columns()[4..].iter().map(|n| tab.col(n)).collect::<Result<_>>()?;
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        let roll = tab.num(r, c[5])?;
        let pitch = tab.num(r, c[6])?;
        if roll.abs() > 180.0 || pitch.abs() > 180.0 {
            return Err(ModelError::InvalidValue(format!("row {}: attitude outside [-180, 180]", r + 1)));
        }
        recs.push((
            tab.num(r, t)?,
            VlfSample {
                position: tab.point(r, pos)?,
                in_phase: tab.num(r, c[0])?,
                out_of_phase: tab.num(r, c[1])?,
                h1: tab.num(r, c[2])?,
                h2: tab.num(r, c[3])?,
                pt: tab.num(r, c[4])?,
                roll,
                pitch,
            },
        ));
    }
    TimeSeries::from_records(recs, mode)
}

pub fn read_rad<R: Read>(reader: R, mode: IngestMode) -> Result<TimeSeries<RadSample>> {
    let tab = Table::load(reader, SchemaKind::Rad.name())?;
    let t = tab.col("t_s")?;
    let pos = tab.position_cols()?;
    let k = tab.col("k_pct")?;
    let u = tab.col("u_ppm")?;
    let th = tab.find("th_ppm");
    let chans = tab.channel_cols();
    let mut recs = Vec::with_capacity(tab.rows.len());
    for r in 0..tab.rows.len() {
        let kv = tab.num(r, k)?;
        let uv = tab.num(r, u)?;
        let thv = match th {
            Some(c) => tab.opt_num(r, c)?,
            None => None,
        };
        if kv < 0.0 || uv < 0.0 || thv.is_some_and(|v| v < 0.0) {
            return Err(ModelError::InvalidValue(format!("row {}: negative concentration", r + 1)));
        }
        let spectrum = if chans.is_empty() || tab.opt_num(r, chans[0])?.is_none() {
            None
        } else {
            let counts = chans.iter().map(|&c| tab.num(r, c)).collect::<Result<Vec<_>>>()?;
            if counts.iter().any(|c| *c < 0.0) {
                return Err(ModelError::InvalidValue(format!("row {}: negative spectrum count", r + 1)));
            }
            Some(counts)
        };
        recs.push((
            tab.num(r, t)?,
            RadSample { position: tab.point(r, pos)?, k: kv, u: uv, th: thv, raw_spectrum: spectrum },
        ));
    }
    TimeSeries::from_records(recs, mode)
}

pub fn read_crossover_fixture<R: Read>(reader: R) -> Result<Vec<CrossoverFixtureRow>> {
    let tab = Table::load(reader, SchemaKind::Crossover.name())?;
    let c: Vec<usize> = SchemaKind::Crossover.columns().iter().map(|n| tab.col(n)).collect::<Result<_>>()?;
    let (dk, du) = (tab.find("diff_k_pct"), tab.find("diff_u_ppm"));
    let opt = |r: usize, c: Option<usize>| c.map_or(Ok(None), |c| tab.opt_num(r, c));
    (0..tab.rows.len())
        .map(|r| {
            Ok(CrossoverFixtureRow {
                location: UtmPoint::flat(tab.num(r, c[0])?, tab.num(r, c[1])?),
                flights_k: tab.num(r, c[2])?,
                tie_k: tab.num(r, c[3])?,
                flights_u: tab.num(r, c[4])?,
                tie_u: tab.num(r, c[5])?,
                stated_diff_k: opt(r, dk)?,
                stated_diff_u: opt(r, du)?,
            })
        })
        .collect()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn pos_fields(p: &UtmPoint) -> [String; 3] {
    [p.easting.to_string(), p.northing.to_string(), p.altitude_agl.to_string()]
}

pub fn write_accel<W: Write>(w: W, series: &TimeSeries<AccelSample>) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(SchemaKind::Accel.columns())?;
    for (t, s) in series.iter() {
        wr.write_record([t.to_string(), s.ax.to_string(), s.ay.to_string(), s.az.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_mag<W: Write>(w: W, series: &TimeSeries<MagSample>) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(SchemaKind::Mag.columns())?;
    for (t, s) in series.iter() {
        let [e, n, a] = pos_fields(&s.position);
        wr.write_record([t.to_string(), e, n, a, s.tmi.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_base<W: Write>(w: W, series: &TimeSeries<f64>) -> Result<()> {
    write_scalar_column(w, "tmi_nT", series)
}

pub fn write_scalar_column<W: Write>(w: W, column: &str, series: &TimeSeries<f64>) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t_s", column])?;
    for (t, v) in series.iter() {
        wr.write_record([t.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_vlf<W: Write>(w: W, series: &TimeSeries<VlfSample>) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(SchemaKind::Vlf.columns())?;
    for (t, s) in series.iter() {
        let [e, n, a] = pos_fields(&s.position);
        wr.write_record([
            t.to_string(),
            e,
            n,
            a,
            s.in_phase.to_string(),
            s.out_of_phase.to_string(),
            s.h1.to_string(),
            s.h2.to_string(),
            s.pt.to_string(),
            s.roll.to_string(),
            s.pitch.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes the rad schema; `th_ppm` and `chN` columns appear only when some
/// sample carries them. Absent values are written as empty cells.
pub fn write_rad<W: Write>(w: W, series: &TimeSeries<RadSample>) -> Result<()> {
    let has_th = series.values().iter().any(|s| s.th.is_some());
    let n_ch =
        series.values().iter().filter_map(|s| s.raw_spectrum.as_ref().map(Vec::len)).max().unwrap_or(0);
    let mut header: Vec<String> = SchemaKind::Rad.columns().iter().map(|s| s.to_string()).collect();
    if has_th {
        header.push("th_ppm".into());
    }
    header.extend((0..n_ch).map(|i| format!("ch{i}")));
    let mut wr = writer(w);
    wr.write_record(&header)?;
    for (t, s) in series.iter() {
        let [e, n, a] = pos_fields(&s.position);
        let mut rec = vec![t.to_string(), e, n, a, s.k.to_string(), s.u.to_string()];
        if has_th {
            rec.push(s.th.map(|v| v.to_string()).unwrap_or_default());
        }
        match &s.raw_spectrum {
            Some(counts) => rec.extend(counts.iter().map(|c| c.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), n_ch)),
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_crossover_fixture<W: Write>(w: W, rows: &[CrossoverFixtureRow]) -> Result<()> {
    let mut wr = writer(w);
    let stated = rows.iter().any(|r| r.stated_diff_k.is_some() || r.stated_diff_u.is_some());
    let mut header: Vec<&str> = SchemaKind::Crossover.columns().to_vec();
    if stated {
        header.extend(["diff_k_pct", "diff_u_ppm"]);
    }
    wr.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.location.easting.to_string(),
            r.location.northing.to_string(),
            r.flights_k.to_string(),
            r.tie_k.to_string(),
            r.flights_u.to_string(),
            r.tie_u.to_string(),
        ];
        if stated {
            rec.push(opt(r.stated_diff_k));
            rec.push(opt(r.stated_diff_u));
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Opens `path` for buffered writing.
pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
