use std::io::{BufRead, BufReader, Read, Write};

use super::{GrayImage, Grid, GridError, Result};
use crate::model::UtmPoint;

pub const ASC_NODATA: f64 = -9999.0;

/// ESRI ASCII grid, northern row first.
pub fn write_asc<W: Write>(mut w: W, grid: &Grid) -> Result<()> {
    writeln!(w, "ncols {}", grid.nx)?;
    writeln!(w, "nrows {}", grid.ny)?;
    writeln!(w, "xllcorner {}", grid.origin.easting)?;
    writeln!(w, "yllcorner {}", grid.origin.northing)?;
    writeln!(w, "cellsize {}", grid.cell_size)?;
    writeln!(w, "NODATA_value {ASC_NODATA}")?;
    for j in (0..grid.ny).rev() {
        let row: Vec<String> =
            (0..grid.nx).map(|i| grid.get(i, j).map_or(ASC_NODATA.to_string(), |v| v.to_string())).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_asc<R: Read>(r: R) -> Result<Grid> {
    let reader = BufReader::new(r);
    let mut header: Vec<(String, f64)> = Vec::new();
    let mut cells: Vec<f64> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        let mut tokens = line.split_whitespace().peekable();
        let Some(first) = tokens.peek() else { continue };
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let key = tokens.next().unwrap_or_default().to_ascii_lowercase();
            let val = tokens
                .next()
                .ok_or_else(|| GridError::Parse { line: line_no, msg: format!("missing value for {key}") })?;
            let val: f64 = val
                .parse()
                .map_err(|_| GridError::Parse { line: line_no, msg: format!("bad number `{val}`") })?;
            header.push((key, val));
        } else {
            for t in tokens {
                cells.push(
                    t.parse()
                        .map_err(|_| GridError::Parse { line: line_no, msg: format!("bad number `{t}`") })?,
                );
            }
        }
    }
    let get = |k: &str| {
        header
            .iter()
            .find(|(h, _)| h == k)
            .map(|(_, v)| *v)
            .ok_or_else(|| GridError::Parse { line: 0, msg: format!("missing header `{k}`") })
    };
    let nx = get("ncols")? as usize;
    let ny = get("nrows")? as usize;
    let cell = get("cellsize")?;
    let (x, y) = match (get("xllcorner"), get("yllcorner")) {
        (Ok(x), Ok(y)) => (x, y),
        _ => (get("xllcenter")? - cell / 2.0, get("yllcenter")? - cell / 2.0),
    };
    let nodata = get("nodata_value").unwrap_or(ASC_NODATA);
    if cells.len() != nx * ny {
        return Err(GridError::Parse { line: 0, msg: format!("{} cells for a {nx}x{ny} grid", cells.len()) });
    }
    let mut values = vec![None; nx * ny];
    for (row, chunk) in cells.chunks(nx).enumerate() {
        let j = ny - 1 - row;
        for (i, v) in chunk.iter().enumerate() {
            values[j * nx + i] = (*v != nodata).then_some(*v);
        }
    }
    Grid::new(UtmPoint::flat(x, y), cell, nx, ny, values)
}

/// Plain PGM (P2), maxval 255.
pub fn write_pgm<W: Write>(mut w: W, img: &GrayImage) -> Result<()> {
    writeln!(w, "P2")?;
    writeln!(w, "{} {}", img.width, img.height)?;
    writeln!(w, "255")?;
    for row in img.pixels().chunks(img.width.max(1)) {
        let s: Vec<String> = row.iter().map(u8::to_string).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{to_grayscale, Stretch};

    #[test]
    fn asc_round_trip() {
        let g = Grid::new(
            UtmPoint::flat(327000.5, 5030000.0),
            10.0,
            3,
            2,
            vec![Some(1.5), None, Some(-2.25), Some(54000.125), Some(0.0), Some(1e-7)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_asc(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "ncols 3\nnrows 2\nxllcorner 327000.5\nyllcorner 5030000\ncellsize 10\nNODATA_value -9999\n"
        ));
        // north row first
        assert!(text.contains("54000.125 0 0.0000001\n1.5 -9999 -2.25\n"));
        assert_eq!(read_asc(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn pgm_layout() {
        let g =
            Grid::new(UtmPoint::flat(0.0, 0.0), 1.0, 2, 2, vec![Some(0.0), Some(1.0), Some(2.0), Some(3.0)])
                .unwrap();
        let img = to_grayscale(&g, Stretch::MinMax).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &img).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "P2\n2 2\n255\n170 255\n0 85\n");
    }

    #[test]
    fn asc_rejects_short_body() {
        let text = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n";
        assert!(matches!(read_asc(text.as_bytes()), Err(GridError::Parse { .. })));
    }
}
