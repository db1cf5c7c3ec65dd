//! Deterministic artifact writers: binary PGM images, small CSV tables,
//! and CSV vector round-trips.
//!
//! Floating-point values are written with Rust's shortest round-trip
//! formatting, so identical inputs always produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Write an image as an 8-bit binary PGM (`P5`), max-normalized: the
/// largest pixel maps to 255, an all-zero image stays black. Row order is
/// top-down, i.e. the highest `iy` row comes first.
pub fn write_pgm(path: &Path, grid: &ImageGrid, image: &[f64]) -> Result<()> {
    if image.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            context: "pgm image",
            expected: grid.n(),
            got: image.len(),
        });
    }
    let max = image.iter().cloned().fold(0.0f64, f64::max);
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", grid.n_x(), grid.n_y())?;
    let mut row = Vec::with_capacity(grid.n_x());
    for iy in (0..grid.n_y()).rev() {
        row.clear();
        for ix in 0..grid.n_x() {
            let v = image[grid.linear(ix, iy)];
            let byte = if max > 0.0 {
                ((v / max * 255.0).round()).clamp(0.0, 255.0) as u8
            } else {
                0
            };
            row.push(byte);
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write an image as a flat CSV with header `ix,iy,value`, rows ordered by
/// `iy` then `ix` ascending (raw float values, no normalization).
pub fn write_image_csv(path: &Path, grid: &ImageGrid, image: &[f64]) -> Result<()> {
    if image.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            context: "csv image",
            expected: grid.n(),
            got: image.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "ix,iy,value")?;
    for iy in 0..grid.n_y() {
        for ix in 0..grid.n_x() {
            writeln!(w, "{},{},{}", ix, iy, image[grid.linear(ix, iy)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write an indexed vector as CSV with header `index,<value_name>`.
pub fn write_vector_csv(path: &Path, value_name: &str, values: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,{value_name}")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{},{}", i, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a numeric vector from a CSV written by [`write_vector_csv`] (or
/// any CSV whose last column is the value): the first line is treated as a
/// header, each following line contributes its final comma-separated
/// field.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let field = line.rsplit(',').next().unwrap_or("").trim().to_string();
        let v: f64 = field.parse().map_err(|_| {
            Error::InvalidConfig(format!(
                "line {} of {}: cannot parse {field:?} as a number",
                lineno + 1,
                path.display()
            ))
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} holds no data rows",
            path.display()
        )));
    }
    Ok(out)
}

/// Write a 1-D signal (e.g. a detector readout) as a single-row binary PGM
/// strip, max-normalized over absolute values so sign-free magnitude shows
/// up in viewers that cannot plot CSVs.
pub fn write_profile_pgm(path: &Path, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot write an empty profile strip".into(),
        ));
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} 1\n255\n", values.len())?;
    let row: Vec<u8> = values
        .iter()
        .map(|v| {
            if max > 0.0 {
                ((v.abs() / max * 255.0).round()).clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    w.write_all(&row)?;
    w.flush()?;
    Ok(())
}

/// Write a residual trace as CSV with header `iteration,residual`.
pub fn write_trace_csv(path: &Path, trace: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iteration,residual")?;
    for (t, r) in trace.iter().enumerate() {
        writeln!(w, "{},{}", t, r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_is_max_normalized_and_top_down() {
        let dir = std::env::temp_dir().join("cosharp_io_test_pgm");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("img.pgm");
        let grid = ImageGrid::new(1.0, 1.0, 2, 2).unwrap();
        // Pixel (0,1) = top-left holds the max.
        let mut img = vec![0.0; 4];
        img[grid.linear(0, 1)] = 2.0;
        img[grid.linear(1, 0)] = 1.0;
        write_pgm(&path, &grid, &img).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        let px = &bytes[header.len()..];
        assert_eq!(px, &[255, 0, 0, 128]);
    }

    #[test]
    fn all_zero_image_writes_black_pgm() {
        let dir = std::env::temp_dir().join("cosharp_io_test_pgm0");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zero.pgm");
        let grid = ImageGrid::new(1.0, 1.0, 2, 2).unwrap();
        write_pgm(&path, &grid, &[0.0; 4]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[bytes.len() - 4..], &[0, 0, 0, 0]);
    }

    #[test]
    fn vector_csv_round_trips() {
        let dir = std::env::temp_dir().join("cosharp_io_test_csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.csv");
        let v = vec![1.5, -0.25, 3.333333333333333e-7, 0.1 + 0.2];
        write_vector_csv(&path, "value", &v).unwrap();
        let back = read_vector_csv(&path).unwrap();
        assert_eq!(v, back, "shortest round-trip formatting must be exact");
    }

    #[test]
    fn malformed_csv_is_reported() {
        let dir = std::env::temp_dir().join("cosharp_io_test_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "index,value\n0,hello\n").unwrap();
        assert!(read_vector_csv(&path).is_err());
    }
}
