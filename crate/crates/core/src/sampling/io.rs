//! SDF sample-set files: CSV (`x,y,z,phi` header) and a little-endian float32
//! binary (magic `SDFS`, count as u64, then 4 floats per record).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::real::Real;

use super::SdfSample;

const BIN_MAGIC: &[u8; 4] = b"SDFS";

pub fn write_samples_csv<R: Real>(samples: &[SdfSample<R>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "x,y,z,phi").map_err(|e| Error::io(path, e))?;
    for s in samples {
        writeln!(
            w,
            "{:.9e},{:.9e},{:.9e},{:.9e}",
            s.point.x.as_f64(),
            s.point.y.as_f64(),
            s.point.z.as_f64(),
            s.distance.as_f64()
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples_csv<R: Real>(path: impl AsRef<Path>) -> Result<Vec<SdfSample<R>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.starts_with('x') {
            continue; // header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let mut vals = [0.0f64; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse()
                .map_err(|e| Error::parse(path, lineno + 1, format!("bad number {f:?}: {e}")))?;
        }
        samples.push(SdfSample::new(
            Vec3::of(vals[0], vals[1], vals[2]),
            R::of(vals[3]),
        ));
    }
    Ok(samples)
}

pub fn write_samples_bin<R: Real>(samples: &[SdfSample<R>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(BIN_MAGIC).map_err(io_err)?;
    w.write_all(&(samples.len() as u64).to_le_bytes()).map_err(io_err)?;
    for s in samples {
        for v in [s.point.x, s.point.y, s.point.z, s.distance] {
            w.write_all(&(v.as_f64() as f32).to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn read_samples_bin<R: Real>(path: impl AsRef<Path>) -> Result<Vec<SdfSample<R>>> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[0..4] != BIN_MAGIC {
        return Err(Error::Format("missing SDFS magic".into()));
    }
    let count = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let expected = 12 + count * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for {count} records, file has {}",
            bytes.len()
        )));
    }
    let mut samples = Vec::with_capacity(count);
    let mut off = 12;
    for _ in 0..count {
        let mut vals = [0.0f32; 4];
        for v in &mut vals {
            *v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            off += 4;
        }
        samples.push(SdfSample::new(
            Vec3::of(vals[0] as f64, vals[1] as f64, vals[2] as f64),
            R::of(vals[3] as f64),
        ));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> Vec<SdfSample<f64>> {
        vec![
            SdfSample::new(Vec3::of(0.125, -0.25, 0.5), -0.375),
            SdfSample::new(Vec3::of(1.0, 2.0, -3.0), 0.0625),
        ]
    }

    #[test]
    fn csv_round_trip() {
        let dir = std::env::temp_dir().join("shapefit_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.csv");
        let samples = sample_set();
        write_samples_csv(&samples, &path).unwrap();
        let back: Vec<SdfSample<f64>> = read_samples_csv(&path).unwrap();
        assert_eq!(back.len(), samples.len());
        for (a, b) in samples.iter().zip(&back) {
            assert!((a.point - b.point).norm() < 1e-9);
            assert!((a.distance - b.distance).abs() < 1e-9);
        }
    }

    #[test]
    fn bin_round_trip_is_f32_exact() {
        let dir = std::env::temp_dir().join("shapefit_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.sdfs");
        let samples = sample_set(); // values chosen f32-representable
        write_samples_bin(&samples, &path).unwrap();
        let back: Vec<SdfSample<f64>> = read_samples_bin(&path).unwrap();
        assert_eq!(back, samples);
    }

    #[test]
    fn bin_rejects_bad_magic_and_length() {
        let dir = std::env::temp_dir().join("shapefit_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.sdfs");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(read_samples_bin::<f64>(&path).is_err());
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"SDFS");
        bytes.extend_from_slice(&5u64.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 16]); // claims 5 records, holds 1
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_samples_bin::<f64>(&path).is_err());
    }
}
