//! Decoder checkpoint file.
//!
//! Little-endian binary: magic `SDFD`, version (u32), latent dim (u32), layer
//! count (u32), then per-layer `rows`/`cols` (u32 each, rows = outputs), all
//! weight matrices row-major as f32, all biases as f32, then the stored codes:
//! a count (u32) followed by `dim` f32 values per code. Activations are not
//! stored; hidden layers are the smooth nonlinearity, the final layer linear,
//! matching how decoders are built.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;

use super::mlp::{Activation, DenseLayer};
use super::{LatentCode, MlpDecoder};

const MAGIC: &[u8; 4] = b"SDFD";
const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct Checkpoint<R> {
    pub decoder: MlpDecoder<R>,
    pub codes: Vec<LatentCode<R>>,
}

pub fn save_checkpoint<R: Real>(
    path: impl AsRef<Path>,
    decoder: &MlpDecoder<R>,
    codes: &[LatentCode<R>],
) -> Result<()> {
    let path = path.as_ref();
    for (i, c) in codes.iter().enumerate() {
        if c.dim() != decoder.latent_dim() {
            return Err(Error::InvalidParameter(format!(
                "code {i} has dim {}, decoder expects {}",
                c.dim(),
                decoder.latent_dim()
            )));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(decoder.latent_dim() as u32).to_le_bytes()).map_err(io_err)?;
    w.write_all(&(decoder.layers().len() as u32).to_le_bytes()).map_err(io_err)?;
    for layer in decoder.layers() {
        w.write_all(&(layer.out_dim as u32).to_le_bytes()).map_err(io_err)?;
        w.write_all(&(layer.in_dim as u32).to_le_bytes()).map_err(io_err)?;
    }
    for layer in decoder.layers() {
        for v in &layer.weights {
            w.write_all(&(v.as_f64() as f32).to_le_bytes()).map_err(io_err)?;
        }
    }
    for layer in decoder.layers() {
        for v in &layer.bias {
            w.write_all(&(v.as_f64() as f32).to_le_bytes()).map_err(io_err)?;
        }
    }
    w.write_all(&(codes.len() as u32).to_le_bytes()).map_err(io_err)?;
    for code in codes {
        for v in code.iter() {
            w.write_all(&(v.as_f64() as f32).to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn load_checkpoint<R: Real>(path: impl AsRef<Path>) -> Result<Checkpoint<R>> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

    let mut cur = Cursor { bytes: &bytes, off: 0 };
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format("missing SDFD magic".into()));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let dim = cur.u32()? as usize;
    let n_layers = cur.u32()? as usize;
    if dim == 0 || n_layers == 0 || n_layers > 64 {
        return Err(Error::Format(format!("implausible header: dim {dim}, {n_layers} layers")));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let rows = cur.u32()? as usize;
        let cols = cur.u32()? as usize;
        shapes.push((rows, cols));
    }

    let mut layers: Vec<DenseLayer<R>> = Vec::with_capacity(n_layers);
    for (i, &(rows, cols)) in shapes.iter().enumerate() {
        let weights = cur.f32s(rows * cols)?;
        layers.push(DenseLayer {
            weights,
            bias: Vec::new(),
            activation: if i + 1 == n_layers { Activation::Linear } else { Activation::Smooth },
            in_dim: cols,
            out_dim: rows,
        });
    }
    for (layer, &(rows, _)) in layers.iter_mut().zip(&shapes) {
        layer.bias = cur.f32s(rows)?;
    }

    let n_codes = cur.u32()? as usize;
    let mut codes = Vec::with_capacity(n_codes);
    for _ in 0..n_codes {
        codes.push(LatentCode::from_vec(cur.f32s(dim)?));
    }
    if cur.off != bytes.len() {
        return Err(Error::Format(format!(
            "trailing bytes: consumed {}, file has {}",
            cur.off,
            bytes.len()
        )));
    }

    let decoder = MlpDecoder::from_layers(dim, layers)
        .map_err(|e| Error::Format(format!("inconsistent layer chain: {e}")))?;
    Ok(Checkpoint { decoder, codes })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    off: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.off + n > self.bytes.len() {
            return Err(Error::Format("checkpoint truncated".into()));
        }
        let s = &self.bytes[self.off..self.off + n];
        self.off += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s<R: Real>(&mut self, n: usize) -> Result<Vec<R>> {
        let raw = self.take(n * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| R::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect())
    }
}
