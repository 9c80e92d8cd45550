//! Binary container for purified states.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      b"TTNS"
//! version    u32
//! n          u64
//! d          u64
//! log_norm   f64
//! center     i64   (-1 when no orthogonality center is set)
//! n times:
//!   rank     u32
//!   dims     rank x u64
//!   entries  (re f64, im f64) per element, row-major
//! ```
//!
//! Identical states always serialize to identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mps::PurifiedMPS;
use crate::tensor::{Tensor, C64};

pub const MAGIC: &[u8; 4] = b"TTNS";
pub const VERSION: u32 = 1;

/// Refuse tensors with more elements than this when reading.
const MAX_ELEMENTS: u64 = 1 << 32;

pub fn write_state<W: Write>(state: &PurifiedMPS, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(state.n() as u64).to_le_bytes())?;
    out.write_all(&(state.d() as u64).to_le_bytes())?;
    out.write_all(&state.log_norm().to_le_bytes())?;
    let center = state.ortho_center().map_or(-1, |c| c as i64);
    out.write_all(&center.to_le_bytes())?;
    for t in state.tensors() {
        out.write_all(&(t.rank() as u32).to_le_bytes())?;
        for &dim in t.shape() {
            out.write_all(&(dim as u64).to_le_bytes())?;
        }
        for z in t.data() {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(input)?))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(input)?))
}

pub fn read_state<R: Read>(mut input: R) -> Result<PurifiedMPS> {
    if &read_array::<4, _>(&mut input)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = read_u64(&mut input)? as usize;
    let d = read_u64(&mut input)? as usize;
    let log_norm = read_f64(&mut input)?;
    let center = i64::from_le_bytes(read_array(&mut input)?);
    if n > 1 << 20 {
        return Err(Error::Format(format!("implausible site count {n}")));
    }
    let mut tensors = Vec::with_capacity(n);
    for _ in 0..n {
        let rank = u32::from_le_bytes(read_array(&mut input)?) as usize;
        if rank != 4 {
            return Err(Error::Format(format!("site tensor of rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        let mut count: u64 = 1;
        for _ in 0..rank {
            let dim = read_u64(&mut input)?;
            count = count.saturating_mul(dim);
            shape.push(dim as usize);
        }
        if count > MAX_ELEMENTS {
            return Err(Error::Format(format!("tensor of {count} elements")));
        }
        let mut data = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let re = read_f64(&mut input)?;
            let im = read_f64(&mut input)?;
            data.push(C64::new(re, im));
        }
        tensors.push(Tensor::new(shape, data)?);
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    let center = match center {
        -1 => None,
        c if c >= 0 => Some(c as usize),
        c => return Err(Error::Format(format!("bad center {c}"))),
    };
    PurifiedMPS::from_parts(d, tensors, log_norm, center)
}

pub fn save_state(state: &PurifiedMPS, path: &Path) -> Result<()> {
    write_state(state, BufWriter::new(File::create(path)?))
}

pub fn load_state(path: &Path) -> Result<PurifiedMPS> {
    read_state(BufReader::new(File::open(path)?))
}
