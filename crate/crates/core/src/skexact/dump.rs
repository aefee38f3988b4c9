//! Little-endian binary dump of a [`GibbsSummary`].
//!
//! Layout: magic, version (u32), n_sites (u32), order (u32), flags (u32,
//! bit 0 = weights present), beta, h (f64), seed, sample_index (u64), log_z
//! (f64), then `m`, `pair`, the optional triple and quad tensors and the
//! optional weights as f64 arrays.

use std::io::{Read, Write};

use super::summary::GibbsSummary;
use crate::error::{Error, Result};
use crate::moments::ModelParams;

pub const DUMP_MAGIC: &[u8; 4] = b"SKGS";
pub const DUMP_VERSION: u32 = 1;

pub fn write_summary(s: &GibbsSummary, out: &mut impl Write) -> Result<()> {
    out.write_all(DUMP_MAGIC)?;
    for v in [
        DUMP_VERSION,
        s.n_sites as u32,
        s.order as u32,
        u32::from(s.config_weights.is_some()),
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&s.params.beta.to_le_bytes())?;
    out.write_all(&s.params.h.to_le_bytes())?;
    out.write_all(&s.seed.to_le_bytes())?;
    out.write_all(&s.sample_index.to_le_bytes())?;
    out.write_all(&s.log_z.to_le_bytes())?;
    let arrays = [
        Some(&s.m),
        Some(&s.pair),
        s.triple.as_ref(),
        s.quad.as_ref(),
        s.config_weights.as_ref(),
    ];
    for a in arrays.into_iter().flatten() {
        for x in a {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_vec(r: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    (0..len).map(|_| read_f64(r)).collect()
}

pub fn read_summary(input: &mut impl Read) -> Result<GibbsSummary> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::invalid("not a Gibbs summary dump (bad magic)"));
    }
    let version = read_u32(input)?;
    if version != DUMP_VERSION {
        return Err(Error::invalid(format!("unsupported dump version {version}")));
    }
    let n = read_u32(input)? as usize;
    let order = read_u32(input)? as usize;
    let flags = read_u32(input)?;
    if !(2..=super::MAX_SITES).contains(&n) || !(2..=4).contains(&order) {
        return Err(Error::invalid(format!("corrupt dump header (n={n}, order={order})")));
    }
    let beta = read_f64(input)?;
    let h = read_f64(input)?;
    let params = ModelParams::new(beta, h)?;
    let seed = read_u64(input)?;
    let sample_index = read_u64(input)?;
    let log_z = read_f64(input)?;
    let m = read_vec(input, n)?;
    let pair = read_vec(input, n * n)?;
    let triple = if order >= 3 { Some(read_vec(input, n * n * n)?) } else { None };
    let quad = if order >= 4 { Some(read_vec(input, n * n * n * n)?) } else { None };
    let config_weights = if flags & 1 == 1 { Some(read_vec(input, 1 << n)?) } else { None };
    Ok(GibbsSummary {
        n_sites: n,
        params,
        order,
        seed,
        sample_index,
        m,
        pair,
        triple,
        quad,
        log_z,
        config_weights,
    })
}
