//! Flat binary cache of reference kernels.
//!
//! Layout, all little-endian: magic `RSKERNEL`, format version (u32), then
//! n (u64), b, σ, eps_split, C_q-derived step, scale (f64), K (u64), term
//! count R (u64), long count (u64), the long indices (u64 each), nodes,
//! weights, expected and measured errors, the validation interval, and
//! finally one column of `2n − 1` values per term. All three modes share the same columns.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{build_reference_kernel, QuadratureRule, ReferenceKernel};
use crate::canonical::CanonicalTensor3;
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid3D};

const MAGIC: &[u8; 8] = b"RSKERNEL";
const VERSION: u32 = 2;

pub fn cache_file_name(grid: &Grid3D, k: usize, sigma: f64, eps_split: f64) -> String {
    format!(
        "kernel-v{VERSION}-n{}-b{:016x}-K{k}-s{:016x}-e{:016x}.bin",
        grid.n,
        grid.half_width.to_bits(),
        sigma.to_bits(),
        eps_split.to_bits()
    )
}

pub fn save_kernel(rk: &ReferenceKernel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    let g = rk.grid();
    let rule = rk.rule();
    buf.extend_from_slice(&(g.n as u64).to_le_bytes());
    for v in [g.half_width, rk.sigma(), rk.eps_split(), rule.step, rule.scale] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&(rule.k as u64).to_le_bytes());
    buf.extend_from_slice(&(rule.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(rk.long_rank() as u64).to_le_bytes());
    for &l in rk.long_indices() {
        buf.extend_from_slice(&(l as u64).to_le_bytes());
    }
    for v in rule.nodes.iter().chain(&rule.weights) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in [rule.expected_error, rule.measured_error, rule.interval.0, rule.interval.1] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for k in 0..rule.len() {
        for v in rk.tensor().column(0, k) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Format("kernel cache file is truncated".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn load_kernel(path: &Path) -> Result<ReferenceKernel> {
    let mut data = Vec::new();
    fs::File::open(path)?.read_to_end(&mut data)?;
    let mut r = Reader { data: &data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Format(format!("{} is not a kernel cache file", path.display())));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported kernel cache version {version}")));
    }
    let n = r.u64()? as usize;
    let b = r.f64()?;
    let sigma = r.f64()?;
    let eps_split = r.f64()?;
    let step = r.f64()?;
    let scale = r.f64()?;
    let k = r.u64()? as usize;
    let terms = r.u64()? as usize;
    let n_long = r.u64()? as usize;
    if terms != 2 * k + 1 || n_long > terms {
        return Err(Error::Format("inconsistent kernel cache header".into()));
    }
    let long = (0..n_long)
        .map(|_| r.u64().map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let nodes = r.f64s(terms)?;
    let weights = r.f64s(terms)?;
    let expected_error = r.f64()?;
    let measured_error = r.f64()?;
    let interval = (r.f64()?, r.f64()?);
    let grid = make_grid(b, n)?;
    let axis = super::reference_axis(&grid);
    let cols = (0..terms).map(|_| r.f64s(axis.len)).collect::<Result<Vec<_>>>()?;
    if r.pos != data.len() {
        return Err(Error::Format("trailing bytes in kernel cache file".into()));
    }
    let tensor = CanonicalTensor3::from_columns([axis; 3], [cols.clone(), cols.clone(), cols], weights.clone())?;
    let rule = QuadratureRule {
        k,
        nodes,
        weights,
        step,
        scale,
        interval,
        expected_error,
        measured_error,
    };
    Ok(ReferenceKernel::from_parts(grid, tensor, rule, long, sigma, eps_split))
}

/// Loads the kernel from `dir` if cached, otherwise builds and stores it.
/// Returns the kernel and whether it came from the cache.
pub fn load_or_build_kernel(
    dir: &Path,
    grid: &Grid3D,
    k: usize,
    sigma: f64,
    eps_split: f64,
) -> Result<(ReferenceKernel, bool)> {
    let path: PathBuf = dir.join(cache_file_name(grid, k, sigma, eps_split));
    if path.exists() {
        if let Ok(rk) = load_kernel(&path) {
            return Ok((rk, true));
        }
    }
    let rk = build_reference_kernel(grid, k, sigma, eps_split)?;
    fs::create_dir_all(dir)?;
    save_kernel(&rk, &path)?;
    Ok((rk, false))
}
