//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "PSGCKPT\0"
//! version      u32
//! dim          u32
//! shape        3 × u32   (unused axes are 1)
//! lengths      3 × f64   (unused axes are 0)
//! step         u64
//! t            f64
//! viscous      f64      ∫ν‖∇u‖²
//! coupling     f64      ∫2Λ‖Bψ‖²
//! e0           f64      initial energy of the run
//! config_len   u64
//! config       config_len bytes of UTF-8 TOML
//! fields       u32      1 + dim + 1
//! modes        u64      points per field
//! ψ, u_1..u_dim, ρ      modes × (re f64, im f64), row-major mode order
//! ```

use std::path::{Path, PathBuf};

use pitaevskii_core::{Complex64, Grid, SimState, SpectralScalarField, VelocityField};

use crate::config::RunConfig;
use crate::error::{Result, SimError};

pub const MAGIC: [u8; 8] = *b"PSGCKPT\0";
pub const VERSION: u32 = 1;

/// Everything needed to continue a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub state: SimState,
    pub step: u64,
    pub e0: f64,
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| SimError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

pub fn encode(ck: &Checkpoint) -> Vec<u8> {
    let grid = ck.state.grid();
    let dim = grid.dim();
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for axis in 0..3 {
        let n = grid.shape().get(axis).copied().unwrap_or(1);
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for axis in 0..3 {
        let l = grid.lengths().get(axis).copied().unwrap_or(0.0);
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&ck.step.to_le_bytes());
    for v in [ck.state.t, ck.state.viscous_dissipation, ck.state.coupling_dissipation, ck.e0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let text = ck.config.to_toml();
    out.extend_from_slice(&(text.len() as u64).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    out.extend_from_slice(&((dim + 2) as u32).to_le_bytes());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    let fields = std::iter::once(&ck.state.psi)
        .chain(ck.state.u.components())
        .chain(std::iter::once(&ck.state.rho));
    for f in fields {
        for c in f.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated file: needed {n} bytes at offset {}", self.pos)),
        }
    }

    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<Checkpoint, String> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("bad magic bytes: not a checkpoint".into());
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format!("unsupported format version {version}, expected {VERSION}"));
    }
    let dim = r.u32()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(format!("bad dimension {dim}"));
    }
    let mut shape = Vec::new();
    for _ in 0..3 {
        shape.push(r.u32()? as usize);
    }
    let mut lengths = Vec::new();
    for _ in 0..3 {
        lengths.push(r.f64()?);
    }
    shape.truncate(dim);
    lengths.truncate(dim);
    let step = r.u64()?;
    let t = r.f64()?;
    let viscous = r.f64()?;
    let coupling = r.f64()?;
    let e0 = r.f64()?;
    let len = usize::try_from(r.u64()?).map_err(|_| "config length overflows".to_string())?;
    let text = std::str::from_utf8(r.take(len)?).map_err(|e| format!("config is not UTF-8: {e}"))?;
    let config = RunConfig::from_toml(text)?;
    let nfields = r.u32()? as usize;
    if nfields != dim + 2 {
        return Err(format!("expected {} fields, found {nfields}", dim + 2));
    }
    let grid = Grid::new(&shape, &lengths).map_err(|e| e.to_string())?;
    let modes = r.u64()? as usize;
    if modes != grid.len() {
        return Err(format!("expected {} modes per field, found {modes}", grid.len()));
    }
    let mut fields = Vec::with_capacity(nfields);
    for i in 0..nfields {
        let mut c = Vec::with_capacity(modes);
        for _ in 0..modes {
            let re = r.f64()?;
            let im = r.f64()?;
            c.push(Complex64::new(re, im));
        }
        let real = i > 0;
        fields.push(SpectralScalarField::from_coefficients(&grid, c, real).map_err(|e| e.to_string())?);
    }
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let rho = fields.pop().expect("nfields >= 3");
    let psi = fields.remove(0);
    let u = VelocityField::from_components_unchecked(fields).map_err(|e| e.to_string())?;
    let mut state = SimState::new(psi, u, rho).map_err(|e| e.to_string())?;
    state.t = t;
    state.viscous_dissipation = viscous;
    state.coupling_dissipation = coupling;
    Ok(Checkpoint { config, state, step, e0 })
}

pub fn write_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    write_atomic(path, &encode(ck))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|source| SimError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|message| SimError::Checkpoint {
        path: path.to_path_buf(),
        message,
    })
}
