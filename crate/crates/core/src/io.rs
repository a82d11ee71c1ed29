//! Particle files, run configuration and the CSV/JSON exports.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::docking::{EnergyLandscape, Minimum, PoseTransform, Rotation};
use crate::error::{Error, Result};
use crate::forces::Dimension;
use crate::particles::ParticleSystem;

pub const BOHR_PER_ANGSTROM: f64 = 1.8897259886;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Bohr,
    Angstrom,
}

impl Unit {
    pub fn to_bohr(self) -> f64 {
        match self {
            Unit::Bohr => 1.0,
            Unit::Angstrom => BOHR_PER_ANGSTROM,
        }
    }
}

impl std::str::FromStr for Unit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bohr" => Ok(Unit::Bohr),
            "angstrom" | "A" => Ok(Unit::Angstrom),
            _ => Err(Error::InvalidArgument(format!("unknown unit '{s}'"))),
        }
    }
}

/// Records `(x, y, z, q)` as written in a file, in the file's unit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParticleFile {
    pub records: Vec<[f64; 4]>,
    pub unit: Unit,
    pub comments: Vec<String>,
}

impl ParticleFile {
    pub fn parse(text: &str, unit: Unit) -> Result<Self> {
        let mut out = ParticleFile {
            unit,
            ..Default::default()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(c) = line.strip_prefix('#') {
                out.comments.push(c.trim().to_string());
                continue;
            }
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let mut rec = [0.0; 4];
            for (r, f) in rec.iter_mut().zip(&fields) {
                *r = f
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: i + 1,
                        msg: format!("'{f}' is not a finite number"),
                    })?;
            }
            out.records.push(rec);
        }
        Ok(out)
    }

    /// Text that parses back to the same records.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        for r in &self.records {
            let _ = writeln!(s, "{} {} {} {}", r[0], r[1], r[2], r[3]);
        }
        s
    }

    pub fn to_system(&self) -> Result<ParticleSystem> {
        if self.records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let f = self.unit.to_bohr();
        let centers = self.records.iter().map(|r| [r[0] * f, r[1] * f, r[2] * f]).collect();
        let charges = self.records.iter().map(|r| r[3]).collect();
        ParticleSystem::new(centers, charges)
    }

    pub fn from_system(ps: &ParticleSystem, unit: Unit) -> Self {
        let f = unit.to_bohr();
        ParticleFile {
            records: ps
                .centers()
                .iter()
                .zip(ps.charges())
                .map(|(c, q)| [c[0] / f, c[1] / f, c[2] / f, *q])
                .collect(),
            unit,
            comments: Vec::new(),
        }
    }
}

/// Parses a four-column particle file into bohr coordinates.
pub fn parse_particles(text: &str, unit: Unit) -> Result<ParticleSystem> {
    ParticleFile::parse(text, unit)?.to_system()
}

pub fn read_particles(path: &std::path::Path, unit: Unit) -> Result<ParticleSystem> {
    parse_particles(&std::fs::read_to_string(path)?, unit)
}

/// `x` with six significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    fmt_sig_n(x, 6)
}

pub fn fmt_sig_n(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to six significant digits.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

pub const LANDSCAPE_HEADER: [&str; 9] = [
    "phi_P_index",
    "phi_L_index",
    "phi_P_rad",
    "phi_L_rad",
    "feasible",
    "energy_hartree",
    "cx",
    "cy",
    "cz",
];

pub fn write_landscape_csv<W: Write>(landscape: &EnergyLandscape, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(LANDSCAPE_HEADER)?;
    for e in &landscape.entries {
        wr.write_record([
            e.ip.to_string(),
            e.il.to_string(),
            fmt_sig(e.phi_p),
            fmt_sig(e.phi_l),
            e.feasible.to_string(),
            e.energy.map(fmt_sig).unwrap_or_default(),
            fmt_sig(e.center[0]),
            fmt_sig(e.center[1]),
            fmt_sig(e.center[2]),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

fn rounded_pose(p: &PoseTransform) -> PoseTransform {
    PoseTransform {
        rotation: match p.rotation {
            Rotation::Planar { phi } => Rotation::Planar { phi: round_sig(phi) },
            Rotation::Spatial { alpha, beta } => Rotation::Spatial {
                alpha: round_sig(alpha),
                beta: round_sig(beta),
            },
        },
        translation: p.translation.map(round_sig),
    }
}

#[derive(Serialize)]
struct MinimumRecord {
    phi_p_index: usize,
    phi_l_index: usize,
    pose: PoseTransform,
    center: [f64; 3],
    energy: f64,
    rank_used: usize,
}

pub fn minima_json(minima: &[Minimum]) -> Result<String> {
    let recs: Vec<MinimumRecord> = minima
        .iter()
        .map(|m| MinimumRecord {
            phi_p_index: m.ip,
            phi_l_index: m.il,
            pose: rounded_pose(&m.pose),
            center: m.center.map(round_sig),
            energy: round_sig(m.energy),
            rank_used: m.rank_used,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&recs)?)
}

/// Writes a table as CSV with every float at six significant digits.
pub fn write_table_csv<W: Write>(header: &[&str], rows: &[Vec<f64>], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r.iter().map(|v| fmt_sig(*v)))?;
    }
    wr.flush()?;
    Ok(())
}

/// Parameters of one command-line run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub half_width: f64,
    pub k: usize,
    pub sigma: f64,
    pub eps_rank: f64,
    pub batch: usize,
    pub m_p: usize,
    pub m_l: usize,
    pub mode: Dimension,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 512,
            half_width: 20.0,
            k: 30,
            sigma: 1.0,
            eps_rank: 1e-6,
            batch: crate::potential::DEFAULT_BATCH,
            m_p: 24,
            m_l: 12,
            mode: Dimension::Planar,
            seed: 7,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return bad(format!("grid size n must be even and at least 2, got {}", self.n));
        }
        for (name, v) in [
            ("box half-width", self.half_width),
            ("sigma", self.sigma),
            ("eps", self.eps_rank),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [("K", self.k), ("batch", self.batch), ("mp", self.m_p), ("ml", self.m_l)] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn tensor_config(&self) -> crate::docking::TensorConfig {
        crate::docking::TensorConfig {
            n: self.n,
            half_width: self.half_width,
            k: self.k,
            sigma: self.sigma,
            eps: self.eps_rank,
            batch: self.batch,
            ..Default::default()
        }
    }
}
