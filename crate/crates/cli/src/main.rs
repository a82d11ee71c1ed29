//! `rsdock` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rsdock::docking::{ppiem_search, ScanParams, TensorConfig};
use rsdock::energy::{direct_binding_energy, plie_binding_energy};
use rsdock::forces::{direct_force_on_particle, fd_forces, mean_radius, rigid_resultants, Dimension, FdScheme};
use rsdock::harness::{bench_convergence, bench_ranks, ConvergenceConfig, RankConfig};
use rsdock::io::{fmt_sig, minima_json, read_particles, write_landscape_csv, write_table_csv, RunConfig, Unit};
use rsdock::kernel::{build_reference_kernel, cache_file_name, load_or_build_kernel, DEFAULT_EPS_SPLIT};
use rsdock::particles::ParticleSystem;
use rsdock::potential::assemble_rs_potential;
use rsdock::{docking::geometric_center, make_grid};

#[derive(Parser)]
#[command(name = "rsdock", version, about = "Range-separated tensor electrostatics and rigid posing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reference kernel and store it in the cache directory.
    Kernel(GridArgs),
    /// Assemble the long-range protein potential and report its rank.
    Assemble {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: ProteinInput,
    },
    /// Protein–ligand binding energy, by PLIE or by direct summation.
    Energy {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: PairInput,
        /// Use the O(M·L) direct Coulomb sum.
        #[arg(long)]
        direct: bool,
    },
    /// Forces on the ligand atoms and their rigid-body resultants.
    Force {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: PairInput,
        #[arg(long, value_enum, default_value_t = Mode::Planar)]
        mode: Mode,
        /// Use the analytic field of the protein charges.
        #[arg(long)]
        direct: bool,
    },
    /// Blind posing search over protein and ligand rotations.
    Dock {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: PairInput,
        #[arg(long, default_value_t = 24)]
        mp: usize,
        #[arg(long, default_value_t = 12)]
        ml: usize,
        #[arg(long, value_enum, default_value_t = Mode::Planar)]
        mode: Mode,
        /// Van der Waals distance in bohr; defaults to --sigma.
        #[arg(long)]
        vdw: Option<f64>,
        /// Number of local minima to report.
        #[arg(long, default_value_t = 5)]
        minima: usize,
    },
    /// Reproduce the convergence and rank studies.
    Bench {
        #[arg(value_enum)]
        study: Study,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        /// CSV output file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Grid points per axis (even).
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Box half-width b in bohr.
    #[arg(long = "box", default_value_t = 20.0)]
    half_width: f64,
    /// Quadrature parameter; 2K+1 Gaussians.
    #[arg(long = "K", default_value_t = 30)]
    k: usize,
    /// Range-separation length in bohr.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Relative rank-reduction tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    /// Long-range rank override.
    #[arg(long)]
    long_rank: Option<usize>,
    /// Output directory (or file for `bench`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Kernel cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ProteinInput {
    /// Protein particle file.
    #[arg(short = 'M', long = "protein")]
    protein: PathBuf,
    #[arg(long, value_enum, default_value_t = UnitArg::Bohr)]
    unit: UnitArg,
}

#[derive(Args, Clone)]
struct PairInput {
    /// Protein particle file.
    #[arg(short = 'M', long = "protein")]
    protein: PathBuf,
    /// Ligand particle file.
    #[arg(short = 'L', long = "ligand")]
    ligand: PathBuf,
    #[arg(long, value_enum, default_value_t = UnitArg::Bohr)]
    unit: UnitArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Bohr,
    Angstrom,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Bohr => Unit::Bohr,
            UnitArg::Angstrom => Unit::Angstrom,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Planar,
    Spatial,
}

impl From<Mode> for Dimension {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Planar => Dimension::Planar,
            Mode::Spatial => Dimension::Spatial,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Convergence,
    Ranks,
}

/// Bad flag values that clap cannot reject by type alone.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

impl GridArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            n: self.n,
            half_width: self.half_width,
            k: self.k,
            sigma: self.sigma,
            eps_rank: self.eps,
            batch: self.batch,
            out: self.out.clone(),
            ..RunConfig::default()
        };
        cfg.validate().map_err(|e| Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn tensor_config(&self) -> Result<TensorConfig> {
        Ok(TensorConfig {
            long_rank: self.long_rank,
            cache_dir: self.cache.clone(),
            ..self.run_config()?.tensor_config()
        })
    }
}

fn load(path: &Path, unit: UnitArg) -> Result<ParticleSystem> {
    read_particles(path, unit.into()).with_context(|| format!("reading {}", path.display()))
}

fn load_pair(input: &PairInput) -> Result<(ParticleSystem, ParticleSystem)> {
    Ok((load(&input.protein, input.unit)?, load(&input.ligand, input.unit)?))
}

fn out_dir(grid: &GridArgs) -> Result<Option<&Path>> {
    if let Some(d) = &grid.out {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    Ok(grid.out.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Kernel(grid) => {
            let cfg = grid.run_config()?;
            let g = make_grid(cfg.half_width, cfg.n)?;
            let dir = grid.cache.as_ref().or(grid.out.as_ref());
            let (rk, cached) = match dir {
                Some(dir) => load_or_build_kernel(dir, &g, cfg.k, cfg.sigma, DEFAULT_EPS_SPLIT)?,
                None => (build_reference_kernel(&g, cfg.k, cfg.sigma, DEFAULT_EPS_SPLIT)?, false),
            };
            let err = rk.rule().max_relative_error(g.h, 2.0 * g.half_width, 2000);
            writeln!(stdout, "rank {} long {} short {}", rk.rank(), rk.long_rank(), rk.rank() - rk.long_rank())?;
            writeln!(stdout, "quadrature relative error {}", fmt_sig(err))?;
            if let Some(dir) = dir {
                let name = cache_file_name(&g, cfg.k, cfg.sigma, DEFAULT_EPS_SPLIT);
                let how = if cached { "loaded" } else { "stored" };
                writeln!(stdout, "{how} {}", dir.join(name).display())?;
            }
        }
        Command::Assemble { grid, input } => {
            let cfg = grid.tensor_config()?;
            let m = load(&input.protein, input.unit)?;
            let rk = cfg.kernel()?;
            let rs = assemble_rs_potential(&rk, &m, rk.grid(), cfg.eps, cfg.batch)?;
            let rep = rs.report();
            writeln!(stdout, "particles {}", rep.particles)?;
            writeln!(stdout, "uncompressed rank {}", rep.uncompressed_rank())?;
            writeln!(stdout, "final rank {}", rep.final_rank)?;
            writeln!(stdout, "certified relative error {}", fmt_sig(rep.rel_error))?;
            if let Some(dir) = out_dir(&grid)? {
                fs::write(dir.join("assembly.json"), serde_json::to_string_pretty(rep)? + "\n")?;
            }
        }
        Command::Energy { grid, input, direct } => {
            let (m, l) = load_pair(&input)?;
            let rep = if direct {
                direct_binding_energy(&m, &l)?
            } else {
                let cfg = grid.tensor_config()?;
                let rk = cfg.kernel()?;
                let rs = assemble_rs_potential(&rk, &m, rk.grid(), cfg.eps, cfg.batch)?;
                plie_binding_energy(&rs, &l)?
            };
            writeln!(stdout, "{}", fmt_sig(rep.value))?;
        }
        Command::Force { grid, input, mode, direct } => {
            let (m, l) = load_pair(&input)?;
            let forces = if direct {
                l.centers()
                    .iter()
                    .zip(l.charges())
                    .map(|(x, &z)| direct_force_on_particle(&m, x, z))
                    .collect::<rsdock::Result<Vec<_>>>()?
            } else {
                let cfg = grid.tensor_config()?;
                let rk = cfg.kernel()?;
                let rs = assemble_rs_potential(&rk, &m, rk.grid(), cfg.eps, cfg.batch)?;
                fd_forces(rs.long_part(), &l, FdScheme::Central)?
            };
            let x0 = geometric_center(&l);
            let r0 = mean_radius(l.centers(), &x0);
            let mut rows: Vec<Vec<f64>> = forces
                .iter()
                .map(|f| [f.anchor.as_slice(), f.components.as_slice()].concat())
                .collect();
            writeln!(stdout, "atom,x,y,z,fx,fy,fz")?;
            for (i, r) in rows.iter().enumerate() {
                let cells: Vec<String> = r.iter().map(|v| fmt_sig(*v)).collect();
                writeln!(stdout, "{i},{}", cells.join(","))?;
            }
            if r0 > 0.0 {
                let rf = rigid_resultants(&forces, l.centers(), &x0, r0, mode.into())?;
                let show = |v: &[f64; 3]| v.map(fmt_sig).join(" ");
                writeln!(stdout, "translational {}", show(&rf.translational.components))?;
                for t in &rf.tangential {
                    writeln!(stdout, "tangential {} at {}", show(&t.components), show(&t.anchor))?;
                }
                writeln!(stdout, "torque {}", show(&rf.torque))?;
            }
            if let Some(dir) = out_dir(&grid)? {
                let file = fs::File::create(dir.join("forces.csv"))?;
                let rows = std::mem::take(&mut rows);
                write_table_csv(&["x", "y", "z", "fx", "fy", "fz"], &rows, file)?;
            }
        }
        Command::Dock { grid, input, mp, ml, mode, vdw, minima } => {
            let (m, l) = load_pair(&input)?;
            let cfg = grid.tensor_config()?;
            let params = ScanParams {
                mode: mode.into(),
                ..ScanParams::planar(mp, ml, vdw.unwrap_or(grid.sigma))
            };
            let res = ppiem_search(&m, &l, &params, &cfg, minima)?;
            let found: Vec<_> = res.poses.iter().map(|p| p.minimum.clone()).collect();
            let json = minima_json(&found)?;
            match out_dir(&grid)? {
                Some(dir) => {
                    write_landscape_csv(&res.landscape, fs::File::create(dir.join("landscape.csv"))?)?;
                    fs::write(dir.join("minima.json"), json + "\n")?;
                    writeln!(stdout, "wrote {}", dir.display())?;
                }
                None => writeln!(stdout, "{json}")?,
            }
            if let Some(best) = found.first() {
                writeln!(
                    stdout,
                    "global minimum at ({}, {}) energy {} rank {}",
                    best.ip,
                    best.il,
                    fmt_sig(best.energy),
                    best.rank_used
                )?;
            }
        }
        Command::Bench { study, seed, eps, out } => {
            let (header, rows): (Vec<&str>, Vec<Vec<f64>>) = match study {
                Study::Convergence => {
                    let mut cfg = ConvergenceConfig::default();
                    if let Some(e) = eps {
                        cfg.eps = e;
                    }
                    let t = bench_convergence(&cfg)?;
                    let rows = t
                        .rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n as f64,
                                r.energy,
                                r.error,
                                r.initial_rank as f64,
                                r.elapsed.as_secs_f64(),
                            ]
                        })
                        .collect();
                    (vec!["n", "E_tensor", "abs_error", "initial_rank", "seconds"], rows)
                }
                Study::Ranks => {
                    let mut cfg = RankConfig::default();
                    if let Some(s) = seed {
                        cfg.seed = s;
                    }
                    if let Some(e) = eps {
                        cfg.eps = e;
                    }
                    let rows = bench_ranks(&cfg)?
                        .iter()
                        .map(|r| {
                            vec![
                                r.particles as f64,
                                r.uncompressed as f64,
                                r.compressed as f64,
                                r.restricted as f64,
                                r.elapsed.as_secs_f64(),
                            ]
                        })
                        .collect();
                    (vec!["N", "uncompressed_rank", "compressed_rank", "box_rank", "seconds"], rows)
                }
            };
            match out {
                Some(path) => write_table_csv(&header, &rows, fs::File::create(&path)?)?,
                None => write_table_csv(&header, &rows, &mut stdout)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
