//! Executable acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! with the measured quantities and then asserts the same condition.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsdock::docking::{
    apply_pose, geometric_center, ppiem_search, ppiem_search_assembled, scan_rotations, scan_rotations_with,
    PoseTransform, Rotation, ScanParams, TensorConfig,
};
use rsdock::energy::{direct_binding_energy, direct_total_energy, plie_binding_energy};
use rsdock::forces::{
    direct_force_on_particle, fd_force_on_particle, fd_forces, mean_radius, resultant_torque, rigid_resultants,
    Dimension, FdScheme,
};
use rsdock::harness::{bench_convergence, bench_ranks, choose_k, flat_cluster, random_binding_system, ConvergenceConfig, RankConfig};
use rsdock::io::{read_particles, Unit};
use rsdock::kernel::build_reference_kernel;
use rsdock::particles::ParticleSystem;
use rsdock::potential::{
    assemble_long_range, assemble_long_range_uncompressed, assemble_rs_potential, RSPotential,
};
use rsdock::{make_grid, reduce_rank, reduce_rank_fitted, Exec, Point3};

// Timing-sensitive criteria must not share the machine with each other.
static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{tag} criterion {id}: {detail}");
    let _ = out.flush();
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> ParticleSystem {
    read_particles(&fixture(name), Unit::Bohr).unwrap()
}

fn dist(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn norm3(a: &[f64; 3]) -> f64 {
    dist(a, &[0.0; 3])
}

#[test]
fn criterion_1_convergence_trend() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let table = bench_convergence(&ConvergenceConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let last = table.rows.last().unwrap();
    let rel = last.error / last.oracle.abs();
    let ratios_ok = table.ratios_within(1.6, 2.4);
    let pass = ratios_ok && rel <= 0.02 && elapsed < Duration::from_secs(120);
    let errs: Vec<String> = table.rows.iter().map(|r| format!("n={} err={:.3e}", r.n, r.error)).collect();
    let ratios: Vec<String> = table.ratios.iter().map(|r| format!("{r:.2}")).collect();
    report(
        1,
        pass,
        &format!(
            "{}; ratios [{}] (need 1.6..2.4); rel err at n=1024 {:.2e} (need <= 2e-2); {:.1} s",
            errs.join(", "),
            ratios.join(", "),
            rel,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_oracle_equivalence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let grid = make_grid(16.0, 512).unwrap();
    let k = choose_k(&grid, 1e-5, 60).unwrap();
    let rk = build_reference_kernel(&grid, k, 1.0, 1e-4).unwrap();
    let mut worst = (0.0f64, 0usize, 0usize);
    let mut failing = 0;
    let mut worst_scaled: f64 = 0.0;
    for s in 0..20u64 {
        let m = 20 + 20 * s as usize;
        let l = 1 + s as usize % 10;
        let (p, lig) = random_binding_system(m, l, 1.0, 100 + s).unwrap();
        let rs = assemble_rs_potential(&rk, &p, &grid, 1e-3, 128).unwrap();
        let e = plie_binding_energy(&rs, &lig).unwrap().value;
        let d = direct_binding_energy(&p, &lig).unwrap().value;
        let rel = (e - d).abs() / d.abs();
        if rel > 1e-2 {
            failing += 1;
        }
        if rel > worst.0 {
            worst = (rel, m, l);
        }
        // Error against the sum of absolute pair terms, which does not
        // benefit from cancellation between charges of both signs.
        let scale: f64 = lig
            .centers()
            .iter()
            .zip(lig.charges())
            .flat_map(|(x, q)| p.centers().iter().zip(p.charges()).map(move |(y, z)| (q * z).abs() / dist(x, y)))
            .sum();
        worst_scaled = worst_scaled.max((e - d).abs() / scale);
    }
    let elapsed = start.elapsed();
    let pass = failing == 0 && elapsed < Duration::from_secs(300);
    report(
        2,
        pass,
        &format!(
            "{failing}/20 systems above 1e-2; worst rel err {:.3e} (M={}, L={}); worst err / sum|pair| {:.2e}; {:.1} s",
            worst.0,
            worst.1,
            worst.2,
            worst_scaled,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_rank_behavior() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let rows = bench_ranks(&RankConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let growth = rows.last().unwrap().compressed as f64 / rows[0].compressed as f64;
    let max_box = rows.iter().map(|r| r.restricted).max().unwrap();
    let pass = growth <= 4.0 && max_box <= 12 && elapsed < Duration::from_secs(300);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("N={} full={} R={} R_box={}", r.particles, r.uncompressed, r.compressed, r.restricted))
        .collect();
    report(
        3,
        pass,
        &format!(
            "{}; growth {:.2} (need <= 4); max R_box {} (need <= 12); {:.1} s",
            table.join(", "),
            growth,
            max_box,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

fn fitted_potential(rk: &rsdock::kernel::ReferenceKernel, ps: &ParticleSystem, eps: f64) -> RSPotential {
    let (t, rep) = assemble_long_range(rk, ps, rk.grid(), 0.5 * eps, 32).unwrap();
    let (t, _) = reduce_rank_fitted(&t, 0.5 * eps).unwrap();
    RSPotential::from_long_part(rk, ps, t, rep).unwrap()
}

fn median_plie(rs: &RSPotential, l: &ParticleSystem) -> Duration {
    for _ in 0..10 {
        plie_binding_energy(rs, l).unwrap();
    }
    let mut t: Vec<Duration> = (0..100)
        .map(|_| {
            let s = Instant::now();
            std::hint::black_box(plie_binding_energy(rs, std::hint::black_box(l)).unwrap());
            s.elapsed()
        })
        .collect();
    t.sort();
    t[50]
}

#[test]
fn criterion_4_size_independent_evaluation() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let grid = make_grid(48.0, 256).unwrap();
    let rk = build_reference_kernel(&grid, 10, 1.0, 1e-4).unwrap();
    let lig = ParticleSystem::new(
        vec![[0.3, 0.1, 3.0], [1.5, 0.2, 3.4], [-1.1, 0.7, 3.2], [0.2, -1.3, 4.0], [0.1, 1.2, 4.5]],
        vec![0.5, -0.4, 0.3, -0.6, 0.2],
    )
    .unwrap();
    let small = fitted_potential(&rk, &flat_cluster(16, 1.0, 7).unwrap(), 1e-2);
    let large = fitted_potential(&rk, &flat_cluster(676, 1.0, 7).unwrap(), 1e-2);
    let ts = median_plie(&small, &lig);
    let tl = median_plie(&large, &lig);
    let ratio = tl.as_secs_f64() / ts.as_secs_f64();
    let pass = ratio <= 2.0;
    report(
        4,
        pass,
        &format!(
            "median PLIE M=16 {:.2} us (rank {}), M=676 {:.2} us (rank {}); ratio {:.2} (need <= 2)",
            ts.as_secs_f64() * 1e6,
            small.rank(),
            tl.as_secs_f64() * 1e6,
            large.rank(),
            ratio
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_force_correctness() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let (m, _) = random_binding_system(30, 1, 1.0, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut probes: Vec<Point3> = Vec::new();
    while probes.len() < 10 {
        let p: Point3 = std::array::from_fn(|_| rng.gen_range(-9.0..9.0));
        let dmin = m.centers().iter().map(|c| dist(c, &p)).fold(f64::INFINITY, f64::min);
        if (3.0..=6.0).contains(&dmin) {
            probes.push(p);
        }
    }
    // `exact`: against the field of the true charges at the true probe.
    // `discrete`: against the field of the snapped charges at the snapped
    // probe node, which isolates the difference-quotient error.
    let mut exact = Vec::new();
    let mut discrete = Vec::new();
    let mut long_512 = None;
    for n in [256usize, 512, 1024] {
        let grid = make_grid(12.0, n).unwrap();
        let k = choose_k(&grid, 1e-6, 60).unwrap();
        let rk = build_reference_kernel(&grid, k, 1.0, 1e-4).unwrap();
        let lt = assemble_long_range_uncompressed(&rk, &m, &grid).unwrap();
        let snapped: Vec<Point3> = m.centers().iter().map(|c| grid.node(grid.nearest_grid_index(c).unwrap())).collect();
        let ms = ParticleSystem::new(snapped, m.charges().to_vec()).unwrap();
        let (mut e_x, mut e_d) = (0.0f64, 0.0f64);
        for p in &probes {
            let f = fd_force_on_particle(&lt, p, 1.0, FdScheme::Central).unwrap().components;
            let o = direct_force_on_particle(&m, p, 1.0).unwrap().components;
            let node = grid.node(grid.nearest_grid_index(p).unwrap());
            let os = direct_force_on_particle(&ms, &node, 1.0).unwrap().components;
            e_x = e_x.max(dist(&f, &o) / norm3(&o));
            e_d = e_d.max(dist(&f, &os) / norm3(&o));
        }
        exact.push(e_x);
        discrete.push(e_d);
        if n == 512 {
            long_512 = Some(lt);
        }
    }
    let order: Vec<f64> = discrete.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_exact: Vec<f64> = exact.windows(2).map(|w| (w[0] / w[1]).log2()).collect();

    // Rigid-body decomposition of the forces on a five-atom ligand.
    let lt = long_512.unwrap();
    let lig = ParticleSystem::new(
        probes[..5].to_vec(),
        vec![0.4, -0.3, 0.7, -0.5, 0.2],
    )
    .unwrap();
    let forces = fd_forces(&lt, &lig, FdScheme::Central).unwrap();
    let x0 = geometric_center(&lig);
    let r0 = mean_radius(lig.centers(), &x0);
    let mut recon: f64 = 0.0;
    let mut torque_err: f64 = 0.0;
    for dim in [Dimension::Planar, Dimension::Spatial] {
        let rf = rigid_resultants(&forces, lig.centers(), &x0, r0, dim).unwrap();
        for (i, f) in forces.iter().enumerate() {
            let s: [f64; 3] = std::array::from_fn(|d| rf.radial_parts[i][d] + rf.tangential_parts[i][d]);
            recon = recon.max(dist(&s, &f.components));
        }
        let mut oracle = [0.0; 3];
        for (f, c) in forces.iter().zip(lig.centers()) {
            let a: [f64; 3] = std::array::from_fn(|d| c[d] - x0[d]);
            let f = f.components;
            oracle[0] += a[1] * f[2] - a[2] * f[1];
            oracle[1] += a[2] * f[0] - a[0] * f[2];
            oracle[2] += a[0] * f[1] - a[1] * f[0];
        }
        torque_err = torque_err.max(dist(&resultant_torque(&rf, &x0), &oracle));
    }
    let pass = exact[1] <= 0.05
        && order.iter().all(|&o| o >= 1.5)
        && recon <= 1e-12
        && torque_err <= 1e-10;
    report(
        5,
        pass,
        &format!(
            "rel err at n=512 {:.2e} (need <= 5e-2); order vs snapped-source field [{:.2}, {:.2}] (need >= 1.5), vs true field [{:.2}, {:.2}]; reconstruction {:.1e}; torque {:.1e}",
            exact[1], order[0], order[1], order_exact[0], order_exact[1], recon, torque_err
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_find_back() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("findback.json")).unwrap()).unwrap();
    let n = meta["n"].as_u64().unwrap() as usize;
    let b = meta["half_width"].as_f64().unwrap();
    let sigma = meta["sigma_vdw"].as_f64().unwrap();
    let m = load("findback_protein.xyz");
    let site = load("findback_site.xyz");
    let lig = load("findback_ligand.xyz");
    let start = Instant::now();
    let cfg = TensorConfig {
        n,
        half_width: b,
        ..TensorConfig::default()
    };
    let rk = cfg.kernel().unwrap();
    let rs = assemble_rs_potential(&rk, &m, rk.grid(), cfg.eps, cfg.batch).unwrap();
    let res = ppiem_search_assembled(&rs, &lig, &ScanParams::planar(24, 12, sigma), 5).unwrap();
    let elapsed = start.elapsed();
    let best = &res.poses[0].minimum;
    let e_site = plie_binding_energy(&rs, &site).unwrap().value;
    let e_site_direct = direct_binding_energy(&m, &site).unwrap().value;
    let offset = dist(&best.center, &geometric_center(&site));
    let h = rk.grid().h;
    let pass = best.energy <= e_site + 1e-3 && offset <= 2.0 * h && elapsed < Duration::from_secs(600);
    report(
        6,
        pass,
        &format!(
            "{} protein atoms, {} ligand atoms; minimum at bin ({}, {}) energy {:.5} vs site {:.5} (direct {:.5}); center offset {:.2e} bohr (need <= {:.3}); {:.1} s",
            m.len(),
            lig.len(),
            best.ip,
            best.il,
            best.energy,
            e_site,
            e_site_direct,
            offset,
            2.0 * h,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_rank_robust_argmin() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let m = load("pair_protein.xyz");
    let l = load("pair_ligand.xyz");
    let params = ScanParams::planar(12, 12, 3.0);
    let runs: Vec<(usize, (usize, usize), f64)> = [14usize, 10, 8]
        .iter()
        .map(|&r| {
            let cfg = TensorConfig {
                n: 512,
                half_width: 24.0,
                k: 10,
                long_rank: Some(r),
                ..TensorConfig::default()
            };
            let res = ppiem_search(&m, &l, &params, &cfg, 1).unwrap();
            let best = &res.poses[0].minimum;
            (r, (best.ip, best.il), best.energy)
        })
        .collect();
    let same_bin = runs.iter().all(|r| r.1 == runs[0].1);
    let e0 = runs[0].2;
    let spread = runs.iter().map(|r| (r.2 - e0).abs() / e0.abs()).fold(0.0, f64::max);
    let pass = same_bin && spread <= 1e-2;
    let desc: Vec<String> = runs
        .iter()
        .map(|(r, bin, e)| format!("R_l={r}: bin {bin:?} E={e:.6}"))
        .collect();
    report(
        7,
        pass,
        &format!("{}; max energy deviation {:.2e} (need <= 1e-2)", desc.join(", "), spread),
    );
    assert!(pass);
}

#[test]
fn criterion_8_property_suites() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut failures: Vec<&str> = Vec::new();

    // Dense-materialization equivalence of the assembled long-range part.
    let grid = make_grid(4.0, 16).unwrap();
    let rk = build_reference_kernel(&grid, 8, 1.0, 1e-4).unwrap();
    let ps = ParticleSystem::new(
        vec![[-1.2, 0.3, 0.6], [1.4, -0.8, 0.1], [0.2, 1.7, -1.3]],
        vec![1.0, -0.7, 0.4],
    )
    .unwrap();
    let t = assemble_long_range_uncompressed(&rk, &ps, &grid).unwrap();
    let reference = rk.long_range_subtensor();
    let dense = t.materialize();
    let idx: Vec<[usize; 3]> = ps.centers().iter().map(|c| grid.nearest_grid_index(c).unwrap()).collect();
    let mut worst: f64 = 0.0;
    let mut pos = 0;
    for i in 0..16 {
        for j in 0..16 {
            for k in 0..16 {
                let v: f64 = idx
                    .iter()
                    .zip(ps.charges())
                    .map(|(s, z)| {
                        let at = [rk.shifted_index(i, s[0]), rk.shifted_index(j, s[1]), rk.shifted_index(k, s[2])];
                        z * reference.eval_at_index(at).unwrap()
                    })
                    .sum();
                worst = worst.max((v - dense[pos]).abs());
                pos += 1;
            }
        }
    }
    if worst > 1e-12 {
        failures.push("dense equivalence");
    }

    // Certified compression error bounds the true error.
    let (c, rep) = reduce_rank(&t, 1e-3).unwrap();
    let diff: f64 = c.materialize().iter().zip(&dense).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if diff > rep.abs_error * (1.0 + 1e-9) + 1e-14 {
        failures.push("compression certification");
    }

    // Long and short parts partition the kernel.
    let sum = rk.long_range_subtensor().add(&rk.short_range_subtensor()).unwrap();
    let full = rk.tensor().materialize();
    let part = sum.materialize().iter().zip(&full).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if part > 1e-12 * full.iter().fold(0.0f64, |a, b| a.max(b.abs())) {
        failures.push("partition exactness");
    }

    // Energy decomposition identity.
    let (m, l) = random_binding_system(20, 5, 1.0, 11).unwrap();
    let lhs = direct_total_energy(&m.union(&l)).unwrap().value;
    let rhs = direct_total_energy(&m).unwrap().value
        + direct_total_energy(&l).unwrap().value
        + direct_binding_energy(&m, &l).unwrap().value;
    if (lhs - rhs).abs() > 1e-12 {
        failures.push("decomposition identity");
    }

    // Rotation isometry.
    let pose = PoseTransform {
        rotation: Rotation::Spatial { alpha: 0.7, beta: -1.9 },
        translation: [0.3, -2.0, 1.1],
    };
    let moved = apply_pose(&l, &pose);
    let mut drift: f64 = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            let a = dist(&l.centers()[i], &l.centers()[j]);
            let b = dist(&moved.centers()[i], &moved.centers()[j]);
            drift = drift.max((a - b).abs());
        }
    }
    if drift > 1e-12 {
        failures.push("isometry");
    }

    // Determinism of the scan, including across execution strategies.
    let grid = make_grid(12.0, 64).unwrap();
    let rk = build_reference_kernel(&grid, 8, 1.0, 1e-4).unwrap();
    let rs = assemble_rs_potential(&rk, &m, &grid, 1e-4, 32).unwrap();
    let params = ScanParams::planar(6, 4, 1.5);
    let a = scan_rotations(&rs, &l, &params).unwrap();
    let b = scan_rotations(&rs, &l, &params).unwrap();
    let s = scan_rotations_with(&rs, &l, &params, Exec::Sequential).unwrap();
    if a != b || a != s {
        failures.push("determinism");
    }

    let pass = failures.is_empty();
    report(
        8,
        pass,
        &if pass {
            format!(
                "dense equivalence {worst:.1e}, certified {diff:.2e} <= {:.2e}, partition {part:.1e}, decomposition {:.1e}, isometry {drift:.1e}, determinism ok",
                rep.abs_error,
                (lhs - rhs).abs()
            )
        } else {
            format!("failed: {}", failures.join(", "))
        },
    );
    assert!(pass);
}
