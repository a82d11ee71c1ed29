//! Regenerates the committed docking fixtures in `fixtures/`.
//!
//! Run with `cargo run --release -p rsdock --example make_fixtures`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsdock::docking::{apply_pose, geometric_center, scan_rotations_direct, PoseTransform, Rotation, ScanParams};
use rsdock::io::{ParticleFile, Unit};
use rsdock::particles::ParticleSystem;
use serde_json::json;

const FINDBACK_N: usize = 512;
const FINDBACK_B: f64 = 28.0;
const M_P: usize = 24;
const M_L: usize = 12;
const SITE_BIN: usize = 7;

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn scatter(rng: &mut ChaCha8Rng, count: usize, spacing: f64, sample: impl Fn(&mut ChaCha8Rng) -> [f64; 3]) -> Vec<[f64; 3]> {
    let mut pts: Vec<[f64; 3]> = Vec::new();
    let mut tries = 0;
    while pts.len() < count {
        tries += 1;
        assert!(tries < 1_000_000, "cannot place {count} points at spacing {spacing}");
        let p = sample(rng);
        if pts.iter().all(|q| dist(&p, q) >= spacing) {
            pts.push(p);
        }
    }
    pts
}

fn write(path: &Path, ps: &ParticleSystem, comment: &str) {
    let mut f = ParticleFile::from_system(ps, Unit::Bohr);
    f.comments = vec![comment.to_string(), "x y z q (bohr, e)".to_string()];
    fs::write(path, f.serialize()).unwrap();
}

/// Thin slab protein with a 5-atom fragment cut from its rim in the plane
/// z = 0. Returns (protein, fragment at site, sigma) or None when the site
/// is not the clear global minimum of the direct-sum landscape.
fn findback(seed: u64) -> Option<(ParticleSystem, ParticleSystem, ParticleSystem, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 13.0;
    let all = scatter(&mut rng, 84, 2.4, |r| loop {
        let p = [r.gen_range(-radius..radius), r.gen_range(-radius..radius), r.gen_range(-2.0..2.0)];
        if p[0] * p[0] + p[1] * p[1] <= radius * radius {
            return p;
        }
    });
    let theta: f64 = rng.gen_range(0.0..2.0 * PI);
    let probe = [(radius + 2.0) * theta.cos(), (radius + 2.0) * theta.sin(), 0.0];
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| dist(&all[a], &probe).total_cmp(&dist(&all[b], &probe)));
    let anchor = all[order[0]];
    order.sort_by(|&a, &b| dist(&all[a], &anchor).total_cmp(&dist(&all[b], &anchor)));
    let frag_idx: Vec<usize> = order[..5].to_vec();
    let frag: Vec<[f64; 3]> = frag_idx.iter().map(|&i| all[i]).collect();
    let frag_q: Vec<f64> = (0..5).map(|i| if i % 2 == 0 { 0.7 } else { -0.5 }).collect();
    let mut prot = Vec::new();
    let mut prot_q = Vec::new();
    for (i, p) in all.iter().enumerate() {
        if frag_idx.contains(&i) {
            continue;
        }
        // Rim atoms next to the fragment carry complementary charges.
        let (j, d) = frag
            .iter()
            .enumerate()
            .map(|(j, f)| (j, dist(p, f)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let q = if d < 3.5 { -0.6 * frag_q[j].signum() } else { rng.gen_range(-0.4..0.4) };
        prot.push(*p);
        prot_q.push(q);
    }
    let protein = ParticleSystem::new(prot, prot_q).unwrap();
    let site = ParticleSystem::new(frag, frag_q).unwrap();
    let min_d = site
        .centers()
        .iter()
        .flat_map(|a| protein.centers().iter().map(move |b| dist(a, b)))
        .fold(f64::INFINITY, f64::min);
    let sigma = (min_d * 100.0).floor() / 100.0;
    if sigma < 1.5 {
        return None;
    }

    // Detach along the ray from the protein center through the fragment
    // center by a whole number of approach steps, then turn the detached
    // fragment back by SITE_BIN angular bins around the protein.
    let h = 2.0 * FINDBACK_B / FINDBACK_N as f64;
    let xp = geometric_center(&protein);
    let xs = geometric_center(&site);
    let mut ray = [xs[0] - xp[0], xs[1] - xp[1], 0.0];
    let rn = (ray[0] * ray[0] + ray[1] * ray[1]).sqrt();
    ray.iter_mut().for_each(|c| *c /= rn);
    let steps = (6.0 / h).round();
    let out = apply_pose(&site, &PoseTransform::translation([ray[0] * steps * h, ray[1] * steps * h, 0.0]));
    let phi = 2.0 * PI * SITE_BIN as f64 / M_P as f64;
    let back = -phi;
    let arm = {
        let c = geometric_center(&out);
        [c[0] - xp[0], c[1] - xp[1], c[2] - xp[2]]
    };
    let (s, c) = back.sin_cos();
    let rotated_arm = [c * arm[0] - s * arm[1], s * arm[0] + c * arm[1], arm[2]];
    let xo = geometric_center(&out);
    let detached = apply_pose(
        &out,
        &PoseTransform {
            rotation: Rotation::Planar { phi: back },
            translation: [
                xp[0] + rotated_arm[0] - xo[0],
                xp[1] + rotated_arm[1] - xo[1],
                xp[2] + rotated_arm[2] - xo[2],
            ],
        },
    );
    if detached.centers().iter().flatten().any(|v| v.abs() > FINDBACK_B - 1.0) {
        return None;
    }

    let params = ScanParams {
        step: Some(h),
        ..ScanParams::planar(M_P, M_L, sigma)
    };
    let land = scan_rotations_direct(&protein, &detached, &params, h).unwrap();
    // The approach from the site bin must stop exactly at the site.
    let miss = dist(&land.get(SITE_BIN, 0).center, &xs);
    if miss > 1e-9 {
        eprintln!("seed {seed}: approach misses the site by {miss:.3e}");
        return None;
    }
    let site_e = land.get(SITE_BIN, 0).energy?;
    let best_other = land
        .entries
        .iter()
        .filter(|e| !(e.ip == SITE_BIN && e.il == 0))
        .filter_map(|e| e.energy)
        .fold(f64::INFINITY, f64::min);
    eprintln!("seed {seed}: site energy {site_e:.4}, best elsewhere {best_other:.4}, sigma {sigma}");
    if best_other - site_e < 0.02 {
        return None;
    }
    Some((protein, site, detached, sigma))
}

/// Two flat random clusters in the plane z = 0.
fn two_clusters() -> (ParticleSystem, ParticleSystem) {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let disk = |rad: f64| {
        move |r: &mut ChaCha8Rng| loop {
            let p = [r.gen_range(-rad..rad), r.gen_range(-rad..rad), 0.0];
            if p[0] * p[0] + p[1] * p[1] <= rad * rad {
                return p;
            }
        }
    };
    let m = scatter(&mut rng, 24, 2.4, disk(10.0));
    let l = scatter(&mut rng, 6, 2.4, disk(3.5));
    let mq: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lq: Vec<f64> = (0..l.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let l: Vec<[f64; 3]> = l.iter().map(|p| [p[0] + 17.0, p[1], 0.0]).collect();
    (ParticleSystem::new(m, mq).unwrap(), ParticleSystem::new(l, lq).unwrap())
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).unwrap();
    let (seed, (protein, site, detached, sigma)) = (1..200u64)
        .find_map(|s| findback(s).map(|f| (s, f)))
        .expect("some seed yields a clear site");
    write(&dir.join("findback_protein.xyz"), &protein, "find-back sub-protein");
    write(&dir.join("findback_site.xyz"), &site, "fragment at its original site");
    write(&dir.join("findback_ligand.xyz"), &detached, "fragment after detachment");
    let meta = json!({
        "seed": seed,
        "n": FINDBACK_N,
        "half_width": FINDBACK_B,
        "sigma_vdw": sigma,
        "m_p": M_P,
        "m_l": M_L,
        "site_bin": [SITE_BIN, 0],
    });
    fs::write(dir.join("findback.json"), serde_json::to_string_pretty(&meta).unwrap() + "\n").unwrap();

    let (m, l) = two_clusters();
    write(&dir.join("pair_protein.xyz"), &m, "synthetic planar cluster M");
    write(&dir.join("pair_ligand.xyz"), &l, "synthetic planar cluster L");
    println!("find-back fixture from seed {seed}, sigma {sigma}");
}
