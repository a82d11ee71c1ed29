use proptest::prelude::*;
use rsdock::grid::Axis;
use rsdock::kernel::{
    build_quadrature, build_reference_kernel, cache_file_name, load_kernel, load_or_build_kernel,
    project_gaussian_axis, reference_axis, save_kernel, split_indices,
};
use rsdock::{make_grid, Error};

/// Composite Gauss–Legendre on `[a, b]` with `m` panels of 5 points.
fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let h = (b - a) / m as f64;
    (0..m)
        .map(|p| {
            let c = a + (p as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn smoke_rule_has_three_terms() {
    let r = build_quadrature(1, 0.1, 40.0).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r.measured_error > 0.1 && r.measured_error.is_finite());
}

#[test]
fn rule_accuracy_on_production_interval() {
    let r = build_quadrature(30, 0.078, 40.0).unwrap();
    // Independent check on a denser, differently placed sample.
    let mut worst: f64 = 0.0;
    for i in 0..5000 {
        let z = 0.078 * (40.0f64 / 0.078).powf((i as f64 + 0.37) / 5000.0);
        worst = worst.max((r.eval(z) - 1.0 / z).abs() * z);
    }
    assert!(worst <= 1e-5, "max relative error {worst:e}");
    assert!(r.measured_error <= 1e-5);
}

#[test]
fn error_decreases_with_k() {
    let errs: Vec<f64> = [5, 10, 20, 30]
        .iter()
        .map(|&k| build_quadrature(k, 0.1, 40.0).unwrap().measured_error)
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn quadrature_argument_errors() {
    assert!(matches!(build_quadrature(0, 0.1, 1.0), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_quadrature(3, 0.0, 1.0), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_quadrature(3, 2.0, 1.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn projection_examples() {
    let ax = make_grid(20.0, 4).unwrap().axis();
    assert_eq!(project_gaussian_axis(0.0, &ax), vec![10.0; 4]);

    let cell = Axis {
        lower: -0.5,
        h: 1.0,
        len: 1,
    };
    let v = project_gaussian_axis(1.0, &cell)[0];
    let oracle = gauss(|x| (-x * x).exp(), -0.5, 0.5, 40);
    assert!((v - oracle).abs() < 1e-13);
    assert!((v - 0.922_562).abs() < 1e-6);

    let p = project_gaussian_axis(1e6, &ax);
    assert_eq!((p[0], p[3]), (0.0, 0.0));
    assert!(p[1] > 0.0 && p[2] > 0.0);
}

#[test]
fn projection_matches_numerical_integrals() {
    let ax = Axis {
        lower: -3.3,
        h: 0.6,
        len: 11,
    };
    for t in [0.05, 0.7, 2.5, 9.0] {
        let p = project_gaussian_axis(t, &ax);
        for (i, v) in p.iter().enumerate() {
            let lo = ax.lower + i as f64 * ax.h;
            let o = gauss(|x| (-(t * x) * (t * x)).exp(), lo, lo + ax.h, 2000);
            assert!((v - o).abs() <= 1e-12 * o + 1e-200, "t={t} i={i}");
        }
    }
}

#[test]
fn reference_axis_is_centered() {
    let g = make_grid(20.0, 512).unwrap();
    let a = reference_axis(&g);
    assert_eq!(a.len, 1023);
    assert_eq!(a.node(511), 0.0);
    assert_eq!(a.h, g.h);
}

#[test]
fn kernel_value_ten_bohr_out() {
    let g = make_grid(20.0, 512).unwrap();
    let rk = build_reference_kernel(&g, 30, 1.0, 1e-4).unwrap();
    assert_eq!(rk.rank(), 61);
    let c = rk.center_index();
    // 128 cells of 0.078125 bohr.
    let v = rk.tensor().eval_at_index([c + 128, c, c]).unwrap();
    assert!((v * 10.0 - 1.0).abs() <= 1e-4, "{v}");
    let v = rk.tensor().eval_at_index([c + 74, c - 74, c + 74]).unwrap();
    let r = 74.0 * g.h * 3f64.sqrt();
    assert!((v * r - 1.0).abs() <= 1e-4, "{v}");
}

#[test]
fn kernel_matches_cell_averaged_newton_potential() {
    let g = make_grid(20.0, 512).unwrap();
    let rk = build_reference_kernel(&g, 25, 1.0, 1e-4).unwrap();
    let c = rk.center_index() as i64;
    let h = g.h;
    // Sample nodes along axes, diagonals and a few scattered directions.
    let dirs: [[i64; 3]; 6] = [[1, 0, 0], [0, 1, 1], [1, 1, 1], [3, -1, 2], [-5, 2, 1], [2, 7, -4]];
    let mut worst: f64 = 0.0;
    for d in dirs {
        for s in 1..=256i64 {
            let off = [d[0] * s, d[1] * s, d[2] * s];
            let x: [f64; 3] = std::array::from_fn(|i| off[i] as f64 * h);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if !(1.0..=20.0).contains(&r) || off.iter().any(|o| o.abs() > c) {
                continue;
            }
            let avg = gauss(
                |u| {
                    gauss(
                        |v| gauss(|w| 1.0 / (u * u + v * v + w * w).sqrt(), x[2] - h / 2.0, x[2] + h / 2.0, 1),
                        x[1] - h / 2.0,
                        x[1] + h / 2.0,
                        1,
                    )
                },
                x[0] - h / 2.0,
                x[0] + h / 2.0,
                1,
            ) / (h * h * h);
            let idx = [(c + off[0]) as usize, (c + off[1]) as usize, (c + off[2]) as usize];
            let v = rk.tensor().eval_at_index(idx).unwrap();
            worst = worst.max((v - avg).abs() * r);
        }
    }
    assert!(worst <= 1e-3, "{worst:e}");
}

#[test]
fn split_partitions_terms() {
    let g = make_grid(20.0, 64).unwrap();
    let rk = build_reference_kernel(&g, 12, 1.0, 1e-4).unwrap();
    let mut all: Vec<usize> = rk.long_indices().iter().chain(rk.short_indices()).copied().collect();
    all.sort();
    assert_eq!(all, (0..rk.rank()).collect::<Vec<_>>());
    let long = rk.long_range_subtensor();
    let short = rk.short_range_subtensor();
    assert_eq!(long.rank(), rk.long_rank());
    let full = rk.tensor();
    let c = rk.center_index();
    for idx in [[c, c, c], [0, 5, 100], [c + 3, c - 2, c + 1], [126, 126, 0]] {
        let a = long.eval_at_index(idx).unwrap() + short.eval_at_index(idx).unwrap();
        let b = full.eval_at_index(idx).unwrap();
        assert!((a - b).abs() <= 1e-14 * b.abs());
    }
    assert_eq!(long.eval_at_index([c, c, c]).unwrap(), rk.long_center_value());
}

#[test]
fn production_long_rank() {
    let g = make_grid(20.0, 512).unwrap();
    let rk = build_reference_kernel(&g, 30, 1.0, 1e-4).unwrap();
    // Recorded for this quadrature family; see the README for the discussion.
    assert_eq!(rk.long_rank(), 20);
    assert_eq!(rk.rank(), 61);
}

#[test]
fn long_part_is_the_kernel_beyond_three_sigma() {
    let g = make_grid(20.0, 256).unwrap();
    let rk = build_reference_kernel(&g, 30, 1.0, 1e-4).unwrap();
    let long = rk.long_range_subtensor();
    let c = rk.center_index();
    let h = g.h;
    for off in [[20usize, 0, 0], [12, 12, 12], [19, 6, 0]] {
        let idx = [c + off[0], c + off[1], c + off[2]];
        let r = ((off[0] * off[0] + off[1] * off[1] + off[2] * off[2]) as f64).sqrt() * h;
        assert!(r >= 3.0);
        let full = rk.tensor().eval_at_index(idx).unwrap();
        let part = long.eval_at_index(idx).unwrap();
        assert!((full - part).abs() * r <= 1e-4, "r={r}");
    }
}

#[test]
fn kernel_is_mirror_symmetric() {
    let g = make_grid(10.0, 32).unwrap();
    let rk = build_reference_kernel(&g, 10, 1.0, 1e-4).unwrap();
    let t = rk.tensor();
    let last = t.shape()[0] - 1;
    for idx in [[0, 3, 40], [17, 30, 2], [31, 31, 31], [5, 60, 22]] {
        let v = t.eval_at_index(idx).unwrap();
        for d in 0..3 {
            let mut m = idx;
            m[d] = last - m[d];
            assert_eq!(t.eval_at_index(m).unwrap(), v);
        }
    }
}

#[test]
fn shifted_index_lands_on_target() {
    let g = make_grid(10.0, 32).unwrap();
    let rk = build_reference_kernel(&g, 10, 1.0, 1e-4).unwrap();
    let ax = reference_axis(&g);
    for (j, i) in [(0, 31), (31, 0), (7, 7), (12, 20)] {
        let s = rk.shifted_index(j, i);
        assert!((ax.node(s) - (g.axis().node(j) - g.axis().node(i))).abs() < 1e-12);
    }
    assert_eq!(rk.shifted_index(5, 5), rk.center_index());
}

#[test]
fn sigma_below_mesh_is_rejected() {
    let g = make_grid(20.0, 16).unwrap();
    assert!(matches!(build_reference_kernel(&g, 5, 1.0, 1e-4), Err(Error::InvalidArgument(_))));
}

#[test]
fn long_rank_override() {
    let g = make_grid(20.0, 64).unwrap();
    let rk = build_reference_kernel(&g, 10, 1.0, 1e-4).unwrap();
    let r8 = rk.with_long_rank(8).unwrap();
    assert_eq!(r8.long_indices(), &(0..8).collect::<Vec<_>>()[..]);
    assert_eq!(r8.short_indices().len(), 13);
    assert!(rk.with_long_rank(0).is_err());
    assert!(rk.with_long_rank(22).is_err());
}

#[test]
fn cache_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(12.0, 48).unwrap();
    let (built, cached) = load_or_build_kernel(dir.path(), &g, 9, 1.0, 1e-4).unwrap();
    assert!(!cached);
    let (loaded, cached) = load_or_build_kernel(dir.path(), &g, 9, 1.0, 1e-4).unwrap();
    assert!(cached);
    assert_eq!(built, loaded);
    assert_eq!(built, build_reference_kernel(&g, 9, 1.0, 1e-4).unwrap());

    let path = dir.path().join("k.bin");
    save_kernel(&built, &path).unwrap();
    assert_eq!(load_kernel(&path).unwrap(), built);
    assert!(cache_file_name(&g, 9, 1.0, 1e-4).ends_with(".bin"));
}

#[test]
fn damaged_cache_is_rejected_and_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(12.0, 48).unwrap();
    let path = dir.path().join(cache_file_name(&g, 9, 1.0, 1e-4));
    std::fs::write(&path, b"RSKERNEL\x02\x00\x00\x00truncated").unwrap();
    assert!(matches!(load_kernel(&path), Err(Error::Format(_))));
    std::fs::write(&path, b"not a kernel").unwrap();
    assert!(matches!(load_kernel(&path), Err(Error::Format(_))));
    let (_, cached) = load_or_build_kernel(dir.path(), &g, 9, 1.0, 1e-4).unwrap();
    assert!(!cached);
    assert!(load_kernel(&path).is_ok());
}

proptest! {
    #[test]
    fn raising_sigma_only_shrinks_the_long_part(k in 3usize..30, s1 in 0.1f64..5.0, ds in 0.0f64..5.0, e in 1e-8f64..1e-1) {
        let rule = build_quadrature(k, 0.05, 40.0);
        prop_assume!(rule.is_ok());
        let nodes = rule.unwrap().nodes;
        let (_, short1) = split_indices(&nodes, s1, e);
        let (_, short2) = split_indices(&nodes, s1 + ds, e);
        prop_assert!(short1.iter().all(|k| short2.contains(k)));
    }
}
