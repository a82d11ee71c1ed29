use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsdock::energy::{
    direct_binding_energy, direct_total_energy, ligand_weighted_sum, multi_protein_binding_energy,
    plie_binding_energy, tensor_total_energy, Method,
};
use rsdock::kernel::{build_reference_kernel, ReferenceKernel};
use rsdock::particles::ParticleSystem;
use rsdock::potential::{assemble_long_range_uncompressed, assemble_rs_potential};
use rsdock::{make_grid, Error, Grid3D, Point3};

fn system(c: Vec<Point3>, q: Vec<f64>) -> ParticleSystem {
    ParticleSystem::new(c, q).unwrap()
}

fn random_system(rng: &mut ChaCha8Rng, count: usize, b: f64) -> ParticleSystem {
    let c: Vec<Point3> = (0..count).map(|_| std::array::from_fn(|_| rng.gen_range(-b..b))).collect();
    let q: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
    system(c, q)
}

fn setup() -> (Grid3D, ReferenceKernel) {
    let g = make_grid(8.0, 128).unwrap();
    let rk = build_reference_kernel(&g, 30, 1.0, 1e-4).unwrap();
    (g, rk)
}

#[test]
fn direct_small_cases() {
    let e = direct_total_energy(&system(vec![[0.0; 3], [2.0, 0.0, 0.0]], vec![1.0, 1.0])).unwrap();
    assert!((e.value - 0.5).abs() < 1e-15);
    assert_eq!(e.method, Method::Direct);
    assert_eq!(direct_total_energy(&system(vec![[1.0, 2.0, 3.0]], vec![4.0])).unwrap().value, 0.0);
    assert_eq!(direct_total_energy(&ParticleSystem::empty()).unwrap().value, 0.0);
    let m = system(vec![[0.0; 3]], vec![1.0]);
    let l = system(vec![[0.0, 3.0, 0.0]], vec![-1.0]);
    assert!((direct_binding_energy(&m, &l).unwrap().value + 1.0 / 3.0).abs() < 1e-15);
    let neutral = system(vec![[0.0, 3.0, 0.0], [1.0, 1.0, 1.0]], vec![0.0, 0.0]);
    assert_eq!(direct_binding_energy(&m, &neutral).unwrap().value, 0.0);
}

#[test]
fn coincident_particles_are_singular() {
    let ps = system(vec![[1.0; 3], [1.0; 3]], vec![1.0, 1.0]);
    assert!(matches!(direct_total_energy(&ps), Err(Error::SingularConfiguration(_))));
    let l = system(vec![[1.0; 3]], vec![1.0]);
    assert!(matches!(direct_binding_energy(&ps, &l), Err(Error::SingularConfiguration(_))));
}

#[test]
fn tensor_total_of_one_charge_is_zero() {
    let (g, rk) = setup();
    let ps = system(vec![[0.3, -1.2, 2.0]], vec![1.7]);
    let rs = assemble_rs_potential(&rk, &ps, &g, 1e-8, 8).unwrap();
    let e = tensor_total_energy(&rs, &ps, &rk).unwrap();
    assert!(e.value.abs() <= 1e-8 * rk.long_center_value() * 1.7 * 1.7, "{}", e.value);
    assert_eq!(e.method, Method::Tensor);
    assert_eq!(e.grid_n, Some(128));
}

#[test]
fn tensor_total_matches_direct_for_spread_charges() {
    let (g, rk) = setup();
    // Node-aligned, pairwise beyond 3σ so that the long part is the full field.
    let c: Vec<Point3> = [[40usize, 64, 64], [88, 64, 64], [64, 30, 70], [64, 100, 50]]
        .iter()
        .map(|i| g.node(*i))
        .collect();
    let ps = system(c, vec![1.0, -0.5, 0.8, -0.3]);
    let rs = assemble_rs_potential(&rk, &ps, &g, 1e-8, 8).unwrap();
    let t = tensor_total_energy(&rs, &ps, &rk).unwrap().value;
    let d = direct_total_energy(&ps).unwrap().value;
    assert!((t - d).abs() <= 1e-3 * d.abs(), "{t} vs {d}");
    let other = ps.scaled_charges(2.0);
    assert!(matches!(tensor_total_energy(&rs, &other, &rk), Err(Error::InvalidArgument(_))));
}

#[test]
fn plie_of_two_unit_charges() {
    let (g, rk) = setup();
    // 48 cells of 0.125 bohr.
    let m = system(vec![g.node([40, 64, 64])], vec![1.0]);
    let l = system(vec![g.node([88, 64, 64])], vec![-1.0]);
    let rs = assemble_rs_potential(&rk, &m, &g, 1e-8, 8).unwrap();
    let e = plie_binding_energy(&rs, &l).unwrap();
    assert!((e.value + 1.0 / 6.0).abs() <= 1e-3 / 6.0, "{}", e.value);
    assert_eq!(e.rank, Some(rs.rank()));
    assert_eq!(plie_binding_energy(&rs, &l.scaled_charges(0.0)).unwrap().value, 0.0);
    let single = multi_protein_binding_energy(std::slice::from_ref(&rs), &l).unwrap();
    assert_eq!(single.value, e.value);
    let near = system(vec![g.node([44, 64, 64])], vec![-1.0]);
    assert!(matches!(plie_binding_energy(&rs, &near), Err(Error::InfeasibleConfiguration(_))));
}

#[test]
fn multi_protein_sums_the_parts() {
    let (g, rk) = setup();
    let m1 = system(vec![[-5.0, 0.0, 0.0], [-5.0, 1.5, 0.0]], vec![1.0, -0.5]);
    let m2 = system(vec![[5.0, 0.0, 1.0]], vec![0.7]);
    let l = system(vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.5]], vec![-0.4, 0.9]);
    let r1 = assemble_rs_potential(&rk, &m1, &g, 1e-8, 8).unwrap();
    let r2 = assemble_rs_potential(&rk, &m2, &g, 1e-8, 8).unwrap();
    let ru = assemble_rs_potential(&rk, &m1.union(&m2), &g, 1e-8, 8).unwrap();
    let multi = multi_protein_binding_energy(&[r1.clone(), r2.clone()], &l).unwrap();
    let sum = plie_binding_energy(&r1, &l).unwrap().value + plie_binding_energy(&r2, &l).unwrap().value;
    assert!((multi.value - sum).abs() <= 1e-14 * sum.abs());
    let union = plie_binding_energy(&ru, &l).unwrap().value;
    assert!((multi.value - union).abs() <= 1e-6 * union.abs());
    assert_eq!(multi.rank, Some(r1.rank() + r2.rank()));
    assert_eq!(multi_protein_binding_energy(&[], &l).unwrap().value, 0.0);

    let g2 = make_grid(8.0, 64).unwrap();
    let rk2 = build_reference_kernel(&g2, 20, 1.0, 1e-4).unwrap();
    let r3 = assemble_rs_potential(&rk2, &m2, &g2, 1e-8, 8).unwrap();
    assert!(matches!(multi_protein_binding_energy(&[r1, r3], &l), Err(Error::InvalidArgument(_))));
}

#[test]
fn weighted_sum_out_of_domain() {
    let (g, rk) = setup();
    let m = system(vec![[0.0; 3]], vec![1.0]);
    let t = assemble_long_range_uncompressed(&rk, &m, &g).unwrap();
    let l = system(vec![[0.0, 9.0, 0.0]], vec![1.0]);
    assert!(matches!(ligand_weighted_sum(&t, &l), Err(Error::OutOfDomain(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn total_splits_into_parts_and_binding(seed in any::<u64>(), n1 in 1usize..8, n2 in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_system(&mut rng, n1, 5.0);
        let b = random_system(&mut rng, n2, 5.0);
        let total = direct_total_energy(&a.union(&b)).unwrap().value;
        let ea = direct_total_energy(&a).unwrap().value;
        let eb = direct_total_energy(&b).unwrap().value;
        let ab = direct_binding_energy(&a, &b).unwrap().value;
        let ba = direct_binding_energy(&b, &a).unwrap().value;
        let scale = ea.abs() + eb.abs() + ab.abs() + 1.0;
        prop_assert!((total - ea - eb - ab).abs() <= 1e-12 * scale);
        prop_assert!((ab - ba).abs() <= 1e-12 * scale);
    }

    #[test]
    fn binding_is_bilinear(seed in any::<u64>(), c in -2.0f64..2.0, d in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_system(&mut rng, 5, 5.0);
        let l = random_system(&mut rng, 3, 5.0);
        let base = direct_binding_energy(&m, &l).unwrap().value;
        let scaled = direct_binding_energy(&m.scaled_charges(c), &l.scaled_charges(d)).unwrap().value;
        prop_assert!((scaled - c * d * base).abs() <= 1e-12 * (base.abs() + 1.0));
    }
}
