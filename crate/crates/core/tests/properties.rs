use lzring::model::brute_force_hamiltonian;
use lzring::{
    build_hamiltonian, evolve, ftpe, hamiltonian_at, lz_closed_form, CouplingParams,
    IntegratorConfig, RingTopology, Trajectory,
};
use proptest::prelude::*;

fn run(n: usize, params: CouplingParams, t_start: f64, t_end: f64, samples: usize) -> Trajectory {
    let topo = RingTopology::for_sites(n).unwrap();
    let h = build_hamiltonian(&params, &topo).unwrap();
    let cfg = IntegratorConfig {
        sample_count: samples,
        ..IntegratorConfig::default()
    };
    evolve(&h, &cfg, t_start, t_end).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn built_hamiltonian_matches_kronecker_oracle(
        n in 1usize..=4,
        g in 0.0f64..3.0,
        j1 in -3.0f64..3.0,
        j2 in -3.0f64..3.0,
        r in 0.01f64..20.0,
        t in -50.0f64..50.0,
    ) {
        let params = CouplingParams { g, j1, j2, r };
        let topo = RingTopology::for_sites(n).unwrap();
        let h = build_hamiltonian(&params, &topo).unwrap();
        let built = hamiltonian_at(&h, t);
        let oracle = brute_force_hamiltonian(&params, &topo, t).unwrap();
        prop_assert_eq!(built.entries(), oracle.entries());
        prop_assert!(built.hermitian_defect() == 0.0);
    }
}

#[test]
fn uncoupled_ring_factorizes_at_every_sample() {
    let params = CouplingParams::new(0.0, 0.0, 1.0);
    let ring = run(4, params, -30.0, 30.0, 2001);
    let lone = run(1, params, -30.0, 30.0, 2001);
    assert_eq!(ring.times.len(), 2001);
    let gap = lzring::cli::factorization_gap(&ring, &lone);
    assert!(gap <= 1e-8, "factorization gap {gap:e}");
}

#[test]
fn single_site_matches_landau_zener_formula() {
    for r in [0.5, 1.0, 2.0, 7.0] {
        let traj = run(1, CouplingParams::new(0.0, 0.0, r), -30.0, 30.0, 2001);
        let measured = *traj.es_mean.last().unwrap();
        let formula = lz_closed_form(1.0, r);
        assert!(
            (measured - formula).abs() <= 0.02,
            "r = {r}: {measured} vs {formula}"
        );
        assert!(traj.max_norm_drift <= 1e-6);
    }
}

#[test]
fn final_flip_probability_falls_as_sweep_gets_faster() {
    let finals: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 7.0]
        .iter()
        .map(|&r| {
            *run(1, CouplingParams::new(0.0, 0.0, r), -30.0, 30.0, 201)
                .es_mean
                .last()
                .unwrap()
        })
        .collect();
    for w in finals.windows(2) {
        assert!(w[0] > w[1], "{finals:?}");
    }
    assert!(finals[0] > 0.99);
}

#[test]
fn sites_of_a_uniform_ring_are_equivalent() {
    // every site sees the same couplings, so per-site series coincide
    for (j1, j2) in [(1.0, 1.0), (0.7, -0.4), (-0.3, 0.6)] {
        let traj = run(4, CouplingParams::new(j1, j2, 2.0), -15.0, 15.0, 301);
        for row in &traj.site_flip_prob {
            for p in &row[1..] {
                assert!((p - row[0]).abs() < 1e-9, "j = ({j1}, {j2}): {row:?}");
            }
        }
    }
}

#[test]
fn ferromagnetic_and_antiferromagnetic_ordering_at_unit_rate() {
    let value = |j1: f64, j2: f64| {
        let traj = run(4, CouplingParams::new(j1, j2, 1.0), -30.0, 30.0, 2001);
        assert!(traj.max_norm_drift <= 1e-6);
        ftpe(&traj.es_mean, &traj.times).unwrap().ftpe
    };
    let pp = value(1.0, 1.0);
    let mm = value(-1.0, -1.0);
    let pm = value(1.0, -1.0);
    assert!(pp >= 0.95, "{pp}");
    assert!(pp > mm && pm > mm, "{pp} {pm} {mm}");
}

#[test]
fn halving_the_step_barely_moves_ftpe() {
    for (j1, j2) in [(1.0, 1.0), (-1.0, -1.0)] {
        let params = CouplingParams::new(j1, j2, 1.0);
        let topo = RingTopology::for_sites(4).unwrap();
        let h = build_hamiltonian(&params, &topo).unwrap();
        let value = |dt: f64| {
            let cfg = IntegratorConfig {
                dt,
                ..IntegratorConfig::default()
            };
            let traj = evolve(&h, &cfg, -30.0, 30.0).unwrap();
            ftpe(&traj.es_mean, &traj.times).unwrap().ftpe
        };
        let (coarse, fine) = (value(1e-3), value(5e-4));
        assert!(
            (coarse - fine).abs() < 1e-4,
            "({j1}, {j2}): {coarse} vs {fine}"
        );
    }
}

#[test]
fn fast_sweeps_with_strong_coupling_keep_the_norm() {
    for (j1, j2) in [(2.0, 2.0), (-2.0, -2.0), (2.0, -2.0)] {
        let traj = run(4, CouplingParams::new(j1, j2, 13.8), -30.0, 30.0, 2001);
        assert!(
            traj.max_norm_drift <= 1e-6,
            "({j1}, {j2}): {:e}",
            traj.max_norm_drift
        );
    }
}
