use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use subradiance::couplings::{all_to_all, CouplingSet};
use subradiance::dynamics::{
    evolve_expm, evolve_expm_with, evolve_ode, evolve_reduced, OdeOptions, TimeGrid,
};
use subradiance::experiment::random_single_excitation;
use subradiance::hilbert::{flatten, single_excitation_ket, PureState, Register};
use subradiance::krylov::KrylovOptions;
use subradiance::linalg::{max_abs_diff, max_abs_diff_vec};
use subradiance::liouvillian::{build_liouvillian, Form, Representation};
use subradiance::steady::steady_basis;
use subradiance::{CVec, RMat, C64};

fn reg(n: usize) -> Register {
    Register::new(n).unwrap()
}

fn random_couplings(rng: &mut ChaCha8Rng, n: usize) -> CouplingSet {
    let vs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let gamma =
        RMat::from_fn(
            n,
            n,
            |i, j| if i == j { 1.0 } else { vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum() },
        );
    let g = RMat::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.4 * (i + j) as f64 - 1.0 });
    CouplingSet::new(reg(n), rng.random_range(1.0..12.0), gamma, g).unwrap()
}

#[test]
fn steady_basis_vectors_are_eigenvectors() {
    let w0 = 10.0;
    for n in 2..=6 {
        let r = reg(n);
        let c = all_to_all(r, 1.0, Some(0.0), w0).unwrap();
        let l = build_liouvillian(&c, Form::PerPair, Representation::Sparse).unwrap();
        let basis = steady_basis(r).unwrap();
        let apply = |m: &subradiance::SectorMatrix| {
            let v = flatten(&m.embed().unwrap());
            (l.apply_vec(&v).unwrap(), v)
        };
        for a in basis.a_matrices() {
            let (lv, _) = apply(&a);
            assert!(lv.norm() < 1e-10, "n = {n}");
        }
        for (set, lambda) in
            [(basis.b_minus_matrices(), C64::new(0.0, -w0)), (basis.b_plus_matrices(), C64::new(0.0, w0))]
        {
            assert_eq!(set.len(), n - 1);
            for b in set {
                let (lv, v) = apply(&b);
                assert!(max_abs_diff_vec(&lv, &(v * lambda)) < 1e-10, "n = {n}");
            }
        }
        let gram = basis.gram();
        assert!(max_abs_diff(&gram, &subradiance::CMat::identity(gram.nrows(), gram.ncols())) < 1e-12);
    }
}

#[test]
fn propagation_is_a_semigroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = random_couplings(&mut rng, 3);
    let l = build_liouvillian(&c, Form::PerPair, Representation::Dense).unwrap();
    let psi = PureState::normalized(
        c.register(),
        CVec::from_fn(8, |_, _| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))),
    )
    .unwrap();
    let rho0 = psi.projector().unwrap();
    let (t1, t2) = (0.7, 1.9);
    let direct = evolve_expm(&l, &rho0, &TimeGrid::new(vec![0.0, t1 + t2]).unwrap()).unwrap();
    let first = evolve_expm(&l, &rho0, &TimeGrid::new(vec![0.0, t1]).unwrap()).unwrap();
    let second = evolve_expm(&l, first.last(), &TimeGrid::new(vec![0.0, t2]).unwrap()).unwrap();
    assert!(max_abs_diff(direct.last().entries(), second.last().entries()) < 1e-12);
}

#[test]
fn engines_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = TimeGrid::linear(0.0, 3.0, 13).unwrap();
    for k in 0..12 {
        let n = 1 + k % 4;
        let c = random_couplings(&mut rng, n);
        let psi = random_single_excitation(c.register(), &mut rng).unwrap();
        let rho0 = psi.projector().unwrap();
        let dense = build_liouvillian(&c, Form::PerPair, Representation::Dense).unwrap();
        let sparse = build_liouvillian(&c, Form::Collective, Representation::Sparse).unwrap();
        let free = build_liouvillian(&c, Form::PerPair, Representation::MatrixFree).unwrap();
        let reference = evolve_expm(&dense, &rho0, &grid).unwrap();
        let others = [
            evolve_expm(&sparse, &rho0, &grid).unwrap(),
            evolve_expm_with(&free, &rho0, &grid, KrylovOptions { dim: 12, tol: 1e-13 }).unwrap(),
            evolve_ode(&sparse, &rho0, &grid, OdeOptions::for_omega0(c.omega0())).unwrap(),
            evolve_reduced(&c, &psi, &grid).unwrap().to_full().unwrap(),
        ];
        for traj in &others {
            for (a, b) in reference.states().iter().zip(traj.states()) {
                assert!(max_abs_diff(a.entries(), b.entries()) < 1e-8, "instance {k}");
            }
        }
    }
}

#[test]
fn dark_vacuum_coherence_decays_at_half_the_population_rate() {
    // (|0> + |u>)/sqrt2 with u = (|1> - |2>)/sqrt2: the dark population decays
    // at 1 - alpha and the vacuum coherence at (1 - alpha)/2.
    let r = reg(3);
    let alpha = 0.8;
    let w0 = 10.0;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::from_sparse(
        r,
        &[(0, C64::new(h, 0.0)), (1, C64::new(0.5, 0.0)), (2, C64::new(-0.5, 0.0))],
    )
    .unwrap();
    let c = all_to_all(r, alpha, Some(0.0), w0).unwrap();
    let l = build_liouvillian(&c, Form::PerPair, Representation::Dense).unwrap();
    let t = 6.0;
    let numeric = evolve_expm(&l, &psi.projector().unwrap(), &TimeGrid::new(vec![0.0, t]).unwrap()).unwrap();
    let coherence = numeric.last().entries()[(1, 0)].norm();
    let half = 0.5 * h * (-(1.0 - alpha) * t / 2.0).exp();
    let full = 0.5 * h * (-(1.0 - alpha) * t).exp();
    assert!((coherence - half).abs() < 1e-10);
    assert!((coherence - full).abs() > 0.05);

    let predicted =
        steady_basis(r).unwrap().prediction(&psi, w0, 1.0 - alpha).unwrap().evaluate_full(t).unwrap();
    assert!(max_abs_diff(predicted.entries(), numeric.last().entries()) < 1e-10);
}

#[test]
fn reduced_engine_runs_past_the_full_space_limit() {
    let r = reg(14);
    let c = all_to_all(r, 0.95, Some(0.2), 10.0).unwrap();
    let psi = single_excitation_ket(1, r).unwrap();
    let traj = evolve_reduced(&c, &psi, &TimeGrid::linear(0.0, 10.0, 21).unwrap()).unwrap();
    for s in traj.states() {
        assert!((s.trace() - C64::new(1.0, 0.0)).norm() < 1e-9);
    }
    // |1> overlaps the bright mode with weight 1/n; the rest decays at 1 - alpha
    let p = traj.population(&psi).unwrap();
    let dark = (1.0 - 1.0 / 14.0) * (1.0 - 1.0 / 14.0);
    assert!((p[20] - dark * (-(1.0 - 0.95) * 10.0f64).exp()).abs() < 1e-9);
}
