mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use ni_stab::analysis::{
    is_ni, is_sni, linear_grid, shift_realization, stability_bound, sweep_epsilon, BoundCase,
};
use ni_stab::decomposition::{a_q, a_r, projector_q, schur_partition, z_matrix};
use ni_stab::matrix::{eigenvalues, left_eigenvector, ordered_real_schur, solve_hurwitz_lyapunov};
use ni_stab::plant::{closed_loop, is_controllable, transfer_eval, LtiSystem, Plant};
use ni_stab::synthesis::{synthesize, Branch};
use ni_stab::{Config, Tolerances};
use proptest::prelude::*;
use rand::Rng;

fn matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

fn square() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..=8).prop_flat_map(matrix)
}

fn system() -> impl Strategy<Value = LtiSystem> {
    (1usize..=6).prop_flat_map(|n| {
        (
            matrix(n),
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-2.0..2.0f64, n),
            -1.0..1.0f64,
        )
            .prop_map(move |(a, b, c, d)| {
                LtiSystem::new(a, DMatrix::from_vec(n, 1, b), DMatrix::from_vec(1, n, c), d).unwrap()
            })
    })
}

fn orthogonal_transform(plant: &Plant, t: &DMatrix<f64>) -> Plant {
    Plant::new(
        t * plant.a() * t.transpose(),
        t * plant.b1(),
        t * plant.b2(),
        plant.c1() * t.transpose(),
    )
    .unwrap()
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schur_form_is_orthogonal_and_ordered(m in square()) {
        let n = m.nrows();
        let form = match ordered_real_schur(&m, 0.0) {
            Ok(f) => f,
            Err(ni_stab::Error::SplitAmbiguous { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let id = DMatrix::<f64>::identity(n, n);
        prop_assert!((form.u.transpose() * &form.u - &id).amax() < 1e-12);
        let back = &form.u * &form.t * form.u.transpose();
        prop_assert!(rel((&back - &m).norm(), m.norm()) < 1e-12);
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                prop_assert!(form.t[(i, j)].abs() <= 1e-12 * m.norm());
            }
        }
        let diag = form.diagonal_eigenvalues();
        prop_assert!(diag[..form.k_stable].iter().all(|l| l.re <= 0.0));
        prop_assert!(diag[form.k_stable..].iter().all(|l| l.re > 0.0));
        let eigs = eigenvalues(&m).unwrap();
        prop_assert!(multiset_distance(&diag, &eigs) <= 1e-6 * m.norm().max(1.0));
    }

    #[test]
    fn eigenvalues_come_in_conjugate_pairs(m in square()) {
        let eigs = eigenvalues(&m).unwrap();
        let conj: Vec<C64> = eigs.iter().map(|l| l.conj()).collect();
        prop_assert!(multiset_distance(&eigs, &conj) <= 1e-9 * m.norm().max(1.0));
    }

    #[test]
    fn lyapunov_solution_is_symmetric_and_deterministic(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = rng(seed);
        let f = random_hurwitz(&mut rng, n);
        let w = random_symmetric(&mut rng, n);
        let x = solve_hurwitz_lyapunov(&f, &w).unwrap();
        prop_assert_eq!(&x, &x.transpose());
        prop_assert_eq!(&x, &solve_hurwitz_lyapunov(&f, &w).unwrap());
        let residual = &f * &x + &x * f.transpose() + &w;
        prop_assert!(rel(residual.norm(), 2.0 * f.norm() * x.norm() + w.norm()) < 1e-12);
    }

    #[test]
    fn transfer_function_is_conjugate_symmetric(sys in system(), omega in 0.01..100.0f64) {
        let s = C64::new(0.0, omega);
        match (transfer_eval(&sys, s), transfer_eval(&sys, s.conj())) {
            (Ok(g), Ok(h)) => prop_assert!((g - h.conj()).norm() <= 1e-9 * g.norm().max(1.0)),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "pole detection differs between ±jω"),
        }
    }

    #[test]
    fn transfer_function_matches_polynomial_form(sys in system(), re in -1.0..1.0f64, im in -5.0..5.0f64) {
        let s = C64::new(re + 7.0, im);
        let g = transfer_eval(&sys, s).unwrap();
        let oracle = transfer_oracle(sys.a(), sys.b(), sys.c(), sys.d(), s);
        prop_assert!((g - oracle).norm() <= 1e-8 * oracle.norm().max(1.0));
    }

    #[test]
    fn siso_sni_condition_is_minus_twice_imaginary_part(sys in system(), omega in 0.01..100.0f64) {
        let j = C64::new(0.0, 1.0);
        if let Ok(g) = transfer_eval(&sys, j * omega) {
            let hermitian_form = j * (g - g.conj());
            prop_assert!((hermitian_form.re + 2.0 * g.im).abs() <= 1e-12 * g.norm().max(1.0));
            prop_assert!(hermitian_form.im.abs() <= 1e-12 * g.norm().max(1.0));
        }
    }

    #[test]
    fn controllability_is_similarity_invariant(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = rng(seed);
        let a = uniform_matrix(&mut rng, n, n, -2.0, 2.0);
        let b = uniform_matrix(&mut rng, n, 1, -1.0, 1.0);
        let t = random_orthogonal(&mut rng, n) * DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0)));
        let t_inv = t.clone().try_inverse().unwrap();
        prop_assert_eq!(is_controllable(&a, &b).unwrap(), is_controllable(&(&t * &a * &t_inv), &(&t * &b)).unwrap());
    }

    #[test]
    fn controllability_matches_determinant_in_three_states(m in matrix(3), b in prop::collection::vec(-2.0..2.0f64, 3)) {
        let b = DMatrix::from_vec(3, 1, b);
        let ctrb = DMatrix::from_columns(&[b.column(0).into_owned(), (&m * &b).column(0).into_owned(), (&m * &m * &b).column(0).into_owned()]);
        let det = det3(&ctrb);
        let scale = ctrb.column_iter().map(|c| c.norm()).product::<f64>();
        prop_assume!(det.abs() > 1e-6 * scale || det == 0.0);
        prop_assert_eq!(is_controllable(&m, &b).unwrap(), det != 0.0);
    }

    #[test]
    fn zero_gain_closed_loop_keeps_open_loop_poles(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = rng(seed);
        let plant = random_generic_plant(&mut rng, n);
        let cl = closed_loop(&plant, &DMatrix::zeros(1, n)).unwrap();
        prop_assert_eq!(cl.a(), plant.a());
        let d = multiset_distance(&cl.poles().unwrap(), &eigenvalues(plant.a()).unwrap());
        prop_assert!(d == 0.0);
    }

    #[test]
    fn projector_is_idempotent_and_annihilates_output(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = rng(seed);
        let plant = random_generic_plant(&mut rng, n);
        let q = projector_q(&plant).unwrap();
        prop_assert!(rel((&q * &q - &q).norm(), q.norm()) < 1e-12);
        prop_assert!(rel((plant.c1() * &q).norm(), plant.c1().norm() * q.norm()) < 1e-12);
        prop_assert!(rel((&q * plant.b2()).norm(), q.norm() * plant.b2().norm()) < 1e-12);
    }

    #[test]
    fn spectrum_shift_law(seed in any::<u64>(), n in 3usize..=8, eps in 0.01..5.0f64) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::Mixed);
        let got = eigenvalues(&a_r(&rp.plant, eps).unwrap()).unwrap();
        let mut want: Vec<C64> = rp.zeros.iter().map(|z| z + eps).collect();
        want.push(C64::new(0.0, 0.0));
        let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(multiset_distance(&got, &want) <= 1e-6 * scale);
        let aq = eigenvalues(&a_q(&rp.plant).unwrap()).unwrap();
        let mut with_origin = rp.zeros.clone();
        with_origin.push(C64::new(0.0, 0.0));
        prop_assert!(multiset_distance(&aq, &with_origin) <= 1e-6 * scale);
    }

    #[test]
    fn partition_reconstructs_the_perturbed_matrix(seed in any::<u64>(), n in 3usize..=8, eps in 0.01..3.0f64) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::Mixed);
        let part = match schur_partition(&rp.plant, eps) {
            Ok(p) => p,
            Err(ni_stab::Error::SplitAmbiguous { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let ar = a_r(&rp.plant, eps).unwrap();
        let back = &part.u * part.t() * part.u.transpose();
        prop_assert!(rel((&back - &ar).norm(), ar.norm()) < 1e-12);
        let zt = part.z_tilde();
        prop_assert!(rel((&zt - zt.transpose()).norm(), zt.norm()) < 1e-12);
        prop_assert!(rel((&zt - part.u.transpose() * z_matrix(&rp.plant).unwrap() * &part.u).norm(), zt.norm()) < 1e-12);
        prop_assert_eq!(part.z12.clone(), part.z21.transpose());
        let expected = rp.zeros.iter().filter(|z| z.re + eps > 0.0).count();
        prop_assert_eq!(part.dim_antistable, expected);
        prop_assert_eq!(part.is_minimum_phase(), expected == 0);
    }

    #[test]
    fn scalar_antistable_block_matches_quadratic_form(seed in any::<u64>(), n in 3usize..=8, frac in 0.05..0.95f64) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::OneUnstable);
        let eps = rp.gamma() * frac;
        let out = synthesize(&rp.plant, eps).unwrap();
        prop_assert_eq!(out.dim_antistable, 1);
        let part = schur_partition(&rp.plant, eps).unwrap();
        let lambda = part.a22[(0, 0)];
        let y = part.u_antistable();
        let form = (y.transpose() * z_matrix(&rp.plant).unwrap() * &y)[(0, 0)];
        let x = out.x_eigenvalues[0];
        prop_assert!((x + form / (2.0 * lambda)).abs() <= 1e-8 * x.abs().max(form.abs() / lambda));
        prop_assert_eq!(out.feasible, x > 0.0);
    }

    #[test]
    fn slack_spectrum_is_basis_independent(seed in any::<u64>(), n in 3usize..=7, frac in 0.05..0.95f64) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::Mixed);
        prop_assume!(rp.zeros.iter().any(|z| z.re < 0.0));
        let eps = rp.gamma() * frac;
        let t = random_orthogonal(&mut rng, n);
        let rotated = orthogonal_transform(&rp.plant, &t);
        let (a, b) = match (synthesize(&rp.plant, eps), synthesize(&rotated, eps)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(_), Err(_)) => return Ok(()),
            (a, b) => return Err(TestCaseError::fail(format!("{:?} vs {:?}", a.err(), b.err()))),
        };
        prop_assert_eq!(a.branch, b.branch);
        prop_assert_eq!(a.x_eigenvalues.len(), b.x_eigenvalues.len());
        let scale = a.x_eigenvalues.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        for (u, v) in a.x_eigenvalues.iter().zip(&b.x_eigenvalues) {
            prop_assert!((u - v).abs() <= 1e-7 * scale);
        }
        if a.x_min_eig.is_some_and(|m| m.abs() > 1e-6 * scale) {
            prop_assert_eq!(a.feasible, b.feasible);
        }
        if let (Some(ka), Some(kb)) = (&a.gain, &b.gain) {
            prop_assert!(rel((ka - kb * &t).norm(), ka.norm()) < 1e-7);
        }
    }

    #[test]
    fn antistable_left_eigenvectors_see_the_control_input(seed in any::<u64>(), n in 3usize..=8, eps in 0.01..3.0f64) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::Mixed);
        let ar = a_r(&rp.plant, eps).unwrap();
        for z in rp.zeros.iter().filter(|z| z.re + eps > 0.0) {
            let lambda = eigenvalues(&ar).unwrap().into_iter()
                .min_by(|p, q| (p - (z + eps)).norm().total_cmp(&(q - (z + eps)).norm())).unwrap();
            let y = left_eigenvector(&ar, lambda).unwrap();
            let b2y: C64 = rp.plant.b2().iter().zip(y.iter()).map(|(b, v)| v * *b).sum();
            prop_assert!(b2y.norm() > 1e-8 * rp.plant.b2().norm());
        }
    }

    #[test]
    fn feasible_gains_place_poles_and_give_sni(seed in any::<u64>(), n in 3usize..=7, frac in 0.05..0.95f64, one_unstable in any::<bool>()) {
        let mut rng = rng(seed);
        let layout = if one_unstable { ZeroLayout::OneUnstable } else { ZeroLayout::NoUnstable };
        let rp = random_plant(&mut rng, n, layout);
        let eps = rp.gamma() * frac;
        let out = synthesize(&rp.plant, eps).unwrap();
        prop_assert_eq!(out.branch == Branch::MinimumPhase, !one_unstable);
        if !out.feasible {
            prop_assert!(one_unstable);
            return Ok(());
        }
        if let Some(p) = &out.certificate {
            prop_assert!(rel((p - p.transpose()).norm(), p.norm()) < 1e-12);
            let mut eig: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            prop_assert!(eig[0] >= -1e-10 * p.norm());
            let rank = eig.iter().filter(|v| **v > 1e-9 * p.norm()).count();
            prop_assert_eq!(rank, out.dim_antistable);
        }
        let cl = closed_loop(&rp.plant, out.gain.as_ref().unwrap()).unwrap();
        let max_re = eigenvalues(cl.a()).unwrap().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(max_re <= -eps + 1e-6);
        let cfg = Config::default();
        prop_assert!(is_sni(&cl, &cfg.grid.frequencies(), &cfg.tol).unwrap().holds);
    }

    #[test]
    fn feasibility_persists_up_to_the_bound(seed in any::<u64>(), n in 3usize..=7) {
        let mut rng = rng(seed);
        let rp = random_plant(&mut rng, n, ZeroLayout::OneUnstable);
        let report = stability_bound(&rp.plant).unwrap();
        prop_assert_eq!(report.case, BoundCase::OneUnstable);
        let gamma = report.gamma.unwrap();
        prop_assert!((gamma - rp.gamma()).abs() <= 1e-8 * gamma.max(1.0));
        // Feasibility is decided by a sign that does not depend on ε below
        // the bound, so one feasible point implies the whole interval.
        let low = synthesize(&rp.plant, 0.05 * gamma).unwrap();
        prop_assume!(low.feasible);
        let high = synthesize(&rp.plant, 0.9 * gamma).unwrap();
        prop_assert!(high.feasible);
        let cl = closed_loop(&rp.plant, high.gain.as_ref().unwrap()).unwrap();
        let cfg = Config::default();
        prop_assert!(is_sni(&cl, &cfg.grid.frequencies(), &cfg.tol).unwrap().holds);
    }

    #[test]
    fn swept_frontier_reaches_the_bound(seed in any::<u64>(), n in 3usize..=6, one_unstable in any::<bool>()) {
        let mut rng = rng(seed);
        let layout = if one_unstable { ZeroLayout::OneUnstable } else { ZeroLayout::NoUnstable };
        let rp = random_plant(&mut rng, n, layout);
        let gamma = rp.gamma();
        prop_assume!(synthesize(&rp.plant, 0.05 * gamma).unwrap().feasible);
        let grid = linear_grid(0.02 * gamma, 1.5 * gamma, 60).unwrap();
        let step = grid[1] - grid[0];
        let prof = sweep_epsilon(&rp.plant, &grid).unwrap();
        prop_assert!((prof.theoretical_gamma.unwrap() - gamma).abs() <= 1e-8 * gamma.max(1.0));
        let emp = prof.empirical_max_eps.unwrap();
        prop_assert!(emp >= gamma - 2.0 * step, "frontier {} vs bound {}", emp, gamma);
        // The certificate is only sufficient: past the bound it can still
        // succeed, but only after a stable zero has crossed into the
        // anti-stable block.
        let unstable = usize::from(one_unstable);
        for rec in prof.records.iter().filter(|r| r.feasible && r.epsilon > gamma) {
            let out = synthesize(&rp.plant, rec.epsilon).unwrap();
            prop_assert_eq!(out.branch, Branch::Lyapunov);
            prop_assert!(out.dim_antistable > unstable, "feasible past γ with {} anti-stable modes", out.dim_antistable);
        }
    }

    #[test]
    fn shifted_ni_systems_are_sni(omega0 in 0.2..5.0f64, k in 0.1..3.0f64, eps in 0.05..2.0f64) {
        // k/(s² + ω0²), the simplest lossless NI system.
        let sys = LtiSystem::from_slices(&[0.0, 1.0, -omega0 * omega0, 0.0], &[0.0, 1.0], &[k, 0.0], 0.0).unwrap();
        let cfg = Config::default();
        let freqs = cfg.grid.frequencies();
        prop_assert!(is_ni(&sys, &freqs, &cfg.tol).unwrap().holds);
        prop_assert!(is_sni(&shift_realization(&sys, eps), &freqs, &cfg.tol).unwrap().holds);
        let flipped = LtiSystem::from_slices(&[0.0, 1.0, -omega0 * omega0, 0.0], &[0.0, 1.0], &[-k, 0.0], 0.0).unwrap();
        prop_assert!(!is_ni(&flipped, &freqs, &cfg.tol).unwrap().holds);
    }
}

#[test]
fn default_tolerances_are_positive() {
    let t = Tolerances::default();
    for v in [t.split, t.eig, t.assumption, t.rank, t.psd, t.pd, t.sni, t.pole, t.are, t.distinct] {
        assert!(v > 0.0 && v < 1e-3);
    }
}

#[test]
fn boundary_spectrum_of_the_example() {
    // At ε = 1.6458 the stable zero meets the origin; the remaining
    // eigenvalue is 1 + √7 + ε by the trace.
    let eigs = eigenvalues(&a_r(&example_plant(), 1.6458).unwrap()).unwrap();
    assert!((eigs[2].re - (1.0 + 7f64.sqrt() + 1.6458)).abs() < 1e-12);
    assert!((eigs[2].re - 5.2916).abs() < 1e-4);
    assert!(eigs[0].norm() < 1e-4 && eigs[1].norm() < 1e-4);
}
