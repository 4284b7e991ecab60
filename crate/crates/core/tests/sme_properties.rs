mod common;

use common::*;
use purestate::families::{single_atom_point, two_qubit_family, Branch};
use purestate::feedback::FeedbackSetup;
use purestate::qcore::DensityMatrix;
use purestate::sme::{
    ensemble_average, feedback_sme_coefficients, simulate, simulate_one, simulate_sequential, Integrator, Scheme,
    TrajectoryConfig,
};

fn atom() -> (FeedbackSetup, DensityMatrix) {
    let point = single_atom_point(std::f64::consts::PI / 3.0, Branch::Minus, 1.0).unwrap();
    (point.setup(), DensityMatrix::pure(&point.phi))
}

#[test]
fn record_increments_are_a_martingale() {
    let (setup, _) = atom();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let c = setup.measurement();
    for scheme in [Scheme::Plain, Scheme::Feedback] {
        let config = TrajectoryConfig::new(1e-3, 0.2, 99, 400, scheme);
        let records = simulate(&rho0, &setup, &config).unwrap();
        let mean = ensemble_average(&records).unwrap();
        let n = records.len() as f64;
        for (k, rho) in mean.iter().take(config.steps()).enumerate() {
            let expected = ((c + c.adjoint()) * rho.matrix()).trace().re * config.dt;
            let dys: Vec<f64> = records.iter().map(|r| r.record[k]).collect();
            let avg = dys.iter().sum::<f64>() / n;
            let var = dys.iter().map(|d| (d - avg).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt();
            assert!((avg - expected).abs() <= 4.0 * se, "{scheme:?} step {k}: {avg} vs {expected} (se {se})");
        }
    }
}

#[test]
fn certified_states_are_stationary_under_feedback() {
    let (atom_setup, atom_state) = atom();
    let bell = two_qubit_family([0.3, -1.1, 0.7, 0.2], -0.4, 1.0).unwrap();
    let bell_state = DensityMatrix::new(projector(&V::from_vec(vec![
        z(std::f64::consts::FRAC_1_SQRT_2, 0.),
        z(0., 0.),
        z(0., 0.),
        z(std::f64::consts::FRAC_1_SQRT_2, 0.),
    ])))
    .unwrap();
    for (setup, rho) in [(atom_setup, atom_state), (bell.setup(), bell_state)] {
        let (drift, noise, _) = feedback_sme_coefficients(rho.matrix(), &setup);
        assert!(drift.norm() <= 1e-9 && noise.norm() <= 1e-9, "{} {}", drift.norm(), noise.norm());
        let (dt, t_final) = (1e-3f64, 1.0f64);
        let bound = 1e-3 * (t_final / dt).sqrt() * dt;
        for integrator in [Integrator::EulerMaruyama, Integrator::Kraus] {
            let config = TrajectoryConfig::new(dt, t_final, 5, 4, Scheme::Feedback).with_integrator(integrator);
            for r in simulate(&rho, &setup, &config).unwrap() {
                for s in &r.states {
                    let d = trace_distance(s.matrix(), rho.matrix());
                    assert!(d <= bound, "{integrator:?}: distance {d} > {bound}");
                }
            }
        }
    }
}

#[test]
fn stored_states_have_unit_trace_and_are_hermitian() {
    let (setup, _) = atom();
    let config = TrajectoryConfig::new(1e-3, 1.0, 3, 8, Scheme::Feedback);
    for r in simulate(&DensityMatrix::maximally_mixed(2), &setup, &config).unwrap() {
        for s in &r.states {
            let m = s.matrix();
            assert!((m.trace().re - 1.0).abs() <= 1e-15 && m.trace().im == 0.0);
            assert!((m - m.adjoint()).norm() <= 1e-12);
            assert!(hermitian_eigen(m).0[0] >= -1e-12);
        }
    }
}

#[test]
fn parallel_and_sequential_runs_agree_exactly() {
    let (setup, _) = atom();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let config = TrajectoryConfig::new(1e-3, 0.5, 42, 16, Scheme::Feedback).with_sample_every(50);
    let seq = simulate_sequential(&rho0, &setup, &config).unwrap();
    let any = simulate(&rho0, &setup, &config).unwrap();
    assert_eq!(seq.len(), any.len());
    for (a, b) in seq.iter().zip(&any) {
        assert_eq!(a.record, b.record);
        assert!(a.states.iter().zip(&b.states).all(|(x, y)| x.matrix() == y.matrix()));
    }
    let single = simulate_one(&rho0, &setup, &config, 7).unwrap();
    assert_eq!(single.record, seq[7].record);
}

#[test]
fn euler_maruyama_and_kraus_share_the_noise() {
    let (setup, _) = atom();
    let rho0 = DensityMatrix::maximally_mixed(2);
    let base = TrajectoryConfig::new(1e-3, 0.05, 8, 1, Scheme::Plain);
    let em = simulate(&rho0, &setup, &base.clone().with_integrator(Integrator::EulerMaruyama)).unwrap();
    let kr = simulate(&rho0, &setup, &base.with_integrator(Integrator::Kraus)).unwrap();
    let gap = em[0].states.last().unwrap().matrix() - kr[0].states.last().unwrap().matrix();
    assert!(gap.norm() < 1e-2, "integrators drifted apart by {}", gap.norm());
}
