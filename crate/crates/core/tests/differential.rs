//! Classical propagation against the density-matrix reference.

mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use bulkspin::algebra::{basis_len, StructureConstants};
use bulkspin::dynamics::{apply_rotation, spin_index, RkTolerance};
use bulkspin::oracle::{self, max_abs, realize, rotation_unitary, CMatrix, DensityMatrix};
use bulkspin::signal::{acquire_fid, prepared_samples, spectrum, SpectrumOptions};
use bulkspin::{
    evolve_constant, run_sequence, thermal_state, validate_sequence, Axis, Basis, BasisIndex, Event, FieldSpec,
    Generator, Method, PulseSequence, SpinSystem, StateVector, ThermalOptions,
};
use common::{random_density_matrix, random_system, rng};
use num_complex::Complex64;
use rand::Rng;

#[test]
fn sampled_commutators_at_four_spins() {
    let basis = Basis::new(4).unwrap();
    let mut r = rng(4);
    for _ in 0..300 {
        let j = r.random_range(0..basis.len());
        let k = r.random_range(0..basis.len());
        let f = basis.bracket(BasisIndex::from(j), BasisIndex::from(k));
        let (a, b) = (realize(&basis.op(j)).unwrap(), realize(&basis.op(k)).unwrap());
        let mut want = (&a * &b - &b * &a) * Complex64::new(0.0, -1.0);
        for (l, c) in f.terms() {
            want -= realize(&basis.op(l.get())).unwrap() * Complex64::new(c.to_f64(), 0.0);
        }
        assert!(max_abs(&want) < 1e-12, "[{}, {}]", basis.op(j), basis.op(k));
    }
}

#[test]
fn both_methods_match_oracle_for_two_spins() {
    let mut r = rng(22);
    for _ in 0..5 {
        let sys = random_system(2, &mut r);
        let rho = random_density_matrix(2, &mut r);
        let v0 = oracle::expectations(&rho).unwrap();
        let basis = Basis::new(2).unwrap();
        let g = Generator::for_system(&basis, &sys, &FieldSpec::FREE).unwrap();
        let t = 0.173;
        let want = oracle::expectations(&oracle::evolve_rho(&rho, &sys, &FieldSpec::FREE, t).unwrap()).unwrap();
        for method in [Method::ExactExponential, Method::AdaptiveRk(RkTolerance::default())] {
            let got = evolve_constant(&v0, &g, t, method).unwrap();
            assert!(got.max_abs_diff(&want) < 1e-8, "{method:?}: {}", got.max_abs_diff(&want));
        }
    }
}

#[test]
fn explicit_transverse_field_matches_oracle() {
    let sys = SpinSystem::new(
        vec![TAU * 30.0, -TAU * 20.0, TAU * 5.0],
        vec![2.0, 1.0, -0.5],
        vec![vec![0.0, 40.0, 0.0], vec![40.0, 0.0, 25.0], vec![0.0, 25.0, 0.0]],
        1.0,
        0.0,
    )
    .unwrap();
    let field = FieldSpec {
        mode: bulkspin::system::FieldMode::Explicit([0.0, 0.0, 100.0]),
        transverse: Some([15.0, -7.0]),
    };
    let mut r = rng(7);
    let rho = random_density_matrix(3, &mut r);
    let seq = PulseSequence::new(vec![
        Event::Evolve { duration: 0.013, field },
        Event::HardPulse {
            targets: vec![2],
            axis: Axis::X,
            angle: 1.1,
        },
        Event::Evolve {
            duration: 0.02,
            field: FieldSpec::FREE,
        },
    ]);
    let seq = validate_sequence(&seq, &sys).unwrap();
    let v0 = oracle::expectations(&rho).unwrap();
    let classical = run_sequence(&sys, &seq, &v0).unwrap();
    let quantum = oracle::run_sequence(&sys, &seq, &rho).unwrap();
    assert_eq!(classical.times(), quantum.times.as_slice());
    for (k, q) in quantum.states.iter().enumerate() {
        let d = classical.state(k).unwrap().max_abs_diff(q);
        assert!(d < 1e-9, "snapshot {k}: {d:e}");
    }
}

#[test]
fn rk_respects_tolerance_on_longer_runs() {
    let mut r = rng(31);
    let sys = random_system(3, &mut r);
    let rho = random_density_matrix(3, &mut r);
    let v0 = oracle::expectations(&rho).unwrap();
    let basis = Basis::new(3).unwrap();
    let g = Generator::for_system(&basis, &sys, &FieldSpec::FREE).unwrap();
    let exact = evolve_constant(&v0, &g, 0.5, Method::ExactExponential).unwrap();
    let rk = evolve_constant(&v0, &g, 0.5, Method::AdaptiveRk(RkTolerance::default())).unwrap();
    assert!(exact.max_abs_diff(&rk) < 1e-7, "{:e}", exact.max_abs_diff(&rk));
}

#[test]
fn partial_pulse_on_coupled_state() {
    let basis = Basis::new(2).unwrap();
    let mut v = vec![0.0; 15];
    let zz = basis.parse_op("C[1z,2z]").unwrap().get();
    let xz = basis.parse_op("C[1x,2z]").unwrap().get();
    v[zz] = 0.2;
    v[xz] = 0.1;
    let s = StateVector::from_values(2, v).unwrap();
    let got = apply_rotation(&s, &[1], Axis::X, PI).unwrap();
    let rho = oracle::state_to_rho(&s).unwrap().rho;
    let want = oracle::expectations(&rho.conjugate(&rotation_unitary(2, &[1], Axis::X, PI).unwrap())).unwrap();
    assert!(got.max_abs_diff(&want) < 1e-12);
    assert!((got.values()[zz] + 0.2).abs() < 1e-15);
    assert!((got.values()[xz] - 0.1).abs() < 1e-15);
}

#[test]
fn thermal_state_reconstructs_boltzmann_matrix() {
    let mut r = rng(9);
    let sys = random_system(3, &mut r).with_beta(1e-3).unwrap();
    let v = thermal_state(&sys, ThermalOptions::default()).unwrap();
    let rebuilt = oracle::state_to_rho(&v).unwrap();
    assert!(rebuilt.is_physical());
    let direct = oracle::thermal_rho(&sys).unwrap();
    assert!(max_abs(&(rebuilt.rho.matrix() - direct.matrix())) < 1e-12);
}

#[test]
fn unitarity_of_oracle_propagation() {
    let mut r = rng(11);
    let sys = random_system(4, &mut r);
    let rho = random_density_matrix(4, &mut r);
    let later = oracle::evolve_rho(&rho, &sys, &FieldSpec::FREE, 0.7).unwrap();
    assert!((later.trace() - 1.0).abs() < 1e-12);
    assert!((later.purity() - rho.purity()).abs() < 1e-12);
    assert!(DensityMatrix::new(4, later.matrix().clone()).is_ok());
}

#[test]
fn round_trip_through_density_matrix() {
    let mut r = rng(12);
    let rho = random_density_matrix(3, &mut r);
    let back = oracle::state_to_rho(&oracle::expectations(&rho).unwrap()).unwrap();
    assert!(max_abs(&(back.rho.matrix() - rho.matrix())) < 1e-12);
}

fn acquisition(sys: &SpinSystem, n: usize, dwell: f64, points: usize) -> bulkspin::system::ValidatedSequence {
    validate_sequence(
        &PulseSequence::new(vec![
            Event::HardPulse {
                targets: (1..=n).collect(),
                axis: Axis::X,
                angle: FRAC_PI_2,
            },
            Event::Acquire { dwell, points },
        ]),
        sys,
    )
    .unwrap()
}

#[test]
fn precession_after_pulse() {
    let omega = TAU * 50.0;
    let sys = SpinSystem::with_frequencies(vec![omega], vec![vec![0.0]])
        .unwrap()
        .with_beta(1e-3)
        .unwrap();
    let v0 = thermal_state(&sys, ThermalOptions::default()).unwrap();
    let m = v0.get(spin_index(1, Axis::Z));
    let traj = run_sequence(&sys, &acquisition(&sys, 1, 1e-3, 40), &v0).unwrap();
    for k in traj.acquisition().unwrap() {
        let t = traj.times()[k];
        // x pulse sends z to -y, which then precesses as (x, y) = m (-sin ωt, -cos ωt)
        let x = traj.value(k, spin_index(1, Axis::X)).unwrap();
        let y = traj.value(k, spin_index(1, Axis::Y)).unwrap();
        assert!((x + m * (omega * t).sin()).abs() < 1e-13);
        assert!((y + m * (omega * t).cos()).abs() < 1e-13);
    }
}

#[test]
fn fid_scaling_and_linearity() {
    let omega = TAU * 80.0;
    let sys = SpinSystem::with_frequencies(vec![omega, -omega / 3.0], vec![vec![0.0, 30.0], vec![30.0, 0.0]])
        .unwrap()
        .with_beta(1e-3)
        .unwrap();
    let seq = acquisition(&sys, 2, 1e-3, 64);
    let v0 = thermal_state(&sys, ThermalOptions::default()).unwrap();
    let traj = run_sequence(&sys, &seq, &v0).unwrap();
    let fid = acquire_fid(&traj, &sys, None).unwrap();

    let doubled = sys.with_molecules(2.0).unwrap();
    let fid2 = acquire_fid(&traj, &doubled, None).unwrap();
    for (a, b) in fid.samples.iter().zip(&fid2.samples) {
        assert_eq!(2.0 * a, *b);
    }

    // linear in the initial state, hence in the trajectory
    let u = StateVector::from_values(2, (0..15).map(|j| 0.01 * j as f64).collect()).unwrap();
    let sum = StateVector::from_values(2, v0.values().iter().zip(u.values()).map(|(a, b)| a + b).collect()).unwrap();
    let fu = acquire_fid(&run_sequence(&sys, &seq, &u).unwrap(), &sys, None).unwrap();
    let fs = acquire_fid(&run_sequence(&sys, &seq, &sum).unwrap(), &sys, None).unwrap();
    for k in 0..fid.len() {
        assert!((fid.samples[k] + fu.samples[k] - fs.samples[k]).norm() < 1e-12);
    }

    let zeros = run_sequence(&sys, &seq, &StateVector::zeros(2).unwrap()).unwrap();
    assert!(acquire_fid(&zeros, &sys, None).unwrap().samples.iter().all(|s| s.norm() == 0.0));

    let opts = SpectrumOptions {
        line_broadening_hz: 2.0,
        zero_fill: Some(256),
        peak_threshold: 0.01,
    };
    let spec = spectrum(&fid, &opts).unwrap();
    let time: f64 = prepared_samples(&fid, &opts).unwrap().iter().map(|z| z.norm_sqr()).sum();
    let freq: f64 = spec.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() / 256.0;
    assert!((time - freq).abs() <= 1e-9 * time);
}

#[test]
fn positive_offset_gives_positive_frequency() {
    for &f in &[100.0, -60.0, 230.0] {
        let sys = SpinSystem::with_frequencies(vec![TAU * f], vec![vec![0.0]])
            .unwrap()
            .with_beta(1e-4)
            .unwrap();
        let v0 = thermal_state(&sys, ThermalOptions::default()).unwrap();
        let traj = run_sequence(&sys, &acquisition(&sys, 1, 2e-3, 1024), &v0).unwrap();
        let spec = spectrum(&acquire_fid(&traj, &sys, None).unwrap(), &SpectrumOptions::default()).unwrap();
        let top = spec
            .peaks
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
            .unwrap();
        assert!((top.freq_hz - f).abs() <= spec.resolution(), "{f}: {}", top.freq_hz);
    }
}

#[test]
fn basis_operators_have_expected_norms() {
    for n in 1..=3 {
        let basis = Basis::new(n).unwrap();
        let dim = 1usize << n;
        for (j, op) in basis.ops().iter().enumerate() {
            let m: CMatrix = realize(op).unwrap();
            let f: f64 = m.iter().map(|z| z.norm_sqr()).sum();
            assert!((f - dim as f64 / 4f64.powi(basis.rank(j) as i32)).abs() < 1e-14);
            assert!(max_abs(&(&m - m.adjoint())) == 0.0);
        }
        assert_eq!(basis.len(), basis_len(n));
    }
}
