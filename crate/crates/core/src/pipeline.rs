//! End-to-end runs: initial state, pulse program, FID and spectrum, and the
//! classical-versus-oracle comparison.

use crate::algebra::Basis;
use crate::config::RunConfig;
use crate::dynamics::{evolve_constant, Generator, Recording, RunOptions, Simulator, StateVector, Trajectory};
use crate::error::{Error, Result};
use crate::oracle::{self, Propagator, DENSE_MAX_NUCLEI};
use crate::signal::{acquire_fid, spectrum, Fid, Spectrum};
use crate::system::FieldSpec;
use crate::thermal::{thermal_state, ThermalOptions};

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub initial_state: StateVector,
    pub trajectory: Trajectory,
    pub final_state: StateVector,
    /// Present when the sequence acquires.
    pub fid: Option<Fid>,
    pub spectrum: Option<Spectrum>,
}

/// The explicit initial state if configured, otherwise the thermal state.
pub fn initial_state(cfg: &RunConfig) -> Result<StateVector> {
    match &cfg.initial_state {
        Some(v) => Ok(v.clone()),
        None => thermal_state(&cfg.system, ThermalOptions::new(cfg.thermal)),
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput> {
    let v0 = initial_state(cfg)?;
    let mut sim = Simulator::new(
        &cfg.system,
        RunOptions {
            method: cfg.method,
            recording: cfg.recording.clone(),
        },
    )?;
    let run = sim.run(&cfg.sequence, &v0)?;
    let (fid, spec) = if run.trajectory.acquisition().is_some() {
        let fid = acquire_fid(&run.trajectory, &cfg.system, cfg.receiver_weights.as_deref())?;
        let spec = spectrum(&fid, &cfg.processing)?;
        (Some(fid), Some(spec))
    } else {
        (None, None)
    };
    Ok(SimulationOutput {
        initial_state: v0,
        trajectory: run.trajectory,
        final_state: run.final_state,
        fid,
        spectrum: spec,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Uniform-norm deviation over every compared snapshot and component.
    pub max_deviation: f64,
    /// `(operator name, worst deviation)`, largest first.
    pub per_observable: Vec<(String, f64)>,
    pub snapshots: usize,
    /// Smallest eigenvalue of the initial density matrix; negative values
    /// mean the initial state is not physical.
    pub initial_min_eigenvalue: f64,
}

/// Runs the configured program classically and on the density matrix, then
/// continues free evolution over `horizon` seconds sampled at `samples`
/// evenly spaced instants, comparing intensive expectation values.
pub fn verify(cfg: &RunConfig, horizon: f64, samples: usize) -> Result<VerifyReport> {
    let n = cfg.system.n();
    if n > DENSE_MAX_NUCLEI {
        return Err(Error::CeilingExceeded {
            what: "oracle",
            n,
            max: DENSE_MAX_NUCLEI,
        });
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    if samples < 2 {
        return Err(Error::invalid("verification needs at least two samples"));
    }
    let basis = Basis::new(n)?;
    let v0 = initial_state(cfg)?;
    let rec = oracle::state_to_rho(&v0)?;

    let mut sim = Simulator::new(
        &cfg.system,
        RunOptions {
            method: cfg.method,
            recording: Recording::All,
        },
    )?;
    let classical = sim.run(&cfg.sequence, &v0)?;
    let quantum = oracle::run_sequence(&cfg.system, &cfg.sequence, &rec.rho)?;

    let mut worst = vec![0.0f64; basis.len()];
    let mut compare = |a: &[f64], b: &[f64]| {
        for (w, (x, y)) in worst.iter_mut().zip(a.iter().zip(b)) {
            *w = w.max((x - y).abs());
        }
    };
    let traj = &classical.trajectory;
    if traj.len() != quantum.states.len() {
        return Err(Error::invalid("classical and oracle runs produced different snapshot counts"));
    }
    for (k, q) in quantum.states.iter().enumerate() {
        compare(&traj.states()[k], q.values());
    }

    let generator = Generator::for_system(&basis, &cfg.system, &FieldSpec::FREE)?;
    let propagator = Propagator::for_system(&cfg.system, &FieldSpec::FREE)?;
    let dt = horizon / (samples - 1) as f64;
    let mut c = classical.final_state.clone();
    for k in 0..samples {
        if k > 0 {
            c = evolve_constant(&c, &generator, dt, cfg.method)?;
        }
        let q = oracle::expectations(&propagator.evolve(&quantum.final_rho, k as f64 * dt))?;
        compare(c.values(), q.values());
    }

    let max_deviation = worst.iter().copied().fold(0.0, f64::max);
    let mut per_observable: Vec<(String, f64)> = worst
        .iter()
        .enumerate()
        .map(|(j, &w)| (basis.op(j).to_string(), w))
        .collect();
    per_observable.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(VerifyReport {
        max_deviation,
        per_observable,
        snapshots: traj.len() + samples,
        initial_min_eigenvalue: rec.min_eigenvalue,
    })
}
