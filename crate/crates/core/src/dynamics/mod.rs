//! Classical propagation of expectation values.
//!
//! The state is the vector of per-molecule expectation values of every basis
//! element. Its equations of motion are linear, `dv/dt = A v`, with `A` from
//! [`adjoint_generator`]. `A` is antisymmetric in the inner product weighted
//! by `4^rank`, which is the classical image of the conservation of `Tr ρ²`.

mod expm;
mod rk;
mod rotation;

use std::io::{self, Write};
use std::ops::Range;

pub use rk::RkTolerance;
pub use rotation::{apply_rotation, apply_rotation_in, rotation_matrix};

use crate::algebra::{adjoint_generator, basis_len, Axis, Basis, BasisIndex, StructureConstants};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::system::{hamiltonian_coeffs_in, Event, FieldSpec, SpinSystem, ValidatedSequence};

/// Intensive expectation values `<B_j>` over the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    v: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Result<Self> {
        crate::algebra::check_nuclei(n)?;
        Ok(StateVector {
            n,
            v: vec![0.0; basis_len(n)],
        })
    }

    pub fn from_values(n: usize, v: Vec<f64>) -> Result<Self> {
        crate::algebra::check_nuclei(n)?;
        if v.len() != basis_len(n) {
            return Err(Error::DimensionMismatch {
                expected: basis_len(n),
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "in state vector".into(),
            });
        }
        Ok(StateVector { n, v })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn into_values(self) -> Vec<f64> {
        self.v
    }

    pub fn get(&self, index: BasisIndex) -> f64 {
        self.v[index.get()]
    }

    /// `Σ_j 4^rank(j) v_j²`, conserved by the free dynamics.
    pub fn weighted_norm_sq(&self, basis: &Basis) -> f64 {
        self.v
            .iter()
            .enumerate()
            .map(|(j, x)| (1u64 << (2 * basis.rank(j))) as f64 * x * x)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.v
            .iter()
            .zip(&other.v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Sparse generator with a bound on its spectral radius.
#[derive(Debug, Clone)]
pub struct Generator {
    n: usize,
    matrix: SparseMatrix,
    bound: f64,
}

impl Generator {
    pub fn new<S: StructureConstants>(source: &S, h: &[f64]) -> Result<Self> {
        let matrix = adjoint_generator(source, h)?;
        Self::from_matrix(source.basis(), matrix)
    }

    pub fn for_system(basis: &Basis, sys: &SpinSystem, field: &FieldSpec) -> Result<Self> {
        let h = hamiltonian_coeffs_in(basis, sys, field)?;
        Self::new(basis, &h)
    }

    /// Wraps a matrix already expressed over `basis`. The spectral bound is
    /// the largest row sum of `D A D^-1` with `D = diag(2^rank)`, in which
    /// basis a Hamiltonian generator is skew-symmetric.
    pub fn from_matrix(basis: &Basis, matrix: SparseMatrix) -> Result<Self> {
        if matrix.dim() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: matrix.dim(),
            });
        }
        let scale: Vec<f64> = (0..basis.len())
            .map(|j| (1u64 << basis.rank(j)) as f64)
            .collect();
        let bound = matrix.scaled_row_norm(&scale);
        Ok(Generator {
            n: basis.n(),
            matrix,
            bound,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn spectral_bound(&self) -> f64 {
        self.bound
    }
}

/// Integration method for constant-generator segments.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Method {
    /// Polynomial action of `exp(tA)`, accurate to round-off.
    #[default]
    ExactExponential,
    /// Dormand–Prince 5(4).
    AdaptiveRk(RkTolerance),
}

/// `v(t)` for `dv/dt = A v`, `v(0) = state`.
pub fn evolve_constant(state: &StateVector, generator: &Generator, t: f64, method: Method) -> Result<StateVector> {
    if generator.dim() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            found: generator.dim(),
        });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let v = match method {
        Method::ExactExponential => expm::Chebyshev::new(generator).apply(state.values(), t),
        Method::AdaptiveRk(tol) => {
            rk::integrate(generator.matrix(), state.values(), t, tol, generator.spectral_bound())?
        }
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: format!("after evolving for {t} s"),
        });
    }
    Ok(StateVector { n: state.n, v })
}

/// Which components a [`Trajectory`] keeps.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Recording {
    #[default]
    All,
    Components(Vec<BasisIndex>),
}

impl Recording {
    /// All rank-1 components, in basis order.
    pub fn spins(n: usize) -> Self {
        Recording::Components((0..3 * n).map(BasisIndex::from).collect())
    }
}

/// Time-ordered snapshots of (a projection of) the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    n: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    components: Option<Vec<usize>>,
    acquisition: Option<Range<usize>>,
}

impl Trajectory {
    pub fn new(n: usize, recording: &Recording) -> Self {
        let components = match recording {
            Recording::All => None,
            Recording::Components(c) => Some(c.iter().map(|i| i.get()).collect()),
        };
        Trajectory {
            n,
            times: Vec::new(),
            states: Vec::new(),
            components,
            acquisition: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Recorded values per snapshot, ordered as [`Self::recorded`].
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Basis indices held in each snapshot.
    pub fn recorded(&self) -> Vec<BasisIndex> {
        match &self.components {
            Some(c) => c.iter().map(|&i| BasisIndex::from(i)).collect(),
            None => (0..basis_len(self.n)).map(BasisIndex::from).collect(),
        }
    }

    /// Snapshot range taken by the acquisition window, if any.
    pub fn acquisition(&self) -> Option<Range<usize>> {
        self.acquisition.clone()
    }

    fn column(&self, index: BasisIndex) -> Option<usize> {
        match &self.components {
            None => (index.get() < basis_len(self.n)).then_some(index.get()),
            Some(c) => c.iter().position(|&i| i == index.get()),
        }
    }

    pub fn value(&self, snapshot: usize, index: BasisIndex) -> Option<f64> {
        Some(self.states[snapshot][self.column(index)?])
    }

    /// Time series of one component over the given snapshot range.
    pub fn series(&self, index: BasisIndex, range: Range<usize>) -> Option<Vec<f64>> {
        let col = self.column(index)?;
        Some(self.states[range].iter().map(|s| s[col]).collect())
    }

    /// Full state of a snapshot; only available when everything is recorded.
    pub fn state(&self, snapshot: usize) -> Option<StateVector> {
        self.components.is_none().then(|| StateVector {
            n: self.n,
            v: self.states[snapshot].clone(),
        })
    }

    /// Records `values` (already projected) at `t`. A snapshot at the same
    /// instant as the previous one replaces it.
    fn push_projected(&mut self, t: f64, values: Vec<f64>) -> usize {
        if self.times.last() == Some(&t) {
            *self.states.last_mut().unwrap() = values;
        } else {
            debug_assert!(self.times.last().is_none_or(|&last| last < t));
            self.times.push(t);
            self.states.push(values);
        }
        self.times.len() - 1
    }

    fn project(&self, full: &[f64]) -> Vec<f64> {
        match &self.components {
            None => full.to_vec(),
            Some(c) => c.iter().map(|&j| full[j]).collect(),
        }
    }

    fn push(&mut self, t: f64, full: &[f64]) -> usize {
        let p = self.project(full);
        self.push_projected(t, p)
    }
}

impl Trajectory {
    /// CSV export: header `t,<op names>`, one row per snapshot.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let basis = Basis::new(self.n).map_err(io::Error::other)?;
        let names: Vec<String> = self.recorded().iter().map(|&i| basis.op(i.get()).to_string()).collect();
        writeln!(w, "t,{}", names.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            crate::csv::write_row(w, std::iter::once(*t).chain(s.iter().copied()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub method: Method,
    pub recording: Recording,
}

#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub trajectory: Trajectory,
    pub final_state: StateVector,
}

/// Runs pulse programs for one system, caching generators per field.
pub struct Simulator<'a> {
    sys: &'a SpinSystem,
    basis: Basis,
    options: RunOptions,
    generators: Vec<(FieldSpec, Generator)>,
}

impl<'a> Simulator<'a> {
    pub fn new(sys: &'a SpinSystem, options: RunOptions) -> Result<Self> {
        let basis = Basis::new(sys.n())?;
        if let Recording::Components(c) = &options.recording {
            if let Some(bad) = c.iter().find(|i| i.get() >= basis.len()) {
                return Err(Error::invalid(format!("recorded index {} out of range", bad.get())));
            }
        }
        Ok(Simulator {
            sys,
            basis,
            options,
            generators: Vec::new(),
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn generator(&mut self, field: &FieldSpec) -> Result<&Generator> {
        let pos = match self.generators.iter().position(|(f, _)| f == field) {
            Some(p) => p,
            None => {
                let g = Generator::for_system(&self.basis, self.sys, field)?;
                self.generators.push((*field, g));
                self.generators.len() - 1
            }
        };
        Ok(&self.generators[pos].1)
    }

    pub fn run(&mut self, seq: &ValidatedSequence, v0: &StateVector) -> Result<SequenceRun> {
        let n = self.sys.n();
        if seq.n() != n || v0.n() != n {
            return Err(Error::invalid(format!(
                "sequence (n = {}) and initial state (n = {}) must match the system (n = {n})",
                seq.n(),
                v0.n()
            )));
        }
        let mut traj = Trajectory::new(n, &self.options.recording);
        let mut t = 0.0;
        let mut state = v0.clone();
        traj.push(t, state.values());
        for (index, event) in seq.events().iter().enumerate() {
            let wrap = |e: Error| Error::Event {
                index,
                source: Box::new(e),
            };
            match event {
                Event::Evolve { duration, field } => {
                    let method = self.options.method;
                    let g = self.generator(field).map_err(wrap)?;
                    state = evolve_constant(&state, g, *duration, method).map_err(wrap)?;
                    t += duration;
                    traj.push(t, state.values());
                }
                Event::HardPulse { targets, axis, angle } => {
                    state = apply_rotation_in(&self.basis, &state, targets, *axis, *angle).map_err(wrap)?;
                    traj.push(t, state.values());
                }
                Event::Acquire { dwell, points } => {
                    let (end_state, end_t) = self.acquire(&mut traj, &state, t, *dwell, *points).map_err(wrap)?;
                    state = end_state;
                    t = end_t;
                }
            }
        }
        Ok(SequenceRun {
            trajectory: traj,
            final_state: state,
        })
    }

    fn acquire(
        &mut self,
        traj: &mut Trajectory,
        state: &StateVector,
        t0: f64,
        dwell: f64,
        points: usize,
    ) -> Result<(StateVector, f64)> {
        let first = traj.push(t0, state.values());
        let method = self.options.method;
        let observe = traj.components.clone();
        let g = self.generator(&FieldSpec::FREE)?;
        let steps = points - 1;
        let end = match method {
            Method::ExactExponential => {
                let mut samples = Vec::with_capacity(steps);
                let last = expm::Chebyshev::new(g).sample(state.values(), dwell, steps, observe.as_deref(), |m, s| {
                    samples.push((m, s))
                });
                for (m, s) in samples {
                    if s.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite {
                            context: format!("at acquisition point {m}"),
                        });
                    }
                    traj.push_projected(t0 + m as f64 * dwell, s);
                }
                StateVector::from_values(state.n, last)?
            }
            Method::AdaptiveRk(_) => {
                let mut s = state.clone();
                for m in 1..=steps {
                    s = evolve_constant(&s, g, dwell, method)?;
                    traj.push(t0 + m as f64 * dwell, s.values());
                }
                s
            }
        };
        traj.acquisition = Some(first..first + points);
        Ok((end, t0 + steps as f64 * dwell))
    }
}

/// Runs a validated pulse program from `v0`, recording full states.
pub fn run_sequence(sys: &SpinSystem, seq: &ValidatedSequence, v0: &StateVector) -> Result<Trajectory> {
    Ok(Simulator::new(sys, RunOptions::default())?.run(seq, v0)?.trajectory)
}

/// Index of the rank-1 operator `S_axis` on a 1-based nucleus.
pub fn spin_index(nucleus: usize, axis: Axis) -> BasisIndex {
    BasisIndex::from(3 * (nucleus - 1) + axis.offset())
}
