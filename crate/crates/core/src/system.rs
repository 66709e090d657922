//! Physical spin system, applied fields and pulse programs.
//!
//! Internal units are rad/s with ħ = 1. Offsets in the rotating frame are
//! supplied directly as `omega` (ω_p = γ_p B0 − ω_ref).

use std::f64::consts::TAU;
use std::fmt;

use crate::algebra::{check_nuclei, Axis, Basis, ProductOperator};
use crate::error::{Error, Result};

pub fn hz_to_rad(f: f64) -> f64 {
    TAU * f
}

/// Parameters of one molecule species.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    omega: Vec<f64>,
    gamma: Vec<f64>,
    coupling: Vec<Vec<f64>>,
    molecules: f64,
    beta: f64,
}

impl SpinSystem {
    /// `omega`: Larmor (or offset) angular frequencies, rad/s.
    /// `gamma`: gyromagnetic ratios, rad/s/T.
    /// `coupling`: symmetric J matrix in rad/s with zero diagonal; the
    /// Hamiltonian carries `-J_pq S^p·S^q` per pair.
    /// `beta`: inverse temperature in s (energies are in rad/s).
    pub fn new(
        omega: Vec<f64>,
        gamma: Vec<f64>,
        coupling: Vec<Vec<f64>>,
        molecules: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = omega.len();
        check_nuclei(n)?;
        if gamma.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gamma.len(),
            });
        }
        if coupling.len() != n || coupling.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("coupling matrix must be {n}x{n}")));
        }
        if omega.iter().chain(&gamma).any(|v| !v.is_finite()) {
            return Err(Error::invalid("frequencies and gyromagnetic ratios must be finite"));
        }
        for p in 0..n {
            if coupling[p][p] != 0.0 {
                return Err(Error::invalid(format!("J[{p}][{p}] must be zero")));
            }
            for q in 0..n {
                if !coupling[p][q].is_finite() || coupling[p][q] != coupling[q][p] {
                    return Err(Error::invalid(format!(
                        "coupling matrix must be finite and symmetric (entry {},{})",
                        p + 1,
                        q + 1
                    )));
                }
            }
        }
        if !(molecules.is_finite() && molecules >= 1.0) {
            return Err(Error::invalid("molecule count must be finite and >= 1"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid("beta must be finite and >= 0"));
        }
        Ok(SpinSystem {
            omega,
            gamma,
            coupling,
            molecules,
            beta,
        })
    }

    /// Unit gyromagnetic ratios, one molecule, infinite temperature.
    pub fn with_frequencies(omega: Vec<f64>, coupling: Vec<Vec<f64>>) -> Result<Self> {
        let n = omega.len();
        Self::new(omega, vec![1.0; n], coupling, 1.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn coupling(&self) -> &[Vec<f64>] {
        &self.coupling
    }

    /// `J_pq` with 0-based nuclei.
    pub fn j(&self, p: usize, q: usize) -> f64 {
        self.coupling[p][q]
    }

    pub fn molecules(&self) -> f64 {
        self.molecules
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(
            self.omega.clone(),
            self.gamma.clone(),
            self.coupling.clone(),
            self.molecules,
            beta,
        )
    }

    pub fn with_molecules(&self, molecules: f64) -> Result<Self> {
        Self::new(
            self.omega.clone(),
            self.gamma.clone(),
            self.coupling.clone(),
            molecules,
            self.beta,
        )
    }

    /// Smallest nonzero |J_pq|, if any pair is coupled.
    pub fn min_coupling(&self) -> Option<f64> {
        self.coupling
            .iter()
            .flatten()
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .min_by(f64::total_cmp)
    }
}

/// How the static field enters the Zeeman term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldMode {
    /// z field expressed through the per-nucleus `omega` of the system.
    LongitudinalOmega,
    /// Explicit field vector in tesla, coupled through each `gamma`.
    Explicit([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    pub mode: FieldMode,
    /// Additional (Bx, By) in tesla, coupled through `gamma`.
    pub transverse: Option<[f64; 2]>,
}

impl FieldSpec {
    pub const FREE: FieldSpec = FieldSpec {
        mode: FieldMode::LongitudinalOmega,
        transverse: None,
    };

    pub fn explicit(b: [f64; 3]) -> Self {
        FieldSpec {
            mode: FieldMode::Explicit(b),
            transverse: None,
        }
    }

    fn is_finite(&self) -> bool {
        let mode_ok = match self.mode {
            FieldMode::LongitudinalOmega => true,
            FieldMode::Explicit(b) => b.iter().all(|v| v.is_finite()),
        };
        mode_ok && self.transverse.is_none_or(|t| t.iter().all(|v| v.is_finite()))
    }

    /// True if the field has no transverse component, so the Hamiltonian
    /// conserves total z angular momentum.
    pub fn is_longitudinal(&self) -> bool {
        let mode = match self.mode {
            FieldMode::LongitudinalOmega => true,
            FieldMode::Explicit([bx, by, _]) => bx == 0.0 && by == 0.0,
        };
        mode && self.transverse.is_none_or(|[bx, by]| bx == 0.0 && by == 0.0)
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::FREE
    }
}

/// Nonzero Hamiltonian terms `(B_l, h_l)` in a fixed order: Zeeman terms by
/// nucleus then axis, followed by couplings by pair then axis.
pub fn hamiltonian_terms(sys: &SpinSystem, field: &FieldSpec) -> Result<Vec<(ProductOperator, f64)>> {
    if !field.is_finite() {
        return Err(Error::invalid("field components must be finite"));
    }
    let n = sys.n();
    let mut terms = Vec::new();
    for p in 0..n {
        let g = sys.gamma[p];
        let mut b = match field.mode {
            FieldMode::LongitudinalOmega => [0.0, 0.0, 0.0],
            FieldMode::Explicit(b) => [-g * b[0], -g * b[1], -g * b[2]],
        };
        if field.mode == FieldMode::LongitudinalOmega {
            b[2] = -sys.omega[p];
        }
        if let Some([bx, by]) = field.transverse {
            b[0] -= g * bx;
            b[1] -= g * by;
        }
        for axis in Axis::ALL {
            let h = b[axis.offset()];
            if h != 0.0 {
                terms.push((ProductOperator::spin(n, p + 1, axis)?, h));
            }
        }
    }
    for p in 0..n {
        for q in p + 1..n {
            let j = sys.coupling[p][q];
            if j != 0.0 {
                for axis in Axis::ALL {
                    terms.push((ProductOperator::new(n, &[(p + 1, axis), (q + 1, axis)])?, -j));
                }
            }
        }
    }
    Ok(terms)
}

/// Hamiltonian coefficient vector over the canonical basis:
/// `H = -Σ_p γ_p B·S^p - Σ_{p<q} J_pq C^{pq}_ii`.
pub fn hamiltonian_coeffs(sys: &SpinSystem, field: &FieldSpec) -> Result<Vec<f64>> {
    let basis = Basis::new(sys.n())?;
    hamiltonian_coeffs_in(&basis, sys, field)
}

pub fn hamiltonian_coeffs_in(basis: &Basis, sys: &SpinSystem, field: &FieldSpec) -> Result<Vec<f64>> {
    if basis.n() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            found: basis.n(),
        });
    }
    let mut h = vec![0.0; basis.len()];
    for (op, v) in hamiltonian_terms(sys, field)? {
        h[basis.index_of(&op)?.get()] += v;
    }
    Ok(h)
}

/// One step of a pulse program.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Free or driven evolution for `duration` seconds under a constant field.
    Evolve { duration: f64, field: FieldSpec },
    /// Instantaneous rotation of the listed (1-based) nuclei.
    HardPulse {
        targets: Vec<usize>,
        axis: Axis,
        angle: f64,
    },
    /// Record `points` snapshots spaced by `dwell` under free evolution. The
    /// first snapshot is taken at the start of the window.
    Acquire { dwell: f64, points: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSequence {
    pub events: Vec<Event>,
}

impl PulseSequence {
    pub fn new(events: Vec<Event>) -> Self {
        PulseSequence { events }
    }
}

/// A sequence that passed [`validate_sequence`] for a given nucleus count.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSequence {
    events: Vec<Event>,
    n: usize,
}

impl ValidatedSequence {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn acquisition(&self) -> Option<(f64, usize)> {
        self.events.iter().find_map(|e| match *e {
            Event::Acquire { dwell, points } => Some((dwell, points)),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NonpositiveDuration(f64),
    NonpositiveDwell(f64),
    TooFewPoints(usize),
    TargetOutOfRange(usize),
    NoTargets,
    NonFiniteAngle,
    NonFiniteField,
    MultipleAcquire,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub event: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {}: ", self.event)?;
        match &self.kind {
            ViolationKind::NonpositiveDuration(d) => write!(f, "nonpositive duration ({d})"),
            ViolationKind::NonpositiveDwell(d) => write!(f, "nonpositive dwell ({d})"),
            ViolationKind::TooFewPoints(p) => write!(f, "acquisition needs at least 2 points, got {p}"),
            ViolationKind::TargetOutOfRange(t) => write!(f, "target out of range ({t})"),
            ViolationKind::NoTargets => write!(f, "pulse has no targets"),
            ViolationKind::NonFiniteAngle => write!(f, "non-finite pulse angle"),
            ViolationKind::NonFiniteField => write!(f, "non-finite field component"),
            ViolationKind::MultipleAcquire => write!(f, "more than one acquisition"),
        }
    }
}

/// Checks a sequence against a system. Pulse targets are sorted and
/// deduplicated; nothing else is altered. All violations are reported.
pub fn validate_sequence(seq: &PulseSequence, sys: &SpinSystem) -> Result<ValidatedSequence> {
    let n = sys.n();
    let mut violations = Vec::new();
    let mut acquisitions = 0;
    let mut events = Vec::with_capacity(seq.events.len());
    for (i, event) in seq.events.iter().enumerate() {
        let mut flag = |kind| violations.push(Violation { event: i, kind });
        match event {
            Event::Evolve { duration, field } => {
                if !(duration.is_finite() && *duration > 0.0) {
                    flag(ViolationKind::NonpositiveDuration(*duration));
                }
                if !field.is_finite() {
                    flag(ViolationKind::NonFiniteField);
                }
                events.push(event.clone());
            }
            Event::HardPulse { targets, axis, angle } => {
                if targets.is_empty() {
                    flag(ViolationKind::NoTargets);
                }
                for &t in targets {
                    if t == 0 || t > n {
                        flag(ViolationKind::TargetOutOfRange(t));
                    }
                }
                if !angle.is_finite() {
                    flag(ViolationKind::NonFiniteAngle);
                }
                let mut targets = targets.clone();
                targets.sort_unstable();
                targets.dedup();
                events.push(Event::HardPulse {
                    targets,
                    axis: *axis,
                    angle: *angle,
                });
            }
            Event::Acquire { dwell, points } => {
                acquisitions += 1;
                if acquisitions > 1 {
                    flag(ViolationKind::MultipleAcquire);
                }
                if !(dwell.is_finite() && *dwell > 0.0) {
                    flag(ViolationKind::NonpositiveDwell(*dwell));
                }
                if *points < 2 {
                    flag(ViolationKind::TooFewPoints(*points));
                }
                events.push(event.clone());
            }
        }
    }
    if violations.is_empty() {
        Ok(ValidatedSequence { events, n })
    } else {
        Err(Error::InvalidSequence(violations))
    }
}
