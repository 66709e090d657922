//! Single-molecule density-matrix simulator used as an independent reference.
//!
//! Operators are realized as Kronecker products of `σ/2` factors with
//! nucleus 1 as the most significant (leftmost) factor, and `|0⟩` spin up.
//! Propagation uses the eigendecomposition of the dense Hamiltonian. Nothing
//! here touches the symbolic algebra: the Hamiltonian is built straight from
//! the [`SpinSystem`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{Axis, Basis, ProductOperator};
use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::system::{Event, FieldMode, FieldSpec, SpinSystem, ValidatedSequence};

/// Largest nucleus count the dense oracle accepts.
pub const DENSE_MAX_NUCLEI: usize = 10;

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const POSITIVITY_TOLERANCE: f64 = -1e-10;

fn check_ceiling(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("nucleus count must be at least 1"));
    }
    if n > DENSE_MAX_NUCLEI {
        return Err(Error::CeilingExceeded {
            what: "oracle",
            n,
            max: DENSE_MAX_NUCLEI,
        });
    }
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `σ_axis / 2`.
pub fn spin_half(axis: Axis) -> CMatrix {
    let m = match axis {
        Axis::X => [c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
        Axis::Y => [c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)],
        Axis::Z => [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
    };
    CMatrix::from_row_slice(2, 2, &m)
}

fn embed(n: usize, factors: &[(usize, CMatrix)]) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::from_element(1, 1, c(1.0, 0.0));
    for p in 1..=n {
        let f = factors.iter().find(|(q, _)| *q == p).map_or(&id, |(_, m)| m);
        out = out.kronecker(f);
    }
    out
}

/// Dense matrix of a product operator.
pub fn realize(op: &ProductOperator) -> Result<CMatrix> {
    check_ceiling(op.n())?;
    let factors: Vec<(usize, CMatrix)> = op.factors().map(|(p, a)| (p, spin_half(a))).collect();
    Ok(embed(op.n(), &factors))
}

/// `S_axis^p` on nucleus `p` (1-based).
fn spin_op(n: usize, p: usize, axis: Axis) -> CMatrix {
    embed(n, &[(p, spin_half(axis))])
}

/// Single-molecule Hamiltonian `-Σ_p γ_p B·S^p - Σ_{p<q} J_pq S^p·S^q`.
pub fn hamiltonian_matrix(sys: &SpinSystem, field: &FieldSpec) -> Result<CMatrix> {
    let n = sys.n();
    check_ceiling(n)?;
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim, dim);
    for p in 0..n {
        let g = sys.gamma()[p];
        let mut b = match field.mode {
            FieldMode::LongitudinalOmega => [0.0, 0.0, sys.omega()[p]],
            FieldMode::Explicit(b) => [g * b[0], g * b[1], g * b[2]],
        };
        if let Some([bx, by]) = field.transverse {
            b[0] += g * bx;
            b[1] += g * by;
        }
        for (axis, w) in Axis::ALL.into_iter().zip(b) {
            if w != 0.0 {
                h -= spin_op(n, p + 1, axis) * c(w, 0.0);
            }
        }
    }
    for p in 0..n {
        for q in p + 1..n {
            let j = sys.j(p, q);
            if j != 0.0 {
                for axis in Axis::ALL {
                    h -= spin_op(n, p + 1, axis) * spin_op(n, q + 1, axis) * c(j, 0.0);
                }
            }
        }
    }
    Ok(h)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Normalized density matrix of one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(n: usize, rho: CMatrix) -> Result<Self> {
        let dm = Self::unchecked(n, rho)?;
        let herm = max_abs(&(&dm.rho - dm.rho.adjoint()));
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::invalid(format!("density matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = dm.trace();
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = dm.min_eigenvalue();
        if min < POSITIVITY_TOLERANCE {
            return Err(Error::invalid(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(dm)
    }

    fn unchecked(n: usize, rho: CMatrix) -> Result<Self> {
        check_ceiling(n)?;
        let dim = 1 << n;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rho.nrows(),
            });
        }
        Ok(DensityMatrix { n, rho })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_ceiling(n)?;
        let dim = 1 << n;
        Self::unchecked(n, CMatrix::identity(dim, dim) / c(dim as f64, 0.0))
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(n: usize, psi: &[Complex64]) -> Result<Self> {
        check_ceiling(n)?;
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("state vector norm is {norm}, expected 1")));
        }
        Self::unchecked(n, &v * v.adjoint())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            rho: u * &self.rho * u.adjoint(),
        }
    }
}

/// Precomputed eigendecomposition of a Hamiltonian for repeated propagation.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Self {
        let eig = h.clone().symmetric_eigen();
        Propagator {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    pub fn for_system(sys: &SpinSystem, field: &FieldSpec) -> Result<Self> {
        Ok(Self::new(&hamiltonian_matrix(sys, field)?))
    }

    /// `U = exp(-iHt)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -self.energies[k] * t);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> DensityMatrix {
        rho.conjugate(&self.unitary(t))
    }
}

/// `U ρ U†` with `U = exp(-i H t)` for the single-molecule Hamiltonian.
pub fn evolve_rho(rho: &DensityMatrix, sys: &SpinSystem, field: &FieldSpec, t: f64) -> Result<DensityMatrix> {
    if rho.n != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            found: rho.n,
        });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(Propagator::for_system(sys, field)?.evolve(rho, t))
}

/// Per-slot 2×2 entry `⟨r|σ_a/2|c⟩`.
fn slot_element(axis: Option<Axis>, r: usize, col: usize) -> Complex64 {
    match axis {
        None => c(if r == col { 1.0 } else { 0.0 }, 0.0),
        Some(a) => spin_half(a)[(r, col)],
    }
}

/// `v_j = Re Tr(ρ B_j)` over the canonical basis.
pub fn expectations(rho: &DensityMatrix) -> Result<StateVector> {
    let n = rho.n;
    let basis = Basis::new(n)?;
    let dim = 1usize << n;
    let mut v = Vec::with_capacity(basis.len());
    for op in basis.ops() {
        let slots: Vec<Option<Axis>> = (0..n).map(|p| op.slot(p)).collect();
        let mut tr = c(0.0, 0.0);
        for col in 0..dim {
            // Each σ/2 has one nonzero per column, so B_j does too.
            let mut row = 0usize;
            let mut elem = c(1.0, 0.0);
            for (p, &axis) in slots.iter().enumerate() {
                let bit = n - 1 - p;
                let cb = (col >> bit) & 1;
                let rb = if matches!(axis, Some(Axis::X) | Some(Axis::Y)) { cb ^ 1 } else { cb };
                elem *= slot_element(axis, rb, cb);
                row |= rb << bit;
            }
            tr += rho.rho[(col, row)] * elem;
        }
        debug_assert!(tr.im.abs() < 1e-10, "imaginary expectation {}", tr.im);
        v.push(tr.re);
    }
    StateVector::from_values(n, v)
}

/// Result of inverting the expectation map.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    /// False when `v` is not reachable from any physical state.
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= POSITIVITY_TOLERANCE
    }
}

/// `ρ = I/2^n + Σ_j v_j B_j 4^rank(j) / 2^n`, flagged if not positive.
pub fn state_to_rho(v: &StateVector) -> Result<Reconstruction> {
    let n = v.n();
    check_ceiling(n)?;
    let basis = Basis::new(n)?;
    let dim = 1usize << n;
    let mut rho = CMatrix::identity(dim, dim) / c(dim as f64, 0.0);
    for (j, &x) in v.values().iter().enumerate() {
        if x != 0.0 {
            let w = x * (1u64 << (2 * basis.rank(j))) as f64 / dim as f64;
            rho += realize(&basis.op(j))? * c(w, 0.0);
        }
    }
    let rho = DensityMatrix::unchecked(n, rho)?;
    let min_eigenvalue = rho.min_eigenvalue();
    Ok(Reconstruction { rho, min_eigenvalue })
}

/// `e^{-βH}/Z` for the static-field Hamiltonian.
pub fn thermal_rho(sys: &SpinSystem) -> Result<DensityMatrix> {
    let p = Propagator::for_system(sys, &FieldSpec::FREE)?;
    let beta = sys.beta();
    let lowest = p.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = p.energies.iter().map(|&e| (-beta * (e - lowest)).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut scaled = p.vectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= c(w[k] / z, 0.0);
    }
    DensityMatrix::unchecked(sys.n(), scaled * p.vectors.adjoint())
}

/// `⊗_p exp(-iθ S_axis^p)` over the targets, identity elsewhere.
pub fn rotation_unitary(n: usize, targets: &[usize], axis: Axis, angle: f64) -> Result<CMatrix> {
    check_ceiling(n)?;
    if let Some(&t) = targets.iter().find(|&&t| t == 0 || t > n) {
        return Err(Error::invalid(format!("rotation target {t} out of range 1..={n}")));
    }
    let (s, co) = (angle / 2.0).sin_cos();
    // exp(-iθσ/2) = cos(θ/2) I - i sin(θ/2) σ
    let sigma = spin_half(axis) * c(2.0, 0.0);
    let single = CMatrix::identity(2, 2) * c(co, 0.0) - sigma * c(0.0, s);
    let factors: Vec<(usize, CMatrix)> = targets.iter().map(|&t| (t, single.clone())).collect();
    Ok(embed(n, &factors))
}

/// Snapshots of expectation values produced by [`run_sequence`].
#[derive(Debug, Clone)]
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub acquisition: Option<std::ops::Range<usize>>,
    pub final_rho: DensityMatrix,
}

/// Runs a validated pulse program on the density matrix, mirroring the
/// classical runner snapshot for snapshot.
pub fn run_sequence(sys: &SpinSystem, seq: &ValidatedSequence, rho0: &DensityMatrix) -> Result<OracleTrajectory> {
    let n = sys.n();
    check_ceiling(n)?;
    if seq.n() != n || rho0.n != n {
        return Err(Error::invalid("sequence, system and density matrix sizes differ"));
    }
    let mut out = OracleTrajectory {
        times: Vec::new(),
        states: Vec::new(),
        acquisition: None,
        final_rho: rho0.clone(),
    };
    let record = |out: &mut OracleTrajectory, t: f64, rho: &DensityMatrix| -> Result<usize> {
        let s = expectations(rho)?;
        if out.times.last() == Some(&t) {
            *out.states.last_mut().unwrap() = s;
        } else {
            out.times.push(t);
            out.states.push(s);
        }
        Ok(out.times.len() - 1)
    };
    let mut rho = rho0.clone();
    let mut t = 0.0;
    record(&mut out, t, &rho)?;
    for (index, event) in seq.events().iter().enumerate() {
        let wrap = |e: Error| Error::Event {
            index,
            source: Box::new(e),
        };
        match event {
            Event::Evolve { duration, field } => {
                rho = Propagator::for_system(sys, field).map_err(wrap)?.evolve(&rho, *duration);
                t += duration;
                record(&mut out, t, &rho).map_err(wrap)?;
            }
            Event::HardPulse { targets, axis, angle } => {
                rho = rho.conjugate(&rotation_unitary(n, targets, *axis, *angle).map_err(wrap)?);
                record(&mut out, t, &rho).map_err(wrap)?;
            }
            Event::Acquire { dwell, points } => {
                let prop = Propagator::for_system(sys, &FieldSpec::FREE).map_err(wrap)?;
                let first = record(&mut out, t, &rho).map_err(wrap)?;
                let start = rho.clone();
                for m in 1..*points {
                    rho = prop.evolve(&start, m as f64 * dwell);
                    record(&mut out, t + m as f64 * dwell, &rho).map_err(wrap)?;
                }
                t += (*points - 1) as f64 * dwell;
                out.acquisition = Some(first..first + points);
            }
        }
    }
    out.final_rho = rho;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) < tol
    }

    #[test]
    fn realizations() {
        let sz = realize(&ProductOperator::parse(1, "S[1z]").unwrap()).unwrap();
        assert_eq!(sz, CMatrix::from_diagonal(&nalgebra::dvector![c(0.5, 0.0), c(-0.5, 0.0)]));
        let sx = realize(&ProductOperator::parse(1, "S[1x]").unwrap()).unwrap();
        assert_eq!(sx[(0, 1)], c(0.5, 0.0));
        assert_eq!(sx[(1, 0)], c(0.5, 0.0));
        let czz = realize(&ProductOperator::parse(2, "C[1z,2z]").unwrap()).unwrap();
        let d: Vec<f64> = (0..4).map(|i| czz[(i, i)].re).collect();
        assert_eq!(d, [0.25, -0.25, -0.25, 0.25]);
        let s1z = realize(&ProductOperator::parse(2, "S[1z]").unwrap()).unwrap();
        assert_eq!(s1z[(1, 1)], c(0.5, 0.0));
        assert_eq!(s1z[(2, 2)], c(-0.5, 0.0));
    }

    #[test]
    fn frobenius_norm_of_basis() {
        let basis = Basis::new(3).unwrap();
        for (j, op) in basis.ops().iter().enumerate() {
            let m = realize(op).unwrap();
            let f: f64 = m.iter().map(|z| z.norm_sqr()).sum();
            assert!((f - 8.0 / (1u64 << (2 * basis.rank(j))) as f64).abs() < 1e-15);
            assert!(m.trace().norm() < 1e-15);
        }
    }

    #[test]
    fn expectations_of_simple_states() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(expectations(&mixed).unwrap().values().iter().all(|&x| x.abs() < 1e-15));
        let mut psi = vec![c(0.0, 0.0); 4];
        psi[0] = c(1.0, 0.0);
        let up = DensityMatrix::pure(2, &psi).unwrap();
        let v = expectations(&up).unwrap();
        let basis = Basis::new(2).unwrap();
        for (j, op) in basis.ops().iter().enumerate() {
            let want = match op.to_string().as_str() {
                "S[1z]" | "S[2z]" => 0.5,
                "C[1z,2z]" => 0.25,
                _ => 0.0,
            };
            assert!((v.values()[j] - want).abs() < 1e-15, "{op}");
        }
    }

    #[test]
    fn round_trip_and_flag() {
        let v = StateVector::from_values(2, (0..15).map(|j| 0.01 * j as f64 - 0.07).collect()).unwrap();
        let r = state_to_rho(&v).unwrap();
        let back = expectations(&r.rho).unwrap();
        assert!(back.max_abs_diff(&v) < 1e-15);
        assert!(r.is_physical());
        let mut big = vec![0.0; 15];
        big[2] = 5.0;
        let r = state_to_rho(&StateVector::from_values(2, big).unwrap()).unwrap();
        assert!(!r.is_physical());
        let zero = state_to_rho(&StateVector::zeros(2).unwrap()).unwrap();
        assert!(close(zero.rho.matrix(), DensityMatrix::maximally_mixed(2).unwrap().matrix(), 1e-16));
    }

    #[test]
    fn precession_period() {
        let omega = TAU * 37.0;
        let sys = SpinSystem::with_frequencies(vec![omega], vec![vec![0.0]]).unwrap();
        let rho = state_to_rho(&StateVector::from_values(1, vec![0.5, 0.0, 0.0]).unwrap()).unwrap().rho;
        let later = evolve_rho(&rho, &sys, &FieldSpec::FREE, TAU / omega).unwrap();
        assert!(expectations(&later).unwrap().max_abs_diff(&expectations(&rho).unwrap()) < 1e-12);
        let same = evolve_rho(&rho, &sys, &FieldSpec::FREE, 0.0).unwrap();
        assert!(close(same.matrix(), rho.matrix(), 1e-15));
    }

    #[test]
    fn thermal_is_stationary() {
        let sys = SpinSystem::with_frequencies(vec![600.0, -400.0], vec![vec![0.0, 60.0], vec![60.0, 0.0]])
            .unwrap()
            .with_beta(1e-3)
            .unwrap();
        let rho = thermal_rho(&sys).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        let later = evolve_rho(&rho, &sys, &FieldSpec::FREE, 0.123).unwrap();
        assert!(close(later.matrix(), rho.matrix(), 1e-14));
    }

    #[test]
    fn quarter_turn_unitary() {
        let u = rotation_unitary(1, &[1], Axis::X, FRAC_PI_2).unwrap();
        let rho = state_to_rho(&StateVector::from_values(1, vec![0.0, 0.0, 0.3]).unwrap()).unwrap().rho;
        let v = expectations(&rho.conjugate(&u)).unwrap();
        assert!((v.values()[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn ceiling() {
        let op = ProductOperator::parse(11, "S[1x]").unwrap();
        let err = realize(&op).unwrap_err();
        assert!(err.to_string().contains("oracle ceiling exceeded"), "{err}");
    }

    #[test]
    fn validation() {
        assert!(DensityMatrix::new(1, CMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::new(1, CMatrix::identity(2, 2) * c(0.5, 0.0)).is_ok());
        assert!(DensityMatrix::new(1, CMatrix::identity(4, 4) * c(0.25, 0.0)).is_err());
    }
}
