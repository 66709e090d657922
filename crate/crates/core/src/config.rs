//! JSON run configuration.
//!
//! ```json
//! {
//!   "nuclei": [{"offset_hz": 100.0, "gamma": 1.0}],
//!   "j_hz": [[0.0]],
//!   "molecules": 1e20,
//!   "beta": 1e-4,
//!   "sequence": [
//!     {"pulse": {"targets": [1], "axis": "y", "angle_rad": 1.5707963267948966}},
//!     {"acquire": {"dwell_s": 0.002, "points": 2048}}
//!   ]
//! }
//! ```
//!
//! Offsets and couplings are in Hz and converted with `ω = 2πf`. The coupling
//! enters the Hamiltonian as `-J S^p·S^q`, so its sign is opposite to the
//! common `+2πJ` textbook convention. `beta` is an inverse energy with
//! energies in rad/s, i.e. it is measured in seconds. Unknown keys are
//! rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::algebra::{Axis, Basis};
use crate::dynamics::{Method, Recording, RkTolerance, StateVector};
use crate::error::{Error, Result};
use crate::signal::SpectrumOptions;
use crate::system::{hz_to_rad, validate_sequence, Event, FieldMode, FieldSpec, PulseSequence, SpinSystem, ValidatedSequence};
use crate::thermal::ThermalMode;

/// Systems up to this size record every component by default; larger ones
/// record only the rank-1 spin components.
pub const FULL_RECORDING_MAX_NUCLEI: usize = 5;

fn one() -> f64 {
    1.0
}

fn default_threshold() -> f64 {
    0.01
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    nuclei: Vec<RawNucleus>,
    j_hz: Vec<Vec<f64>>,
    #[serde(default = "one")]
    molecules: f64,
    beta: f64,
    #[serde(default)]
    sequence: Vec<RawEvent>,
    integrator: Option<RawIntegrator>,
    thermal: Option<RawThermal>,
    initial_state: Option<BTreeMap<String, f64>>,
    processing: Option<RawProcessing>,
    receiver_weights: Option<Vec<f64>>,
    record: Option<RawRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNucleus {
    offset_hz: f64,
    #[serde(default = "one")]
    gamma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawEvent {
    Evolve(RawEvolve),
    Pulse(RawPulse),
    Acquire(RawAcquire),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolve {
    duration_s: f64,
    field: Option<RawField>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    mode: RawFieldMode,
    b_tesla: Option<[f64; 3]>,
    transverse_tesla: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawFieldMode {
    LongitudinalOmega,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    targets: Vec<usize>,
    axis: RawAxis,
    angle_rad: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawAxis {
    X,
    Y,
    Z,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAcquire {
    dwell_s: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: RawMethod,
    rtol: Option<f64>,
    atol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawMethod {
    ExactExponential,
    AdaptiveRk,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawThermal {
    Exact,
    HighTemperature,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcessing {
    #[serde(default)]
    line_broadening_hz: f64,
    zero_fill: Option<usize>,
    #[serde(default = "default_threshold")]
    peak_threshold: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawRecord {
    All,
    Spins,
}

/// Validated, unit-converted run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SpinSystem,
    pub sequence: ValidatedSequence,
    pub method: Method,
    pub thermal: ThermalMode,
    /// Replaces the thermal state when present.
    pub initial_state: Option<StateVector>,
    pub processing: SpectrumOptions,
    pub receiver_weights: Option<Vec<f64>>,
    pub recording: Recording,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RawConfig {
    fn resolve(self) -> Result<RunConfig> {
        let n = self.nuclei.len();
        let omega = self.nuclei.iter().map(|nu| hz_to_rad(nu.offset_hz)).collect();
        let gamma = self.nuclei.iter().map(|nu| nu.gamma).collect();
        if self.j_hz.len() != n || self.j_hz.iter().any(|row| row.len() != n) {
            return Err(cfg_err(format!("j_hz must be a {n}x{n} matrix")));
        }
        let coupling = self
            .j_hz
            .iter()
            .map(|row| row.iter().map(|&j| hz_to_rad(j)).collect())
            .collect();
        let system = SpinSystem::new(omega, gamma, coupling, self.molecules, self.beta)?;

        let events = self
            .sequence
            .into_iter()
            .map(RawEvent::resolve)
            .collect::<Result<Vec<_>>>()?;
        let sequence = validate_sequence(&PulseSequence::new(events), &system)?;

        let method = match self.integrator {
            None => Method::ExactExponential,
            Some(RawIntegrator {
                method: RawMethod::ExactExponential,
                rtol,
                atol,
            }) => {
                if rtol.is_some() || atol.is_some() {
                    return Err(cfg_err("rtol/atol apply only to adaptive_rk"));
                }
                Method::ExactExponential
            }
            Some(RawIntegrator {
                method: RawMethod::AdaptiveRk,
                rtol,
                atol,
            }) => {
                let d = RkTolerance::default();
                let tol = RkTolerance {
                    rtol: rtol.unwrap_or(d.rtol),
                    atol: atol.unwrap_or(d.atol),
                };
                if !(tol.rtol > 0.0 && tol.atol >= 0.0 && tol.rtol.is_finite() && tol.atol.is_finite()) {
                    return Err(cfg_err("rtol must be > 0 and atol >= 0"));
                }
                Method::AdaptiveRk(tol)
            }
        };

        let thermal = match self.thermal {
            None | Some(RawThermal::Exact) => ThermalMode::Exact,
            Some(RawThermal::HighTemperature) => ThermalMode::HighTemperatureFirstOrder,
        };

        let initial_state = match self.initial_state {
            None => None,
            Some(map) => {
                let basis = Basis::new(n)?;
                let mut v = vec![0.0; basis.len()];
                for (name, value) in map {
                    let j = basis
                        .parse_op(&name)
                        .map_err(|e| cfg_err(format!("initial_state key {name:?}: {e}")))?;
                    v[j.get()] = value;
                }
                Some(StateVector::from_values(n, v)?)
            }
        };

        let processing = match self.processing {
            None => SpectrumOptions::default(),
            Some(p) => SpectrumOptions {
                line_broadening_hz: p.line_broadening_hz,
                zero_fill: p.zero_fill,
                peak_threshold: p.peak_threshold,
            },
        };

        if let Some(w) = &self.receiver_weights {
            if w.len() != n || w.iter().any(|x| !x.is_finite()) {
                return Err(cfg_err(format!("receiver_weights must hold {n} finite values")));
            }
        }

        let recording = match self.record {
            Some(RawRecord::All) => Recording::All,
            Some(RawRecord::Spins) => Recording::spins(n),
            None if n <= FULL_RECORDING_MAX_NUCLEI => Recording::All,
            None => Recording::spins(n),
        };

        Ok(RunConfig {
            system,
            sequence,
            method,
            thermal,
            initial_state,
            processing,
            receiver_weights: self.receiver_weights,
            recording,
        })
    }
}

impl RawEvent {
    fn resolve(self) -> Result<Event> {
        Ok(match self {
            RawEvent::Evolve(e) => Event::Evolve {
                duration: e.duration_s,
                field: match e.field {
                    None => FieldSpec::FREE,
                    Some(f) => f.resolve()?,
                },
            },
            RawEvent::Pulse(p) => Event::HardPulse {
                targets: p.targets,
                axis: match p.axis {
                    RawAxis::X => Axis::X,
                    RawAxis::Y => Axis::Y,
                    RawAxis::Z => Axis::Z,
                },
                angle: p.angle_rad,
            },
            RawEvent::Acquire(a) => Event::Acquire {
                dwell: a.dwell_s,
                points: a.points,
            },
        })
    }
}

impl RawField {
    fn resolve(self) -> Result<FieldSpec> {
        let mode = match (self.mode, self.b_tesla) {
            (RawFieldMode::LongitudinalOmega, None) => FieldMode::LongitudinalOmega,
            (RawFieldMode::LongitudinalOmega, Some(_)) => {
                return Err(cfg_err("b_tesla is only allowed with mode \"explicit\""))
            }
            (RawFieldMode::Explicit, Some(b)) => FieldMode::Explicit(b),
            (RawFieldMode::Explicit, None) => return Err(cfg_err("mode \"explicit\" requires b_tesla")),
        };
        Ok(FieldSpec {
            mode,
            transverse: self.transverse_tesla,
        })
    }
}
