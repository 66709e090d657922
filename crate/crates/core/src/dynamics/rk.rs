//! Dormand–Prince 5(4) with PI step-size control, used as an independent
//! cross-check of the exponential propagator. The system is autonomous, so
//! the stage nodes `c_i` never appear.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkTolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for RkTolerance {
    fn default() -> Self {
        RkTolerance {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Integrates `dv/dt = A v` from 0 to `t`.
pub(crate) fn integrate(a: &SparseMatrix, v: &[f64], t: f64, tol: RkTolerance, bound: f64) -> Result<Vec<f64>> {
    let dim = v.len();
    let mut y = v.to_vec();
    if t == 0.0 {
        return Ok(y);
    }
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut time = 0.0;
    let mut h = if bound > 0.0 { (0.1 / bound).min(t) } else { t };
    let mut err_prev: f64 = 1e-4;
    a.matvec(&y, &mut k[0]);
    let mut steps = 0usize;

    let combine = |out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]| {
        for i in 0..out.len() {
            let mut s = 0.0;
            for (c, kv) in terms {
                s += c * kv[i];
            }
            out[i] = y[i] + h * s;
        }
    };

    while time < t {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::NonFinite {
                context: format!("(step limit reached at t = {time})"),
            });
        }
        if time + h > t {
            h = t - time;
        }
        combine(&mut tmp, &y, h, &[(A21, &k[0])]);
        a.matvec(&tmp, &mut k[1]);
        combine(&mut tmp, &y, h, &[(A31, &k[0]), (A32, &k[1])]);
        a.matvec(&tmp, &mut k[2]);
        combine(&mut tmp, &y, h, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
        a.matvec(&tmp, &mut k[3]);
        combine(&mut tmp, &y, h, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
        a.matvec(&tmp, &mut k[4]);
        combine(
            &mut tmp,
            &y,
            h,
            &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
        );
        a.matvec(&tmp, &mut k[5]);
        combine(
            &mut y_new,
            &y,
            h,
            &[(A71, &k[0]), (A73, &k[2]), (A74, &k[3]), (A75, &k[4]), (A76, &k[5])],
        );
        a.matvec(&y_new, &mut k[6]);

        let mut err = 0.0;
        for i in 0..dim {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale).powi(2);
        }
        let err = (err / dim as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("in Runge-Kutta step {steps} at t = {time}"),
            });
        }
        if err <= 1.0 {
            time += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = err.max(1e-4);
            h *= fac;
        } else {
            h *= (SAFETY * err.powf(-ALPHA)).max(FAC_MIN);
        }
    }
    Ok(y)
}
