//! Action of `exp(tA)` on a vector for generators whose spectrum lies on the
//! imaginary axis.
//!
//! With `ρ` bounding the spectral radius and `X = A/ρ`, the Jacobi–Anger
//! expansion gives `exp(τX) v = J_0(τ) v + 2 Σ_k J_k(τ) Q_k v`, where
//! `Q_0 = I`, `Q_1 = X`, `Q_{k+1} = 2 X Q_k + Q_{k-1}`. The recurrence is real
//! and every `Q_k` has eigenvalues of modulus at most one, so the series is a
//! stable polynomial filter whose truncation error is the Bessel tail.
//!
//! The `Q_k v` are shared by every time point, so a run of uniformly spaced
//! samples costs roughly as many matrix-vector products as a single step
//! spanning the whole window.

use super::Generator;

/// Largest `ρ t` handled by one polynomial; longer spans are split.
const MAX_TAU: f64 = 400.0;

/// Coefficients below this are dropped from the tail.
const TAIL_TOLERANCE: f64 = 1e-18;

/// `J_0(τ), J_1(τ), …` up to the point where the sequence has decayed below
/// [`TAIL_TOLERANCE`] for good (at least `min_len` terms).
pub(crate) fn bessel_sequence(tau: f64, min_len: usize) -> Vec<f64> {
    if tau == 0.0 {
        let mut j = vec![0.0; min_len.max(1)];
        j[0] = 1.0;
        return j;
    }
    let needed = (tau + 20.0 * tau.cbrt() + 40.0).ceil() as usize;
    let top = needed.max(min_len);
    // Miller's backward recurrence from well above the last wanted order.
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-280;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / tau * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in &mut vals[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 Σ J_2k = 1
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(top + 1);
    for v in &mut vals {
        *v /= norm;
    }
    let last = vals
        .iter()
        .rposition(|v| v.abs() > TAIL_TOLERANCE)
        .unwrap_or(0);
    vals.truncate((last + 1).max(min_len));
    vals
}

pub(crate) struct Chebyshev<'a> {
    generator: &'a Generator,
}

impl<'a> Chebyshev<'a> {
    pub fn new(generator: &'a Generator) -> Self {
        Chebyshev { generator }
    }

    /// `exp(tA) v`.
    pub fn apply(&self, v: &[f64], t: f64) -> Vec<f64> {
        let rho = self.generator.spectral_bound();
        if t == 0.0 || rho == 0.0 {
            return v.to_vec();
        }
        let pieces = ((rho * t) / MAX_TAU).ceil().max(1.0) as usize;
        let dt = t / pieces as f64;
        let mut out = v.to_vec();
        for _ in 0..pieces {
            out = self.window(&out, dt, 1, None).1;
        }
        out
    }

    /// Evaluates `exp(m·dt·A) v` for `m = 1..=count`. For each `m` the values
    /// of `observe` (or the full vector when `None`) are passed to `sink`;
    /// the full state at `count·dt` is returned.
    pub fn sample(
        &self,
        v: &[f64],
        dt: f64,
        count: usize,
        observe: Option<&[usize]>,
        mut sink: impl FnMut(usize, Vec<f64>),
    ) -> Vec<f64> {
        let rho = self.generator.spectral_bound();
        let per_window = if rho == 0.0 {
            count.max(1)
        } else {
            ((MAX_TAU / (rho * dt)).floor() as usize).max(1)
        };
        let mut state = v.to_vec();
        let mut done = 0;
        while done < count {
            let m = per_window.min(count - done);
            let (samples, last) = self.window(&state, dt, m, observe);
            for (i, s) in samples.into_iter().enumerate() {
                sink(done + i + 1, s);
            }
            state = last;
            done += m;
        }
        state
    }

    /// One polynomial window: projections at `dt, 2dt, …, (m-1)dt` and the
    /// full vector at `m·dt` (its projection is also included in the list).
    fn window(
        &self,
        v: &[f64],
        dt: f64,
        m: usize,
        observe: Option<&[usize]>,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let a = self.generator.matrix();
        let rho = self.generator.spectral_bound();
        let dim = v.len();
        if rho == 0.0 {
            let proj = project(v, observe);
            return (vec![proj; m], v.to_vec());
        }
        let coeffs: Vec<Vec<f64>> = {
            let longest = bessel_sequence(rho * dt * m as f64, 1);
            (1..=m)
                .map(|i| bessel_sequence(rho * dt * i as f64, longest.len()))
                .collect()
        };
        let order = coeffs.iter().map(Vec::len).max().unwrap_or(1);

        let proj_len = observe.map_or(dim, <[usize]>::len);
        let mut proj: Vec<Vec<f64>> = vec![vec![0.0; proj_len]; m.saturating_sub(1)];
        let mut full = vec![0.0; dim];
        let accumulate = |k: usize, q: &[f64], proj: &mut Vec<Vec<f64>>, full: &mut [f64]| {
            let weight = if k == 0 { 1.0 } else { 2.0 };
            for (i, target) in proj.iter_mut().enumerate() {
                let c = weight * coeffs[i].get(k).copied().unwrap_or(0.0);
                if c == 0.0 {
                    continue;
                }
                match observe {
                    Some(idx) => target.iter_mut().zip(idx).for_each(|(t, &j)| *t += c * q[j]),
                    None => target.iter_mut().zip(q).for_each(|(t, &x)| *t += c * x),
                }
            }
            let c = weight * coeffs[m - 1].get(k).copied().unwrap_or(0.0);
            if c != 0.0 {
                full.iter_mut().zip(q).for_each(|(t, &x)| *t += c * x);
            }
        };

        let inv = 1.0 / rho;
        let mut prev = v.to_vec();
        accumulate(0, &prev, &mut proj, &mut full);
        if order > 1 {
            let mut cur = vec![0.0; dim];
            a.matvec(&prev, &mut cur);
            cur.iter_mut().for_each(|x| *x *= inv);
            accumulate(1, &cur, &mut proj, &mut full);
            let mut next = vec![0.0; dim];
            for k in 2..order {
                a.matvec(&cur, &mut next);
                for (nx, &p) in next.iter_mut().zip(&prev) {
                    *nx = 2.0 * inv * *nx + p;
                }
                accumulate(k, &next, &mut proj, &mut full);
                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        proj.push(project(&full, observe));
        (proj, full)
    }
}

fn project(v: &[f64], observe: Option<&[usize]>) -> Vec<f64> {
    match observe {
        Some(idx) => idx.iter().map(|&j| v[j]).collect(),
        None => v.to_vec(),
    }
}
