//! Free induction decays and spectra.
//!
//! The receiver detects `Σ_p w_p (⟨S_x^p⟩ - i⟨S_y^p⟩)`. With `H = -ω S_z` the
//! transverse moment precesses as `⟨S_x⟩ - i⟨S_y⟩ ∝ e^{iωt}`, so a positive
//! offset shows up at a positive frequency under the forward transform
//! `X_m = Σ_k x_k e^{-2πi km/N}`.

use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::algebra::Axis;
use crate::dynamics::{spin_index, Trajectory};
use crate::error::{Error, Result};
use crate::system::SpinSystem;

/// Relative tolerance on dwell-time uniformity.
const GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Fid {
    pub dwell: f64,
    /// Scaled samples, `scale` already applied.
    pub samples: Vec<Complex64>,
    pub scale: f64,
}

impl Fid {
    pub fn new(dwell: f64, samples: Vec<Complex64>, scale: f64) -> Result<Self> {
        if !(dwell > 0.0 && dwell.is_finite()) {
            return Err(Error::invalid(format!("dwell must be positive, got {dwell}")));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("a FID needs at least two samples"));
        }
        Ok(Fid { dwell, samples, scale })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(|k| k as f64 * self.dwell)
    }

    /// CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,re,im")?;
        for (t, s) in self.times().zip(&self.samples) {
            crate::csv::write_row(w, [t, s.re, s.im])?;
        }
        Ok(())
    }
}

/// Forms the FID from the acquisition window of a trajectory (or the whole
/// trajectory when it has none). `weights` default to each nucleus' `gamma`;
/// the molecule count scales the result.
pub fn acquire_fid(traj: &Trajectory, sys: &SpinSystem, weights: Option<&[f64]>) -> Result<Fid> {
    let n = sys.n();
    if traj.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: traj.n(),
        });
    }
    let weights = weights.unwrap_or(sys.gamma());
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    let range = traj.acquisition().unwrap_or(0..traj.len());
    if range.len() < 2 {
        return Err(Error::invalid("acquisition needs at least two snapshots"));
    }
    let times = &traj.times()[range.clone()];
    let dwell = times[1] - times[0];
    for (k, pair) in times.windows(2).enumerate() {
        if ((pair[1] - pair[0]) - dwell).abs() > GRID_TOLERANCE * dwell {
            return Err(Error::NonUniformGrid { index: k + 1 });
        }
    }
    let scale = sys.molecules();
    let mut samples = vec![Complex64::new(0.0, 0.0); range.len()];
    for (p, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let sx = spin_index(p + 1, Axis::X);
        let sy = spin_index(p + 1, Axis::Y);
        let x = traj
            .series(sx, range.clone())
            .ok_or_else(|| Error::NotRecorded(format!("S[{}x]", p + 1)))?;
        let y = traj
            .series(sy, range.clone())
            .ok_or_else(|| Error::NotRecorded(format!("S[{}y]", p + 1)))?;
        for (s, (x, y)) in samples.iter_mut().zip(x.into_iter().zip(y)) {
            *s += Complex64::new(x, -y) * (w * scale);
        }
    }
    Fid::new(dwell, samples, scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Exponential line broadening `e^{-π lb t}`, Hz.
    pub line_broadening_hz: f64,
    /// Transform length; a power of two at least the FID length. `None`
    /// rounds the FID length up.
    pub zero_fill: Option<usize>,
    /// Peaks must exceed this fraction of the largest magnitude.
    pub peak_threshold: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            line_broadening_hz: 0.0,
            zero_fill: None,
            peak_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub freq_hz: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending, `f_m = (m - N/2) / (N dwell)`.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub peaks: Vec<Peak>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Bin spacing in Hz.
    pub fn resolution(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm()).collect()
    }

    /// CSV with header `freq_hz,re,im,mag`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "freq_hz,re,im,mag")?;
        for (f, a) in self.frequencies.iter().zip(&self.amplitudes) {
            crate::csv::write_row(w, [*f, a.re, a.im, a.norm()])?;
        }
        Ok(())
    }

    /// JSON array `[{"freq_hz":..,"magnitude":..}]`.
    pub fn write_peaks_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &self.peaks)?;
        w.write_all(b"\n")
    }
}

/// Apodized, zero-filled time-domain data fed to the transform.
pub fn prepared_samples(fid: &Fid, opts: &SpectrumOptions) -> Result<Vec<Complex64>> {
    let lb = opts.line_broadening_hz;
    if !(lb >= 0.0 && lb.is_finite()) {
        return Err(Error::invalid(format!("line broadening must be >= 0, got {lb}")));
    }
    let len = match opts.zero_fill {
        Some(z) => {
            if z < fid.len() || !z.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "zero fill must be a power of two >= {} samples, got {z}",
                    fid.len()
                )));
            }
            z
        }
        None => fid.len().next_power_of_two(),
    };
    let mut data: Vec<Complex64> = fid
        .samples
        .iter()
        .zip(fid.times())
        .map(|(s, t)| s * (-std::f64::consts::PI * lb * t).exp())
        .collect();
    data.resize(len, Complex64::new(0.0, 0.0));
    Ok(data)
}

/// Forward DFT of the apodized, zero-filled FID with the zero frequency
/// moved to the middle, plus picked peaks.
pub fn spectrum(fid: &Fid, opts: &SpectrumOptions) -> Result<Spectrum> {
    if !(0.0..=1.0).contains(&opts.peak_threshold) {
        return Err(Error::invalid("peak threshold must lie in [0, 1]"));
    }
    let mut data = prepared_samples(fid, opts)?;
    let len = data.len();
    FftPlanner::new().plan_fft_forward(len).process(&mut data);
    data.rotate_right(len / 2);
    let frequencies: Vec<f64> = (0..len)
        .map(|m| (m as f64 - (len / 2) as f64) / (len as f64 * fid.dwell))
        .collect();
    let peaks = pick_peaks(&frequencies, &data, opts.peak_threshold);
    Ok(Spectrum {
        frequencies,
        amplitudes: data,
        peaks,
    })
}

/// Local maxima of the magnitude above `threshold` times the maximum, with
/// the frequency axis treated as circular.
fn pick_peaks(freq: &[f64], amp: &[Complex64], threshold: f64) -> Vec<Peak> {
    let mag: Vec<f64> = amp.iter().map(|a| a.norm()).collect();
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    let floor = threshold * max;
    let len = mag.len();
    (0..len)
        .filter(|&i| {
            // The DFT is periodic, so the edge bins are neighbours.
            let left = mag[(i + len - 1) % len];
            let right = mag[(i + 1) % len];
            mag[i] > floor && mag[i] > left && mag[i] >= right
        })
        .map(|i| Peak {
            freq_hz: freq[i],
            magnitude: mag[i],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPair {
    pub a: Peak,
    pub b: Peak,
    /// `b.freq_hz - a.freq_hz`.
    pub freq_delta: f64,
    /// `|b.magnitude - a.magnitude| / max(a.magnitude, b.magnitude)`.
    pub rel_magnitude_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub pairs: Vec<PeakPair>,
    pub unmatched_a: Vec<Peak>,
    pub unmatched_b: Vec<Peak>,
    /// `max_m |A_m - B_m| / max_m |A_m|` over the whole grid.
    pub max_amplitude_deviation: f64,
}

impl SpectrumComparison {
    pub fn all_matched(&self) -> bool {
        self.unmatched_a.is_empty() && self.unmatched_b.is_empty()
    }

    pub fn max_rel_magnitude_delta(&self) -> f64 {
        self.pairs.iter().map(|p| p.rel_magnitude_delta).fold(0.0, f64::max)
    }

    pub fn max_abs_freq_delta(&self) -> f64 {
        self.pairs.iter().map(|p| p.freq_delta.abs()).fold(0.0, f64::max)
    }
}

/// Greedy nearest-frequency peak pairing of two spectra on the same grid.
pub fn compare_spectra(a: &Spectrum, b: &Spectrum) -> Result<SpectrumComparison> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::GridMismatch);
    }
    let tol = 1e-9 * a.resolution().abs();
    if a.frequencies.iter().zip(&b.frequencies).any(|(x, y)| (x - y).abs() > tol) {
        return Err(Error::GridMismatch);
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, pa) in a.peaks.iter().enumerate() {
        for (j, pb) in b.peaks.iter().enumerate() {
            candidates.push(((pa.freq_hz - pb.freq_hz).abs(), i, j));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.peaks.len()];
    let mut used_b = vec![false; b.peaks.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        let (pa, pb) = (a.peaks[i], b.peaks[j]);
        let top = pa.magnitude.max(pb.magnitude);
        pairs.push(PeakPair {
            a: pa,
            b: pb,
            freq_delta: pb.freq_hz - pa.freq_hz,
            rel_magnitude_delta: if top == 0.0 { 0.0 } else { (pb.magnitude - pa.magnitude).abs() / top },
        });
    }
    pairs.sort_by(|x, y| x.a.freq_hz.total_cmp(&y.a.freq_hz));
    let unmatched = |peaks: &[Peak], used: &[bool]| -> Vec<Peak> {
        peaks.iter().zip(used).filter(|(_, &u)| !u).map(|(p, _)| *p).collect()
    };
    let top = a.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(SpectrumComparison {
        unmatched_a: unmatched(&a.peaks, &used_a),
        unmatched_b: unmatched(&b.peaks, &used_b),
        pairs,
        max_amplitude_deviation: if top == 0.0 { diff } else { diff / top },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn tone(freq: f64, dwell: f64, points: usize) -> Fid {
        let s = (0..points)
            .map(|k| Complex64::from_polar(1.0, TAU * freq * k as f64 * dwell))
            .collect();
        Fid::new(dwell, s, 1.0).unwrap()
    }

    #[test]
    fn zero_fid_has_no_peaks() {
        let fid = Fid::new(1e-3, vec![Complex64::new(0.0, 0.0); 16], 1.0).unwrap();
        let s = spectrum(&fid, &SpectrumOptions::default()).unwrap();
        assert!(s.peaks.is_empty());
        assert!(s.amplitudes.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn tone_lands_in_its_bin() {
        for &f in &[100.0, -37.3, 212.9] {
            let fid = tone(f, 1e-3, 500);
            let s = spectrum(&fid, &SpectrumOptions::default()).unwrap();
            assert_eq!(s.len(), 512);
            let top = s.peaks.iter().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude)).unwrap();
            assert!((top.freq_hz - f).abs() <= s.resolution(), "{f}: {}", top.freq_hz);
        }
    }

    #[test]
    fn no_spurious_edge_peak() {
        // Damped tone whose alias tail rises towards the lower edge.
        let dwell = 2e-3;
        let s = (0..2048)
            .map(|k| {
                let t = k as f64 * dwell;
                Complex64::from_polar((-std::f64::consts::PI * 3.0 * t).exp(), TAU * 100.0 * t)
            })
            .collect();
        let spec = spectrum(&Fid::new(dwell, s, 1.0).unwrap(), &SpectrumOptions::default()).unwrap();
        assert_eq!(spec.peaks.len(), 1, "{:?}", spec.peaks);
    }

    #[test]
    fn grid_and_parseval() {
        let fid = tone(40.0, 2e-3, 100);
        let opts = SpectrumOptions {
            line_broadening_hz: 3.0,
            zero_fill: Some(256),
            peak_threshold: 0.01,
        };
        let s = spectrum(&fid, &opts).unwrap();
        assert!((s.resolution() - 1.0 / (256.0 * 2e-3)).abs() < 1e-12);
        assert_eq!(s.frequencies[128], 0.0);
        let time: f64 = prepared_samples(&fid, &opts).unwrap().iter().map(|z| z.norm_sqr()).sum();
        let freq: f64 = s.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() / 256.0;
        assert!((time - freq).abs() / time < 1e-12);
    }

    #[test]
    fn zero_fill_checks() {
        let fid = tone(1.0, 1e-3, 100);
        for z in [64, 100, 200] {
            let opts = SpectrumOptions {
                zero_fill: Some(z),
                ..Default::default()
            };
            assert!(spectrum(&fid, &opts).is_err());
        }
        assert!(Fid::new(0.0, vec![Complex64::new(0.0, 0.0); 4], 1.0).is_err());
        assert!(Fid::new(1.0, vec![Complex64::new(0.0, 0.0); 1], 1.0).is_err());
    }

    #[test]
    fn comparison() {
        let opts = SpectrumOptions::default();
        let a = spectrum(&tone(100.0, 1e-3, 256), &opts).unwrap();
        let same = compare_spectra(&a, &a).unwrap();
        assert!(same.all_matched());
        assert_eq!(same.max_rel_magnitude_delta(), 0.0);
        assert_eq!(same.max_amplitude_deviation, 0.0);

        let mut shifted = a.clone();
        shifted.amplitudes.rotate_right(1);
        shifted.peaks = pick_peaks(&shifted.frequencies, &shifted.amplitudes, 0.01);
        let cmp = compare_spectra(&a, &shifted).unwrap();
        assert!(cmp.all_matched());
        assert!((cmp.max_abs_freq_delta() - a.resolution()).abs() < 1e-9);

        let other = spectrum(&tone(100.0, 1e-3, 100), &opts).unwrap();
        assert_eq!(compare_spectra(&a, &other), Err(Error::GridMismatch));
    }
}
