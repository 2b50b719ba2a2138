//! Digitization and the direct frequency-estimation path.
//!
//! This is the processing chain the photonic discriminator replaces: record
//! the microwave pulse at tens of GS/s and estimate its frequency in
//! software. It doubles as an independent check on the displacement →
//! frequency mapping.

#[allow(unused_imports)] // std, when linked, shadows these with inherent methods
use num_traits::Float;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::{ifft, next_pow2, real_spectrum};
use crate::stretch::Waveform;
use crate::{Error, Result};

/// Zero-padding factor applied on top of the next power of two.
const FFT_PADDING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdcSpec {
    /// Hz
    pub sample_rate: f64,
    pub bits: u32,
    /// Input range is `[−full_scale, +full_scale]` (V).
    pub full_scale: f64,
}

impl AdcSpec {
    pub fn validate(&self) -> Result<()> {
        if !(4..=16).contains(&self.bits) {
            return Err(Error::invalid("bits", format!("{} outside [4, 16]", self.bits)));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::invalid("sample_rate", "must be positive and finite"));
        }
        if !(self.full_scale > 0.0) || !self.full_scale.is_finite() {
            return Err(Error::invalid("full_scale", "must be positive and finite"));
        }
        Ok(())
    }

    /// Quantization step `2·full_scale / 2^bits`.
    pub fn lsb(&self) -> f64 {
        2.0 * self.full_scale / (1u64 << self.bits) as f64
    }

    /// Mid-tread quantizer with clipping to the code range.
    pub fn quantize(&self, v: f64) -> f64 {
        let lsb = self.lsb();
        let half = (1i64 << (self.bits - 1)) as f64;
        (v / lsb).round().clamp(-half, half - 1.0) * lsb
    }

    /// Bytes per second produced by one channel.
    pub fn byte_rate(&self) -> f64 {
        self.sample_rate * self.bits as f64 / 8.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EstimateMethod {
    FftPeak,
    ChirpFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyEstimate {
    pub frequency: f64,
    pub confidence_halfwidth: f64,
    pub method: EstimateMethod,
}

/// Resamples `w` to `rate` by linear interpolation (plain decimation when the
/// ratio is an integer).
pub fn resample(w: &Waveform, rate: f64) -> Result<Waveform> {
    if rate >= w.sample_rate() {
        return Ok(w.clone());
    }
    let ratio = w.sample_rate() / rate;
    let n = ((w.len() as f64) / ratio).floor() as usize;
    let src = w.samples();
    let samples: Vec<f64> = if (ratio - ratio.round()).abs() < 1e-9 {
        let step = ratio.round() as usize;
        src.iter().step_by(step).take(n).copied().collect()
    } else {
        (0..n)
            .map(|i| {
                let pos = i as f64 * ratio;
                let j = pos.floor() as usize;
                let frac = pos - j as f64;
                match src.get(j + 1) {
                    Some(next) => src[j] + frac * (next - src[j]),
                    None => src[j],
                }
            })
            .collect()
    };
    Waveform::new(samples, rate, w.t0())
}

/// Adds seeded white Gaussian noise, then quantizes with clipping.
pub fn digitize(w: &Waveform, adc: &AdcSpec, noise_rms: f64, seed: u64) -> Result<Waveform> {
    adc.validate()?;
    if !(noise_rms >= 0.0) {
        return Err(Error::invalid("noise_rms", "must be non-negative"));
    }
    let resampled = resample(w, adc.sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = resampled
        .samples()
        .iter()
        .map(|&v| {
            let n: f64 = if noise_rms > 0.0 {
                noise_rms * Distribution::<f64>::sample(&StandardNormal, &mut rng)
            } else {
                0.0
            };
            adc.quantize(v + n)
        })
        .collect();
    Waveform::new(samples, resampled.sample_rate(), resampled.t0())
}

/// First and last sample indices whose magnitude exceeds `fraction` of the
/// record's peak magnitude.
fn support(samples: &[f64], fraction: f64) -> Option<(usize, usize)> {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return None;
    }
    let thr = fraction * peak;
    let first = samples.iter().position(|v| v.abs() > thr)?;
    let last = samples.iter().rposition(|v| v.abs() > thr)?;
    Some((first, last))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Hann-windowed, zero-padded FFT peak refined by a three-point parabola on
/// log-magnitude. The confidence half-width is one padded bin.
pub fn estimate_frequency_fft(w: &Waveform) -> Result<FrequencyEstimate> {
    if w.len() < 64 {
        return Err(Error::invalid("waveform", "at least 64 samples required"));
    }
    let (first, last) = support(w.samples(), 0.01).ok_or(Error::NoSignal)?;
    let span = last - first;
    let mut windowed = vec![0.0; w.len()];
    for (i, out) in windowed.iter_mut().enumerate().take(last + 1).skip(first) {
        let hann = if span == 0 {
            1.0
        } else {
            0.5 - 0.5 * (2.0 * PI * (i - first) as f64 / span as f64).cos()
        };
        *out = w.samples()[i] * hann;
    }
    let nfft = next_pow2(w.len()) * FFT_PADDING;
    let spectrum = real_spectrum(&windowed, nfft);
    let mags: Vec<f64> = spectrum[..nfft / 2 + 1].iter().map(|c| c.norm()).collect();

    // skip DC and its immediate neighbourhood
    let guard = FFT_PADDING;
    let (kmax, &peak) = mags
        .iter()
        .enumerate()
        .skip(guard)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoSignal)?;
    let floor = median(mags.clone());
    if !(peak > 3.0 * floor) || peak == 0.0 {
        return Err(Error::NoSignal);
    }
    let bin = w.sample_rate() / nfft as f64;
    let delta = if kmax > 0 && kmax + 1 < mags.len() {
        let (a, b, c) = (mags[kmax - 1].ln(), peak.ln(), mags[kmax + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom.abs() > 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(FrequencyEstimate {
        frequency: (kmax as f64 + delta) * bin,
        confidence_halfwidth: bin,
        method: EstimateMethod::FftPeak,
    })
}

/// Analytic signal via the one-sided spectrum of the zero-padded record.
pub fn analytic_signal(samples: &[f64]) -> Vec<Complex64> {
    let n = next_pow2(samples.len()) * 2;
    let mut spec = real_spectrum(samples, n);
    for (k, v) in spec.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            continue;
        } else if k < n / 2 {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&mut spec);
    spec.truncate(samples.len());
    spec
}

/// Weighted least-squares fit of the unwrapped analytic phase to
/// `φ₀ + 2πf·t + πα·t²` over the half-maximum support of the envelope.
/// Returns `f` at the envelope's centre of mass.
pub fn estimate_frequency_chirp(w: &Waveform) -> Result<FrequencyEstimate> {
    if w.len() < 64 {
        return Err(Error::invalid("waveform", "at least 64 samples required"));
    }
    let z = analytic_signal(w.samples());
    let env: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let peak = env.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::NoSignal);
    }
    let first = env.iter().position(|&a| a >= 0.5 * peak).ok_or(Error::NoSignal)?;
    let last = env.iter().rposition(|&a| a >= 0.5 * peak).ok_or(Error::NoSignal)?;
    if last - first < 8 {
        return Err(Error::Estimation("half-maximum support shorter than 8 samples".into()));
    }

    let dt = w.dt();
    let (mut wsum, mut tsum) = (0.0, 0.0);
    for (i, a) in env.iter().enumerate().take(last + 1).skip(first) {
        let wt = a * a;
        wsum += wt;
        tsum += wt * i as f64 * dt;
    }
    let t_center = tsum / wsum;

    // unwrap
    let mut phase = Vec::with_capacity(last - first + 1);
    let mut prev = z[first].arg();
    let mut acc = prev;
    phase.push(acc);
    for c in &z[first + 1..=last] {
        let p = c.arg();
        let mut d = p - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        acc += d;
        phase.push(acc);
        prev = p;
    }

    // normal equations in a scaled time variable; 3x3 is well conditioned
    // once time is centred and normalized
    let half_span = 0.5 * (last - first) as f64 * dt;
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (j, &ph) in phase.iter().enumerate() {
        let i = first + j;
        let u = (i as f64 * dt - t_center) / half_span;
        let wt = env[i] * env[i];
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            atb[r] += wt * basis[r] * ph;
            for c in 0..3 {
                ata[r][c] += wt * basis[r] * basis[c];
            }
        }
    }
    let coef = solve3(ata, atb).ok_or_else(|| Error::Estimation("singular phase fit".into()))?;

    let mut sse = 0.0;
    for (j, &ph) in phase.iter().enumerate() {
        let i = first + j;
        let u = (i as f64 * dt - t_center) / half_span;
        let r = ph - (coef[0] + coef[1] * u + coef[2] * u * u);
        sse += env[i] * env[i] * r * r;
    }
    let rms = (sse / wsum).sqrt();
    if rms > 0.5 {
        return Err(Error::Estimation(format!("phase residual {rms:.3} rad: SNR too low to unwrap")));
    }

    let frequency = coef[1] / half_span / (2.0 * PI);
    // phase-noise-limited spread of the slope
    let n_eff = phase.len() as f64;
    let confidence_halfwidth = rms * (3.0 / n_eff).sqrt() / half_span / (2.0 * PI);
    Ok(FrequencyEstimate {
        frequency,
        confidence_halfwidth,
        method: EstimateMethod::ChirpFit,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Capture data volume of direct digitization against the two-channel
/// low-rate capture.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataRateReport {
    pub baseline_bytes_per_s: f64,
    pub channels_bytes_per_s: f64,
    pub n_channels: u32,
    /// `None` when no channels are captured.
    pub reduction_factor: Option<f64>,
    /// Figure often quoted for direct capture at this rate, which is larger
    /// than the `rate × bits` product above.
    pub quoted_baseline_bytes_per_s: f64,
}

pub const QUOTED_BASELINE_BYTES_PER_S: f64 = 150e9;

pub fn data_rate_report(baseline: &AdcSpec, channels: &AdcSpec, n_channels: u32) -> DataRateReport {
    let baseline_bytes_per_s = baseline.byte_rate();
    let channels_bytes_per_s = channels.byte_rate() * n_channels as f64;
    DataRateReport {
        baseline_bytes_per_s,
        channels_bytes_per_s,
        n_channels,
        reduction_factor: (channels_bytes_per_s > 0.0).then(|| baseline_bytes_per_s / channels_bytes_per_s),
        quoted_baseline_bytes_per_s: QUOTED_BASELINE_BYTES_PER_S,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, n: usize, amp: f64) -> Waveform {
        let s = (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / rate).cos()).collect();
        Waveform::new(s, rate, 0.0).unwrap()
    }

    #[test]
    fn quantizer_bound() {
        let adc = AdcSpec {
            sample_rate: 80e9,
            bits: 16,
            full_scale: 4.0,
        };
        let w = tone(3e9, 80e9, 1000, 1.0);
        let d = digitize(&w, &adc, 0.0, 1).unwrap();
        for (a, b) in w.samples().iter().zip(d.samples()) {
            assert!((a - b).abs() <= adc.full_scale / 65536.0 + 1e-15);
        }
    }

    #[test]
    fn clipping_and_zero_input() {
        let adc = AdcSpec {
            sample_rate: 1e9,
            bits: 8,
            full_scale: 1.0,
        };
        assert_eq!(adc.quantize(5.0), 127.0 * adc.lsb());
        assert_eq!(adc.quantize(-5.0), -1.0);
        let z = Waveform::new(vec![0.0; 100], 1e9, 0.0).unwrap();
        let d = digitize(&z, &adc, 0.0, 3).unwrap();
        assert!(d.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let adc = AdcSpec {
            sample_rate: 80e9,
            bits: 8,
            full_scale: 1.0,
        };
        let w = tone(3e9, 80e9, 512, 0.5);
        let a = digitize(&w, &adc, 0.05, 42).unwrap();
        let b = digitize(&w, &adc, 0.05, 42).unwrap();
        let c = digitize(&w, &adc, 0.05, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn decimation_to_lower_rate() {
        let w = tone(1e9, 80e9, 1600, 1.0);
        let r = resample(&w, 20e9).unwrap();
        assert_eq!(r.len(), 400);
        assert_eq!(r.samples()[1], w.samples()[4]);
        let r = resample(&w, 30e9).unwrap();
        assert_eq!(r.len(), 600);
    }

    #[test]
    fn adc_bits_range() {
        let mut adc = AdcSpec {
            sample_rate: 1e9,
            bits: 3,
            full_scale: 1.0,
        };
        assert!(adc.validate().is_err());
        adc.bits = 17;
        assert!(adc.validate().is_err());
        adc.bits = 12;
        assert!(adc.validate().is_ok());
    }

    #[test]
    fn fft_estimate_of_pure_tone() {
        let w = tone(5e9, 80e9, 1600, 1.0);
        let e = estimate_frequency_fft(&w).unwrap();
        assert!((e.frequency - 5e9).abs() < 10e6, "{}", e.frequency);
        assert!((e.confidence_halfwidth - 80e9 / 16384.0).abs() < 1e-6);
        assert_eq!(e.method, EstimateMethod::FftPeak);
    }

    #[test]
    fn fft_estimate_rejects_silence() {
        let z = Waveform::new(vec![0.0; 1600], 80e9, 0.0).unwrap();
        assert_eq!(estimate_frequency_fft(&z), Err(Error::NoSignal));
        let short = Waveform::new(vec![1.0; 32], 80e9, 0.0).unwrap();
        assert!(estimate_frequency_fft(&short).is_err());
    }

    #[test]
    fn chirp_fit_agrees_on_tones() {
        let w = tone(6.2e9, 80e9, 1600, 1.0);
        let a = estimate_frequency_fft(&w).unwrap();
        let b = estimate_frequency_chirp(&w).unwrap();
        assert!((a.frequency - b.frequency).abs() <= a.confidence_halfwidth + b.confidence_halfwidth + 1e6);
    }

    #[test]
    fn chirp_fit_rejects_noise() {
        let adc = AdcSpec {
            sample_rate: 80e9,
            bits: 12,
            full_scale: 1.0,
        };
        let z = Waveform::new(vec![0.0; 1600], 80e9, 0.0).unwrap();
        let noise = digitize(&z, &adc, 0.2, 9).unwrap();
        assert!(estimate_frequency_chirp(&noise).is_err());
    }

    #[test]
    fn data_rates() {
        let base = AdcSpec {
            sample_rate: 80e9,
            bits: 8,
            full_scale: 1.0,
        };
        let ch = AdcSpec {
            sample_rate: 1.25e9,
            bits: 12,
            full_scale: 1.0,
        };
        let r = data_rate_report(&base, &ch, 2);
        assert_eq!(r.baseline_bytes_per_s, 80e9);
        assert_eq!(r.channels_bytes_per_s, 3.75e9);
        assert!((r.reduction_factor.unwrap() - 80.0 / 3.75).abs() < 1e-12);
        let r0 = data_rate_report(&base, &ch, 0);
        assert_eq!(r0.channels_bytes_per_s, 0.0);
        assert_eq!(r0.reduction_factor, None);
    }
}
