//! Checks against independently computed reference values.

use std::f64::consts::{LN_2, PI};

use stretch_ranger_core::dsp::{self, AdcSpec};
use stretch_ranger_core::mwphotonics::{
    design_symmetric_ramp, modulate_exact, modulate_small_signal, ramp_edges, EffectiveFilter, ModulationParams,
};
use stretch_ranger_core::special::bessel_j;
use stretch_ranger_core::stretch::{self, Envelope, Waveform};
use stretch_ranger_core::sysmodel::SystemConfig;
use stretch_ranger_core::SPEED_OF_LIGHT;

/// Bessel's integral `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ`, Simpson.
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut acc = f(0.0) + f(PI);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0 / PI
}

#[test]
fn bessel_series_matches_integral() {
    for n in 0..8 {
        for i in 0..=40 {
            let x = i as f64 * 0.25;
            let (s, q) = (bessel_j(n, x), bessel_integral(n, x));
            assert!((s - q).abs() < 1e-12, "J_{n}({x}): {s} vs {q}");
        }
    }
}

#[test]
fn sideband_amplitudes_follow_bessel_integral() {
    let p0 = 0.02;
    for &beta in &[0.05, 0.2, 0.28, 1.0, 2.5] {
        let s = modulate_exact(5e9, &ModulationParams::with_depth(beta, 5.0), p0);
        for k in 0..4u32 {
            let order = 2 * k as i32 + 1;
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } * p0.sqrt() * bessel_integral(2 * k + 1, beta);
            for o in [order, -order] {
                if let Some(line) = s.line(o) {
                    assert!((line.amplitude - expected).abs() < 1e-12 * p0.sqrt(), "β={beta} order {o}");
                    assert!((line.offset.abs() - order as f64 * 5e9).abs() < 1e-3);
                }
            }
        }
        // even orders cancel at the null bias
        assert!(s.line(0).is_none() && s.line(2).is_none());
    }
}

#[test]
fn sideband_power_obeys_parseval() {
    let p0 = 0.03;
    for &beta in &[0.1, 0.2, 0.5, 1.5] {
        let s = modulate_exact(3e9, &ModulationParams::with_depth(beta, 5.0), p0);
        // Σ_k 2·J²_{2k+1}(β) = (1 − J₀(2β))/2
        let expected = p0 * (1.0 - bessel_integral(0, 2.0 * beta)) / 2.0;
        assert!((s.sideband_power() - expected).abs() < 1e-12 * p0, "β={beta}");
    }
}

#[test]
fn small_signal_first_order_within_one_percent() {
    for i in 1..=28 {
        let beta = i as f64 * 0.01;
        let p = ModulationParams::with_depth(beta, 5.0);
        let approx = modulate_small_signal(4e9, &p, 1.0).unwrap();
        let exact = bessel_integral(1, beta);
        let a = approx.line(1).unwrap().amplitude;
        assert!(((a - exact) / exact).abs() <= 0.01, "β={beta}");
    }
    assert!(modulate_small_signal(4e9, &ModulationParams::with_depth(0.4, 5.0), 1.0).is_err());
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `E[max(u + σZ, 0)]`, the Gaussian-smoothed hinge.
fn smoothed_hinge(u: f64, sigma: f64) -> f64 {
    u * std_normal_cdf(u / sigma) + sigma * std_normal_pdf(u / sigma)
}

#[test]
fn gaussian_smoothed_ramp_matches_closed_form() {
    let cfg = SystemConfig::reference();
    let envelope = Envelope::default_for(&cfg).unwrap();
    let t_min = 0.05;
    let profile = design_symmetric_ramp(15e-3, &cfg, t_min).unwrap();
    let (f0, f1) = ramp_edges(&profile).unwrap();
    let filter = EffectiveFilter::new(profile, &envelope);

    // a(t) = exp(−t²/2σ_t²) has |A(f)|² ∝ exp(−4π²σ_t²f²)
    let sigma_t = envelope.duration_fwhm / (2.0 * (2.0 * LN_2).sqrt());
    let sigma_f = 1.0 / (2.0 * 2f64.sqrt() * PI * sigma_t);
    assert!((sigma_f - 14.07e6).abs() < 0.05e6, "σ_f = {sigma_f}");
    let slope = (1.0 - t_min) / (f1 - f0);
    for i in 0..=400 {
        let f = 1.5e9 + i as f64 * (f1 - 1.5e9 + 1e9) / 400.0;
        let oracle = t_min + slope * (smoothed_hinge(f - f0, sigma_f) - smoothed_hinge(f - f1, sigma_f));
        let got = filter.transmission(f);
        assert!((got - oracle).abs() < 1e-6, "f={f}: {got} vs {oracle}");
    }
}

#[test]
fn mapping_closed_form_at_reference() {
    let cfg = SystemConfig::reference();
    // β₂L = −D·L·λ²/(2πc)
    let beta2_l = 2.298 * 1553e-9f64.powi(2) / (2.0 * PI * SPEED_OF_LIGHT);
    assert!((cfg.fiber.beta2_l - beta2_l).abs() < 1e-6 * beta2_l);
    let tau0 = 2.3e9 * 2.0 * PI * beta2_l;
    assert!((cfg.stage.reference_delay - tau0).abs() < 1e-18);
    for &x in &[0.0, 7.5e-3, 15e-3, 30e-3, 45e-3] {
        let expected = (tau0 + 2.0 * x / SPEED_OF_LIGHT) / (2.0 * PI * beta2_l);
        let f = stretch::displacement_to_frequency(x, &cfg).unwrap();
        assert!((f - expected).abs() < 1e-6 * expected, "x={x}");
    }
}

#[test]
fn fft_estimator_recovers_pure_tones() {
    for i in 0..20 {
        let f = 2.3e9 + i as f64 * 0.93e9;
        let rate = 80e9;
        let s: Vec<f64> = (0..1600).map(|n| (2.0 * PI * f * n as f64 / rate + 0.3 * i as f64).cos()).collect();
        let est = dsp::estimate_frequency_fft(&Waveform::new(s, rate, 0.0).unwrap()).unwrap();
        assert!((est.frequency - f).abs() < 10e6, "{f}: {}", est.frequency);
    }
}

#[test]
fn quantization_error_shrinks_with_resolution() {
    let rate = 80e9;
    let rms_for = |bits: u32, seed: u64| {
        let phase = seed as f64 * 0.0618;
        let w = Waveform::new(
            (0..1600).map(|n| 0.45 * (2.0 * PI * 7.1e9 * n as f64 / rate + phase).sin()).collect(),
            rate,
            0.0,
        )
        .unwrap();
        let adc = AdcSpec {
            sample_rate: rate,
            bits,
            full_scale: 0.5,
        };
        let d = dsp::digitize(&w, &adc, 0.0, seed).unwrap();
        let e: f64 = d.samples().iter().zip(w.samples()).map(|(a, b)| (a - b) * (a - b)).sum();
        (e / w.len() as f64).sqrt()
    };
    for seed in 0..100 {
        let errs: Vec<f64> = [12, 10, 8, 6].iter().map(|&b| rms_for(b, seed)).collect();
        assert!(errs.windows(2).all(|p| p[0] < p[1]), "seed {seed}: {errs:?}");
        // uniform quantization error is lsb/√12
        let lsb12 = 1.0 / 4096.0;
        assert!((errs[0] / (lsb12 / 12f64.sqrt()) - 1.0).abs() < 0.1);
    }
}
