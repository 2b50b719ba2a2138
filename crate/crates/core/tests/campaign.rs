use stretch_ranger_core::runner::*;
use stretch_ranger_core::sysmodel::SystemConfig;

/// Evaluates cells back to front, then restores index order.
struct Reversed;

impl Executor for Reversed {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let mut out: Vec<T> = (0..n).rev().map(f).collect();
        out.reverse();
        out
    }
}

fn setup() -> (SignalChain, CalibrationRun, NoiseModel) {
    let cfg = SystemConfig::reference();
    let chain = SignalChain::with_ramp(&cfg, 15e-3, 0.05).unwrap();
    let noise = NoiseModel::reference();
    let cal = run_calibration(&chain, &noise, &uniform_grid(15.0, 16), 2000, &Sequential).unwrap();
    (chain, cal, noise)
}

#[test]
fn schedule_does_not_change_results() {
    let (chain, cal, noise) = setup();
    let protocol = CampaignProtocol {
        repeats: 10,
        n_pulses: 100,
    };
    let xs = interior_grid(15.0, 4);
    let a = run_campaign(&chain, &cal.curve, &noise, &xs, protocol, "f", &Sequential).unwrap();
    let b = run_campaign(&chain, &cal.curve, &noise, &xs, protocol, "f", &Reversed).unwrap();
    assert_eq!(a, b);
}

#[test]
fn displacement_spread_follows_local_slope() {
    let (chain, cal, noise) = setup();
    let report = run_campaign(
        &chain,
        &cal.curve,
        &noise,
        &interior_grid(15.0, 5),
        CampaignProtocol {
            repeats: 200,
            n_pulses: 200,
        },
        "f",
        &Sequential,
    )
    .unwrap();
    for r in &report.records {
        // σ_x ≈ σ_T / |dT/dx| for small noise
        let predicted_um = r.std_transmission.unwrap() / cal.curve.slope(r.true_mm).abs() * 1e3;
        let ratio = r.std_dev_um.unwrap() / predicted_um;
        assert!((ratio - 1.0).abs() < 0.05, "{}: {ratio}", r.true_mm);
    }
}

#[test]
fn reference_noise_lands_in_ten_micrometre_decade() {
    let (chain, cal, noise) = setup();
    let report = run_campaign(
        &chain,
        &cal.curve,
        &noise,
        &interior_grid(15.0, 9),
        CampaignProtocol::REFERENCE,
        "f",
        &Sequential,
    )
    .unwrap();
    assert!(report.overall_std_dev_um > 1.0 && report.overall_std_dev_um < 100.0);
    assert_eq!(report.failures, 0);
    assert!((report.update_rate_hz - 0.1e6).abs() < 1e-6);
}

#[test]
fn doubling_noise_widens_every_point() {
    let (chain, cal, _) = setup();
    let protocol = CampaignProtocol {
        repeats: 30,
        n_pulses: 100,
    };
    let xs = interior_grid(15.0, 3);
    for seed in 0..20 {
        let noise = NoiseModel {
            seed,
            ..NoiseModel::reference()
        };
        let a = run_campaign(&chain, &cal.curve, &noise, &xs, protocol, "f", &Sequential).unwrap();
        let b = run_campaign(&chain, &cal.curve, &noise.scaled(2.0), &xs, protocol, "f", &Sequential).unwrap();
        for (lo, hi) in a.records.iter().zip(&b.records) {
            assert!(hi.std_dev_um.unwrap() > lo.std_dev_um.unwrap(), "seed {seed} at {} mm", lo.true_mm);
        }
    }
}
