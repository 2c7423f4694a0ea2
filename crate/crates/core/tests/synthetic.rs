use std::collections::HashSet;

use aural_core::features::{
    band_peak, extract_features, fault_frequencies, read_feature_csv, write_feature_csv, BearingGeometry, Condition,
    FeatureOptions, DEFAULT_HALF_WIDTH_FRAC, DEFAULT_MAX_HARMONIC, DEFAULT_SHAFT_HZ,
};
use aural_core::pipeline::ProcessingConfig;
use aural_core::signal::magnitude_spectrum;
use aural_core::synth::{build_dataset, generate, DatasetSpec, Split, SynthSpec};
use aural_core::wavelet::{select_wavelet, DenoiseOptions, Registry};

#[test]
fn fault_site_dominates_its_band_in_envelope_mode() {
    let g = BearingGeometry::default();
    let ff = fault_frequencies(&g, DEFAULT_SHAFT_HZ).unwrap();
    let bank = Registry::builtin().select("bior3.1,coif1,db4,sym8,db10,rbio3.1").unwrap();
    let opts = FeatureOptions {
        envelope: true,
        ..FeatureOptions::default()
    };
    let mut passed = 0;
    for seed in 0..20 {
        let ok = [Condition::OuterMajor, Condition::InnerMajor].iter().all(|&c| {
            let x = generate(&SynthSpec::new(c, 0.0, seed), &g, DEFAULT_SHAFT_HZ).unwrap();
            let d = select_wavelet(&x, &bank, &DenoiseOptions::default()).unwrap();
            let f = extract_features(&d.denoised, &ff, &opts).unwrap();
            (f.f(11) > f.f(12)) == (c == Condition::OuterMajor)
        });
        passed += ok as usize;
    }
    assert!(passed >= 19, "{passed}/20");
}

#[test]
fn winner_sharpens_the_outer_race_band() {
    let g = BearingGeometry::default();
    let ff = fault_frequencies(&g, DEFAULT_SHAFT_HZ).unwrap();
    let x = generate(&SynthSpec::new(Condition::OuterMajor, -5.0, 11), &g, DEFAULT_SHAFT_HZ).unwrap();
    let report = select_wavelet(&x, Registry::builtin().banks(), &DenoiseOptions::default()).unwrap();
    let peak = |s| band_peak(&magnitude_spectrum(s).unwrap(), ff.bpfo_hz, DEFAULT_MAX_HARMONIC, DEFAULT_HALF_WIDTH_FRAC).unwrap();
    assert!(peak(&report.denoised) >= peak(&x));
}

#[test]
fn dataset_rows_survive_csv_and_never_share_windows() {
    let spec = DatasetSpec {
        n_train: 20,
        n_test: 10,
        windows_per_recording: 2,
        seed: 3,
        ..DatasetSpec::default()
    };
    let processing = ProcessingConfig {
        wavelet_bank: "db4".into(),
        raw_len: 32,
        ..ProcessingConfig::default()
    };
    let data = build_dataset(&spec, &processing).unwrap();
    let train_ids: HashSet<usize> = data.train.iter().map(|r| r.window_index).collect();
    assert!(data.test.iter().all(|r| !train_ids.contains(&r.window_index)));
    let recordings: HashSet<usize> = data.train.iter().map(|r| r.recording).collect();
    assert!(data.test.iter().all(|r| !recordings.contains(&r.recording)));

    for split in [Split::Train, Split::Test] {
        let rows = data.feature_rows(split, true);
        let mut buf = Vec::new();
        write_feature_csv(&rows, &mut buf).unwrap();
        let back = read_feature_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let mut again = Vec::new();
        write_feature_csv(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }
    for c in Condition::ALL {
        assert_eq!(data.train.iter().filter(|r| r.label == Some(c)).count(), 4);
        assert_eq!(data.test.iter().filter(|r| r.label == Some(c)).count(), 2);
    }
}
