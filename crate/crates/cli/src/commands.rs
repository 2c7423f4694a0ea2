use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use aural_core::classifier::{evaluate, load_model, save_model, train, LabeledSet};
use aural_core::features::{
    extract_features, fault_frequencies, read_feature_csv, segment, write_feature_csv, BearingGeometry, Condition,
    FeatureVector, NormalizationStats, DEFAULT_SHAFT_HZ,
};
use aural_core::pipeline::{run_pipeline_variants, write_report, Manifest, PipelineConfig, Variant};
use aural_core::signal::{
    kurtosis, log_mel_spectrogram, magnitude_spectrum, read_wav, spectral_entropy, write_wav, MelParams, TimeSeries,
};
use aural_core::synth::{build_dataset, generate, Split, SynthSpec};
use aural_core::wavelet::{select_wavelet, Registry};
use aural_core::Error;

use crate::{BankAction, Command, GlobalArgs};

pub fn dispatch(g: &GlobalArgs, cmd: &Command) -> Result<()> {
    let cfg = effective_config(g)?;
    match cmd {
        Command::Bank { action: BankAction::List } => bank_list(&cfg),
        Command::Denoise { input } => denoise(g, &cfg, input),
        Command::Ke { input } => ke(input),
        Command::Features { input, label, shaft_hz } => features(g, &cfg, input, label.as_deref(), *shaft_hz),
        Command::Synth {
            condition,
            snr,
            duration,
            dataset,
        } => {
            if *dataset {
                synth_dataset(g, &cfg)
            } else {
                synth_one(g, &cfg, condition, *snr, *duration)
            }
        }
        Command::Train { train, val } => train_cmd(g, &cfg, train, val.as_deref()),
        Command::Eval { model, data } => eval_cmd(g, model, data),
        Command::Spectrogram { input } => spectrogram(g, input),
        Command::Run => run(g, &cfg),
    }
}

/// Config file (or defaults) with command-line overrides applied.
fn effective_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg = cfg.with_seed(seed);
    }
    if g.envelope {
        cfg.processing.envelope = true;
    }
    if let Some(level) = g.level {
        cfg.processing.dwt_level = level;
    }
    if let Some(bank) = &g.bank {
        cfg.processing.wavelet_bank = bank.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(g: &GlobalArgs) -> Result<PathBuf> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(())
}

fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let f = fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(read_feature_csv(f)?)
}

fn feature_csv(rows: &[FeatureVector]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_feature_csv(rows, &mut buf)?;
    Ok(buf)
}

fn bank_list(cfg: &PipelineConfig) -> Result<()> {
    let banks = Registry::builtin().select(&cfg.processing.wavelet_bank)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "name\tfamily\tfilter_len\tkind")?;
    for b in banks {
        let kind = if b.orthogonal { "orthogonal" } else { "biorthogonal" };
        writeln!(out, "{}\t{}\t{}\t{}", b.name, b.family, b.filter_len(), kind)?;
    }
    Ok(())
}

fn denoise(g: &GlobalArgs, cfg: &PipelineConfig, input: &Path) -> Result<()> {
    let x = read_wav(input)?;
    let bank = cfg.processing.bank()?;
    let report = select_wavelet(&x, &bank, &cfg.processing.denoise_options())?;
    let dir = out_dir(g)?;
    write_wav(&dir.join("denoised.wav"), &report.denoised)?;
    write_file(&dir.join("ke_table.csv"), report.ke_table_csv().as_bytes())?;
    let mut s = String::new();
    writeln!(s, "input: {}", input.display())?;
    writeln!(s, "chosen wavelet: {}", report.chosen_wavelet)?;
    writeln!(s, "KE index: {}", report.chosen_ke())?;
    writeln!(s, "level,threshold,ke")?;
    for (i, (t, k)) in report.threshold_per_level.iter().zip(&report.level_ke).enumerate() {
        writeln!(s, "{},{},{}", i + 1, t, k)?;
    }
    write_file(&dir.join("denoise.txt"), s.as_bytes())?;
    println!("{}\t{}", report.chosen_wavelet, report.chosen_ke());
    Ok(())
}

fn ke(input: &Path) -> Result<()> {
    let x = read_wav(input)?;
    let k = kurtosis(&x)?;
    let h = spectral_entropy(&magnitude_spectrum(&x)?)?;
    let ke = aural_core::signal::ke_index(&x)?;
    println!("kurtosis\tspectral_entropy\tke");
    println!("{k}\t{h}\t{ke}");
    Ok(())
}

/// Per-window features of `x`, denoised first unless `--no-denoise`.
fn window_features(
    g: &GlobalArgs,
    cfg: &PipelineConfig,
    x: &TimeSeries,
    shaft_hz: f64,
    label: Option<Condition>,
) -> Result<Vec<FeatureVector>> {
    let ff = fault_frequencies(&BearingGeometry::default(), shaft_hz)?;
    let fopts = cfg.processing.feature_options();
    let bank = cfg.processing.bank()?;
    let mut rows = Vec::new();
    for (k, w) in segment(x, cfg.window_s, cfg.overlap_frac)?.iter().enumerate() {
        let mut fv = if g.no_denoise {
            extract_features(w, &ff, &fopts)?
        } else {
            let d = select_wavelet(w, &bank, &cfg.processing.denoise_options())?;
            extract_features(&d.denoised, &ff, &fopts)?
        };
        fv.label = label;
        fv.window_index = k;
        rows.push(fv);
    }
    Ok(rows)
}

fn features(g: &GlobalArgs, cfg: &PipelineConfig, input: &Path, label: Option<&str>, shaft_hz: Option<f64>) -> Result<()> {
    let label = label.map(str::parse::<Condition>).transpose()?;
    let x = read_wav(input)?;
    let rows = window_features(g, cfg, &x, shaft_hz.unwrap_or(DEFAULT_SHAFT_HZ), label)?;
    let csv = feature_csv(&rows)?;
    match &g.out {
        Some(_) => write_file(&out_dir(g)?.join("features.csv"), &csv)?,
        None => std::io::stdout().lock().write_all(&csv)?,
    }
    Ok(())
}

fn synth_one(g: &GlobalArgs, cfg: &PipelineConfig, condition: &str, snr: f64, duration: f64) -> Result<()> {
    let condition: Condition = condition.parse()?;
    let d = &cfg.synth;
    let mut spec = SynthSpec::new(condition, snr, g.seed.unwrap_or(0));
    spec.duration_s = duration;
    spec.sample_rate_hz = d.sample_rate_hz;
    spec.resonance_hz = d.resonance_hz;
    spec.damping = d.damping;
    spec.jitter_frac = d.jitter_frac;
    spec.tone_amplitude = d.tone_amplitude;
    let x = generate(&spec, &d.geometry, d.shaft_hz)?;
    // Features describe the file as written, which stores f32 samples.
    let x = TimeSeries::new(x.samples().iter().map(|&v| v as f32 as f64).collect(), x.sample_rate_hz())?;
    let dir = out_dir(g)?;
    let stem = format!("{}-seed{}", condition.label(), spec.seed);
    write_wav(&dir.join(format!("{stem}.wav")), &x)?;
    let rows = window_features(g, cfg, &x, d.shaft_hz, Some(condition))?;
    write_file(&dir.join(format!("{stem}.csv")), &feature_csv(&rows)?)?;
    Ok(())
}

fn synth_dataset(g: &GlobalArgs, cfg: &PipelineConfig) -> Result<()> {
    let mut spec = cfg.synth.clone();
    spec.window_s = cfg.window_s;
    spec.overlap_frac = cfg.overlap_frac;
    let data = build_dataset(&spec, &cfg.processing)?;
    let dir = out_dir(g)?;
    let denoised = !g.no_denoise;
    write_file(&dir.join("train.csv"), &feature_csv(&data.feature_rows(Split::Train, denoised))?)?;
    write_file(&dir.join("test.csv"), &feature_csv(&data.feature_rows(Split::Test, denoised))?)?;
    Ok(())
}

/// Standardized inputs and class indices; every row must be labeled.
fn labeled(rows: &[FeatureVector], stats: &NormalizationStats) -> Result<LabeledSet> {
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        let label = r
            .label
            .ok_or_else(|| Error::DegenerateDataset(format!("row {} has no label", r.window_index)))?;
        xs.push(stats.apply(&r.values)?);
        ys.push(label.index());
    }
    Ok(LabeledSet::new(xs, ys)?)
}

fn train_cmd(g: &GlobalArgs, cfg: &PipelineConfig, train_csv: &Path, val_csv: Option<&Path>) -> Result<()> {
    let rows = read_features(train_csv)?;
    let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.values.to_vec()).collect();
    let stats = NormalizationStats::fit(&raw)?;
    let data = labeled(&rows, &stats)?;
    let val = val_csv
        .map(|p| read_features(p).and_then(|r| labeled(&r, &stats)))
        .transpose()?;
    let mc = cfg.model.model_config(stats.dim());
    let (model, history) = train(&data, val.as_ref(), stats, &mc, &cfg.model.train_config(true))?;
    let dir = out_dir(g)?;
    save_model(&model, &dir.join("model.json"))?;
    write_file(&dir.join("history.csv"), history.to_csv().as_bytes())?;
    if let Some(last) = history.epochs.last() {
        println!("epochs {}\tloss {}\ttrain_acc {}", history.epochs.len(), last.loss, last.train_acc);
    }
    Ok(())
}

fn eval_cmd(g: &GlobalArgs, model_path: &Path, data_csv: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let rows = read_features(data_csv)?;
    let set = labeled(&rows, &model.norm_stats)?;
    let e = evaluate(&model, &set)?;
    let mut s = String::new();
    writeln!(s, "accuracy {}", e.accuracy)?;
    writeln!(s, "confusion (rows = true class)")?;
    write!(s, "{:<8}", "")?;
    for c in Condition::ALL {
        write!(s, "{:>8}", c.label())?;
    }
    writeln!(s)?;
    for (c, row) in Condition::ALL.iter().zip(&e.confusion) {
        write!(s, "{:<8}", c.label())?;
        for v in row {
            write!(s, "{v:>8}")?;
        }
        writeln!(s)?;
    }
    print!("{s}");
    if g.out.is_some() {
        let dir = out_dir(g)?;
        write_file(&dir.join("eval.txt"), s.as_bytes())?;
        let mut csv = String::from("true,predicted,count\n");
        for (t, row) in Condition::ALL.iter().zip(&e.confusion) {
            for (p, v) in Condition::ALL.iter().zip(row) {
                writeln!(csv, "{},{},{}", t.label(), p.label(), v)?;
            }
        }
        write_file(&dir.join("eval.csv"), csv.as_bytes())?;
    }
    Ok(())
}

fn spectrogram(g: &GlobalArgs, input: &Path) -> Result<()> {
    let x = read_wav(input)?;
    let m = log_mel_spectrogram(&x, &MelParams::for_rate(x.sample_rate_hz()))?;
    let dir = out_dir(g)?;
    write_file(&dir.join("spectrogram.csv"), m.to_csv().as_bytes())?;
    write_file(&dir.join("spectrogram.pgm"), &m.to_pgm())?;
    Ok(())
}

fn run(g: &GlobalArgs, cfg: &PipelineConfig) -> Result<()> {
    let manifest = g.manifest.as_deref().map(Manifest::load).transpose()?;
    if let Some(p) = manifest.as_ref().and_then(|m| m.missing_files().into_iter().next()) {
        return Err(Error::Io {
            path: p.display().to_string(),
            message: "file not found".into(),
        }
        .into());
    }
    let variants: Vec<Variant> = Variant::ALL
        .into_iter()
        .filter(|v| !(g.no_denoise && v.denoised))
        .collect();
    let report = run_pipeline_variants(cfg, manifest.as_ref(), &variants)?;
    let dir = match (&g.out, &cfg.output_dir) {
        (Some(d), _) | (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("out"),
    };
    write_report(&report, &dir)?;
    print!("{}", report.to_csv());
    Ok(())
}
