use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{process_window, run_variants, AblationReport, Manifest, PipelineConfig, SplitTag, Variant, WindowRecord};
use crate::classifier::model_to_json;
use crate::error::{Error, Result};
use crate::features::{fault_frequencies, segment};
use crate::signal::read_wav;
use crate::synth::build_dataset;

/// Train and test windows of a manifest, split by recording.
pub fn manifest_windows(m: &Manifest, cfg: &PipelineConfig) -> Result<(Vec<WindowRecord>, Vec<WindowRecord>)> {
    cfg.processing.validate()?;
    if let Some(p) = m.missing_files().first() {
        return Err(Error::io(p, "file not found"));
    }
    let bank = cfg.processing.bank()?;
    let splits = m.assign_splits(cfg.test_fraction);
    let per_entry: Vec<Vec<WindowRecord>> = m
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let x = read_wav(&m.resolve(e))?;
            let ff = fault_frequencies(&m.geometry_of(e), e.shaft_hz)?;
            segment(&x, cfg.window_s, cfg.overlap_frac)?
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let mut rec = process_window(w, &bank, &cfg.processing, &ff)?;
                    rec.label = Some(e.label);
                    rec.recording = i;
                    rec.window_index = k;
                    Ok(rec)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (recs, split) in per_entry.into_iter().zip(splits) {
        match split {
            SplitTag::Train => train.extend(recs),
            SplitTag::Test => test.extend(recs),
        }
    }
    Ok((train, test))
}

/// Runs the four-way comparison on the manifest's recordings, or on the
/// synthetic benchmark when no manifest is given.
pub fn run_pipeline(cfg: &PipelineConfig, manifest: Option<&Manifest>) -> Result<AblationReport> {
    run_pipeline_variants(cfg, manifest, &Variant::ALL)
}

pub fn run_pipeline_variants(
    cfg: &PipelineConfig,
    manifest: Option<&Manifest>,
    variants: &[Variant],
) -> Result<AblationReport> {
    cfg.validate()?;
    let (train, test) = match manifest {
        Some(m) => manifest_windows(m, cfg)?,
        None => {
            let mut spec = cfg.synth.clone();
            spec.window_s = cfg.window_s;
            spec.overlap_frac = cfg.overlap_frac;
            let d = build_dataset(&spec, &cfg.processing)?;
            (d.train, d.test)
        }
    };
    let mut report = run_variants(&train, &test, &cfg.model, variants)?;
    report.raw_decimation = cfg.processing.raw_decimation;
    Ok(report)
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `report.txt`, `report.csv`, and one model and training history per
/// variant. Returns the paths written.
pub fn write_report(report: &AblationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = vec![
        write(dir.join("report.txt"), report.to_text().as_bytes())?,
        write(dir.join("report.csv"), report.to_csv().as_bytes())?,
    ];
    for r in &report.rows {
        let slug = r.variant.slug();
        out.push(write(dir.join(format!("model-{slug}.json")), model_to_json(&r.model)?.as_bytes())?);
        out.push(write(dir.join(format!("history-{slug}.csv")), r.history.to_csv().as_bytes())?);
    }
    Ok(out)
}
