use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::HarnessError;
use crate::avedata::VideoRecord;
use crate::edrnet::{cam_extract, forward, CamSource, EdrConfig, ModelInput, ModelParams};

/// Writes a `[0, 1]` map as an 8-bit binary PGM.
pub fn write_pgm(map: &Array2<f64>, path: &Path) -> Result<(), HarnessError> {
    let (h, w) = map.dim();
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend(map.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// One PGM per map position and source, named `{id}_{source}_{t}.pgm`.
/// Sources whose branch is disabled are skipped.
pub fn export_cams(
    records: &[VideoRecord],
    params: &ModelParams,
    cfg: &EdrConfig,
    sources: &[CamSource],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    if records.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    for record in records {
        let acts = forward(&ModelInput::from(record), cfg, params)?;
        for &source in sources {
            if !cfg.branches.enabled(source.branch()) {
                continue;
            }
            for (t, map) in cam_extract(&acts, params, cfg, source)?.iter().enumerate() {
                let path = out_dir.join(format!("{}_{}_{t}.pgm", file_stem(&record.id), source.tag()));
                write_pgm(map, &path)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
