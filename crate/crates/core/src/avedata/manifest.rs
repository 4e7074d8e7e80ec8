//! JSON manifests referencing per-record audio and visual blobs.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{validate_record, DataError, Dataset, FeatureDims, Split, TensorBlob, VideoRecord};

pub const MANIFEST_FILE: &str = "manifest.json";
const BLOB_DIR: &str = "blobs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub class_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    pub records: Vec<ManifestRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub video_label: usize,
    /// Relative to the manifest's directory unless absolute.
    pub audio_blob: String,
    pub visual_blob: String,
    pub seg_labels: Vec<usize>,
}

/// Loads a manifest and every blob it references, validating each record.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| DataError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|source| DataError::Manifest {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let classes = manifest.class_names.len();

    let records = manifest
        .records
        .par_iter()
        .map(|entry| load_record(base, entry, classes))
        .collect::<Result<Vec<_>, _>>()?;

    if let Some(first) = records.first() {
        let dims = first.dims();
        for r in &records[1..] {
            if r.dims() != dims {
                return Err(DataError::DimensionMismatch {
                    record: r.id.clone(),
                    detail: format!("dims {:?} differ from {:?} of {}", r.dims(), dims, first.id),
                });
            }
        }
    }

    Ok(Dataset {
        records,
        class_names: manifest.class_names,
        split: manifest.split.unwrap_or_default(),
    })
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn load_record(base: &Path, entry: &ManifestRecord, classes: usize) -> Result<VideoRecord, DataError> {
    let id = entry.id.clone();
    for &label in entry.seg_labels.iter().chain(std::iter::once(&entry.video_label)) {
        if label >= classes {
            return Err(DataError::LabelOutOfRange {
                record: id,
                label,
                classes,
            });
        }
    }

    let audio = TensorBlob::read(&resolve(base, &entry.audio_blob))?;
    let visual = TensorBlob::read(&resolve(base, &entry.visual_blob))?;
    let n = entry.seg_labels.len();
    let mismatch = |detail: String| DataError::DimensionMismatch {
        record: entry.id.clone(),
        detail,
    };
    let audio_shape = audio.shape();
    if audio_shape.len() != 2 || audio_shape[0] != n {
        return Err(mismatch(format!(
            "audio blob shape {audio_shape:?}, expected [{n}, d_a]"
        )));
    }
    let visual_shape = visual.shape();
    if visual_shape.len() != 3 || visual_shape[0] != n {
        return Err(mismatch(format!(
            "visual blob shape {visual_shape:?}, expected [{n}, S, d_v]"
        )));
    }
    let audio =
        Array2::from_shape_vec((audio_shape[0], audio_shape[1]), audio.data).expect("blob length checked on parse");
    let visual = Array3::from_shape_vec((visual_shape[0], visual_shape[1], visual_shape[2]), visual.data)
        .expect("blob length checked on parse");

    let record = VideoRecord {
        id: entry.id.clone(),
        audio,
        visual,
        seg_labels: entry.seg_labels.clone(),
        video_label: entry.video_label,
    };
    let violations = validate_record(&record);
    if !violations.is_empty() {
        return Err(DataError::InvalidRecord {
            record: record.id,
            violations,
        });
    }
    Ok(record)
}

fn blob_stem(index: usize, id: &str) -> String {
    let clean: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:05}_{clean}")
}

/// Writes `dir/manifest.json` plus one audio and one visual blob per record.
/// Returns the manifest path.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<PathBuf, DataError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DataError::Io { path, source }
    };
    let blob_dir = dir.join(BLOB_DIR);
    fs::create_dir_all(dir).map_err(io(dir))?;
    if !dataset.records.is_empty() {
        fs::create_dir_all(&blob_dir).map_err(io(&blob_dir))?;
    }

    let entries = dataset
        .records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let stem = blob_stem(i, &r.id);
            let audio_rel = format!("{BLOB_DIR}/{stem}.audio.avet");
            let visual_rel = format!("{BLOB_DIR}/{stem}.visual.avet");
            let FeatureDims {
                segments,
                audio,
                visual,
                spatial,
            } = r.dims();
            TensorBlob::new(vec![segments as u32, audio as u32], r.audio.iter().copied().collect())
                .write(&dir.join(&audio_rel))?;
            TensorBlob::new(
                vec![segments as u32, spatial as u32, visual as u32],
                r.visual.iter().copied().collect(),
            )
            .write(&dir.join(&visual_rel))?;
            Ok(ManifestRecord {
                id: r.id.clone(),
                video_label: r.video_label,
                audio_blob: audio_rel,
                visual_blob: visual_rel,
                seg_labels: r.seg_labels.clone(),
            })
        })
        .collect::<Result<Vec<_>, DataError>>()?;

    let manifest = Manifest {
        class_names: dataset.class_names.clone(),
        split: Some(dataset.split),
        records: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(io(&path))?;
    Ok(path)
}
