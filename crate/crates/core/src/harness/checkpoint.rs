use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;
use crate::avedata::TensorBlob;
use crate::edrnet::{EdrConfig, ModelParams};

pub const CHECKPOINT_INDEX: &str = "checkpoint.json";

#[derive(Debug, Serialize, Deserialize)]
struct Index {
    config: EdrConfig,
    /// Tensor name to blob path relative to the checkpoint directory.
    params: BTreeMap<String, String>,
}

fn corrupt(path: &Path, reason: impl Into<String>) -> HarnessError {
    HarnessError::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Writes one `AVET` blob per tensor plus a JSON index. Parameter values
/// must be `f32`-representable for the round trip to be exact, which holds
/// for initialised and trained parameters.
pub fn checkpoint_save(params: &ModelParams, cfg: &EdrConfig, dir: &Path) -> Result<PathBuf, HarnessError> {
    let blobs = dir.join("params");
    fs::create_dir_all(&blobs).map_err(|e| HarnessError::io(&blobs, e))?;
    let mut index = Index {
        config: cfg.clone(),
        params: BTreeMap::new(),
    };
    for (name, t) in params.tensors() {
        let rel = format!("params/{name}.avet");
        let blob = TensorBlob::new(
            t.shape().iter().map(|&d| d as u32).collect(),
            t.iter().map(|&v| v as f32).collect(),
        );
        blob.write(&dir.join(&rel))?;
        index.params.insert(name, rel);
    }
    let path = dir.join(CHECKPOINT_INDEX);
    let text = serde_json::to_string_pretty(&index).expect("serializable");
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

fn read_index(dir: &Path) -> Result<Index, HarnessError> {
    let path = dir.join(CHECKPOINT_INDEX);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| corrupt(&path, format!("malformed index: {e}")))
}

/// Model configuration stored with a checkpoint.
pub fn read_checkpoint_config(dir: &Path) -> Result<EdrConfig, HarnessError> {
    Ok(read_index(dir)?.config)
}

fn differing_fields(a: &EdrConfig, b: &EdrConfig) -> Vec<String> {
    let (Value::Object(a), Value::Object(b)) = (
        serde_json::to_value(a).expect("serializable"),
        serde_json::to_value(b).expect("serializable"),
    ) else {
        unreachable!("structs serialize to objects")
    };
    a.iter()
        .filter(|(k, v)| b.get(*k) != Some(v))
        .map(|(k, _)| k.clone())
        .collect()
}

/// Loads parameters saved for `cfg`. The stored configuration must match
/// `cfg` in every field except the initialisation seed.
pub fn checkpoint_load(dir: &Path, cfg: &EdrConfig) -> Result<ModelParams, HarnessError> {
    let index = read_index(dir)?;
    let fields: Vec<String> = differing_fields(&index.config, cfg)
        .into_iter()
        .filter(|f| f != "seed")
        .collect();
    if !fields.is_empty() {
        return Err(HarnessError::ConfigMismatch { fields });
    }
    let mut params = ModelParams::zeros(cfg)?;
    let index_path = dir.join(CHECKPOINT_INDEX);
    let expected: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
    if let Some(extra) = index.params.keys().find(|k| !expected.contains(k)) {
        return Err(corrupt(&index_path, format!("unexpected tensor {extra}")));
    }
    for (name, mut t) in params.tensors_mut() {
        let rel = index
            .params
            .get(&name)
            .ok_or_else(|| corrupt(&index_path, format!("missing tensor {name}")))?;
        let blob_path = dir.join(rel);
        let blob = TensorBlob::read(&blob_path)?;
        if blob.shape() != t.shape() {
            return Err(corrupt(
                &blob_path,
                format!("{name} has shape {:?}, expected {:?}", blob.shape(), t.shape()),
            ));
        }
        for (dst, &src) in t.iter_mut().zip(&blob.data) {
            *dst = f64::from(src);
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edrnet::{forward, ModelInput};
    use ndarray::{Array2, Array3};

    fn cfg() -> EdrConfig {
        EdrConfig {
            width: 5,
            audio_dim: 3,
            visual_dim: 2,
            spatial: 4,
            seed: 8,
            ..EdrConfig::default()
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg();
        let params = ModelParams::init(&cfg).unwrap();
        checkpoint_save(&params, &cfg, dir.path()).unwrap();
        let loaded = checkpoint_load(dir.path(), &cfg).unwrap();
        assert_eq!(loaded, params);
        let input = ModelInput {
            audio: Array2::from_shape_fn((10, 3), |(t, i)| (t as f64 - i as f64) * 0.3),
            visual: Array3::from_shape_fn((10, 4, 2), |(t, s, i)| ((t + s * i) % 5) as f64 * 0.2),
        };
        assert_eq!(
            forward(&input, &cfg, &params).unwrap(),
            forward(&input, &cfg, &loaded).unwrap()
        );
        assert_eq!(read_checkpoint_config(dir.path()).unwrap(), cfg);
    }

    #[test]
    fn mismatch_names_fields() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = cfg();
        checkpoint_save(&ModelParams::init(&cfg).unwrap(), &cfg, dir.path()).unwrap();
        let other = EdrConfig {
            width: 6,
            audio_dim: 4,
            ..cfg.clone()
        };
        let err = checkpoint_load(dir.path(), &other).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"d\"") || msg.contains(" d"), "{msg}");
        assert!(msg.contains("d_a"), "{msg}");
        match err {
            HarnessError::ConfigMismatch { fields } => assert_eq!(fields, vec!["d", "d_a"]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn corrupt_index_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join(CHECKPOINT_INDEX), "{ not json").unwrap();
        assert!(matches!(
            checkpoint_load(dir.path(), &cfg()),
            Err(HarnessError::Checkpoint { .. })
        ));
    }
}
