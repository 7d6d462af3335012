use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Model, ModelError};

pub const MODEL_FORMAT: &str = "argstruct-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize)]
struct EnvelopeRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a Model,
}

#[derive(Deserialize)]
struct Envelope {
    model: Model,
}

/// Writes `model` as versioned JSON. Floats round-trip exactly.
pub fn save_model(path: impl AsRef<Path>, model: &Model) -> Result<(), ModelError> {
    let path = path.as_ref();
    let text = serde_json::to_string(&EnvelopeRef {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model,
    })
    .expect("model serializes");
    fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: shown.clone(),
        source,
    })?;
    let corrupt = |message: String| ModelError::Corrupt {
        path: shown.clone(),
        message,
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if value.get("format").and_then(Value::as_str) != Some(MODEL_FORMAT) {
        return Err(corrupt(format!(
            "missing or wrong \"format\" (expected {MODEL_FORMAT:?})"
        )));
    }
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("missing \"version\"".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(ModelError::Version {
            expected: MODEL_VERSION,
            found: u32::try_from(version).unwrap_or(u32::MAX),
        });
    }
    let envelope: Envelope = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
    Ok(envelope.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{train_linear_svm, train_mlp, Dataset, MlpConfig, SvmConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data() -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut d = Dataset::new(3, ["neutral", "support"]);
        for i in 0..40 {
            let label = i % 2;
            let row = [
                label as f64 + rng.random_range(-0.7..0.7),
                rng.random_range(-1.0..1.0),
                rng.random::<f64>() * 1e-7,
            ];
            d.push(&row, label).unwrap();
        }
        d
    }

    fn probes() -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        (0..50)
            .map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect()
    }

    #[test]
    fn linear_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let mut m = Model::Linear(train_linear_svm(&data(), &SvmConfig::default()).unwrap());
        m.set_fingerprint("abc");
        save_model(&path, &m).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        for x in probes() {
            assert_eq!(
                back.positive_score(&x).to_bits(),
                m.positive_score(&x).to_bits()
            );
        }
    }

    #[test]
    fn mlp_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let cfg = MlpConfig {
            hidden: vec![8, 8, 8],
            epochs: 3,
            ..Default::default()
        };
        let m = Model::Mlp(train_mlp(&data(), &cfg).unwrap());
        save_model(&path, &m).unwrap();
        let back = load_model(&path).unwrap();
        for x in probes() {
            let (a, b) = (m.confidences(&x), back.confidences(&x));
            assert!(a.iter().zip(&b).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = Model::Linear(train_linear_svm(&data(), &SvmConfig::default()).unwrap());
        save_model(&path, &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(ModelError::Corrupt { .. })));
    }

    #[test]
    fn version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = Model::Linear(train_linear_svm(&data(), &SvmConfig::default()).unwrap());
        save_model(&path, &m).unwrap();
        let mut value: Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        value["version"] = 7.into();
        std::fs::write(&path, value.to_string()).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(ModelError::Version { found: 7, .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_model("/nonexistent/m.json"),
            Err(ModelError::Io { .. })
        ));
    }
}
