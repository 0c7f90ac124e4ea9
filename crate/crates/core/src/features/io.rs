use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{feature_meta, FeatureInfo};
use crate::error::{Error, Result};

pub const FEATURE_META_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct MetaDocument {
    version: u32,
    features: Vec<FeatureInfo>,
}

/// Writes `feature_meta.json`: one entry per dimension of the feature vector.
pub fn write_feature_meta(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = MetaDocument {
        version: FEATURE_META_VERSION,
        features: feature_meta().to_vec(),
    };
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_feature_meta(path: impl AsRef<Path>) -> Result<Vec<FeatureInfo>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: MetaDocument = serde_json::from_str(&text)?;
    if doc.version != FEATURE_META_VERSION {
        return Err(Error::schema(
            path,
            format!("unsupported feature_meta version {}", doc.version),
        ));
    }
    Ok(doc.features)
}

pub use crate::dataset::write_points_csv as write_features_csv;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("feature_meta.json");
        write_feature_meta(&p).unwrap();
        assert_eq!(read_feature_meta(&p).unwrap(), feature_meta());
    }
}
