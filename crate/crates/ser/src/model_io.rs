use std::fs;
use std::io::Write;
use std::path::Path;

use ser_core::model_format::{decode, encode};
use ser_core::EmotionModel;

use crate::error::SerError;

/// Writes to a temporary file beside `path`, then renames it into place, so
/// a failed save never leaves a partial model behind.
pub fn save_model(path: &Path, model: &EmotionModel) -> Result<(), SerError> {
    write_atomic(path, encode(model).as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SerError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| SerError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| SerError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| SerError::io(path, e.error))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<EmotionModel, SerError> {
    let bytes = fs::read(path).map_err(|e| SerError::io(path, e))?;
    decode(&bytes).map_err(|source| SerError::Model {
        path: path.to_path_buf(),
        source,
    })
}
