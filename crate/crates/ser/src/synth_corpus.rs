use std::fs;
use std::path::{Path, PathBuf};

use ser_core::corpus::{Dataset, SampleMeta};
use ser_core::features::FeatureConfig;
use ser_core::synth::SynthSpec;

use crate::error::SerError;
use crate::manifest::{write_manifest, Manifest};
use crate::wav::write_wav;

pub const MANIFEST_NAME: &str = "manifest.csv";

/// Deletes what it tracks unless disarmed.
struct Cleanup(Vec<PathBuf>);

impl Drop for Cleanup {
    fn drop(&mut self) {
        for p in self.0.iter().rev() {
            let _ = if p.is_dir() {
                fs::remove_dir(p)
            } else {
                fs::remove_file(p)
            };
        }
    }
}

/// Writes every utterance of `spec` plus `manifest.csv` into `out_dir`.
/// On failure, files created by this call are removed again.
pub fn synth_corpus(spec: &SynthSpec, out_dir: &Path) -> Result<Manifest, SerError> {
    let band = FeatureConfig::default();
    spec.validate(band.pitch_min_hz, band.pitch_max_hz)?;

    let mut created = Cleanup(Vec::new());
    if !out_dir.exists() {
        // record the outermost missing ancestor so cleanup can remove it
        let mut missing = vec![out_dir.to_path_buf()];
        let mut cur = out_dir.parent();
        while let Some(p) = cur.filter(|p| !p.as_os_str().is_empty() && !p.exists()) {
            missing.push(p.to_path_buf());
            cur = p.parent();
        }
        fs::create_dir_all(out_dir).map_err(|e| SerError::io(out_dir, e))?;
        created.0.extend(missing.into_iter().rev());
    }

    let mut samples = Vec::new();
    for utterance in spec.plan() {
        let path = out_dir.join(&utterance.file_name);
        if !path.exists() {
            created.0.push(path.clone());
        }
        write_wav(&path, &spec.render(&utterance), spec.sample_rate_hz)?;
        samples.push(SampleMeta {
            path: utterance.file_name,
            speaker_id: utterance.speaker_id,
            gender: utterance.gender,
            emotion: utterance.emotion,
            dataset_tag: Some(spec.dataset_tag.clone()),
        });
    }
    let dataset = Dataset::new(samples)?;
    let manifest_path = out_dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        created.0.push(manifest_path.clone());
    }
    write_manifest(&manifest_path, &dataset)?;

    created.0.clear();
    Ok(Manifest {
        dataset,
        base_dir: out_dir.to_path_buf(),
    })
}
