//! Per-file feature extraction on a worker pool.

use std::path::Path;

use rayon::prelude::*;
use ser_core::corpus::SampleMeta;
use ser_core::features::{feature_layout, FeatureConfig, FeatureExtractor, FeatureVector};

use crate::error::SerError;
use crate::manifest::Manifest;
use crate::wav::read_wav;

/// Features of one file.
pub fn extract_file(path: &Path, cfg: &FeatureConfig) -> Result<FeatureVector, SerError> {
    let signal = read_wav(path)?;
    let extractor =
        FeatureExtractor::new(cfg, signal.sample_rate_hz()).map_err(|source| SerError::Features {
            path: path.to_path_buf(),
            source,
        })?;
    extractor.extract(&signal).map_err(|source| SerError::Features {
        path: path.to_path_buf(),
        source,
    })
}

/// Extracts every sample in order. `jobs = None` uses one worker per CPU.
/// The first failure in sample order is reported.
pub fn extract_samples(
    manifest: &Manifest,
    samples: &[SampleMeta],
    cfg: &FeatureConfig,
    jobs: Option<usize>,
) -> Result<Vec<FeatureVector>, SerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| SerError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<FeatureVector, SerError>> = pool.install(|| {
        samples
            .par_iter()
            .map(|s| extract_file(&manifest.resolve(s), cfg))
            .collect()
    });
    results.into_iter().collect()
}

/// CSV with `path,emotion,gender` followed by one column per feature.
pub fn features_csv(
    samples: &[SampleMeta],
    vectors: &[FeatureVector],
    cfg: &FeatureConfig,
) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["path".to_string(), "emotion".into(), "gender".into()];
    header.extend(feature_layout(cfg));
    w.write_record(&header)?;
    for (s, v) in samples.iter().zip(vectors) {
        let mut row = vec![s.path.clone(), s.emotion.to_string(), s.gender.to_string()];
        // shortest representation that parses back to the same f64
        row.extend(v.values.iter().map(|x| format!("{x:?}")));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
