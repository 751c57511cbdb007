use std::path::PathBuf;

use ser_core::classifier::ClassifierError;
use ser_core::corpus::CorpusError;
use ser_core::features::FeatureError;
use ser_core::model_format::ModelFormatError;
use ser_core::report::ReportError;
use ser_core::synth::SynthError;
use ser_core::WavError;

use crate::manifest::ManifestError;

#[derive(Debug, thiserror::Error)]
pub enum SerError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Wav {
        path: PathBuf,
        #[source]
        source: WavError,
    },
    #[error("{}: {source}", path.display())]
    Features {
        path: PathBuf,
        #[source]
        source: FeatureError,
    },
    #[error("{}: {source}", path.display())]
    Model {
        path: PathBuf,
        #[source]
        source: ModelFormatError,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("feature settings differ from the ones the model was trained with")]
    ConfigMismatch,
    /// Bad flag combination; reported with exit code 2.
    #[error("{0}")]
    Usage(String),
}

impl SerError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Self::FileNotFound(path)
        } else {
            Self::Io { path, source }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}
