//! Manifest CSV: `path,emotion,gender,speaker,tag`.
//!
//! Empty emotion, gender or speaker cells are filled from the file name when
//! it follows the `<speaker>(<m|f>)_<emotion>...` convention. Relative paths
//! are resolved against the manifest's directory when audio is read.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use ser_core::classifier::Gender;
use ser_core::corpus::{parse_sample_name, CorpusError, Dataset, EmotionTokens, SampleMeta};

pub const HEADER: [&str; 5] = ["path", "emotion", "gender", "speaker", "tag"];

/// One rejected manifest row. `line` is 1-based and counts the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad manifest header `{found}`, expected `{}`", HEADER.join(","))]
    BadHeader { found: String },
    #[error("{} bad manifest row(s):\n{}", .0.len(), join_rows(.0))]
    Rows(Vec<RowError>),
    #[error("duplicate sample path `{0}`")]
    DuplicatePath(String),
}

fn join_rows(rows: &[RowError]) -> String {
    rows.iter()
        .map(|r| format!("  {r}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A dataset plus the directory its relative paths hang off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub dataset: Dataset,
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn resolve(&self, sample: &SampleMeta) -> PathBuf {
        resolve(&self.base_dir, &sample.path)
    }
}

pub fn resolve(base_dir: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn cell(record: &csv::StringRecord, i: usize) -> &str {
    record.get(i).map(str::trim).unwrap_or("")
}

fn parse_row(record: &csv::StringRecord, tokens: &EmotionTokens) -> Result<SampleMeta, String> {
    if record.len() != HEADER.len() {
        return Err(format!("expected {} fields, found {}", HEADER.len(), record.len()));
    }
    let path = cell(record, 0);
    if path.is_empty() {
        return Err("empty path".into());
    }
    let (emotion, gender, speaker) = (cell(record, 1), cell(record, 2), cell(record, 3));
    let tag = cell(record, 4);

    let emotion = if emotion.is_empty() {
        None
    } else {
        Some(tokens.resolve(emotion).map_err(|e| e.to_string())?)
    };
    let gender = if gender.is_empty() {
        None
    } else {
        Some(Gender::parse(gender).ok_or_else(|| format!("unknown gender `{gender}`"))?)
    };
    let speaker = (!speaker.is_empty()).then(|| speaker.to_string());

    let (emotion, gender, speaker) = match (emotion, gender, speaker) {
        (Some(e), Some(g), Some(s)) => (e, g, s),
        (e, g, s) => {
            let parsed = parse_sample_name(path, tokens).map_err(|err| match err {
                CorpusError::UnparseableName(_) => format!(
                    "missing metadata and file name does not follow the naming convention ({err})"
                ),
                other => other.to_string(),
            })?;
            (
                e.unwrap_or(parsed.emotion),
                g.unwrap_or(parsed.gender),
                s.unwrap_or(parsed.speaker_id),
            )
        }
    };
    Ok(SampleMeta {
        path: path.to_string(),
        speaker_id: speaker,
        gender,
        emotion,
        dataset_tag: (!tag.is_empty()).then(|| tag.to_string()),
    })
}

/// Reads a manifest. Audio files are not opened here.
pub fn load_manifest(path: &Path, tokens: &EmotionTokens) -> Result<Manifest, ManifestError> {
    let io = |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header = reader.headers().map_err(|e| ManifestError::BadHeader {
        found: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != HEADER {
        return Err(ManifestError::BadHeader {
            found: names.join(","),
        });
    }

    let mut samples = Vec::new();
    let mut errors = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let fallback_line = i as u64 + 2;
        match record {
            Ok(record) => {
                let line = record.position().map_or(fallback_line, |p| p.line());
                match parse_row(&record, tokens) {
                    Ok(meta) => samples.push(meta),
                    Err(reason) => errors.push(RowError { line, reason }),
                }
            }
            Err(e) => {
                let line = e.position().map_or(fallback_line, |p| p.line());
                errors.push(RowError {
                    line,
                    reason: e.to_string(),
                });
            }
        }
    }
    if !errors.is_empty() {
        return Err(ManifestError::Rows(errors));
    }
    let dataset = Dataset::new(samples).map_err(|e| match e {
        CorpusError::DuplicatePath(p) => ManifestError::DuplicatePath(p),
        other => unreachable!("Dataset::new only rejects duplicates, got {other}"),
    })?;
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Manifest { dataset, base_dir })
}

/// Writes every sample with all metadata columns filled.
pub fn write_manifest(path: &Path, dataset: &Dataset) -> Result<(), ManifestError> {
    let io = |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| std::io::Error::other(e.to_string());
    writer.write_record(HEADER).map_err(csv_err).map_err(io)?;
    for s in dataset.samples() {
        writer
            .write_record([
                s.path.as_str(),
                s.emotion.as_str(),
                s.gender.as_str(),
                s.speaker_id.as_str(),
                s.dataset_tag.as_deref().unwrap_or(""),
            ])
            .map_err(csv_err)
            .map_err(io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| io(std::io::Error::other(e.to_string())))?;
    let mut file = File::create(path).map_err(io)?;
    file.write_all(&bytes).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ser_core::classifier::EmotionLabel;

    fn load(text: &str) -> Result<Manifest, ManifestError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(&path, text).unwrap();
        load_manifest(&path, &EmotionTokens::default())
    }

    #[test]
    fn columns_and_filename_fallback() {
        let m = load(
            "path,emotion,gender,speaker,tag\n\
             a.wav,Sad,f,spk1,UGA\n\
             cc_001(m)_hotAnger_4.wav,,,,LDC\n\
             sub/gg_001(f)_sadness_13a.wav,fear,,,\n",
        )
        .unwrap();
        let s = m.dataset.samples();
        assert_eq!(s.len(), 3);
        assert_eq!((s[0].emotion, s[0].gender, s[0].speaker_id.as_str()), (EmotionLabel::Sad, Gender::F, "spk1"));
        assert_eq!((s[1].emotion, s[1].gender, s[1].speaker_id.as_str()), (EmotionLabel::Angry, Gender::M, "cc_001"));
        assert_eq!(s[1].dataset_tag.as_deref(), Some("LDC"));
        // an explicit column wins over the file name
        assert_eq!((s[2].emotion, s[2].gender), (EmotionLabel::Fear, Gender::F));
        assert_eq!(s[2].dataset_tag, None);
        assert!(m.resolve(&s[2]).ends_with("sub/gg_001(f)_sadness_13a.wav"));
    }

    #[test]
    fn row_errors_are_collected() {
        let err = load(
            "path,emotion,gender,speaker,tag\n\
             ok(m)_happy_1.wav,,,,\n\
             mystery.wav,joy,,,\n\
             x.wav,,,,\n\
             y.wav,sad,q,s,\n",
        )
        .unwrap_err();
        let ManifestError::Rows(rows) = err else { panic!("{err}") };
        assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(rows[0].reason.contains("unknown emotion token"), "{}", rows[0].reason);
        assert!(rows[1].reason.contains("naming convention"));
        assert!(rows[2].reason.contains("gender"));
    }

    #[test]
    fn header_and_duplicates() {
        assert!(matches!(
            load("file,emotion\nx.wav,sad\n"),
            Err(ManifestError::BadHeader { .. })
        ));
        assert!(matches!(
            load("path,emotion,gender,speaker,tag\na.wav,sad,m,s,\na.wav,sad,m,s,\n"),
            Err(ManifestError::DuplicatePath(p)) if p == "a.wav"
        ));
        assert!(matches!(
            load_manifest(Path::new("/nonexistent/m.csv"), &EmotionTokens::default()),
            Err(ManifestError::Io { .. })
        ));
    }

    #[test]
    fn write_then_load_is_identity() {
        let m = load(
            "path,emotion,gender,speaker,tag\n\
             cc_001(m)_hotAnger_4.wav,,,,LDC\n\
             b.wav,Happy,f,s2,\n",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("copy.csv");
        write_manifest(&out, &m.dataset).unwrap();
        let again = load_manifest(&out, &EmotionTokens::default()).unwrap();
        assert_eq!(again.dataset, m.dataset);
    }
}
