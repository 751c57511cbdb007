//! Sample metadata, corpus filename conventions and stratified splits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{EmotionLabel, Gender};
use crate::math::{floor, round};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    UnparseableName(String),
    UnknownEmotionToken(String),
    DuplicatePath(String),
    EmptyStratum(EmotionLabel, Gender),
    InvalidFraction,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnparseableName(name) => write!(
                f,
                "`{name}` does not follow `<speaker>(<m|f>)_<emotion>...`"
            ),
            Self::UnknownEmotionToken(tokens) => write!(f, "unknown emotion token(s): {tokens}"),
            Self::DuplicatePath(p) => write!(f, "duplicate sample path `{p}`"),
            Self::EmptyStratum(label, gender) => {
                write!(f, "no samples for {label} / {gender}")
            }
            Self::InvalidFraction => f.write_str("train fraction must lie strictly between 0 and 1"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// Case-insensitive vocabulary mapping corpus words to emotion labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionTokens {
    table: BTreeMap<String, EmotionLabel>,
}

impl Default for EmotionTokens {
    fn default() -> Self {
        let mut tokens = Self {
            table: BTreeMap::new(),
        };
        for (word, label) in [
            ("hotanger", EmotionLabel::Angry),
            ("anger", EmotionLabel::Angry),
            ("angry", EmotionLabel::Angry),
            ("happy", EmotionLabel::Happy),
            ("sadness", EmotionLabel::Sad),
            ("sad", EmotionLabel::Sad),
            ("fear", EmotionLabel::Fear),
            ("panic", EmotionLabel::Fear),
        ] {
            tokens.insert(word, label);
        }
        tokens
    }
}

impl EmotionTokens {
    pub fn insert(&mut self, word: &str, label: EmotionLabel) {
        self.table.insert(word.to_ascii_lowercase(), label);
    }

    pub fn lookup(&self, word: &str) -> Option<EmotionLabel> {
        self.table.get(&word.to_ascii_lowercase()).copied()
    }

    /// Looks up a token, falling back to the canonical label names.
    pub fn resolve(&self, word: &str) -> Result<EmotionLabel, CorpusError> {
        self.lookup(word)
            .or_else(|| EmotionLabel::from_name(word))
            .ok_or_else(|| CorpusError::UnknownEmotionToken(word.to_string()))
    }
}

/// Metadata of one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMeta {
    pub path: String,
    pub speaker_id: String,
    pub gender: Gender,
    pub emotion: EmotionLabel,
    pub dataset_tag: Option<String>,
}

fn basename(path: &str) -> &str {
    path.rsplit(['/', '\\']).next().unwrap_or(path)
}

/// Parses `<speaker>(<m|f>)_<token>_..._<n>.wav`; the emotion is the first
/// recognized token after the gender marker.
pub fn parse_sample_name(filename: &str, tokens: &EmotionTokens) -> Result<SampleMeta, CorpusError> {
    let base = basename(filename);
    let unparseable = || CorpusError::UnparseableName(base.to_string());
    let open = base.find('(').ok_or_else(unparseable)?;
    let speaker = &base[..open];
    let rest = &base[open + 1..];
    let mut chars = rest.chars();
    let gender = chars
        .next()
        .and_then(|c| Gender::parse(c.encode_utf8(&mut [0; 4])))
        .ok_or_else(unparseable)?;
    let rest = chars.as_str().strip_prefix(")_").ok_or_else(unparseable)?;
    if speaker.is_empty() || rest.is_empty() {
        return Err(unparseable());
    }
    let stem = match rest.rfind('.') {
        Some(dot) => &rest[..dot],
        None => rest,
    };
    let words: Vec<&str> = stem.split('_').filter(|w| !w.is_empty()).collect();
    let emotion = words
        .iter()
        .find_map(|w| tokens.lookup(w))
        .ok_or_else(|| CorpusError::UnknownEmotionToken(words.join(", ")))?;
    Ok(SampleMeta {
        path: filename.to_string(),
        speaker_id: speaker.to_string(),
        gender,
        emotion,
        dataset_tag: None,
    })
}

/// Default filename token written for each emotion.
pub fn emotion_token(label: EmotionLabel) -> &'static str {
    match label {
        EmotionLabel::Happy => "happy",
        EmotionLabel::Sad => "sadness",
        EmotionLabel::Angry => "hotAnger",
        EmotionLabel::Fear => "fear",
    }
}

/// Builds a filename that [`parse_sample_name`] maps back to the same
/// gender and emotion.
pub fn sample_file_name(speaker: &str, gender: Gender, emotion: EmotionLabel, index: usize) -> String {
    let g = match gender {
        Gender::M => 'm',
        Gender::F => 'f',
    };
    format!("{speaker}({g})_{}_{index}.wav", emotion_token(emotion))
}

/// A collection of samples with unique paths.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    samples: Vec<SampleMeta>,
    counts: BTreeMap<(EmotionLabel, Gender), usize>,
}

impl Dataset {
    pub fn new(samples: Vec<SampleMeta>) -> Result<Self, CorpusError> {
        let mut seen = BTreeMap::new();
        let mut counts = BTreeMap::new();
        for s in &samples {
            if seen.insert(s.path.as_str(), ()).is_some() {
                return Err(CorpusError::DuplicatePath(s.path.clone()));
            }
            *counts.entry((s.emotion, s.gender)).or_insert(0) += 1;
        }
        Ok(Self { samples, counts })
    }

    pub fn samples(&self) -> &[SampleMeta] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count(&self, emotion: EmotionLabel, gender: Gender) -> usize {
        self.counts.get(&(emotion, gender)).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<(EmotionLabel, Gender), usize> {
        &self.counts
    }

    pub fn genders(&self) -> Vec<Gender> {
        Gender::ALL
            .into_iter()
            .filter(|g| EmotionLabel::ALL.iter().any(|e| self.count(*e, *g) > 0))
            .collect()
    }

    fn subset(&self, mut indices: Vec<usize>) -> Dataset {
        indices.sort_unstable();
        let samples = indices.into_iter().map(|i| self.samples[i].clone()).collect();
        Dataset::new(samples).unwrap_or_else(|_| unreachable!("subset of unique paths"))
    }
}

/// Stratified split by (emotion, gender).
///
/// Every emotion must be present for each gender that occurs in the
/// dataset. The overall train size is `round(fraction * n)`, apportioned to
/// strata by largest remainder so each stratum lands within one sample of
/// its exact share. Within a stratum the samples are shuffled with a
/// ChaCha8 stream seeded by `seed`. Both halves keep the dataset's order.
pub fn split_train_test(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction);
    }
    let mut strata: Vec<((EmotionLabel, Gender), Vec<usize>)> = Vec::new();
    for gender in ds.genders() {
        for emotion in EmotionLabel::ALL {
            let members: Vec<usize> = (0..ds.len())
                .filter(|&i| {
                    let s = &ds.samples[i];
                    s.emotion == emotion && s.gender == gender
                })
                .collect();
            if members.is_empty() {
                return Err(CorpusError::EmptyStratum(emotion, gender));
            }
            strata.push(((emotion, gender), members));
        }
    }
    if strata.is_empty() {
        return Err(CorpusError::EmptyStratum(EmotionLabel::Happy, Gender::M));
    }
    // keep strata in canonical (emotion, gender) order
    strata.sort_by_key(|(key, _)| *key);

    let exact: Vec<f64> = strata
        .iter()
        .map(|(_, m)| train_fraction * m.len() as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|&x| floor(x) as usize).collect();
    let target = round(train_fraction * ds.len() as f64) as usize;
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..strata.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - floor(exact[a]);
        let rb = exact[b] - floor(exact[b]);
        rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(target.saturating_sub(assigned)) {
        quota[i] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for ((_, members), take) in strata.iter().zip(quota) {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        train.extend_from_slice(&shuffled[..take]);
        test.extend_from_slice(&shuffled[take..]);
    }
    Ok((ds.subset(train), ds.subset(test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(path: &str, emotion: EmotionLabel, gender: Gender) -> SampleMeta {
        SampleMeta {
            path: path.to_string(),
            speaker_id: String::from("spk"),
            gender,
            emotion,
            dataset_tag: None,
        }
    }

    #[test]
    fn corpus_sample_names() {
        let tokens = EmotionTokens::default();
        let a = parse_sample_name("cc_001(m)_hotAnger_4.wav", &tokens).unwrap();
        assert_eq!(
            (a.speaker_id.as_str(), a.gender, a.emotion),
            ("cc_001", Gender::M, EmotionLabel::Angry)
        );
        let b = parse_sample_name("gg_001(f)_sadness_passive_negative_13a.wav", &tokens).unwrap();
        assert_eq!((b.gender, b.emotion), (Gender::F, EmotionLabel::Sad));
        let c = parse_sample_name("data/cl_001(m)_happy_active_positive_4.wav", &tokens).unwrap();
        assert_eq!(
            (c.speaker_id.as_str(), c.gender, c.emotion),
            ("cl_001", Gender::M, EmotionLabel::Happy)
        );
        assert_eq!(c.path, "data/cl_001(m)_happy_active_positive_4.wav");
    }

    #[test]
    fn name_errors() {
        let tokens = EmotionTokens::default();
        assert!(matches!(
            parse_sample_name("recording.wav", &tokens),
            Err(CorpusError::UnparseableName(_))
        ));
        assert!(matches!(
            parse_sample_name("x(q)_happy.wav", &tokens),
            Err(CorpusError::UnparseableName(_))
        ));
        assert_eq!(
            parse_sample_name("x(m)_joy_3.wav", &tokens),
            Err(CorpusError::UnknownEmotionToken(String::from("joy, 3")))
        );
    }

    #[test]
    fn token_table_extends() {
        let mut tokens = EmotionTokens::default();
        assert!(tokens.resolve("joy").is_err());
        tokens.insert("Joy", EmotionLabel::Happy);
        assert_eq!(tokens.resolve("JOY"), Ok(EmotionLabel::Happy));
        assert_eq!(tokens.resolve("Fear"), Ok(EmotionLabel::Fear));
    }

    #[test]
    fn writer_round_trips_through_parser() {
        let tokens = EmotionTokens::default();
        for e in EmotionLabel::ALL {
            for g in Gender::ALL {
                let name = sample_file_name("syn_002", g, e, 17);
                let parsed = parse_sample_name(&name, &tokens).unwrap();
                assert_eq!((parsed.gender, parsed.emotion), (g, e));
            }
        }
    }

    #[test]
    fn duplicate_paths_rejected() {
        let s = meta("a.wav", EmotionLabel::Happy, Gender::M);
        assert_eq!(
            Dataset::new(vec![s.clone(), s]),
            Err(CorpusError::DuplicatePath(String::from("a.wav")))
        );
    }

    fn balanced(per_cell: usize, genders: &[Gender]) -> Dataset {
        let mut samples = Vec::new();
        for e in EmotionLabel::ALL {
            for g in genders {
                for i in 0..per_cell {
                    samples.push(meta(&format!("{e}_{g}_{i}.wav"), e, *g));
                }
            }
        }
        Dataset::new(samples).unwrap()
    }

    #[test]
    fn seventy_thirty() {
        let ds = balanced(25, &[Gender::M]);
        assert_eq!(ds.len(), 100);
        let (train, test) = split_train_test(&ds, 0.7, 3).unwrap();
        assert_eq!((train.len(), test.len()), (70, 30));
        for e in EmotionLabel::ALL {
            let n = train.count(e, Gender::M) as f64;
            assert!((n - 17.5).abs() <= 1.0);
        }
        let again = split_train_test(&ds, 0.7, 3).unwrap();
        assert_eq!(again, (train, test));
    }

    #[test]
    fn split_preconditions() {
        let ds = balanced(3, &[Gender::M, Gender::F]);
        assert_eq!(split_train_test(&ds, 1.0, 0), Err(CorpusError::InvalidFraction));
        assert_eq!(split_train_test(&ds, 0.0, 0), Err(CorpusError::InvalidFraction));
        let mut samples = ds.samples().to_vec();
        samples.retain(|s| !(s.gender == Gender::F && s.emotion == EmotionLabel::Sad));
        let holes = Dataset::new(samples).unwrap();
        assert_eq!(
            split_train_test(&holes, 0.7, 0),
            Err(CorpusError::EmptyStratum(EmotionLabel::Sad, Gender::F))
        );
    }
}
