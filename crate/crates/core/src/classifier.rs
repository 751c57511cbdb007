//! Feature scaling and the multiclass strategies built from binary SVMs.
//!
//! One-against-all (OAA) trains one model per emotion (that emotion against
//! the other three) on a shared scaler and predicts by the largest decision
//! value. The gender-dependent strategy (GD) trains an independent scaler and
//! OAA bank per speaker gender and routes each prediction by the gender
//! supplied with the sample.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::features::{CepstralMode, FeatureConfig, FeatureVector};
use crate::math::{fnv1a64, sqrt};
use crate::svm::{smo_train, BinarySvmModel, SvmError, SvmParams};

/// The four emotion classes in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionLabel {
    Happy,
    Sad,
    Angry,
    Fear,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 4] = [
        EmotionLabel::Happy,
        EmotionLabel::Sad,
        EmotionLabel::Angry,
        EmotionLabel::Fear,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Happy => "Happy",
            Self::Sad => "Sad",
            Self::Angry => "Angry",
            Self::Fear => "Fear",
        }
    }

    /// Exact canonical name, case-insensitive.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    M,
    F,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::M, Gender::F];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::M => "M",
            Self::F => "F",
        }
    }

    /// Accepts `m`/`f` and `male`/`female`, any case.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("m") || t.eq_ignore_ascii_case("male") {
            Some(Self::M)
        } else if t.eq_ignore_ascii_case("f") || t.eq_ignore_ascii_case("female") {
            Some(Self::F)
        } else {
            None
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierError {
    EmptyTrainingSet,
    MixedDimensions { expected: usize, found: usize },
    MixedModes,
    DimensionMismatch { expected: usize, found: usize },
    ModeMismatch { expected: CepstralMode, found: CepstralMode },
    MissingClass(EmotionLabel),
    MissingGender(Gender),
    MissingClassInGender(Gender, EmotionLabel),
    WrongStrategy { expected: StrategyKind },
    UnknownGenderBank(Gender),
    GenderRequired,
    Svm { label: EmotionLabel, source: SvmError },
}

impl fmt::Display for ClassifierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyTrainingSet => f.write_str("empty training set"),
            Self::MixedDimensions { expected, found } => write!(
                f,
                "training vectors have mixed dimensions ({expected} and {found})"
            ),
            Self::MixedModes => f.write_str("training vectors mix MFCC and LPCC modes"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::ModeMismatch { expected, found } => {
                write!(f, "model expects {expected} features, got {found}")
            }
            Self::MissingClass(label) => write!(f, "no training samples for {label}"),
            Self::MissingGender(g) => write!(f, "no training samples for gender {g}"),
            Self::MissingClassInGender(g, label) => {
                write!(f, "gender {g} has fewer than 2 training samples for {label}")
            }
            Self::WrongStrategy { expected } => {
                write!(f, "operation needs a {expected} model")
            }
            Self::UnknownGenderBank(g) => write!(f, "model has no bank for gender {g}"),
            Self::GenderRequired => {
                f.write_str("gender-dependent models need the speaker gender")
            }
            Self::Svm { label, source } => write!(f, "training the {label} model: {source}"),
        }
    }
}

impl core::error::Error for ClassifierError {}

/// Per-dimension standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Standard deviations below this are replaced by 1.
pub const MIN_SCALER_STD: f64 = 1e-12;

impl Scaler {
    pub fn identity(dim: usize) -> Self {
        Self {
            means: alloc::vec![0.0; dim],
            stds: alloc::vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_values(&self, values: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        if values.len() != self.dim() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        Ok(values
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}

/// Fits per-dimension mean and population standard deviation.
pub fn fit_scaler(vectors: &[&[f64]]) -> Result<Scaler, ClassifierError> {
    let first = vectors.first().ok_or(ClassifierError::EmptyTrainingSet)?;
    let dim = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(ClassifierError::MixedDimensions {
            expected: dim,
            found: bad.len(),
        });
    }
    let n = vectors.len() as f64;
    let means: Vec<f64> = (0..dim)
        .map(|d| vectors.iter().map(|v| v[d]).sum::<f64>() / n)
        .collect();
    let stds = (0..dim)
        .map(|d| {
            let var = vectors
                .iter()
                .map(|v| (v[d] - means[d]) * (v[d] - means[d]))
                .sum::<f64>()
                / n;
            let s = sqrt(var);
            if s < MIN_SCALER_STD {
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(Scaler { means, stds })
}

pub fn transform(scaler: &Scaler, v: &FeatureVector) -> Result<FeatureVector, ClassifierError> {
    Ok(FeatureVector::new(scaler.transform_values(&v.values)?, v.mode))
}

/// A scaler with one binary model per emotion, in canonical label order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bank {
    pub scaler: Scaler,
    pub models: [BinarySvmModel; 4],
}

impl Bank {
    pub fn model(&self, label: EmotionLabel) -> &BinarySvmModel {
        &self.models[label.index()]
    }

    /// Decision value of every emotion model on an unscaled vector.
    pub fn scores(&self, values: &[f64]) -> Result<[f64; 4], ClassifierError> {
        let scaled = self.scaler.transform_values(values)?;
        let mut scores = [0.0; 4];
        for (score, (model, label)) in scores
            .iter_mut()
            .zip(self.models.iter().zip(EmotionLabel::ALL))
        {
            *score = model
                .decision_value(&scaled)
                .map_err(|source| ClassifierError::Svm { label, source })?;
        }
        Ok(scores)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Oaa,
    GenderDependent,
}

impl StrategyKind {
    /// Short tag used in model files and CLI flags.
    pub fn tag(self) -> &'static str {
        match self {
            Self::Oaa => "OAA",
            Self::GenderDependent => "GD",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        if text.eq_ignore_ascii_case("oaa") {
            Some(Self::Oaa)
        } else if text.eq_ignore_ascii_case("gd") {
            Some(Self::GenderDependent)
        } else {
            None
        }
    }

    /// Column heading used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Self::Oaa => "OAA",
            Self::GenderDependent => "Gender dependent",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Oaa(Bank),
    /// Banks keyed by gender, sorted M before F.
    GenderDependent(Vec<(Gender, Bank)>),
}

/// A trained four-emotion classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionModel {
    pub strategy: Strategy,
    pub mode: CepstralMode,
    pub dim: usize,
    /// Hex fingerprint of the feature config and SVM parameters.
    pub fingerprint: String,
}

/// Fingerprint `<feature hash><svm hash>`, 16 hex digits each, so the
/// feature half can be checked on its own at prediction time.
pub fn config_fingerprint(features: &FeatureConfig, params: &SvmParams, dim: usize) -> String {
    format!(
        "{:016x}{:016x}",
        feature_fingerprint(features),
        fnv1a64(
            format!(
                "c={} gamma={} kkt_tolerance={} max_passes={} max_iterations={}",
                params.c,
                params.resolved_gamma(dim),
                params.kkt_tolerance,
                params.max_passes,
                params.max_iterations
            )
            .as_bytes()
        )
    )
}

pub fn feature_fingerprint(features: &FeatureConfig) -> u64 {
    fnv1a64(features.canonical_text().as_bytes())
}

impl EmotionModel {
    pub fn kind(&self) -> StrategyKind {
        match self.strategy {
            Strategy::Oaa(_) => StrategyKind::Oaa,
            Strategy::GenderDependent(_) => StrategyKind::GenderDependent,
        }
    }

    /// Whether this model was trained with an equivalent feature config.
    pub fn matches_features(&self, features: &FeatureConfig) -> bool {
        self.fingerprint
            .get(..16)
            .is_some_and(|h| h == format!("{:016x}", feature_fingerprint(features)))
    }

    pub fn bank(&self, gender: Option<Gender>) -> Result<&Bank, ClassifierError> {
        match (&self.strategy, gender) {
            (Strategy::Oaa(bank), _) => Ok(bank),
            (Strategy::GenderDependent(banks), Some(g)) => banks
                .iter()
                .find(|(bg, _)| *bg == g)
                .map(|(_, b)| b)
                .ok_or(ClassifierError::UnknownGenderBank(g)),
            (Strategy::GenderDependent(_), None) => Err(ClassifierError::GenderRequired),
        }
    }

    fn check_vector(&self, v: &FeatureVector) -> Result<(), ClassifierError> {
        if v.mode != self.mode {
            return Err(ClassifierError::ModeMismatch {
                expected: self.mode,
                found: v.mode,
            });
        }
        if v.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Routes to the right bank (gender is ignored for OAA models).
    pub fn predict(
        &self,
        v: &FeatureVector,
        gender: Option<Gender>,
    ) -> Result<Prediction, ClassifierError> {
        self.check_vector(v)?;
        let bank = self.bank(gender)?;
        Ok(Prediction::from_scores(bank.scores(&v.values)?))
    }
}

/// Predicted label plus the decision value of every emotion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: EmotionLabel,
    pub scores: [f64; 4],
}

impl Prediction {
    /// Argmax; exact ties go to the earlier label in canonical order.
    pub fn from_scores(scores: [f64; 4]) -> Self {
        let mut best = 0;
        for i in 1..4 {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Self {
            label: EmotionLabel::ALL[best],
            scores,
        }
    }

    pub fn score(&self, label: EmotionLabel) -> f64 {
        self.scores[label.index()]
    }
}

fn uniform_shape<'a, I>(vectors: I) -> Result<(CepstralMode, usize), ClassifierError>
where
    I: IntoIterator<Item = &'a FeatureVector>,
{
    let mut it = vectors.into_iter();
    let first = it.next().ok_or(ClassifierError::EmptyTrainingSet)?;
    for v in it {
        if v.mode != first.mode {
            return Err(ClassifierError::MixedModes);
        }
        if v.len() != first.len() {
            return Err(ClassifierError::MixedDimensions {
                expected: first.len(),
                found: v.len(),
            });
        }
    }
    Ok((first.mode, first.len()))
}

/// Minimum samples per emotion for a bank to be trained.
pub const MIN_SAMPLES_PER_CLASS: usize = 2;

/// Fits a scaler and one emotion-vs-rest model per label.
pub fn train_bank(
    train: &[(&FeatureVector, EmotionLabel)],
    params: &SvmParams,
) -> Result<Bank, ClassifierError> {
    let raw: Vec<&[f64]> = train.iter().map(|(v, _)| v.values.as_slice()).collect();
    let scaler = fit_scaler(&raw)?;
    let scaled: Vec<Vec<f64>> = train
        .iter()
        .map(|(v, _)| scaler.transform_values(&v.values))
        .collect::<Result<_, _>>()?;
    let mut models = Vec::with_capacity(4);
    for label in EmotionLabel::ALL {
        let labels: Vec<i8> = train
            .iter()
            .map(|(_, l)| if *l == label { 1 } else { -1 })
            .collect();
        let model = smo_train(&scaled, &labels, params)
            .map_err(|source| ClassifierError::Svm { label, source })?;
        models.push(model);
    }
    let models: [BinarySvmModel; 4] = models
        .try_into()
        .unwrap_or_else(|_| unreachable!("one model per label"));
    Ok(Bank { scaler, models })
}

fn check_class_counts<F>(
    train: &[(&FeatureVector, EmotionLabel)],
    missing: F,
) -> Result<(), ClassifierError>
where
    F: Fn(EmotionLabel) -> ClassifierError,
{
    for label in EmotionLabel::ALL {
        let count = train.iter().filter(|(_, l)| *l == label).count();
        if count < MIN_SAMPLES_PER_CLASS {
            return Err(missing(label));
        }
    }
    Ok(())
}

/// One-against-all training over the pooled set.
pub fn train_oaa(
    train: &[(FeatureVector, EmotionLabel)],
    features: &FeatureConfig,
    params: &SvmParams,
) -> Result<EmotionModel, ClassifierError> {
    let (mode, dim) = uniform_shape(train.iter().map(|(v, _)| v))?;
    let refs: Vec<(&FeatureVector, EmotionLabel)> = train.iter().map(|(v, l)| (v, *l)).collect();
    check_class_counts(&refs, ClassifierError::MissingClass)?;
    let bank = train_bank(&refs, params)?;
    Ok(EmotionModel {
        strategy: Strategy::Oaa(bank),
        mode,
        dim,
        fingerprint: config_fingerprint(features, params, dim),
    })
}

/// Gender-dependent training: an independent scaler and OAA bank per gender.
pub fn train_gender_dependent(
    train: &[(FeatureVector, EmotionLabel, Gender)],
    features: &FeatureConfig,
    params: &SvmParams,
) -> Result<EmotionModel, ClassifierError> {
    let (mode, dim) = uniform_shape(train.iter().map(|(v, _, _)| v))?;
    let mut banks = Vec::with_capacity(2);
    for gender in Gender::ALL {
        let subset: Vec<(&FeatureVector, EmotionLabel)> = train
            .iter()
            .filter(|(_, _, g)| *g == gender)
            .map(|(v, l, _)| (v, *l))
            .collect();
        if subset.is_empty() {
            return Err(ClassifierError::MissingGender(gender));
        }
        check_class_counts(&subset, |l| ClassifierError::MissingClassInGender(gender, l))?;
        banks.push((gender, train_bank(&subset, params)?));
    }
    Ok(EmotionModel {
        strategy: Strategy::GenderDependent(banks),
        mode,
        dim,
        fingerprint: config_fingerprint(features, params, dim),
    })
}

pub fn predict_oaa(model: &EmotionModel, v: &FeatureVector) -> Result<Prediction, ClassifierError> {
    if model.kind() != StrategyKind::Oaa {
        return Err(ClassifierError::WrongStrategy {
            expected: StrategyKind::Oaa,
        });
    }
    model.predict(v, None)
}

pub fn predict_gender_dependent(
    model: &EmotionModel,
    v: &FeatureVector,
    gender: Gender,
) -> Result<Prediction, ClassifierError> {
    if model.kind() != StrategyKind::GenderDependent {
        return Err(ClassifierError::WrongStrategy {
            expected: StrategyKind::GenderDependent,
        });
    }
    model.predict(v, Some(gender))
}
