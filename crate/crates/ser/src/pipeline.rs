//! Split, train, evaluate and compare over a manifest.

use std::collections::BTreeMap;

use ser_core::classifier::{train_gender_dependent, train_oaa, EmotionLabel, Gender, StrategyKind};
use ser_core::corpus::{split_train_test, Dataset, SampleMeta};
use ser_core::features::{CepstralMode, FeatureConfig, FeatureVector};
use ser_core::report::{evaluate_model, render_tables, EvaluationReport, RenderedTable, TableLayout, TestSample, CSV_HEADER};
use ser_core::{EmotionModel, SvmParams};

use crate::error::SerError;
use crate::extract::extract_samples;
use crate::manifest::Manifest;

/// Which half of the seeded split a command works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitPart {
    Train,
    Test,
    All,
}

/// Split settings shared by `train`, `evaluate` and `compare`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            seed: 7,
        }
    }
}

pub fn select(dataset: &Dataset, part: SplitPart, split: SplitConfig) -> Result<Dataset, SerError> {
    Ok(match part {
        SplitPart::All => dataset.clone(),
        SplitPart::Train => split_train_test(dataset, split.train_fraction, split.seed)?.0,
        SplitPart::Test => split_train_test(dataset, split.train_fraction, split.seed)?.1,
    })
}

pub fn train_model(
    strategy: StrategyKind,
    samples: &[SampleMeta],
    vectors: &[FeatureVector],
    features: &FeatureConfig,
    params: &SvmParams,
) -> Result<EmotionModel, SerError> {
    let model = match strategy {
        StrategyKind::Oaa => {
            let rows: Vec<(FeatureVector, EmotionLabel)> = vectors
                .iter()
                .cloned()
                .zip(samples.iter().map(|s| s.emotion))
                .collect();
            train_oaa(&rows, features, params)?
        }
        StrategyKind::GenderDependent => {
            let rows: Vec<(FeatureVector, EmotionLabel, Gender)> = vectors
                .iter()
                .cloned()
                .zip(samples)
                .map(|(v, s)| (v, s.emotion, s.gender))
                .collect();
            train_gender_dependent(&rows, features, params)?
        }
    };
    Ok(model)
}

/// The tag shared by every sample, if there is exactly one.
pub fn common_tag(samples: &[SampleMeta]) -> Option<String> {
    let first = samples.first()?.dataset_tag.as_ref()?;
    samples
        .iter()
        .all(|s| s.dataset_tag.as_ref() == Some(first))
        .then(|| first.clone())
}

pub fn evaluate(
    model: &EmotionModel,
    samples: &[SampleMeta],
    vectors: &[FeatureVector],
    tag: Option<String>,
) -> Result<EvaluationReport, SerError> {
    let test: Vec<TestSample> = samples
        .iter()
        .zip(vectors)
        .map(|(s, v)| TestSample {
            features: v.clone(),
            label: s.emotion,
            gender: Some(s.gender),
        })
        .collect();
    Ok(evaluate_model(model, &test, tag)?)
}

/// Settings for a train/test comparison run.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub features: FeatureConfig,
    pub params: SvmParams,
    pub split: SplitConfig,
    /// Strategy used for the MFCC vs LPCC table.
    pub strategy: StrategyKind,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub tables: Vec<(TableLayout, RenderedTable)>,
    pub reports: Vec<EvaluationReport>,
}

impl Comparison {
    pub fn text(&self) -> String {
        self.tables
            .iter()
            .map(|(_, t)| t.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// All tables as one CSV with a single header.
    pub fn csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for (_, t) in &self.tables {
            for line in t.csv.lines().skip(1) {
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// Features for each mode, extracted once and looked up by path.
struct FeatureCache<'a> {
    manifest: &'a Manifest,
    cfg: &'a CompareConfig,
    by_mode: BTreeMap<CepstralMode, BTreeMap<String, FeatureVector>>,
}

impl FeatureCache<'_> {
    fn vectors(&mut self, mode: CepstralMode, samples: &[SampleMeta]) -> Result<Vec<FeatureVector>, SerError> {
        if !self.by_mode.contains_key(&mode) {
            let features = self.cfg.features.clone().with_mode(mode);
            let all = self.manifest.dataset.samples();
            let vectors = extract_samples(self.manifest, all, &features, self.cfg.jobs)?;
            let map = all.iter().map(|s| s.path.clone()).zip(vectors).collect();
            self.by_mode.insert(mode, map);
        }
        let map = &self.by_mode[&mode];
        Ok(samples.iter().map(|s| map[&s.path].clone()).collect())
    }

    fn run(
        &mut self,
        dataset: &Dataset,
        strategy: StrategyKind,
        mode: CepstralMode,
    ) -> Result<EvaluationReport, SerError> {
        let (train, test) = split_train_test(dataset, self.cfg.split.train_fraction, self.cfg.split.seed)?;
        let features = self.cfg.features.clone().with_mode(mode);
        let train_vectors = self.vectors(mode, train.samples())?;
        let model = train_model(strategy, train.samples(), &train_vectors, &features, &self.cfg.params)?;
        let test_vectors = self.vectors(mode, test.samples())?;
        evaluate(&model, test.samples(), &test_vectors, common_tag(dataset.samples()))
    }
}

/// Trains and scores every model a set of tables needs, on one seeded split
/// per dataset, and renders the tables.
///
/// Table I compares strategies in the configured mode, Table III compares
/// modes under the configured strategy, and Table II runs both strategies on
/// each dataset tag separately.
pub fn compare(
    manifest: &Manifest,
    layouts: &[TableLayout],
    cfg: &CompareConfig,
) -> Result<Comparison, SerError> {
    let mut cache = FeatureCache {
        manifest,
        cfg,
        by_mode: BTreeMap::new(),
    };
    let mut done: BTreeMap<(Option<String>, StrategyKind, CepstralMode), EvaluationReport> = BTreeMap::new();
    let mut tables = Vec::new();
    let whole = &manifest.dataset;
    let strategies = [StrategyKind::Oaa, StrategyKind::GenderDependent];

    for &layout in layouts {
        let mut jobs: Vec<(Option<String>, StrategyKind, CepstralMode)> = Vec::new();
        match layout {
            TableLayout::TableI => {
                jobs.extend(strategies.map(|s| (None, s, cfg.features.mode)));
            }
            TableLayout::TableIII => {
                jobs.extend(CepstralMode::ALL.map(|m| (None, cfg.strategy, m)));
            }
            TableLayout::TableII => {
                let mut tags: Vec<String> = Vec::new();
                for s in whole.samples() {
                    let tag = s.dataset_tag.clone().ok_or_else(|| {
                        SerError::Usage(format!(
                            "Table II groups by dataset tag, but `{}` has none",
                            s.path
                        ))
                    })?;
                    if !tags.contains(&tag) {
                        tags.push(tag);
                    }
                }
                for tag in tags {
                    jobs.extend(strategies.map(|s| (Some(tag.clone()), s, cfg.features.mode)));
                }
            }
        }
        let mut reports = Vec::new();
        for key in jobs {
            if !done.contains_key(&key) {
                let report = match &key.0 {
                    None => cache.run(whole, key.1, key.2)?,
                    Some(tag) => {
                        let subset: Vec<SampleMeta> = whole
                            .samples()
                            .iter()
                            .filter(|s| s.dataset_tag.as_ref() == Some(tag))
                            .cloned()
                            .collect();
                        cache.run(&Dataset::new(subset)?, key.1, key.2)?
                    }
                };
                done.insert(key.clone(), report);
            }
            reports.push(done[&key].clone());
        }
        tables.push((layout, render_tables(&reports, layout)?));
    }
    Ok(Comparison {
        tables,
        reports: done.into_values().collect(),
    })
}
