//! Test-set evaluation and comparison tables.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::classifier::{ClassifierError, EmotionLabel, EmotionModel, Gender, StrategyKind};
use crate::features::{CepstralMode, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub enum ReportError {
    EmptyTestSet,
    MissingGenderForGd { sample: usize },
    Classifier { sample: usize, source: ClassifierError },
    MissingGroup(String),
    DuplicateGroup(String),
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyTestSet => f.write_str("empty test set"),
            Self::MissingGenderForGd { sample } => write!(
                f,
                "test sample {sample} has no gender but the model is gender dependent"
            ),
            Self::Classifier { sample, source } => write!(f, "test sample {sample}: {source}"),
            Self::MissingGroup(g) => write!(f, "no report for table column `{g}`"),
            Self::DuplicateGroup(g) => write!(f, "more than one report for table column `{g}`"),
        }
    }
}

impl core::error::Error for ReportError {}

/// One labelled test utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSample {
    pub features: FeatureVector,
    pub label: EmotionLabel,
    pub gender: Option<Gender>,
}

/// Confusion matrix (rows true, columns predicted) and derived accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub confusion: [[usize; 4]; 4],
    /// Row recall per emotion; `None` when the test set has no such rows.
    pub per_emotion_accuracy: [Option<f64>; 4],
    /// Mean of the defined recalls.
    pub overall_macro: f64,
    /// Correct predictions over all predictions.
    pub overall_micro: f64,
    pub n_test: usize,
    pub strategy: StrategyKind,
    pub mode: CepstralMode,
    pub dataset_tag: Option<String>,
}

impl EvaluationReport {
    pub fn from_confusion(
        confusion: [[usize; 4]; 4],
        strategy: StrategyKind,
        mode: CepstralMode,
        dataset_tag: Option<String>,
    ) -> Self {
        let mut per_emotion_accuracy = [None; 4];
        for (i, row) in confusion.iter().enumerate() {
            let total: usize = row.iter().sum();
            if total > 0 {
                per_emotion_accuracy[i] = Some(row[i] as f64 / total as f64);
            }
        }
        let defined: Vec<f64> = per_emotion_accuracy.iter().flatten().copied().collect();
        let overall_macro = if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        };
        let n_test: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..4).map(|i| confusion[i][i]).sum();
        let overall_micro = if n_test == 0 {
            0.0
        } else {
            correct as f64 / n_test as f64
        };
        Self {
            confusion,
            per_emotion_accuracy,
            overall_macro,
            overall_micro,
            n_test,
            strategy,
            mode,
            dataset_tag,
        }
    }

    pub fn accuracy(&self, label: EmotionLabel) -> Option<f64> {
        self.per_emotion_accuracy[label.index()]
    }

    pub fn correct(&self) -> usize {
        (0..4).map(|i| self.confusion[i][i]).sum()
    }

    /// Emotions absent from the test set; the macro average skips them.
    pub fn undefined_labels(&self) -> Vec<EmotionLabel> {
        EmotionLabel::ALL
            .into_iter()
            .filter(|l| self.accuracy(*l).is_none())
            .collect()
    }

    /// Aligned confusion matrix with recalls and both overall figures.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "strategy {}  mode {}  dataset {}  n_test {}",
            self.strategy.tag(),
            self.mode,
            self.dataset_tag.as_deref().unwrap_or("-"),
            self.n_test
        );
        let _ = write!(out, "{:<8}", "true\\pred");
        for label in EmotionLabel::ALL {
            let _ = write!(out, "{:>8}", label.as_str());
        }
        let _ = writeln!(out, "{:>10}", "recall%");
        for label in EmotionLabel::ALL {
            let _ = write!(out, "{:<9}", label.as_str());
            for count in self.confusion[label.index()] {
                let _ = write!(out, "{count:>8}");
            }
            let _ = writeln!(out, "{:>10}", pct(self.accuracy(label)));
        }
        let _ = writeln!(
            out,
            "overall macro {}%  micro {}%",
            pct(Some(self.overall_macro)),
            pct(Some(self.overall_micro))
        );
        for label in self.undefined_labels() {
            let _ = writeln!(out, "warning: no {label} samples in the test set; macro skips it");
        }
        out
    }
}

/// Percentage with two decimals, or `n/a`.
pub fn pct(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", v * 100.0),
        None => String::from("n/a"),
    }
}

/// Predicts every sample and tallies the confusion matrix.
pub fn evaluate_model(
    model: &EmotionModel,
    test: &[TestSample],
    dataset_tag: Option<String>,
) -> Result<EvaluationReport, ReportError> {
    if test.is_empty() {
        return Err(ReportError::EmptyTestSet);
    }
    let mut confusion = [[0usize; 4]; 4];
    for (i, sample) in test.iter().enumerate() {
        if model.kind() == StrategyKind::GenderDependent && sample.gender.is_none() {
            return Err(ReportError::MissingGenderForGd { sample: i });
        }
        let prediction = model
            .predict(&sample.features, sample.gender)
            .map_err(|source| ReportError::Classifier { sample: i, source })?;
        confusion[sample.label.index()][prediction.label.index()] += 1;
    }
    Ok(EvaluationReport::from_confusion(
        confusion,
        model.kind(),
        model.mode,
        dataset_tag,
    ))
}

/// The three comparison layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableLayout {
    /// Per-emotion accuracy of OAA vs gender dependent.
    TableI,
    /// Per-emotion accuracy per dataset tag and strategy.
    TableII,
    /// Per-emotion accuracy of MFCC vs LPCC.
    TableIII,
}

impl TableLayout {
    pub fn name(self) -> &'static str {
        match self {
            Self::TableI => "TableI",
            Self::TableII => "TableII",
            Self::TableIII => "TableIII",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Self::TableI => "Accuracy of both classifiers",
            Self::TableII => "Accuracy for each dataset",
            Self::TableIII => "Overall accuracy with MFCC and LPCC",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim().to_ascii_uppercase().as_str() {
            "I" | "1" | "TABLEI" => Some(Self::TableI),
            "II" | "2" | "TABLEII" => Some(Self::TableII),
            "III" | "3" | "TABLEIII" => Some(Self::TableIII),
            _ => None,
        }
    }
}

/// A rendered table: aligned text plus CSV rows `layout,group,emotion,accuracy_pct`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTable {
    pub text: String,
    pub csv: String,
}

pub const CSV_HEADER: &str = "layout,group,emotion,accuracy_pct";

fn pick<'a, F>(
    reports: &'a [EvaluationReport],
    group: &str,
    matches: F,
) -> Result<&'a EvaluationReport, ReportError>
where
    F: Fn(&EvaluationReport) -> bool,
{
    let mut found = reports.iter().filter(|r| matches(r));
    let first = found
        .next()
        .ok_or_else(|| ReportError::MissingGroup(String::from(group)))?;
    if found.next().is_some() {
        return Err(ReportError::DuplicateGroup(String::from(group)));
    }
    Ok(first)
}

fn columns(
    reports: &[EvaluationReport],
    layout: TableLayout,
) -> Result<Vec<(String, &EvaluationReport)>, ReportError> {
    let strategies = [StrategyKind::Oaa, StrategyKind::GenderDependent];
    match layout {
        TableLayout::TableI => strategies
            .iter()
            .map(|s| {
                let name = String::from(s.display_name());
                pick(reports, &name, |r| r.strategy == *s).map(|r| (name, r))
            })
            .collect(),
        TableLayout::TableII => {
            let mut tags: Vec<&str> = Vec::new();
            for r in reports {
                let tag = r
                    .dataset_tag
                    .as_deref()
                    .ok_or_else(|| ReportError::MissingGroup(String::from("dataset tag")))?;
                if !tags.contains(&tag) {
                    tags.push(tag);
                }
            }
            if tags.is_empty() {
                return Err(ReportError::MissingGroup(String::from("dataset tag")));
            }
            let mut out = Vec::new();
            for tag in tags {
                for s in strategies {
                    let name = format!("{tag}/{}", s.display_name());
                    let r = pick(reports, &name, |r| {
                        r.strategy == s && r.dataset_tag.as_deref() == Some(tag)
                    })?;
                    out.push((name, r));
                }
            }
            Ok(out)
        }
        TableLayout::TableIII => CepstralMode::ALL
            .iter()
            .map(|m| {
                let name = String::from(m.as_str());
                pick(reports, &name, |r| r.mode == *m).map(|r| (name, r))
            })
            .collect(),
    }
}

/// Renders one comparison table with emotions as rows in canonical order,
/// followed by the macro and micro overall rows.
pub fn render_tables(
    reports: &[EvaluationReport],
    layout: TableLayout,
) -> Result<RenderedTable, ReportError> {
    let cols = columns(reports, layout)?;
    let mut rows: Vec<(&str, Vec<String>)> = EmotionLabel::ALL
        .iter()
        .map(|l| (l.as_str(), cols.iter().map(|(_, r)| pct(r.accuracy(*l))).collect()))
        .collect();
    rows.push((
        "Overall (macro)",
        cols.iter().map(|(_, r)| pct(Some(r.overall_macro))).collect(),
    ));
    rows.push((
        "Overall (micro)",
        cols.iter().map(|(_, r)| pct(Some(r.overall_micro))).collect(),
    ));

    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(8);
    let widths: Vec<usize> = cols
        .iter()
        .map(|(name, _)| name.len().max(6) + 4)
        .collect();

    let mut text = String::new();
    let numeral = layout.name().trim_start_matches("Table");
    let _ = writeln!(text, "Table {numeral}: {}", layout.title());
    let _ = write!(text, "{:<label_width$}", "Emotions");
    for ((name, _), w) in cols.iter().zip(&widths) {
        let _ = write!(text, "{:>w$}", format!("{name} (%)"), w = w + 4);
    }
    text.push('\n');
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (label, values) in &rows {
        let _ = write!(text, "{label:<label_width$}");
        for ((value, w), (name, _)) in values.iter().zip(&widths).zip(&cols) {
            let _ = write!(text, "{:>w$}", value, w = w + 4);
            let _ = writeln!(csv, "{},{},{},{}", layout.name(), name, label, value);
        }
        text.push('\n');
    }
    Ok(RenderedTable { text, csv })
}
