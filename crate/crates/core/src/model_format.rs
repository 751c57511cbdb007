//! Line-oriented text encoding of [`EmotionModel`].
//!
//! ```text
//! SERSVM v1
//! strategy OAA  mode MFCC  dim 37  fingerprint <hex>
//! bank ALL
//! scaler <d means> <d stds>
//! model Happy gamma <g> C <c> bias <b> nsv <k>
//! <coefficient> <f1> ... <fd>        (k lines)
//! ... three more model blocks, Sad, Angry, Fear ...
//! checksum <FNV-1a 64 of every preceding byte, 16 hex digits>
//! ```
//!
//! GD models carry one `bank M` / `bank F` section per gender. Reals are
//! written with 17 significant digits, which round-trips every `f64`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::classifier::{Bank, EmotionLabel, EmotionModel, Gender, Scaler, Strategy, StrategyKind};
use crate::features::CepstralMode;
use crate::svm::BinarySvmModel;

pub use crate::math::fnv1a64;

pub const MAGIC: &str = "SERSVM";
pub const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelFormatError {
    BadMagic,
    VersionUnsupported(String),
    ChecksumMismatch { stored: String, computed: String },
    TruncatedModel,
    Malformed { line: usize, reason: String },
}

impl fmt::Display for ModelFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadMagic => write!(f, "not a model file (missing `{MAGIC}` magic line)"),
            Self::VersionUnsupported(v) => write!(f, "unsupported model version `{v}`"),
            Self::ChecksumMismatch { stored, computed } => {
                write!(f, "checksum mismatch: file says {stored}, contents hash to {computed}")
            }
            Self::TruncatedModel => f.write_str("model file is truncated"),
            Self::Malformed { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

impl core::error::Error for ModelFormatError {}

struct Real(f64);

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

fn push_reals(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, " {}", Real(*v));
    }
}

fn encode_model(out: &mut String, label: EmotionLabel, model: &BinarySvmModel) {
    let _ = writeln!(
        out,
        "model {label} gamma {} C {} bias {} nsv {}",
        Real(model.gamma),
        Real(model.c),
        Real(model.bias),
        model.n_support()
    );
    for (sv, coeff) in model.support_vectors.iter().zip(&model.coefficients) {
        out.push_str(&Real(*coeff).to_string());
        push_reals(out, sv);
        out.push('\n');
    }
}

fn encode_bank(out: &mut String, name: &str, bank: &Bank) {
    let _ = writeln!(out, "bank {name}");
    out.push_str("scaler");
    push_reals(out, &bank.scaler.means);
    push_reals(out, &bank.scaler.stds);
    out.push('\n');
    for label in EmotionLabel::ALL {
        encode_model(out, label, bank.model(label));
    }
}

/// Serializes a model, checksum line included.
pub fn encode(model: &EmotionModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(
        out,
        "strategy {}  mode {}  dim {}  fingerprint {}",
        model.kind().tag(),
        model.mode,
        model.dim,
        model.fingerprint
    );
    match &model.strategy {
        Strategy::Oaa(bank) => encode_bank(&mut out, "ALL", bank),
        Strategy::GenderDependent(banks) => {
            for (gender, bank) in banks {
                encode_bank(&mut out, gender.as_str(), bank);
            }
        }
    }
    let checksum = fnv1a64(out.as_bytes());
    let _ = writeln!(out, "checksum {checksum:016x}");
    out
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.next).copied()
    }

    fn take(&mut self) -> Result<(usize, &'a str), ModelFormatError> {
        let line = self.peek().ok_or(ModelFormatError::TruncatedModel)?;
        self.next += 1;
        Ok((self.next, line))
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> ModelFormatError {
    ModelFormatError::Malformed {
        line,
        reason: reason.into(),
    }
}

fn parse_real(line: usize, token: &str) -> Result<f64, ModelFormatError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(line, format!("`{token}` is not a finite real")))
}

fn parse_reals(line: usize, tokens: &[&str]) -> Result<Vec<f64>, ModelFormatError> {
    tokens.iter().map(|t| parse_real(line, t)).collect()
}

fn parse_usize(line: usize, token: &str) -> Result<usize, ModelFormatError> {
    token
        .parse::<usize>()
        .map_err(|_| malformed(line, format!("`{token}` is not a count")))
}

/// Splits `key value key value ...` and checks the keys.
fn keyed<'a>(
    line: usize,
    text: &'a str,
    keys: &[&str],
) -> Result<Vec<&'a str>, ModelFormatError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != keys.len() * 2 {
        return Err(malformed(line, format!("expected {} fields", keys.len() * 2)));
    }
    keys.iter()
        .zip(tokens.chunks_exact(2))
        .map(|(key, pair)| {
            if pair[0] == *key {
                Ok(pair[1])
            } else {
                Err(malformed(line, format!("expected `{key}`, found `{}`", pair[0])))
            }
        })
        .collect()
}

fn decode_model(
    lines: &mut Lines<'_>,
    expected: EmotionLabel,
    dim: usize,
) -> Result<BinarySvmModel, ModelFormatError> {
    let (no, header) = lines.take()?;
    let fields = keyed(no, header, &["model", "gamma", "C", "bias", "nsv"])?;
    if fields[0] != expected.as_str() {
        return Err(malformed(
            no,
            format!("expected model {expected}, found `{}`", fields[0]),
        ));
    }
    let gamma = parse_real(no, fields[1])?;
    let c = parse_real(no, fields[2])?;
    let bias = parse_real(no, fields[3])?;
    let nsv = parse_usize(no, fields[4])?;
    if !(gamma > 0.0) || !(c > 0.0) {
        return Err(malformed(no, "gamma and C must be positive"));
    }
    if nsv == 0 {
        return Err(malformed(no, "a model needs at least one support vector"));
    }
    let mut support_vectors = Vec::with_capacity(nsv);
    let mut coefficients = Vec::with_capacity(nsv);
    for _ in 0..nsv {
        let (no, text) = lines.take()?;
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != dim + 1 {
            return Err(malformed(
                no,
                format!("expected {} numbers, found {}", dim + 1, tokens.len()),
            ));
        }
        coefficients.push(parse_real(no, tokens[0])?);
        support_vectors.push(parse_reals(no, &tokens[1..])?);
    }
    Ok(BinarySvmModel {
        support_vectors,
        coefficients,
        bias,
        gamma,
        c,
        dim,
    })
}

fn decode_bank(lines: &mut Lines<'_>, dim: usize) -> Result<Bank, ModelFormatError> {
    let (no, text) = lines.take()?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.first() != Some(&"scaler") || tokens.len() != 2 * dim + 1 {
        return Err(malformed(no, format!("expected `scaler` with {} reals", 2 * dim)));
    }
    let means = parse_reals(no, &tokens[1..=dim])?;
    let stds = parse_reals(no, &tokens[dim + 1..])?;
    if stds.iter().any(|s| !(*s > 0.0)) {
        return Err(malformed(no, "scaler deviations must be positive"));
    }
    let models = [
        decode_model(lines, EmotionLabel::Happy, dim)?,
        decode_model(lines, EmotionLabel::Sad, dim)?,
        decode_model(lines, EmotionLabel::Angry, dim)?,
        decode_model(lines, EmotionLabel::Fear, dim)?,
    ];
    Ok(Bank {
        scaler: Scaler { means, stds },
        models,
    })
}

/// Splits off and verifies the trailing checksum line, returning the body.
fn verify_checksum(text: &str) -> Result<&str, ModelFormatError> {
    let body_end = match text.rfind("\nchecksum ") {
        Some(i) => i + 1,
        None => return Err(ModelFormatError::TruncatedModel),
    };
    let stored = text[body_end + "checksum ".len()..]
        .strip_suffix('\n')
        .ok_or(ModelFormatError::TruncatedModel)?;
    if stored.len() != 16 || !stored.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(ModelFormatError::TruncatedModel);
    }
    let body = &text[..body_end];
    let computed = format!("{:016x}", fnv1a64(body.as_bytes()));
    if !stored.eq_ignore_ascii_case(&computed) {
        return Err(ModelFormatError::ChecksumMismatch {
            stored: stored.to_string(),
            computed,
        });
    }
    Ok(body)
}

/// Parses a model file. Any defect yields an error, never a partial model.
pub fn decode(bytes: &[u8]) -> Result<EmotionModel, ModelFormatError> {
    if bytes.is_empty() {
        return Err(ModelFormatError::TruncatedModel);
    }
    let first_line = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let mut magic = first_line.splitn(2, |&b| b == b' ');
    if magic.next() != Some(MAGIC.as_bytes()) {
        return Err(ModelFormatError::BadMagic);
    }
    let version = magic.next().unwrap_or_default();
    if version != VERSION.as_bytes() {
        return Err(ModelFormatError::VersionUnsupported(
            String::from_utf8_lossy(version).into_owned(),
        ));
    }
    let text = core::str::from_utf8(bytes).map_err(|_| malformed(0, "not UTF-8 text"))?;
    let body = verify_checksum(text)?;

    let mut lines = Lines {
        lines: body.lines().collect(),
        next: 1,
    };
    let (no, header) = lines.take()?;
    let fields = keyed(no, header, &["strategy", "mode", "dim", "fingerprint"])?;
    let kind = match fields[0] {
        "OAA" => StrategyKind::Oaa,
        "GD" => StrategyKind::GenderDependent,
        other => return Err(malformed(no, format!("unknown strategy `{other}`"))),
    };
    let mode = match fields[1] {
        "MFCC" => CepstralMode::Mfcc,
        "LPCC" => CepstralMode::Lpcc,
        other => return Err(malformed(no, format!("unknown mode `{other}`"))),
    };
    let dim = parse_usize(no, fields[2])?;
    if dim == 0 {
        return Err(malformed(no, "dim must be positive"));
    }
    let fingerprint = fields[3].to_string();

    let mut banks: Vec<(Option<Gender>, Bank)> = Vec::new();
    while lines.peek().is_some() {
        let (no, text) = lines.take()?;
        let name = text
            .strip_prefix("bank ")
            .ok_or_else(|| malformed(no, "expected `bank <M|F|ALL>`"))?;
        let gender = match (kind, name) {
            (StrategyKind::Oaa, "ALL") => None,
            (StrategyKind::GenderDependent, g @ ("M" | "F")) => Gender::parse(g),
            _ => return Err(malformed(no, format!("bank `{name}` invalid for {kind}"))),
        };
        if banks.iter().any(|(g, _)| *g == gender) {
            return Err(malformed(no, format!("duplicate bank `{name}`")));
        }
        banks.push((gender, decode_bank(&mut lines, dim)?));
    }

    let strategy = match kind {
        StrategyKind::Oaa => {
            if banks.len() != 1 {
                return Err(malformed(lines.next, "OAA models have exactly one bank"));
            }
            Strategy::Oaa(banks.remove(0).1)
        }
        StrategyKind::GenderDependent => {
            if banks.is_empty() {
                return Err(ModelFormatError::TruncatedModel);
            }
            let mut by_gender: Vec<(Gender, Bank)> = banks
                .into_iter()
                .filter_map(|(g, b)| g.map(|g| (g, b)))
                .collect();
            by_gender.sort_by_key(|(g, _)| *g);
            Strategy::GenderDependent(by_gender)
        }
    };
    Ok(EmotionModel {
        strategy,
        mode,
        dim,
        fingerprint,
    })
}
