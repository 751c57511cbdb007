//! Binary soft-margin SVM with an RBF kernel, trained by SMO.
//!
//! The solver works on the dual in minimization form
//! `min 1/2 a'Qa - e'a` with `Q[i][j] = y_i y_j K(x_i, x_j)`, subject to
//! `0 <= a_i <= C` and `y'a = 0`. Each step picks the maximal violating pair
//! (first-order working-set selection, scanned in index order) and solves the
//! two-variable subproblem analytically.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math::exp;

/// Largest training set whose kernel matrix is cached densely.
pub const DENSE_KERNEL_LIMIT: usize = 4096;

/// Multipliers at or below this are dropped from the trained model.
pub const SUPPORT_EPSILON: f64 = 1e-12;

const MIN_CURVATURE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    /// Box constraint.
    pub c: f64,
    /// RBF width; `None` resolves to `1 / dim` at training time.
    pub gamma: Option<f64>,
    pub kkt_tolerance: f64,
    /// Consecutive updates that fail to move any multiplier before the
    /// solver gives up.
    pub max_passes: usize,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            gamma: None,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 100_000,
        }
    }
}

impl SvmParams {
    pub fn resolved_gamma(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.c)
            || !self.gamma.is_none_or(positive)
            || !positive(self.kkt_tolerance)
            || self.max_passes == 0
            || self.max_iterations == 0
        {
            return Err(SvmError::InvalidParams);
        }
        Ok(())
    }
}

/// Where the solver stood when it ran out of iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    /// Maximal KKT violation `m(a) - M(a)` at exit.
    pub violation: f64,
    pub dual_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SvmError {
    SingleClassInput,
    EmptyTrainingSet,
    DimensionMismatch { expected: usize, found: usize },
    NonFiniteFeature { sample: usize },
    BadLabel { sample: usize },
    InvalidParams,
    IterationLimitExceeded(SolverDiagnostics),
}

impl fmt::Display for SvmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleClassInput => f.write_str("training labels contain a single class"),
            Self::EmptyTrainingSet => f.write_str("empty training set"),
            Self::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Self::NonFiniteFeature { sample } => {
                write!(f, "sample {sample} has a non-finite feature")
            }
            Self::BadLabel { sample } => write!(f, "sample {sample} has a label other than +1/-1"),
            Self::InvalidParams => f.write_str("SVM parameters must be strictly positive"),
            Self::IterationLimitExceeded(d) => write!(
                f,
                "solver stopped after {} iterations with KKT violation {:.3e} (dual objective {})",
                d.iterations, d.violation, d.dual_objective
            ),
        }
    }
}

impl core::error::Error for SvmError {}

/// `exp(-gamma * |x - y|^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(rbf_unchecked(x, y, gamma))
}

fn rbf_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    exp(-gamma * d2)
}

/// A trained binary classifier: `f(x) = sum coeff_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Signed multipliers `a_i y_i`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Box constraint of the training run.
    pub c: f64,
    pub dim: usize,
}

impl BinarySvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dim {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * rbf_unchecked(sv, x, self.gamma))
            .sum::<f64>()
            + self.bias)
    }

    /// `+1` or `-1`; a zero decision value maps to `+1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8, SvmError> {
        Ok(if self.decision_value(x)? >= 0.0 { 1 } else { -1 })
    }

    pub fn n_support(&self) -> usize {
        self.coefficients.len()
    }
}

pub fn decision_value(model: &BinarySvmModel, x: &[f64]) -> Result<f64, SvmError> {
    model.decision_value(x)
}

enum KernelMatrix<'a> {
    Dense { n: usize, values: Vec<f64> },
    OnDemand { samples: &'a [Vec<f64>], gamma: f64 },
}

impl<'a> KernelMatrix<'a> {
    fn new(samples: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = samples.len();
        if n > DENSE_KERNEL_LIMIT {
            return Self::OnDemand { samples, gamma };
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf_unchecked(&samples[i], &samples[j], gamma);
                values[i * n + j] = k;
                values[j * n + i] = k;
            }
        }
        Self::Dense { n, values }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Dense { n, values } => values[i * n + j],
            Self::OnDemand { samples, gamma } => {
                if i == j {
                    1.0
                } else {
                    rbf_unchecked(&samples[i], &samples[j], *gamma)
                }
            }
        }
    }
}

/// Result of the dual optimization before it is packed into a model.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub violation: f64,
    pub dual_objective: f64,
}

fn validate_training_set(samples: &[Vec<f64>], labels: &[i8]) -> Result<usize, SvmError> {
    if samples.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    if samples.len() != labels.len() {
        return Err(SvmError::DimensionMismatch {
            expected: samples.len(),
            found: labels.len(),
        });
    }
    let dim = samples[0].len();
    for (i, (x, &y)) in samples.iter().zip(labels).enumerate() {
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SvmError::NonFiniteFeature { sample: i });
        }
        if y != 1 && y != -1 {
            return Err(SvmError::BadLabel { sample: i });
        }
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(SvmError::SingleClassInput);
    }
    Ok(dim)
}

/// Dual objective `sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij` (maximization form).
pub fn dual_objective(samples: &[Vec<f64>], labels: &[i8], alphas: &[f64], gamma: f64) -> f64 {
    let n = samples.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alphas[j] == 0.0 {
                continue;
            }
            quad += alphas[i]
                * alphas[j]
                * f64::from(labels[i])
                * f64::from(labels[j])
                * rbf_unchecked(&samples[i], &samples[j], gamma);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Solves the dual for `labels` in `{+1, -1}`.
pub fn smo_solve(
    samples: &[Vec<f64>],
    labels: &[i8],
    params: &SvmParams,
) -> Result<DualSolution, SvmError> {
    params.validate()?;
    let dim = validate_training_set(samples, labels)?;
    let gamma = params.resolved_gamma(dim);
    let c = params.c;
    let n = samples.len();
    let kernel = KernelMatrix::new(samples, gamma);
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();

    let mut alpha = vec![0.0; n];
    // gradient of the minimization objective: G = Q a - e
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut stalled = 0;

    // the box edge a multiplier reaches when pushed in direction `dir`
    let bound = |dir: f64| if dir > 0.0 { c } else { 0.0 };
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    loop {
        // i maximizes -y G over I_up, j minimizes it over I_low
        let mut i_sel: Option<(usize, f64)> = None;
        let mut j_sel: Option<(usize, f64)> = None;
        for t in 0..n {
            let score = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && i_sel.is_none_or(|(_, best)| score > best) {
                i_sel = Some((t, score));
            }
            if in_low(alpha[t], y[t]) && j_sel.is_none_or(|(_, best)| score < best) {
                j_sel = Some((t, score));
            }
        }
        let (Some((i, m_up)), Some((j, m_low))) = (i_sel, j_sel) else {
            break;
        };
        let violation = m_up - m_low;
        if violation < params.kkt_tolerance {
            break;
        }
        if iterations >= params.max_iterations || stalled >= params.max_passes {
            return Err(SvmError::IterationLimitExceeded(SolverDiagnostics {
                iterations,
                violation,
                dual_objective: dual_objective(samples, labels, &alpha, gamma),
            }));
        }
        iterations += 1;

        let (k_ii, k_jj, k_ij) = (kernel.get(i, i), kernel.get(j, j), kernel.get(i, j));
        let curvature = (k_ii + k_jj - 2.0 * k_ij).max(MIN_CURVATURE);
        let (old_i, old_j) = (alpha[i], alpha[j]);

        // Move a_i by y_i t and a_j by -y_j t, which keeps y'a fixed. The step
        // is the unconstrained optimum cut to the room each multiplier has
        // left; written this way the update is mirror-exact under a label flip.
        let room = |a: f64, dir: f64| if dir > 0.0 { c - a } else { a };
        let room_i = room(old_i, y[i]);
        let room_j = room(old_j, -y[j]);
        let t_step = (violation / curvature).min(room_i).min(room_j);
        let new_i = if t_step == room_i { bound(y[i]) } else { old_i + y[i] * t_step };
        let new_j = if t_step == room_j { bound(-y[j]) } else { old_j - y[j] * t_step };

        if new_i == old_i && new_j == old_j {
            stalled += 1;
            continue;
        }
        stalled = 0;
        alpha[i] = new_i;
        alpha[j] = new_j;
        // G_t += y_t t (K_ti - K_tj), from Q_ti d_i + Q_tj d_j
        for t in 0..n {
            grad[t] += y[t] * t_step * (kernel.get(t, i) - kernel.get(t, j));
        }
    }

    // final bias from the extreme violators: b = (m + M) / 2 in decision-value form
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for t in 0..n {
        let score = -y[t] * grad[t];
        if in_up(alpha[t], y[t]) {
            m_up = m_up.max(score);
        }
        if in_low(alpha[t], y[t]) {
            m_low = m_low.min(score);
        }
    }
    let (bias, violation) = match (m_up.is_finite(), m_low.is_finite()) {
        (true, true) => (0.5 * (m_up + m_low), m_up - m_low),
        (true, false) => (m_up, 0.0),
        (false, true) => (m_low, 0.0),
        (false, false) => (0.0, 0.0),
    };
    Ok(DualSolution {
        dual_objective: dual_objective(samples, labels, &alpha, gamma),
        alphas: alpha,
        bias,
        iterations,
        violation,
    })
}

/// Trains a binary RBF SVM on `labels` in `{+1, -1}`.
pub fn smo_train(
    samples: &[Vec<f64>],
    labels: &[i8],
    params: &SvmParams,
) -> Result<BinarySvmModel, SvmError> {
    let solution = smo_solve(samples, labels, params)?;
    let dim = samples[0].len();
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for ((x, &label), &a) in samples.iter().zip(labels).zip(&solution.alphas) {
        if a > SUPPORT_EPSILON {
            support_vectors.push(x.clone());
            coefficients.push(a * f64::from(label));
        }
    }
    Ok(BinarySvmModel {
        support_vectors,
        coefficients,
        bias: solution.bias,
        gamma: params.resolved_gamma(dim),
        c: params.c,
        dim,
    })
}
