//! Brute-force reference implementations shared by the oracle suites.
#![allow(dead_code)]

use rand::Rng;
use ser_core::svm::{dual_objective, rbf_kernel};

/// O(N^2) DFT magnitude of `frame` zero-padded to `nfft`, bins `0..=nfft/2`.
pub fn dft_magnitude(frame: &[f64], nfft: usize) -> Vec<f64> {
    (0..=nfft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, x) in frame.iter().enumerate() {
                // reduce the phase index first so large k*n stays exact
                let angle = -2.0 * std::f64::consts::PI * ((k * n) % nfft) as f64 / nfft as f64;
                re += x * angle.cos();
                im += x * angle.sin();
            }
            re.hypot(im)
        })
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// LPC normal equations `sum_k a_k r[|i-k|] = r[i]`, i = 1..=p, solved densely.
pub fn toeplitz_lpc(r: &[f64], p: usize) -> Vec<f64> {
    let a = (0..p)
        .map(|i| (0..p).map(|k| r[i.abs_diff(k)]).collect())
        .collect();
    solve_linear(a, r[1..=p].to_vec()).expect("autocorrelation matrix is positive definite")
}

/// A random AR(2) resonance driven by uniform noise; its Toeplitz system is
/// well conditioned at every order.
pub fn stable_frame<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let radius = rng.gen_range(0.3..0.9);
    let theta = rng.gen_range(0.1..3.0);
    let (a1, a2) = (2.0 * radius * f64::cos(theta), -radius * radius);
    let mut x = vec![0.0; len];
    for n in 0..len {
        let e = rng.gen_range(-1.0..1.0);
        let p1 = if n >= 1 { x[n - 1] } else { 0.0 };
        let p2 = if n >= 2 { x[n - 2] } else { 0.0 };
        x[n] = e + a1 * p1 + a2 * p2;
    }
    x
}

/// Exact dual optimum by enumerating every face of the box: each alpha is
/// pinned at 0, pinned at C, or free. On a face the free block solves the
/// equality-constrained stationarity system
/// `[Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B]`.
/// The dual is concave, so the best feasible stationary point is the optimum.
pub fn face_oracle(x: &[Vec<f64>], y: &[i8], c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let yf: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| yf[i] * yf[j] * rbf_kernel(&x[i], &x[j], gamma).unwrap())
                .collect()
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let mut state = vec![0u8; n];
        let mut k = code;
        for s in state.iter_mut() {
            *s = (k % 3) as u8;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let fixed_sum: f64 = (0..n).filter(|&i| state[i] != 2).map(|i| yf[i] * alpha[i]).sum();
        if free.is_empty() {
            if fixed_sum.abs() > 1e-9 {
                continue;
            }
        } else {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q[i][j];
                }
                a[r][m] = yf[i];
                a[m][r] = yf[i];
                b[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] != 2)
                        .map(|j| q[i][j] * alpha[j])
                        .sum::<f64>();
            }
            b[m] = -fixed_sum;
            let Some(sol) = solve_linear(a, b) else {
                continue;
            };
            if sol[..m].iter().any(|&v| v < -1e-12 || v > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        best = best.max(dual_objective(x, y, &alpha, gamma));
    }
    best
}

/// A random problem with 2 to 6 points and both classes present.
pub fn small_svm_problem<R: Rng>(rng: &mut R) -> (Vec<Vec<f64>>, Vec<i8>, f64, f64) {
    let n = rng.gen_range(2..=6);
    let dim = rng.gen_range(1..=3);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let mut y: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    y[0] = 1;
    y[1] = -1;
    let c = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
    let gamma = rng.gen_range(0.2..2.0);
    (x, y, c, gamma)
}

/// Largest violation of the margin conditions
/// `a=0 => yf >= 1`, `0<a<C => yf = 1`, `a=C => yf <= 1`.
pub fn kkt_violation(margins: &[f64], alphas: &[f64], c: f64) -> f64 {
    margins
        .iter()
        .zip(alphas)
        .map(|(&m, &a)| {
            if a <= 1e-9 {
                (1.0 - m).max(0.0)
            } else if a >= c - 1e-9 {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}
