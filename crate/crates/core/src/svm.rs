//! From-scratch solver for the soft-margin SVM dual
//!
//!   maximize  F(α) = Σ α_i − ½ Σ α_i α_j y_i y_j K_ij
//!   subject to  Σ y_i α_i = 0,  0 ≤ α_i ≤ C,
//!
//! by pairwise coordinate ascent on the maximal violating pair, the
//! working-set strategy of classic SMO solvers. Updates move along the
//! direction (y_i e_i − y_j e_j) which preserves the equality constraint
//! exactly; the step is the unconstrained optimum clipped to the box.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Stop when the maximal KKT violating pair gap falls below this.
    pub tolerance: f64,
    /// Hard cap on pair updates.
    pub max_updates: usize,
    /// α entries above this count as support vectors.
    pub support_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-6, max_updates: 1_000_000, support_threshold: 1e-8 }
    }
}

/// A trained dual model: multipliers, bias, and support set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SvmModel {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub labels: Vec<f64>,
    pub support: Vec<usize>,
    /// Single-class input: the model predicts the present class constantly.
    pub degenerate: bool,
    /// Checksums linking the model to the artifacts that trained it.
    pub train_kernel_sha: Option<String>,
    pub train_dataset_sha: Option<String>,
}

impl SvmModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))
    }
}

/// Solver outcome summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QpReport {
    /// F at the returned α (the alignment objective F*).
    pub objective: f64,
    /// Pair updates performed.
    pub iterations: usize,
    pub max_kkt_violation: f64,
    pub converged: bool,
    /// Objective value after every pair update; nondecreasing.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

fn validate_labels(y: &[f64]) -> Result<(usize, usize)> {
    let mut plus = 0;
    let mut minus = 0;
    for &v in y {
        if v == 1.0 {
            plus += 1;
        } else if v == -1.0 {
            minus += 1;
        } else {
            return Err(Error::validation(format!("label {v} must be ±1")));
        }
    }
    Ok((plus, minus))
}

/// F(α, K, y) = Σ α_i − ½ Σ_{ij} α_i α_j y_i y_j K_ij.
pub fn objective_f(alpha: &[f64], kernel: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let m = alpha.len();
    if kernel.nrows() != m || kernel.ncols() != m || y.len() != m {
        return Err(Error::dimension("objective needs matching α, K, y shapes"));
    }
    let linear: f64 = alpha.iter().sum();
    let mut quad = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[(i, j)];
        }
    }
    Ok(linear - 0.5 * quad)
}

/// Maximize the dual with default options.
pub fn solve_dual(kernel: &DMatrix<f64>, y: &[f64], c: f64) -> Result<(SvmModel, QpReport)> {
    solve_dual_with_options(kernel, y, c, &SolverOptions::default())
}

pub fn solve_dual_with_options(
    kernel: &DMatrix<f64>,
    y: &[f64],
    c: f64,
    opts: &SolverOptions,
) -> Result<(SvmModel, QpReport)> {
    let m = y.len();
    if kernel.nrows() != m || kernel.ncols() != m {
        return Err(Error::dimension(format!(
            "{}×{} kernel against {m} labels",
            kernel.nrows(),
            kernel.ncols()
        )));
    }
    if m == 0 {
        return Err(Error::validation("empty training set"));
    }
    if !(c > 0.0) {
        return Err(Error::validation("box parameter C must be positive"));
    }
    let (plus, minus) = validate_labels(y)?;

    // symmetry / PSD guard: the dual assumes a repaired kernel
    let asym = (kernel - kernel.transpose()).abs().max();
    if asym > 1e-8 {
        return Err(Error::numerical(format!(
            "kernel asymmetric by {asym:.3e}; symmetrize before solving"
        )));
    }
    let min_eig = nalgebra::SymmetricEigen::new(kernel.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-6 {
        return Err(Error::numerical(format!(
            "kernel indefinite (min eigenvalue {min_eig:.3e}); run PSD repair first"
        )));
    }

    if plus == 0 || minus == 0 {
        // equality constraint forces α = 0: constant classifier
        let class = if plus > 0 { 1.0 } else { -1.0 };
        let model = SvmModel {
            alpha: vec![0.0; m],
            bias: class,
            c,
            labels: y.to_vec(),
            support: Vec::new(),
            degenerate: true,
            train_kernel_sha: None,
            train_dataset_sha: None,
        };
        let report = QpReport {
            objective: 0.0,
            iterations: 0,
            max_kkt_violation: 0.0,
            converged: true,
            objective_trace: vec![0.0],
        };
        return Ok((model, report));
    }

    let mut alpha = vec![0.0f64; m];
    // gradient of ½αQα − Σα, i.e. G_i = Σ_j y_i y_j K_ij α_j − 1
    let mut grad = vec![-1.0f64; m];
    let mut objective = 0.0f64;
    let mut trace = vec![0.0f64];
    let mut iterations = 0usize;
    let mut converged = false;

    let in_up = |t: usize, alpha: &[f64]| -> bool {
        (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0)
    };
    let in_low = |t: usize, alpha: &[f64]| -> bool {
        (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c)
    };

    while iterations < opts.max_updates {
        let mut i_sel = usize::MAX;
        let mut m_val = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut m_low = f64::INFINITY;
        for t in 0..m {
            let score = -y[t] * grad[t];
            if in_up(t, &alpha) && score > m_val {
                m_val = score;
                i_sel = t;
            }
            if in_low(t, &alpha) && score < m_low {
                m_low = score;
                j_sel = t;
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || m_val - m_low <= opts.tolerance {
            converged = i_sel == usize::MAX || j_sel == usize::MAX || m_val - m_low <= opts.tolerance;
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let eta = (kernel[(i, i)] + kernel[(j, j)] - 2.0 * kernel[(i, j)]).max(TAU);
        let gap = m_val - m_low;
        // room along +t in the ascent direction y_i e_i − y_j e_j
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let step = (gap / eta).min(room_i).min(room_j);

        objective += step * gap - 0.5 * step * step * eta;
        let d_i = y[i] * step;
        let d_j = -y[j] * step;
        alpha[i] = (alpha[i] + d_i).clamp(0.0, c);
        alpha[j] = (alpha[j] + d_j).clamp(0.0, c);
        for t in 0..m {
            grad[t] += y[t] * (y[i] * kernel[(t, i)] * d_i + y[j] * kernel[(t, j)] * d_j);
        }
        trace.push(objective);
        iterations += 1;
    }

    let support: Vec<usize> =
        (0..m).filter(|&t| alpha[t] > opts.support_threshold).collect();
    let mut model = SvmModel {
        alpha,
        bias: 0.0,
        c,
        labels: y.to_vec(),
        support,
        degenerate: false,
        train_kernel_sha: None,
        train_dataset_sha: None,
    };
    model.bias = compute_bias(&model, kernel, y)?;

    let report = QpReport {
        objective: objective_f(&model.alpha, kernel, y)?,
        iterations,
        max_kkt_violation: kkt_violation(&model, kernel, y)?,
        converged,
        objective_trace: trace,
    };
    Ok((model, report))
}

fn margins(model: &SvmModel, kernel: &DMatrix<f64>) -> Vec<f64> {
    let m = model.alpha.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| model.labels[j] * model.alpha[j] * kernel[(j, i)])
                .sum::<f64>()
        })
        .collect()
}

/// Bias from the KKT conditions: the average of y_i − Σ_j y_j α_j K_ji over
/// free support vectors, or the midpoint of the feasible interval when no
/// multiplier is strictly inside the box.
pub fn compute_bias(model: &SvmModel, kernel: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let m = model.alpha.len();
    if kernel.nrows() != m || kernel.ncols() != m || y.len() != m {
        return Err(Error::dimension("bias needs matching model, K, y shapes"));
    }
    if model.support.is_empty() {
        return Err(Error::numerical("no support vectors; model is degenerate"));
    }
    let f = margins(model, kernel);
    let eps = 1e-10 * model.c.max(1.0);
    let free: Vec<usize> = (0..m)
        .filter(|&i| model.alpha[i] > eps && model.alpha[i] < model.c - eps)
        .collect();
    if !free.is_empty() {
        return Ok(free.iter().map(|&i| y[i] - f[i]).sum::<f64>() / free.len() as f64);
    }
    // all multipliers at a bound: intersect the KKT inequalities on b
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..m {
        let at_zero = model.alpha[i] <= eps;
        match (y[i] > 0.0, at_zero) {
            (true, true) => lower = lower.max(1.0 - f[i]),
            (false, true) => upper = upper.min(-1.0 - f[i]),
            (true, false) => upper = upper.min(1.0 - f[i]),
            (false, false) => lower = lower.max(-1.0 - f[i]),
        }
    }
    Ok(match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    })
}

/// d(x) = Σ_i y_i α_i k_row[i] + b for a query's kernel row against the
/// training points.
pub fn decision_value(model: &SvmModel, k_row: &[f64]) -> Result<f64> {
    if k_row.len() != model.alpha.len() {
        return Err(Error::dimension(format!(
            "kernel row of length {} against {} training points",
            k_row.len(),
            model.alpha.len()
        )));
    }
    let sum: f64 = model
        .alpha
        .iter()
        .zip(&model.labels)
        .zip(k_row)
        .map(|((a, y), k)| y * a * k)
        .sum();
    Ok(sum + model.bias)
}

/// Predicted labels for a test kernel whose rows are test points and whose
/// columns are the training points. The tie d = 0 maps to +1.
pub fn predict(model: &SvmModel, k_test: &DMatrix<f64>) -> Result<Vec<i8>> {
    if k_test.ncols() != model.alpha.len() {
        return Err(Error::dimension(format!(
            "test kernel has {} columns, model has {} training points",
            k_test.ncols(),
            model.alpha.len()
        )));
    }
    (0..k_test.nrows())
        .map(|r| {
            let row: Vec<f64> = (0..k_test.ncols()).map(|j| k_test[(r, j)]).collect();
            Ok(if decision_value(model, &row)? >= 0.0 { 1 } else { -1 })
        })
        .collect()
}

/// Largest violation of the KKT certificate:
/// α=0 ⇒ y·d ≥ 1; 0<α<C ⇒ y·d = 1; α=C ⇒ y·d ≤ 1.
pub fn kkt_violation(model: &SvmModel, kernel: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let m = model.alpha.len();
    if kernel.nrows() != m || y.len() != m {
        return Err(Error::dimension("KKT check needs matching shapes"));
    }
    let f = margins(model, kernel);
    let eps = 1e-10 * model.c.max(1.0);
    let mut worst = 0.0f64;
    for i in 0..m {
        let yd = y[i] * (f[i] + model.bias);
        let v = if model.alpha[i] <= eps {
            (1.0 - yd).max(0.0)
        } else if model.alpha[i] >= model.c - eps {
            (yd - 1.0).max(0.0)
        } else {
            (yd - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}
