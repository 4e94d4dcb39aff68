//! Quantum kernel alignment: SPSA descent on the fiducial parameter λ of
//! the min–max objective min_λ max_α F(α, λ), plus the unweighted and
//! centered alignment alternatives as drop-in objectives.
//!
//! Per step the loop draws one Δ ∈ {−1,+1}^q, evaluates the objective at
//! λ ± c_iΔ (two kernel builds and two QP solves for the weighted
//! objective), and updates λ ← λ − (a_i/2c_i)[F_+ − F_−]·Δ, wrapping each
//! coordinate into [0, 2π).

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{build_kernel_matrix, psd_repair, KernelConfig, KernelMode, PsdPolicy};
use crate::lce::Dataset;
use crate::rng::rng_from_seed;
use crate::statevector::CouplingGraph;
use crate::svm::solve_dual;
use nalgebra::DMatrix;

/// SPSA gain schedule and start point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpsaConfig {
    /// Trial steps P.
    pub steps: usize,
    pub a: f64,
    pub c: f64,
    /// Stability constant A in a_i = a/(i+1+A)^σ.
    pub big_a: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub lambda0: Vec<f64>,
    pub seed: u64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        SpsaConfig {
            steps: 21,
            a: 0.1,
            c: 0.1,
            big_a: 0.0,
            sigma: 0.602,
            gamma: 0.101,
            lambda0: vec![0.1],
            seed: 0,
        }
    }
}

impl SpsaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.c > 0.0) {
            return Err(Error::validation("gain constants a, c must be positive"));
        }
        for (name, v) in [("sigma", self.sigma), ("gamma", self.gamma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(format!("{name} must lie in (0, 1]")));
            }
        }
        if self.lambda0.is_empty() || self.lambda0.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("lambda0 must be a nonempty finite vector"));
        }
        if !self.big_a.is_finite() || self.big_a < 0.0 {
            return Err(Error::validation("A must be a nonnegative constant"));
        }
        Ok(())
    }
}

/// Gains at step i: a_i = a/(i+1+A)^σ, c_i = c/(i+1)^γ.
pub fn spsa_gains(step: usize, cfg: &SpsaConfig) -> (f64, f64) {
    let i = step as f64;
    let a_i = cfg.a / (i + 1.0 + cfg.big_a).powf(cfg.sigma);
    let c_i = cfg.c / (i + 1.0).powf(cfg.gamma);
    (a_i, c_i)
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// Draw Δ uniform on {−1,+1}^q and return (λ+, λ−, Δ) with
/// λ± = λ ± c_i Δ wrapped into [0, 2π).
pub fn spsa_perturb<R: Rng>(
    lambda: &[f64],
    c_i: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>, Vec<i8>) {
    let delta: Vec<i8> = lambda.iter().map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    let plus = lambda
        .iter()
        .zip(&delta)
        .map(|(l, d)| wrap(l + c_i * *d as f64))
        .collect();
    let minus = lambda
        .iter()
        .zip(&delta)
        .map(|(l, d)| wrap(l - c_i * *d as f64))
        .collect();
    (plus, minus, delta)
}

/// λ_{i+1,k} = wrap(λ_{i,k} − (a_i/2c_i)[F_+ − F_−] Δ_k).
///
/// Multiplying the scalar difference by Δ_k is division by Δ_k for
/// Δ ∈ {−1,+1}: the standard simultaneous-perturbation gradient estimate.
fn spsa_update(lambda: &[f64], a_i: f64, c_i: f64, f_plus: f64, f_minus: f64, delta: &[i8]) -> Vec<f64> {
    let scale = a_i / (2.0 * c_i) * (f_plus - f_minus);
    lambda
        .iter()
        .zip(delta)
        .map(|(l, d)| wrap(l - scale * *d as f64))
        .collect()
}

/// What the SPSA loop minimizes at each λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentObjective {
    /// F*(λ) = max_α F(α, λ) via the dual solver.
    Weighted,
    /// Negated unweighted alignment −Σ K_ij y_i y_j.
    Unweighted,
    /// Negated unweighted alignment of the centered kernel.
    Centered,
}

/// One SPSA trial step as recorded in the trace. The final record carries
/// only the arrived-at λ and its objective value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub lambda: Vec<f64>,
    /// Objective at the unperturbed λ of this step.
    pub f_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_plus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_minus: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_minus: Option<f64>,
    /// Wall-clock time of the step; excluded from serialization so trace
    /// files are byte-identical across reruns.
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct AlignmentTrace {
    pub records: Vec<TraceRecord>,
    pub lambda_star: Vec<f64>,
}

impl AlignmentTrace {
    /// JSON lines, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace serialization cannot fail"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let r: TraceRecord =
                serde_json::from_str(line).map_err(|e| Error::format(e.to_string()))?;
            records.push(r);
        }
        let lambda_star = records
            .last()
            .map(|r| r.lambda.clone())
            .ok_or_else(|| Error::format("empty trace"))?;
        Ok(AlignmentTrace { records, lambda_star })
    }
}

/// Σ_{ij} K_ij y_i y_j, the unweighted alignment with proportionality
/// constant fixed to 1.
pub fn unweighted_alignment(kernel: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    let m = y.len();
    if kernel.nrows() != m || kernel.ncols() != m {
        return Err(Error::dimension("alignment needs a square kernel matching y"));
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += kernel[(i, j)] * y[i] * y[j];
        }
    }
    Ok(total)
}

/// Double-centering K_c = (I − 11ᵀ/m) K (I − 11ᵀ/m).
pub fn center_kernel(kernel: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = kernel.nrows();
    if kernel.ncols() != m {
        return Err(Error::dimension("centering needs a square kernel"));
    }
    let h = DMatrix::identity(m, m) - DMatrix::from_element(m, m, 1.0 / m as f64);
    Ok(&h * kernel * &h)
}

struct ObjectiveEval<'a> {
    train: &'a Dataset,
    graph: &'a CouplingGraph,
    kcfg: &'a KernelConfig,
    labels: Vec<f64>,
    c_box: f64,
    objective: AlignmentObjective,
}

impl ObjectiveEval<'_> {
    fn evaluate(&self, lambda: f64) -> Result<f64> {
        let cfg = KernelConfig { lambda, ..self.kcfg.clone() };
        let km = build_kernel_matrix(self.train, self.train, self.graph, &cfg)?;
        let entries = if cfg.mode == KernelMode::Exact {
            km.entries().clone()
        } else {
            psd_repair(&km, PsdPolicy::Clip)?.entries().clone()
        };
        match self.objective {
            AlignmentObjective::Weighted => {
                let (_, report) = solve_dual(&entries, &self.labels, self.c_box)?;
                if !report.converged {
                    return Err(Error::numerical("dual solver did not converge"));
                }
                Ok(report.objective)
            }
            AlignmentObjective::Unweighted => {
                Ok(-unweighted_alignment(&entries, &self.labels)?)
            }
            AlignmentObjective::Centered => {
                let centered = center_kernel(&entries)?;
                Ok(-unweighted_alignment(&centered, &self.labels)?)
            }
        }
    }
}

/// Run the SPSA alignment loop. Every produced record is handed to
/// `on_record` before the loop continues, so callers streaming the trace
/// to disk keep the partial trace when a step fails.
///
/// The built-in fiducial family has a single parameter, so `lambda0` must
/// have length 1 here; the SPSA primitives themselves are
/// dimension-agnostic.
pub fn align(
    train: &Dataset,
    graph: &CouplingGraph,
    kcfg: &KernelConfig,
    scfg: &SpsaConfig,
    c_box: f64,
    objective: AlignmentObjective,
    mut on_record: impl FnMut(&TraceRecord) -> Result<()>,
) -> Result<AlignmentTrace> {
    scfg.validate()?;
    kcfg.validate()?;
    if scfg.lambda0.len() != 1 {
        return Err(Error::validation(
            "the fiducial family here is single-parameter; lambda0 must have length 1",
        ));
    }
    let labels = train.labels();
    if !labels.iter().any(|&y| y > 0.0) || !labels.iter().any(|&y| y < 0.0) {
        return Err(Error::validation("training set must contain both classes"));
    }
    let eval = ObjectiveEval { train, graph, kcfg, labels, c_box, objective };
    let mut rng = rng_from_seed(scfg.seed);
    let mut lambda: Vec<f64> = scfg.lambda0.iter().map(|&l| wrap(l)).collect();
    let mut records: Vec<TraceRecord> = Vec::with_capacity(scfg.steps + 1);

    for step in 0..scfg.steps {
        let started = Instant::now();
        let f_star = eval.evaluate(lambda[0])?;
        let (a_i, c_i) = spsa_gains(step, scfg);
        let (lambda_plus, lambda_minus, delta) = spsa_perturb(&lambda, c_i, &mut rng);
        let f_plus = eval.evaluate(lambda_plus[0])?;
        let f_minus = eval.evaluate(lambda_minus[0])?;
        let record = TraceRecord {
            step,
            lambda: lambda.clone(),
            f_star,
            gain_a: Some(a_i),
            gain_c: Some(c_i),
            delta: Some(delta.clone()),
            lambda_plus: Some(lambda_plus),
            lambda_minus: Some(lambda_minus),
            f_plus: Some(f_plus),
            f_minus: Some(f_minus),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        };
        on_record(&record)?;
        records.push(record);
        lambda = spsa_update(&lambda, a_i, c_i, f_plus, f_minus, &delta);
    }

    let started = Instant::now();
    let f_final = eval.evaluate(lambda[0])?;
    let final_record = TraceRecord {
        step: scfg.steps,
        lambda: lambda.clone(),
        f_star: f_final,
        gain_a: None,
        gain_c: None,
        delta: None,
        lambda_plus: None,
        lambda_minus: None,
        f_plus: None,
        f_minus: None,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    on_record(&final_record)?;
    records.push(final_record);

    Ok(AlignmentTrace { records, lambda_star: lambda })
}
