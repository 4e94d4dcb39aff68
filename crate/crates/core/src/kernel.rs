//! Covariant kernel evaluation: exact fidelities on the statevector, shot
//! sampling, a depolarizing noise model with stretch factors, first-order
//! zero-noise extrapolation, Gram-matrix assembly, and PSD repair.
//!
//! Entry (i,j) of a matrix flows through
//! `exact → [noise per stretch] → [shots per stretch] → [ZNE]` depending
//! on the configured mode. Every entry derives its RNG from
//! (master seed, i, j), so assembly order and thread schedule never
//! change the result.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::datum_to_unitaries;
use crate::lce::Dataset;
use crate::rng::{mix3, rng_from_seed};
use crate::statevector::{prepare_fiducial, CouplingGraph, Gate1Q, QuantumState};

/// Which group-multiplication the kernel is invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvarianceSide {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    Exact,
    Shots,
    NoisyShots,
    Mitigated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelConfig {
    pub mode: KernelMode,
    /// Measurement shots R per circuit (per stretch in mitigated mode).
    pub shots: u64,
    /// Depolarizing rate per unit stretch.
    pub p_dep: f64,
    /// Noise stretch factors, strictly increasing.
    pub stretches: Vec<f64>,
    pub side: InvarianceSide,
    /// Fiducial-state parameter λ.
    pub lambda: f64,
    /// Master seed; per-entry seeds are derived from it.
    pub seed: u64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            mode: KernelMode::Exact,
            shots: 8192,
            p_dep: 0.0,
            stretches: vec![1.0, 1.3],
            side: InvarianceSide::Left,
            lambda: std::f64::consts::FRAC_PI_2,
            seed: 0,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p_dep) {
            return Err(Error::validation(format!(
                "depolarizing rate {} must be in [0, 1)",
                self.p_dep
            )));
        }
        if !self.lambda.is_finite() {
            return Err(Error::validation("lambda must be finite"));
        }
        match self.mode {
            KernelMode::Exact => {}
            KernelMode::Shots | KernelMode::NoisyShots => {
                if self.shots == 0 {
                    return Err(Error::validation("sampling modes need shots >= 1"));
                }
            }
            KernelMode::Mitigated => {
                if self.shots == 0 {
                    return Err(Error::validation("sampling modes need shots >= 1"));
                }
                if self.stretches.len() < 2 {
                    return Err(Error::validation("mitigation needs at least 2 stretches"));
                }
            }
        }
        if self.stretches.is_empty() {
            return Err(Error::validation("stretch list must not be empty"));
        }
        if self.stretches.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::validation("stretches must be positive"));
        }
        if self.stretches.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("stretches must be strictly increasing"));
        }
        if self.p_dep > 0.0 {
            let max_c = self.stretches.last().copied().unwrap_or(1.0);
            if self.p_dep * max_c >= 1.0 {
                return Err(Error::validation(format!(
                    "effective depolarizing rate {} at max stretch must be < 1",
                    self.p_dep * max_c
                )));
            }
        }
        Ok(())
    }
}

/// One exact kernel entry K(x, z) = |⟨ψ| D_x† D_z |ψ⟩|² (left side) or
/// |⟨ψ| D_x D_z† |ψ⟩|² (right side), for per-qubit gate sequences.
pub fn kernel_entry_exact(
    x_gates: &[Gate1Q],
    z_gates: &[Gate1Q],
    fiducial: &QuantumState,
    side: InvarianceSide,
) -> Result<f64> {
    let n = fiducial.qubit_count();
    if x_gates.len() != n || z_gates.len() != n {
        return Err(Error::dimension(format!(
            "gate sequences of lengths {}/{} against {n}-qubit fiducial",
            x_gates.len(),
            z_gates.len()
        )));
    }
    let mut state = fiducial.clone();
    match side {
        InvarianceSide::Left => {
            for (q, g) in z_gates.iter().enumerate() {
                state.apply_1q(q, g)?;
            }
            for (q, g) in x_gates.iter().enumerate() {
                state.apply_1q(q, &g.adjoint())?;
            }
        }
        InvarianceSide::Right => {
            for (q, g) in z_gates.iter().enumerate() {
                state.apply_1q(q, &g.adjoint())?;
            }
            for (q, g) in x_gates.iter().enumerate() {
                state.apply_1q(q, g)?;
            }
        }
    }
    let amp = fiducial.overlap(&state)?;
    Ok(amp.norm_sqr().min(1.0 + 1e-10))
}

/// Outcome distribution of the full kernel-estimation circuit
/// V_λ† D_x† D_z V_λ |0^n⟩ (left side). Bucket 0 of its Hamming-weight
/// distribution is the kernel value.
pub fn kernel_circuit_distribution(
    x_gates: &[Gate1Q],
    z_gates: &[Gate1Q],
    graph: &CouplingGraph,
    lambda: f64,
    side: InvarianceSide,
) -> Result<Vec<f64>> {
    let n = graph.vertex_count();
    if x_gates.len() != n || z_gates.len() != n {
        return Err(Error::dimension("gate sequences must match graph size"));
    }
    let mut state = prepare_fiducial(graph, lambda)?;
    match side {
        InvarianceSide::Left => {
            for (q, g) in z_gates.iter().enumerate() {
                state.apply_1q(q, g)?;
            }
            for (q, g) in x_gates.iter().enumerate() {
                state.apply_1q(q, &g.adjoint())?;
            }
        }
        InvarianceSide::Right => {
            for (q, g) in z_gates.iter().enumerate() {
                state.apply_1q(q, &g.adjoint())?;
            }
            for (q, g) in x_gates.iter().enumerate() {
                state.apply_1q(q, g)?;
            }
        }
    }
    // undo the fiducial preparation: CZ layer (self-inverse), then R_Y(−λ)
    for &(a, b) in graph.edges() {
        state.apply_cz(a, b)?;
    }
    let ry_inv = Gate1Q::ry(-lambda);
    for q in 0..n {
        state.apply_1q(q, &ry_inv)?;
    }
    Ok(state.outcome_distribution())
}

/// Frequency estimate of a kernel entry from R measurement shots:
/// Binomial(R, value)/R.
pub fn kernel_entry_sampled<R: Rng>(exact_value: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::validation("need at least one shot"));
    }
    // guard tiny fp excursions outside [0,1]
    let p = exact_value.clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p)
        .map_err(|e| Error::validation(format!("bad binomial parameters: {e}")))?;
    Ok(dist.sample(rng) as f64 / shots as f64)
}

/// Global depolarizing channel on the outcome probability, linear in the
/// stretch factor: v ↦ (1 − p·c)·v + p·c·2^{−n}.
pub fn apply_noise(value: f64, p_dep: f64, stretch: f64, n: usize) -> Result<f64> {
    let q = p_dep * stretch;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::validation(format!(
            "effective depolarizing rate {q} outside [0, 1)"
        )));
    }
    Ok((1.0 - q) * value + q / (1u64 << n) as f64)
}

fn fit_intercept(values: &[f64], stretches: &[f64]) -> Result<f64> {
    if values.len() != stretches.len() {
        return Err(Error::dimension("one estimate per stretch required"));
    }
    if values.len() < 2 {
        return Err(Error::validation("extrapolation needs at least 2 stretches"));
    }
    for w in stretches.windows(2) {
        if w[0] == w[1] {
            return Err(Error::validation("duplicate stretch factors"));
        }
    }
    let k = values.len() as f64;
    let sum_c: f64 = stretches.iter().sum();
    let sum_cc: f64 = stretches.iter().map(|c| c * c).sum();
    let sum_v: f64 = values.iter().sum();
    let sum_cv: f64 = stretches.iter().zip(values).map(|(c, v)| c * v).sum();
    let det = k * sum_cc - sum_c * sum_c;
    if det.abs() < 1e-14 {
        return Err(Error::numerical("degenerate stretch design"));
    }
    // intercept of the least-squares line at c = 0
    Ok((sum_cc * sum_v - sum_c * sum_cv) / det)
}

/// First-order zero-noise extrapolation: least-squares line through
/// (c_i, E_i) evaluated at c = 0, clamped into [0, 1].
pub fn zne_extrapolate(values: &[f64], stretches: &[f64]) -> Result<f64> {
    Ok(fit_intercept(values, stretches)?.clamp(0.0, 1.0))
}

/// Run one entry through the configured estimation pipeline.
/// Returns the estimate and whether extrapolation left [0, 1].
fn estimate_entry<R: Rng>(exact: f64, n: usize, cfg: &KernelConfig, rng: &mut R) -> Result<(f64, bool)> {
    match cfg.mode {
        KernelMode::Exact => Ok((exact, false)),
        KernelMode::Shots => Ok((kernel_entry_sampled(exact, cfg.shots, rng)?, false)),
        KernelMode::NoisyShots => {
            let noisy = apply_noise(exact, cfg.p_dep, cfg.stretches[0], n)?;
            Ok((kernel_entry_sampled(noisy, cfg.shots, rng)?, false))
        }
        KernelMode::Mitigated => {
            let mut estimates = Vec::with_capacity(cfg.stretches.len());
            for &c in &cfg.stretches {
                let noisy = apply_noise(exact, cfg.p_dep, c, n)?;
                estimates.push(kernel_entry_sampled(noisy, cfg.shots, rng)?);
            }
            let raw = fit_intercept(&estimates, &cfg.stretches)?;
            Ok((raw.clamp(0.0, 1.0), !(0.0..=1.0).contains(&raw)))
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KernelFlags {
    /// Entry (i,j) and (j,i) share one evaluation (training matrices).
    pub symmetrized: bool,
    /// PSD repair policy applied, if any.
    pub psd_repaired: Option<PsdPolicy>,
    /// Smallest eigenvalue seen when repair (or a check) ran.
    pub min_eigenvalue: Option<f64>,
    /// Entries whose extrapolation left [0, 1] and were clamped.
    pub clamped_entries: usize,
}

/// A kernel matrix together with the config and dataset identifiers that
/// produced it.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    entries: DMatrix<f64>,
    row_id: String,
    col_id: String,
    config: KernelConfig,
    flags: KernelFlags,
}

impl KernelMatrix {
    pub fn from_parts(
        entries: DMatrix<f64>,
        row_id: String,
        col_id: String,
        config: KernelConfig,
        flags: KernelFlags,
    ) -> Result<Self> {
        let slack = match config.mode {
            KernelMode::Exact => 1e-9,
            _ => 3.0 / (config.shots.max(1) as f64).sqrt(),
        };
        for &v in entries.iter() {
            if !v.is_finite() || v < -slack || v > 1.0 + slack {
                return Err(Error::numerical(format!(
                    "kernel entry {v} outside [-{slack}, 1+{slack}]"
                )));
            }
        }
        Ok(KernelMatrix { entries, row_id, col_id, config, flags })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn row_id(&self) -> &str {
        &self.row_id
    }

    pub fn col_id(&self) -> &str {
        &self.col_id
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn flags(&self) -> &KernelFlags {
        &self.flags
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Smallest eigenvalue of the symmetrized matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::dimension("eigenvalues need a square matrix"));
        }
        let sym = (&self.entries + self.entries.transpose()) * 0.5;
        let eigs = nalgebra::SymmetricEigen::new(sym).eigenvalues;
        Ok(eigs.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// CSV of decimal entries, one matrix row per line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.nrows() {
            let row: Vec<String> =
                (0..self.ncols()).map(|j| format!("{:.16e}", self.entries[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_csv_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Sidecar metadata written next to a kernel matrix CSV: the config
/// snapshot, dataset identifiers, flags, and the matrix's own checksum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelMeta {
    pub config: KernelConfig,
    pub rows: usize,
    pub cols: usize,
    pub row_dataset_sha: String,
    pub col_dataset_sha: String,
    pub flags: KernelFlags,
    pub matrix_sha: String,
    /// Wall-clock build time; informational only, not part of the
    /// byte-identical payload contract.
    pub elapsed_ms: u64,
}

impl KernelMeta {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("meta serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))
    }
}

impl KernelMatrix {
    pub fn meta(&self, elapsed_ms: u64) -> KernelMeta {
        KernelMeta {
            config: self.config.clone(),
            rows: self.nrows(),
            cols: self.ncols(),
            row_dataset_sha: self.row_id.clone(),
            col_dataset_sha: self.col_id.clone(),
            flags: self.flags.clone(),
            matrix_sha: self.checksum(),
            elapsed_ms,
        }
    }

    /// Rehydrate a matrix from its CSV payload and sidecar, verifying the
    /// dimensions and the recorded checksum.
    pub fn from_csv_and_meta(csv_text: &str, meta: &KernelMeta) -> Result<Self> {
        let entries = matrix_from_csv_str(csv_text)?;
        if entries.nrows() != meta.rows || entries.ncols() != meta.cols {
            return Err(Error::format(format!(
                "matrix is {}×{}, sidecar says {}×{}",
                entries.nrows(),
                entries.ncols(),
                meta.rows,
                meta.cols
            )));
        }
        let km = KernelMatrix::from_parts(
            entries,
            meta.row_dataset_sha.clone(),
            meta.col_dataset_sha.clone(),
            meta.config.clone(),
            meta.flags.clone(),
        )?;
        if km.checksum() != meta.matrix_sha {
            return Err(Error::validation(
                "matrix checksum does not match its sidecar; files out of sync",
            ));
        }
        Ok(km)
    }
}

/// Parse a bare matrix CSV (no header) into a dense matrix.
pub fn matrix_from_csv_str(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(format!("bad matrix entry {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::format("ragged matrix CSV"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format("empty matrix CSV"));
    }
    let (m, k) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, k, |i, j| rows[i][j]))
}

fn dataset_gates(data: &Dataset) -> Result<Vec<Vec<Gate1Q>>> {
    data.points().iter().map(|p| datum_to_unitaries(&p.theta)).collect()
}

/// Assemble the kernel matrix between two datasets. When rows and columns
/// are the same dataset only the upper triangle is evaluated and mirrored;
/// in exact mode the training diagonal is pinned to 1.
pub fn build_kernel_matrix(
    rows: &Dataset,
    cols: &Dataset,
    graph: &CouplingGraph,
    cfg: &KernelConfig,
) -> Result<KernelMatrix> {
    cfg.validate()?;
    let n = graph.vertex_count();
    if rows.qubit_count() != n || cols.qubit_count() != n {
        return Err(Error::dimension(format!(
            "datasets on {}/{} qubits against a {n}-vertex graph",
            rows.qubit_count(),
            cols.qubit_count()
        )));
    }
    let fiducial = prepare_fiducial(graph, cfg.lambda)?;
    let row_gates = dataset_gates(rows)?;
    let col_gates = dataset_gates(cols)?;
    let symmetric = rows == cols;
    let (m, mc) = (rows.len(), cols.len());

    let tasks: Vec<(usize, usize)> = if symmetric {
        (0..m).flat_map(|i| (i..mc).map(move |j| (i, j))).collect()
    } else {
        (0..m).flat_map(|i| (0..mc).map(move |j| (i, j))).collect()
    };

    let computed: Vec<(usize, usize, f64, bool)> = tasks
        .into_par_iter()
        .map(|(i, j)| -> Result<(usize, usize, f64, bool)> {
            let exact = if symmetric && i == j && cfg.mode == KernelMode::Exact {
                1.0
            } else {
                kernel_entry_exact(&row_gates[i], &col_gates[j], &fiducial, cfg.side)?
            };
            let mut rng = rng_from_seed(mix3(cfg.seed, i as u64, j as u64));
            let (value, clamped) = estimate_entry(exact, n, cfg, &mut rng)?;
            Ok((i, j, value, clamped))
        })
        .collect::<Result<_>>()?;

    let mut entries = DMatrix::zeros(m, mc);
    let mut clamped_total = 0usize;
    for (i, j, v, clamped) in computed {
        entries[(i, j)] = v;
        if symmetric {
            entries[(j, i)] = v;
        }
        if clamped {
            clamped_total += 1;
        }
    }

    KernelMatrix::from_parts(
        entries,
        rows.checksum(),
        cols.checksum(),
        cfg.clone(),
        KernelFlags {
            symmetrized: symmetric,
            psd_repaired: None,
            min_eigenvalue: None,
            clamped_entries: clamped_total,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsdPolicy {
    /// Eigendecompose, zero the negative eigenvalues, reconstruct.
    Clip,
    /// Add δI with δ = |min eigenvalue| + 1e-10, renormalize diagonal to 1.
    Jitter,
}

/// Symmetrize, then project the matrix back onto the PSD cone according
/// to the policy. No-op (beyond recording the minimum eigenvalue) when the
/// input is already PSD.
pub fn psd_repair(kernel: &KernelMatrix, policy: PsdPolicy) -> Result<KernelMatrix> {
    if !kernel.is_square() {
        return Err(Error::dimension("PSD repair needs a square matrix"));
    }
    let sym = (kernel.entries() + kernel.entries().transpose()) * 0.5;
    let eigen = nalgebra::SymmetricEigen::new(sym.clone());
    let min_eig = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);

    let repaired = if min_eig >= 0.0 {
        sym
    } else {
        match policy {
            PsdPolicy::Clip => {
                let mut vals = eigen.eigenvalues.clone();
                for v in vals.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                &eigen.eigenvectors * DMatrix::from_diagonal(&vals) * eigen.eigenvectors.transpose()
            }
            PsdPolicy::Jitter => {
                let delta = -min_eig + 1e-10;
                let m = sym.nrows();
                (sym + DMatrix::identity(m, m) * delta) / (1.0 + delta)
            }
        }
    };

    let mut flags = kernel.flags().clone();
    flags.symmetrized = true;
    flags.psd_repaired = Some(policy);
    flags.min_eigenvalue = Some(min_eig);
    KernelMatrix::from_parts(
        repaired,
        kernel.row_id().to_string(),
        kernel.col_id().to_string(),
        kernel.config().clone(),
        flags,
    )
}
