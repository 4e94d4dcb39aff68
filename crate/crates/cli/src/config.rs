//! Experiment configuration: one flat JSON file, every key optional with a
//! documented default; command-line flags override file values.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cokern_core::align::{AlignmentObjective, SpsaConfig};
use cokern_core::kernel::{InvarianceSide, KernelConfig, KernelMode};
use cokern_core::statevector::CouplingGraph;
use cokern_core::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Graph spec: `path:N`, `ring:N`, `heavy-hex:N`, or `file:PATH`
    /// pointing at a JSON graph `{"n": .., "edges": [[a,b], ..]}`.
    pub graph: String,
    /// Perturbation variance ε of the coset data.
    pub epsilon: f64,
    pub train_per_label: usize,
    pub test_per_label: usize,

    pub mode: KernelMode,
    /// Measurement shots R per circuit.
    pub shots: u64,
    pub p_dep: f64,
    pub stretches: Vec<f64>,
    pub side: InvarianceSide,
    /// Fiducial parameter λ used by kernel builds.
    pub lambda: f64,

    pub svm_c: f64,

    pub spsa_steps: usize,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_big_a: f64,
    pub spsa_sigma: f64,
    pub spsa_gamma: f64,
    pub lambda0: Vec<f64>,
    pub objective: AlignmentObjective,

    pub data_seed: u64,
    pub shot_seed: u64,
    pub spsa_seed: u64,

    /// Worker threads for kernel assembly; 0 keeps the rayon default.
    pub threads: usize,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            graph: "path:5".into(),
            epsilon: 0.01,
            train_per_label: 10,
            test_per_label: 50,
            mode: KernelMode::Exact,
            shots: 8192,
            p_dep: 0.0,
            stretches: vec![1.0, 1.3],
            side: InvarianceSide::Left,
            lambda: FRAC_PI_2,
            svm_c: 1.0,
            spsa_steps: 21,
            spsa_a: 0.1,
            spsa_c: 0.1,
            spsa_big_a: 0.0,
            spsa_sigma: 0.602,
            spsa_gamma: 0.101,
            lambda0: vec![0.1],
            objective: AlignmentObjective::Weighted,
            data_seed: 1,
            shot_seed: 2,
            spsa_seed: 3,
            threads: 0,
            out_dir: "out".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_per_label == 0 || self.test_per_label == 0 {
            return Err(Error::validation("per-label counts must be at least 1"));
        }
        if self.epsilon < 0.0 || !self.epsilon.is_finite() {
            return Err(Error::validation("epsilon must be a nonnegative finite number"));
        }
        if !(self.svm_c > 0.0) {
            return Err(Error::validation("svm_c must be positive"));
        }
        self.kernel_config().validate()?;
        self.spsa_config().validate()?;
        self.resolve_graph()?;
        Ok(())
    }

    /// Parse the graph spec, reading the edge-list file if one is named.
    pub fn resolve_graph(&self) -> Result<CouplingGraph> {
        let spec = self.graph.trim();
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::validation(format!("graph spec {spec:?} has no ':'")))?;
        let parse_n = |arg: &str| -> Result<usize> {
            arg.parse::<usize>()
                .map_err(|_| Error::validation(format!("bad vertex count {arg:?} in graph spec")))
        };
        match kind {
            "path" => CouplingGraph::path(parse_n(arg)?),
            "ring" => CouplingGraph::ring(parse_n(arg)?),
            "heavy-hex" => CouplingGraph::heavy_hex_fragment(parse_n(arg)?),
            "file" => {
                let text = std::fs::read_to_string(arg).map_err(|e| {
                    Error::validation(format!("cannot read graph file {arg}: {e}"))
                })?;
                serde_json::from_str(&text).map_err(|e| Error::format(format!("graph file: {e}")))
            }
            other => Err(Error::validation(format!("unknown graph kind {other:?}"))),
        }
    }

    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            mode: self.mode,
            shots: self.shots,
            p_dep: self.p_dep,
            stretches: self.stretches.clone(),
            side: self.side,
            lambda: self.lambda,
            seed: self.shot_seed,
        }
    }

    pub fn spsa_config(&self) -> SpsaConfig {
        SpsaConfig {
            steps: self.spsa_steps,
            a: self.spsa_a,
            c: self.spsa_c,
            big_a: self.spsa_big_a,
            sigma: self.spsa_sigma,
            gamma: self.spsa_gamma,
            lambda0: self.lambda0.clone(),
            seed: self.spsa_seed,
        }
    }
}
