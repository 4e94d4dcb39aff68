//! The "labeling cosets with error" benchmark generator.
//!
//! An instance fixes a coupling graph, its stabilizer subgroup S, and two
//! representative angle vectors c_±. Each datum picks a uniformly random
//! s ∈ S, folds it into the representative's Euler angles qubit by qubit,
//! and perturbs every angle with Normal(0, ε) noise (variance ε, i.e.
//! standard deviation √ε). Labels are −1 for the c_− coset and +1 for c_+.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{
    compose_euler_with_pauli, datum_to_unitaries, graph_stabilizer_generators,
    sample_stabilizer_element, PauliString, StabilizerGroup,
};
use crate::rng::{mix2, rng_from_seed};
use crate::statevector::CouplingGraph;

/// One instance of the labeling-cosets-with-error problem.
#[derive(Clone, Debug)]
pub struct LceProblem {
    graph: CouplingGraph,
    stabilizer: StabilizerGroup,
    c_plus: Vec<f64>,
    c_minus: Vec<f64>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    graph: CouplingGraph,
    c_plus: Vec<f64>,
    c_minus: Vec<f64>,
    seed: u64,
}

impl LceProblem {
    /// Draw the two coset representatives i.i.d. uniform on
    /// [−π/2, π/2]^{2n} from the given seed.
    pub fn new(graph: CouplingGraph, seed: u64) -> Result<Self> {
        let stabilizer = graph_stabilizer_generators(&graph)?;
        let n = graph.vertex_count();
        let mut rng = rng_from_seed(seed);
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-FRAC_PI_2..=FRAC_PI_2)).collect()
        };
        let c_plus = draw(2 * n);
        let c_minus = draw(2 * n);
        Ok(LceProblem { graph, stabilizer, c_plus, c_minus, seed })
    }

    /// Rebuild a problem from explicit representatives (e.g. a file).
    pub fn from_parts(
        graph: CouplingGraph,
        c_plus: Vec<f64>,
        c_minus: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        for (name, c) in [("c_plus", &c_plus), ("c_minus", &c_minus)] {
            if c.len() != 2 * n {
                return Err(Error::dimension(format!(
                    "{name} has {} entries, expected {}",
                    c.len(),
                    2 * n
                )));
            }
            if c.iter().any(|v| !v.is_finite() || v.abs() > FRAC_PI_2 + 1e-12) {
                return Err(Error::validation(format!(
                    "{name} entries must lie in [−π/2, π/2]"
                )));
            }
        }
        let stabilizer = graph_stabilizer_generators(&graph)?;
        Ok(LceProblem { graph, stabilizer, c_plus, c_minus, seed })
    }

    pub fn graph(&self) -> &CouplingGraph {
        &self.graph
    }

    pub fn stabilizer(&self) -> &StabilizerGroup {
        &self.stabilizer
    }

    pub fn qubit_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn representative(&self, label: i8) -> &[f64] {
        if label >= 0 {
            &self.c_plus
        } else {
            &self.c_minus
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile {
            graph: self.graph.clone(),
            c_plus: self.c_plus.clone(),
            c_minus: self.c_minus.clone(),
            seed: self.seed,
        })
        .expect("problem serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        LceProblem::from_parts(file.graph, file.c_plus, file.c_minus, file.seed)
    }
}

/// A labeled angle vector in the θ3 ≡ 0 Euler family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub theta: Vec<f64>,
    pub label: i8,
}

impl DataPoint {
    pub fn new(theta: Vec<f64>, label: i8) -> Result<Self> {
        if label != 1 && label != -1 {
            return Err(Error::validation(format!("label {label} must be ±1")));
        }
        if theta.is_empty() || theta.len() % 2 != 0 {
            return Err(Error::dimension("angle vector length must be positive and even"));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("angles must be finite"));
        }
        Ok(DataPoint { theta, label })
    }

    pub fn qubit_count(&self) -> usize {
        self.theta.len() / 2
    }
}

/// Generation parameters recorded alongside the points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetProvenance {
    pub problem_seed: u64,
    pub dataset_seed: u64,
    pub epsilon: f64,
    pub per_label: usize,
}

/// An ordered list of data points sharing one qubit count.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    points: Vec<DataPoint>,
    provenance: DatasetProvenance,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>, provenance: DatasetProvenance) -> Result<Self> {
        let n = match points.first() {
            Some(p) => p.qubit_count(),
            None => return Err(Error::validation("dataset must contain at least one point")),
        };
        if points.iter().any(|p| p.qubit_count() != n) {
            return Err(Error::dimension("all points must share one qubit count"));
        }
        let minus = points.iter().filter(|p| p.label < 0).count();
        let plus = points.len() - minus;
        if provenance.per_label != 0 && (minus != provenance.per_label || plus != provenance.per_label)
        {
            return Err(Error::validation(format!(
                "label counts ({minus}, {plus}) do not match declared {} per label",
                provenance.per_label
            )));
        }
        Ok(Dataset { n, points, provenance })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn labels(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.label as f64).collect()
    }

    pub fn provenance(&self) -> &DatasetProvenance {
        &self.provenance
    }

    /// CSV with header `label,theta_0,…,theta_{2n-1}`; angles carry 17
    /// significant digits so the round trip is exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label");
        for i in 0..2 * self.n {
            out.push_str(&format!(",theta_{i}"));
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{}", p.label));
            for t in &p.theta {
                out.push_str(&format!(",{t:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let width = reader
            .headers()
            .map_err(|e| Error::format(e.to_string()))?
            .len();
        if width < 3 || (width - 1) % 2 != 0 {
            return Err(Error::format(format!(
                "dataset CSV must have a label column plus an even number of angle columns, got {width}"
            )));
        }
        let mut points = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::format(e.to_string()))?;
            if record.len() != width {
                return Err(Error::format("ragged CSV row"));
            }
            let label: i8 = record[0]
                .trim()
                .parse()
                .map_err(|_| Error::format(format!("bad label {:?}", &record[0])))?;
            let theta = record
                .iter()
                .skip(1)
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::format(format!("bad angle {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            points.push(DataPoint::new(theta, label)?);
        }
        Dataset::new(
            points,
            DatasetProvenance { problem_seed: 0, dataset_seed: 0, epsilon: 0.0, per_label: 0 },
        )
    }

    /// SHA-256 of the CSV serialization, the identifier kernel files and
    /// models use to verify pipeline integrity.
    pub fn checksum(&self) -> String {
        let digest = Sha256::digest(self.to_csv_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Build one datum from an explicit stabilizer element (the sampling core,
/// exposed for tests that need to pin s).
pub fn datum_from_parts<R: Rng>(
    problem: &LceProblem,
    label: i8,
    element: &PauliString,
    epsilon: f64,
    rng: &mut R,
) -> Result<DataPoint> {
    if epsilon < 0.0 {
        return Err(Error::validation("perturbation variance must be nonnegative"));
    }
    if element.len() != problem.qubit_count() {
        return Err(Error::dimension("stabilizer element length != qubit count"));
    }
    let base = problem.representative(label);
    let mut theta = Vec::with_capacity(base.len());
    for (k, pair) in base.chunks_exact(2).enumerate() {
        let (t1, t2) = compose_euler_with_pauli((pair[0], pair[1]), element.letter(k));
        theta.push(t1);
        theta.push(t2);
    }
    if epsilon > 0.0 {
        let normal = Normal::new(0.0, epsilon.sqrt())
            .map_err(|e| Error::validation(format!("bad perturbation parameters: {e}")))?;
        for t in &mut theta {
            *t += normal.sample(rng);
        }
    }
    DataPoint::new(theta, if label >= 0 { 1 } else { -1 })
}

/// Draw one labeled datum: uniform s ∈ S composed into the representative,
/// then i.i.d. Normal(0, ε) on every angle.
pub fn sample_datum<R: Rng>(
    problem: &LceProblem,
    label: i8,
    epsilon: f64,
    rng: &mut R,
) -> Result<DataPoint> {
    let element = sample_stabilizer_element(problem.stabilizer(), rng);
    datum_from_parts(problem, label, &element, epsilon, rng)
}

/// Generate a dataset with `per_label` points per class: the −1 block
/// first, then the +1 block. Each point's randomness is derived from
/// (seed, index), so generation order or parallelism cannot change the
/// result.
pub fn generate_dataset(
    problem: &LceProblem,
    per_label: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Dataset> {
    if per_label == 0 {
        return Err(Error::validation("need at least one point per label"));
    }
    let mut points = Vec::with_capacity(2 * per_label);
    for idx in 0..2 * per_label {
        let label: i8 = if idx < per_label { -1 } else { 1 };
        let mut rng = rng_from_seed(mix2(seed, idx as u64));
        points.push(sample_datum(problem, label, epsilon, &mut rng)?);
    }
    Dataset::new(
        points,
        DatasetProvenance {
            problem_seed: problem.seed(),
            dataset_seed: seed,
            epsilon,
            per_label,
        },
    )
}

/// Frobenius distance ‖D_a − D_b‖_F between the product unitaries of two
/// points, computed without forming 2^n matrices via
/// ‖A−B‖_F² = 2·2^n − 2·Re ∏_k tr(A_k† B_k).
pub fn representation_distance(a: &DataPoint, b: &DataPoint) -> Result<f64> {
    if a.theta.len() != b.theta.len() {
        return Err(Error::dimension("points have different qubit counts"));
    }
    let ga = datum_to_unitaries(&a.theta)?;
    let gb = datum_to_unitaries(&b.theta)?;
    let n = ga.len();
    let prod = ga
        .iter()
        .zip(&gb)
        .map(|(x, y)| x.adjoint().mul(y).trace())
        .product::<num_complex::Complex64>();
    let dim = (1u64 << n) as f64;
    let sq = (2.0 * dim - 2.0 * prod.re).max(0.0);
    Ok(sq.sqrt())
}
