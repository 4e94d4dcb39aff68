//! Diagnostics over kernels and outcome distributions: classification
//! metrics, feature-space geometry computed from Gram entries, total
//! variation distance, and Hamming-weight comparisons between ideal,
//! noisy, and mitigated circuit outputs.

mod fourier;

pub use fourier::{
    fourier_invert, irrep_projector, kernel_fourier_coefficients, subset_fiducial,
    uniform_fiducial, FiniteGroupModel,
};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{apply_noise, zne_extrapolate};
use crate::statevector::hamming_weight_distribution;

/// Accuracy report for one classified set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub decision_values: Vec<f64>,
    pub misclassified: Vec<usize>,
}

pub fn classification_metrics(
    predicted: &[i8],
    truth: &[i8],
    decision_values: &[f64],
) -> Result<ClassMetrics> {
    if predicted.len() != truth.len() || predicted.len() != decision_values.len() {
        return Err(Error::dimension("metrics need equal-length inputs"));
    }
    if predicted.is_empty() {
        return Err(Error::validation("nothing to score"));
    }
    let misclassified: Vec<usize> = predicted
        .iter()
        .zip(truth)
        .enumerate()
        .filter_map(|(i, (p, t))| if p != t { Some(i) } else { None })
        .collect();
    let accuracy = (predicted.len() - misclassified.len()) as f64 / predicted.len() as f64;
    Ok(ClassMetrics { accuracy, decision_values: decision_values.to_vec(), misclassified })
}

/// Feature-space geometry of a labeled training Gram matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometryMetrics {
    pub hs_distance: f64,
    pub variance_plus: f64,
    pub variance_minus: f64,
}

fn class_indices(y: &[f64], sign: f64) -> Vec<usize> {
    (0..y.len()).filter(|&i| y[i] * sign > 0.0).collect()
}

fn check_square(kernel: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if kernel.nrows() != y.len() || kernel.ncols() != y.len() {
        return Err(Error::dimension("kernel must be square and match the labels"));
    }
    Ok(())
}

/// ‖Φ₊ − Φ₋‖²_HS of the class centroids, expanded in kernel entries:
/// mean(K₊₊) + mean(K₋₋) − 2·mean(K₊₋).
pub fn centroid_hs_distance(kernel: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    check_square(kernel, y)?;
    let plus = class_indices(y, 1.0);
    let minus = class_indices(y, -1.0);
    if plus.is_empty() || minus.is_empty() {
        return Err(Error::validation("both classes must be present"));
    }
    let block_mean = |rows: &[usize], cols: &[usize]| -> f64 {
        let mut total = 0.0;
        for &i in rows {
            for &j in cols {
                total += kernel[(i, j)];
            }
        }
        total / (rows.len() * cols.len()) as f64
    };
    Ok(block_mean(&plus, &plus) + block_mean(&minus, &minus) - 2.0 * block_mean(&plus, &minus))
}

/// Mean squared HS distance of a class's points from their centroid:
/// mean of the class diagonal minus the mean within-class entry.
pub fn interlabel_variance(kernel: &DMatrix<f64>, y: &[f64], class: i8) -> Result<f64> {
    check_square(kernel, y)?;
    let idx = class_indices(y, class as f64);
    if idx.is_empty() {
        return Err(Error::validation(format!("class {class} not present")));
    }
    let m = idx.len() as f64;
    let diag: f64 = idx.iter().map(|&i| kernel[(i, i)]).sum::<f64>() / m;
    let mut within = 0.0;
    for &i in &idx {
        for &j in &idx {
            within += kernel[(i, j)];
        }
    }
    Ok(diag - within / (m * m))
}

pub fn geometry_metrics(kernel: &DMatrix<f64>, y: &[f64]) -> Result<GeometryMetrics> {
    Ok(GeometryMetrics {
        hs_distance: centroid_hs_distance(kernel, y)?,
        variance_plus: interlabel_variance(kernel, y, 1)?,
        variance_minus: interlabel_variance(kernel, y, -1)?,
    })
}

/// TVD(P, Q) = ½ Σ |P_i − Q_i|.
pub fn total_variation_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dimension("distributions must have equal length"));
    }
    for (name, dist) in [("P", p), ("Q", q)] {
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::validation(format!("{name} sums to {total}, expected 1")));
        }
        if dist.iter().any(|&v| v < -1e-12) {
            return Err(Error::validation(format!("{name} has negative mass")));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Hamming-weight view of one kernel circuit under the noise model:
/// the ideal bucket distribution, one sampled distribution per stretch,
/// the per-bucket zero-noise extrapolation, and the TVD of each sampled
/// distribution from the ideal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HammingComparison {
    pub stretches: Vec<f64>,
    pub ideal: Vec<f64>,
    /// One sampled bucket distribution per stretch.
    pub sampled: Vec<Vec<f64>>,
    /// Per-bucket first-order extrapolation to zero noise, clamped to [0,1].
    pub mitigated: Vec<f64>,
    pub tvd_from_ideal: Vec<f64>,
}

impl HammingComparison {
    /// Plot-ready CSV: weight, ideal, one column per stretch, mitigated.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("weight,ideal");
        for c in &self.stretches {
            out.push_str(&format!(",c{c}"));
        }
        out.push_str(",mitigated\n");
        for w in 0..self.ideal.len() {
            out.push_str(&format!("{w},{:.16e}", self.ideal[w]));
            for s in &self.sampled {
                out.push_str(&format!(",{:.16e}", s[w]));
            }
            out.push_str(&format!(",{:.16e}\n", self.mitigated[w]));
        }
        out
    }
}

/// Draw a multinomial sample of `shots` outcomes over the buckets.
fn sample_buckets<R: Rng>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<f64>> {
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out.push(remaining as f64 / shots as f64);
            remaining = 0;
            break;
        }
        let cond = if mass_left > 1e-15 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let draw = rand_distr::Binomial::new(remaining, cond)
            .map_err(|e| Error::numerical(format!("bucket sampling: {e}")))?
            .sample(rng);
        out.push(draw as f64 / shots as f64);
        remaining -= draw;
        mass_left -= p;
    }
    debug_assert_eq!(remaining, 0);
    Ok(out)
}

use rand_distr::Distribution;

/// Run one circuit's exact outcome distribution through the depolarizing
/// model at each stretch, sample R shots per stretch, bucket by Hamming
/// weight, and extrapolate each bucket to zero noise.
pub fn hamming_comparison<R: Rng>(
    exact_distribution: &[f64],
    n: usize,
    p_dep: f64,
    stretches: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<HammingComparison> {
    if stretches.len() < 2 {
        return Err(Error::validation("mitigation needs at least two stretches"));
    }
    if shots == 0 {
        return Err(Error::validation("need at least one shot"));
    }
    let ideal = hamming_weight_distribution(exact_distribution, n)?;
    let mut sampled = Vec::with_capacity(stretches.len());
    for &c in stretches {
        let noisy: Vec<f64> = exact_distribution
            .iter()
            .map(|&v| apply_noise(v, p_dep, c, n))
            .collect::<Result<_>>()?;
        let buckets = hamming_weight_distribution(&noisy, n)?;
        sampled.push(sample_buckets(&buckets, shots, rng)?);
    }
    let mitigated: Vec<f64> = (0..=n)
        .map(|w| {
            let per_stretch: Vec<f64> = sampled.iter().map(|s| s[w]).collect();
            zne_extrapolate(&per_stretch, stretches)
        })
        .collect::<Result<_>>()?;
    let tvd_from_ideal = sampled
        .iter()
        .map(|s| total_variation_distance(s, &ideal))
        .collect::<Result<_>>()?;
    Ok(HammingComparison {
        stretches: stretches.to_vec(),
        ideal,
        sampled,
        mitigated,
        tvd_from_ideal,
    })
}
