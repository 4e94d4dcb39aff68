//! The eight experiment subcommands. Every artifact is written atomically
//! and all randomness flows from the named seeds in the config, so reruns
//! with identical inputs produce byte-identical payloads.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use cokern_core::align::align;
use cokern_core::analysis::{
    classification_metrics, geometry_metrics, hamming_comparison, subset_fiducial,
    uniform_fiducial, FiniteGroupModel,
};
use cokern_core::group::{datum_to_unitaries, ZpStarGroup};
use cokern_core::kernel::{
    build_kernel_matrix, kernel_circuit_distribution, psd_repair, KernelMatrix, KernelMeta,
    KernelMode, PsdPolicy,
};
use cokern_core::lce::{generate_dataset, Dataset, LceProblem};
use cokern_core::rng::{mix2, rng_from_seed};
use cokern_core::svm::{decision_value, solve_dual, SvmModel};
use cokern_core::{Error, Result};

use crate::config::ExperimentConfig;
use crate::util::{read_to_string, write_atomic};

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    Path::new(&cfg.out_dir).join(name)
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::from_csv_str(&read_to_string(path)?)
}

fn meta_path(kernel_csv: &Path) -> PathBuf {
    kernel_csv.with_extension("meta.json")
}

fn load_kernel(path: &Path) -> Result<(KernelMatrix, KernelMeta)> {
    let meta = KernelMeta::from_json(&read_to_string(&meta_path(path))?)?;
    let km = KernelMatrix::from_csv_and_meta(&read_to_string(path)?, &meta)?;
    Ok((km, meta))
}

pub fn gen_lce(cfg: &ExperimentConfig) -> Result<()> {
    let graph = cfg.resolve_graph()?;
    let problem = LceProblem::new(graph, cfg.data_seed)?;
    let train = generate_dataset(&problem, cfg.train_per_label, cfg.epsilon, mix2(cfg.data_seed, 1))?;
    let test = generate_dataset(&problem, cfg.test_per_label, cfg.epsilon, mix2(cfg.data_seed, 2))?;
    write_atomic(&out_path(cfg, "problem.json"), &problem.to_json())?;
    write_atomic(&out_path(cfg, "train.csv"), &train.to_csv_string())?;
    write_atomic(&out_path(cfg, "test.csv"), &test.to_csv_string())?;
    println!(
        "generated LCE data: n={} qubits, {} train + {} test points per label, epsilon={}, seed={}",
        problem.qubit_count(),
        cfg.train_per_label,
        cfg.test_per_label,
        cfg.epsilon,
        cfg.data_seed
    );
    println!("wrote {}, train.csv, test.csv", out_path(cfg, "problem.json").display());
    Ok(())
}

pub fn kernel(
    cfg: &ExperimentConfig,
    rows: &Path,
    cols: &Path,
    name: &str,
    lambda: Option<f64>,
) -> Result<()> {
    let graph = cfg.resolve_graph()?;
    let rows_ds = load_dataset(rows)?;
    let cols_ds = load_dataset(cols)?;
    let mut kcfg = cfg.kernel_config();
    if let Some(l) = lambda {
        kcfg.lambda = l;
    }
    let started = Instant::now();
    let km = build_kernel_matrix(&rows_ds, &cols_ds, &graph, &kcfg)?;
    let elapsed_ms = started.elapsed().as_millis() as u64;
    let csv_path = out_path(cfg, &format!("{name}.csv"));
    write_atomic(&csv_path, &km.to_csv_string())?;
    let mut meta = km.meta(elapsed_ms);
    if km.is_square() {
        meta.flags.min_eigenvalue = Some(km.min_eigenvalue()?);
    }
    write_atomic(&out_path(cfg, &format!("{name}.meta.json")), &meta.to_json())?;
    println!(
        "kernel {}x{} mode={:?} lambda={:.6} -> {} ({} ms)",
        km.nrows(),
        km.ncols(),
        kcfg.mode,
        kcfg.lambda,
        csv_path.display(),
        elapsed_ms
    );
    Ok(())
}

#[derive(Serialize)]
struct AlignedResult<'a> {
    lambda_star: &'a [f64],
    f_star_initial: f64,
    f_star_final: f64,
    steps: usize,
}

pub fn cmd_align(cfg: &ExperimentConfig, train: &Path, test: Option<&Path>) -> Result<()> {
    let graph = cfg.resolve_graph()?;
    let train_ds = load_dataset(train)?;
    let trace_path = out_path(cfg, "trace.jsonl");
    if let Some(parent) = trace_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    // the trace file is append-only so a failed run keeps its prefix
    let mut file = std::fs::File::create(&trace_path)?;
    use std::io::Write;
    let trace = align(
        &train_ds,
        &graph,
        &cfg.kernel_config(),
        &cfg.spsa_config(),
        cfg.svm_c,
        cfg.objective,
        |record| {
            let line = serde_json::to_string(record)
                .map_err(|e| Error::format(e.to_string()))?;
            writeln!(file, "{line}")?;
            file.flush()?;
            Ok(())
        },
    )?;

    let mut cost_csv = String::from("step,lambda,f_star,f_plus,f_minus\n");
    for r in &trace.records {
        cost_csv.push_str(&format!(
            "{},{:.16e},{:.16e},{},{}\n",
            r.step,
            r.lambda[0],
            r.f_star,
            r.f_plus.map(|v| format!("{v:.16e}")).unwrap_or_default(),
            r.f_minus.map(|v| format!("{v:.16e}")).unwrap_or_default(),
        ));
    }
    write_atomic(&out_path(cfg, "cost_vs_step.csv"), &cost_csv)?;

    // classification accuracy of the per-step λ against a held-out set
    if let Some(test) = test {
        let test_ds = load_dataset(test)?;
        let labels = train_ds.labels();
        let mut acc_csv = String::from("step,lambda,accuracy\n");
        for r in &trace.records {
            let kcfg = cokern_core::kernel::KernelConfig {
                lambda: r.lambda[0],
                ..cfg.kernel_config()
            };
            let ktrain = build_kernel_matrix(&train_ds, &train_ds, &graph, &kcfg)?;
            let entries = if kcfg.mode == KernelMode::Exact {
                ktrain.entries().clone()
            } else {
                psd_repair(&ktrain, PsdPolicy::Clip)?.entries().clone()
            };
            let (model, _) = solve_dual(&entries, &labels, cfg.svm_c)?;
            let ktest = build_kernel_matrix(&test_ds, &train_ds, &graph, &kcfg)?;
            let correct = predictions(&model, &ktest)?
                .iter()
                .zip(test_ds.points())
                .filter(|((_, l), p)| *l == p.label)
                .count();
            acc_csv.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                r.step,
                r.lambda[0],
                correct as f64 / test_ds.len() as f64
            ));
        }
        write_atomic(&out_path(cfg, "accuracy_vs_step.csv"), &acc_csv)?;
    }

    let result = AlignedResult {
        lambda_star: &trace.lambda_star,
        f_star_initial: trace.records.first().map(|r| r.f_star).unwrap_or(f64::NAN),
        f_star_final: trace.records.last().map(|r| r.f_star).unwrap_or(f64::NAN),
        steps: cfg.spsa_steps,
    };
    write_atomic(
        &out_path(cfg, "aligned.json"),
        &serde_json::to_string_pretty(&result).expect("result serialization cannot fail"),
    )?;
    println!(
        "aligned lambda* = {:?} after {} steps (F* {:.6} -> {:.6})",
        trace.lambda_star, cfg.spsa_steps, result.f_star_initial, result.f_star_final
    );
    Ok(())
}

pub fn train(cfg: &ExperimentConfig, kernel_csv: &Path, data: &Path) -> Result<()> {
    let (km, meta) = load_kernel(kernel_csv)?;
    let train_ds = load_dataset(data)?;
    let sha = train_ds.checksum();
    if meta.row_dataset_sha != sha || meta.col_dataset_sha != sha {
        return Err(Error::validation(
            "kernel was not built from this training dataset (checksum mismatch)",
        ));
    }
    let entries = if meta.config.mode == KernelMode::Exact {
        km.entries().clone()
    } else {
        psd_repair(&km, PsdPolicy::Clip)?.entries().clone()
    };
    let labels = train_ds.labels();
    let (mut model, report) = solve_dual(&entries, &labels, cfg.svm_c)?;
    if !report.converged {
        return Err(Error::numerical(format!(
            "dual solver hit the iteration cap (KKT violation {:.3e})",
            report.max_kkt_violation
        )));
    }
    if model.degenerate {
        println!("warning: single-class training data; constant classifier returned");
    }
    model.train_kernel_sha = Some(meta.matrix_sha.clone());
    model.train_dataset_sha = Some(sha);
    write_atomic(&out_path(cfg, "model.json"), &model.to_json())?;
    println!(
        "trained: F*={:.6}, {} support vectors, {} pair updates, max KKT violation {:.2e}",
        report.objective,
        model.support.len(),
        report.iterations,
        report.max_kkt_violation
    );
    println!("wrote {}", out_path(cfg, "model.json").display());
    Ok(())
}

fn predictions(model: &SvmModel, km: &KernelMatrix) -> Result<Vec<(f64, i8)>> {
    (0..km.nrows())
        .map(|r| {
            let row: Vec<f64> = (0..km.ncols()).map(|c| km.entries()[(r, c)]).collect();
            let d = decision_value(model, &row)?;
            Ok((d, if d >= 0.0 { 1 } else { -1 }))
        })
        .collect()
}

pub fn predict_cmd(cfg: &ExperimentConfig, model_path: &Path, kernel_csv: &Path) -> Result<()> {
    let model = SvmModel::from_json(&read_to_string(model_path)?)?;
    let (km, meta) = load_kernel(kernel_csv)?;
    if let Some(expected) = &model.train_dataset_sha {
        if &meta.col_dataset_sha != expected {
            return Err(Error::validation(
                "kernel columns do not come from the model's training dataset (checksum mismatch)",
            ));
        }
    }
    let preds = predictions(&model, &km)?;
    let mut csv = String::from("index,decision_value,label\n");
    for (i, (d, l)) in preds.iter().enumerate() {
        csv.push_str(&format!("{i},{d:.16e},{l}\n"));
    }
    write_atomic(&out_path(cfg, "predictions.csv"), &csv)?;
    let plus = preds.iter().filter(|(_, l)| *l > 0).count();
    println!(
        "predicted {} points ({} labeled +1, {} labeled -1) -> {}",
        preds.len(),
        plus,
        preds.len() - plus,
        out_path(cfg, "predictions.csv").display()
    );
    Ok(())
}

#[derive(Serialize)]
struct MetricsReport {
    accuracy: f64,
    misclassified: Vec<usize>,
    decision_values: Vec<f64>,
    hs_distance: f64,
    variance_plus: f64,
    variance_minus: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hamming_pair: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tvd_from_ideal: Option<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
pub fn diagnose(
    cfg: &ExperimentConfig,
    model_path: &Path,
    train_kernel: &Path,
    test_kernel: &Path,
    train_data: &Path,
    test_data: &Path,
    hamming: Option<(usize, usize)>,
) -> Result<()> {
    let model = SvmModel::from_json(&read_to_string(model_path)?)?;
    let (ktrain, train_meta) = load_kernel(train_kernel)?;
    let (ktest, test_meta) = load_kernel(test_kernel)?;
    let train_ds = load_dataset(train_data)?;
    let test_ds = load_dataset(test_data)?;

    if let Some(expected) = &model.train_kernel_sha {
        if &train_meta.matrix_sha != expected {
            return Err(Error::validation(
                "training kernel does not match the model (checksum mismatch)",
            ));
        }
    }
    if let Some(expected) = &model.train_dataset_sha {
        if &test_meta.col_dataset_sha != expected {
            return Err(Error::validation(
                "test kernel columns do not come from the model's training dataset",
            ));
        }
    }
    if test_meta.row_dataset_sha != test_ds.checksum() {
        return Err(Error::validation("test kernel rows do not come from this test dataset"));
    }

    let preds = predictions(&model, &ktest)?;
    let predicted: Vec<i8> = preds.iter().map(|(_, l)| *l).collect();
    let values: Vec<f64> = preds.iter().map(|(d, _)| *d).collect();
    let truth: Vec<i8> = test_ds.points().iter().map(|p| p.label).collect();
    let class = classification_metrics(&predicted, &truth, &values)?;
    let geometry = geometry_metrics(ktrain.entries(), &model.labels)?;

    let mut csv = String::from("index,decision_value,true_label,predicted_label\n");
    for (i, ((d, l), t)) in preds.iter().zip(&truth).enumerate() {
        csv.push_str(&format!("{i},{d:.16e},{t},{l}\n"));
    }
    write_atomic(&out_path(cfg, "decision_values.csv"), &csv)?;

    let mut report = MetricsReport {
        accuracy: class.accuracy,
        misclassified: class.misclassified.clone(),
        decision_values: class.decision_values.clone(),
        hs_distance: geometry.hs_distance,
        variance_plus: geometry.variance_plus,
        variance_minus: geometry.variance_minus,
        hamming_pair: None,
        tvd_from_ideal: None,
    };

    if let Some((i, j)) = hamming {
        if i >= train_ds.len() || j >= train_ds.len() {
            return Err(Error::validation(format!(
                "hamming pair ({i},{j}) out of range for {} training points",
                train_ds.len()
            )));
        }
        let graph = cfg.resolve_graph()?;
        let gi = datum_to_unitaries(&train_ds.points()[i].theta)?;
        let gj = datum_to_unitaries(&train_ds.points()[j].theta)?;
        let dist = kernel_circuit_distribution(
            &gi,
            &gj,
            &graph,
            train_meta.config.lambda,
            train_meta.config.side,
        )?;
        let mut rng = rng_from_seed(cfg.shot_seed);
        let cmp = hamming_comparison(
            &dist,
            graph.vertex_count(),
            cfg.p_dep.max(train_meta.config.p_dep),
            &cfg.stretches,
            cfg.shots,
            &mut rng,
        )?;
        write_atomic(&out_path(cfg, &format!("hamming_{i}_{j}.csv")), &cmp.to_csv_string())?;
        report.hamming_pair = Some((i, j));
        report.tvd_from_ideal = Some(cmp.tvd_from_ideal.clone());
    }

    write_atomic(
        &out_path(cfg, "metrics.json"),
        &serde_json::to_string_pretty(&report).expect("metrics serialization cannot fail"),
    )?;
    println!(
        "accuracy {:.4} ({} misclassified), HS distance {:.6}, variances ({:.6}, {:.6})",
        report.accuracy,
        report.misclassified.len(),
        report.hs_distance,
        report.variance_plus,
        report.variance_minus
    );
    println!("wrote metrics.json, decision_values.csv");
    Ok(())
}

#[derive(Serialize)]
struct DlogReport {
    p: u64,
    g: u64,
    k: u32,
    s: u64,
    train_size: usize,
    test_size: usize,
    train_accuracy: f64,
    test_accuracy: f64,
    objective: f64,
    identity_kernel: bool,
}

pub fn dlog_demo(cfg: &ExperimentConfig, p: u64, g: u64, k: u32, s: u64, m: usize) -> Result<()> {
    let grp = ZpStarGroup::new(p, g, k)?;
    let order = grp.group_order();
    if s >= order {
        return Err(Error::validation(format!(
            "label offset s={s} must lie in 0..{order} (an exponent modulo p-1)"
        )));
    }
    // +1 when DLOG_g(x) falls in the half-group window [s, s+(p−3)/2] mod (p−1)
    let window = (p - 3) / 2;
    let labels: Vec<f64> = (1..p)
        .map(|x| {
            let v = grp.dlog_brute(x)?;
            let offset = (v + order - s) % order;
            Ok(if offset <= window { 1.0 } else { -1.0 })
        })
        .collect::<Result<_>>()?;
    let full = grp.kernel_matrix();
    let all: Vec<usize> = (0..order as usize).collect();
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = if m == 0 || m >= order as usize {
        (all.clone(), all)
    } else {
        let mut rng = rng_from_seed(cfg.data_seed);
        let mut chosen = rand::seq::index::sample(&mut rng, order as usize, m).into_vec();
        chosen.sort_unstable();
        let rest: Vec<usize> = all.into_iter().filter(|i| !chosen.contains(i)).collect();
        (chosen, rest)
    };

    let sub = |rows: &[usize], cols: &[usize]| {
        nalgebra::DMatrix::from_fn(rows.len(), cols.len(), |r, c| full[(rows[r], cols[c])])
    };
    let y_train: Vec<f64> = train_idx.iter().map(|&i| labels[i]).collect();
    let (model, report) = solve_dual(&sub(&train_idx, &train_idx), &y_train, cfg.svm_c)?;
    if model.degenerate {
        println!("warning: sampled training set is single-class; classifier is constant");
    }
    let accuracy = |idx: &[usize]| -> Result<f64> {
        let km = sub(idx, &train_idx);
        let mut correct = 0usize;
        for (r, &i) in idx.iter().enumerate() {
            let row: Vec<f64> = (0..train_idx.len()).map(|c| km[(r, c)]).collect();
            let d = decision_value(&model, &row)?;
            let pred = if d >= 0.0 { 1.0 } else { -1.0 };
            if pred == labels[i] {
                correct += 1;
            }
        }
        Ok(correct as f64 / idx.len() as f64)
    };
    let train_acc = accuracy(&train_idx)?;
    let test_acc = accuracy(&test_idx)?;
    if k == 0 {
        println!(
            "warning: k=0 fiducial is a computational basis state; the kernel is the identity \
             matrix and test accuracy is near chance"
        );
    }
    println!("p={p} g={g} k={k} s={s}");
    println!("train: {} points, accuracy {train_acc:.4}", train_idx.len());
    println!("test:  {} points, accuracy {test_acc:.4}", test_idx.len());
    let out = DlogReport {
        p,
        g,
        k,
        s,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
        train_accuracy: train_acc,
        test_accuracy: test_acc,
        objective: report.objective,
        identity_kernel: k == 0,
    };
    write_atomic(
        &out_path(cfg, "dlog_demo.json"),
        &serde_json::to_string_pretty(&out).expect("report serialization cannot fail"),
    )?;
    Ok(())
}

pub fn fourier_check(group: &str, fiducial: &str) -> Result<()> {
    let lower = group.trim().to_ascii_lowercase();
    let (gm, zp): (FiniteGroupModel, Option<ZpStarGroup>) = if let Some(rest) =
        lower.strip_prefix("zstar:")
    {
        let parts: Vec<&str> = rest.split(':').collect();
        let p: u64 = parts[0]
            .parse()
            .map_err(|_| Error::validation(format!("bad prime in group spec {group:?}")))?;
        let g: u64 = if parts.len() > 1 {
            parts[1]
                .parse()
                .map_err(|_| Error::validation(format!("bad generator in {group:?}")))?
        } else {
            // smallest generator by brute force
            (2..p)
                .find(|&cand| ZpStarGroup::new(p, cand, 0).is_ok())
                .ok_or_else(|| Error::validation(format!("no generator found for p={p}")))?
        };
        (FiniteGroupModel::zp_star(p, g)?, Some(ZpStarGroup::new(p, g, 0)?))
    } else if let Some(m) = lower.strip_prefix('z') {
        let m: usize = m
            .parse()
            .map_err(|_| Error::validation(format!("unsupported group name {group:?}")))?;
        (FiniteGroupModel::cyclic(m)?, None)
    } else {
        return Err(Error::validation(format!(
            "unsupported group name {group:?}; use zN or zstar:P[:G]"
        )));
    };

    let dim = gm.rep_dim();
    let psi = match fiducial.trim().to_ascii_lowercase().as_str() {
        "uniform" => uniform_fiducial(dim),
        spec if spec.starts_with("basis:") => {
            let idx: usize = spec[6..]
                .parse()
                .map_err(|_| Error::validation(format!("bad basis index in {fiducial:?}")))?;
            if idx >= dim {
                return Err(Error::validation(format!("basis index {idx} out of range")));
            }
            let mut v = vec![num_complex::Complex64::new(0.0, 0.0); dim];
            v[idx] = num_complex::Complex64::new(1.0, 0.0);
            v
        }
        spec if spec.starts_with("subset:") => {
            let k: u32 = spec[7..]
                .parse()
                .map_err(|_| Error::validation(format!("bad subset exponent in {fiducial:?}")))?;
            let base = zp.ok_or_else(|| {
                Error::validation("subset fiducials only apply to zstar groups")
            })?;
            let grp = ZpStarGroup::new(base.prime(), base.generator(), k)?;
            subset_fiducial(&grp)
        }
        other => {
            return Err(Error::validation(format!(
                "unsupported fiducial {other:?}; use uniform, basis:IDX, or subset:K"
            )))
        }
    };

    let direct = gm.direct_kernel_function(&psi)?;
    let coeffs = cokern_core::analysis::kernel_fourier_coefficients(&gm, &psi)?;
    let rebuilt = cokern_core::analysis::fourier_invert(&coeffs, &gm)?;
    let max_err = rebuilt
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!(
        "group order {} (doubled dimension {}): max reconstruction error {max_err:.3e}",
        gm.order(),
        dim * dim
    );
    if max_err > 1e-9 {
        return Err(Error::numerical(format!(
            "Fourier inversion error {max_err:.3e} exceeds 1e-9"
        )));
    }
    Ok(())
}

