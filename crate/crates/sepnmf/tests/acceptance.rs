//! Acceptance suite: one test per criterion, each printing a pass line with
//! its headline numbers. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` to see the lines on success).

use std::time::Instant;

use sepnmf::dense::{self, DenseMatrix};
use sepnmf::metrics::{self, PRECOND_ALPHA};
use sepnmf::mvee::{self, MveeOptions};
use sepnmf::pipeline::{self, reduce_from_factors, reduced_truth};
use sepnmf::selector::{EndmemberSelector, ExtractOptions, PrecondSpaSelector, SpaSelector};
use sepnmf::sweep::{self, SweepConfig};
use sepnmf::synth::{self, InteriorModel, NoiseModel, NoiseSpec};

const MVEE_TOL: f64 = 1e-6;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| lo * ratio.powi(i as i32)).collect()
}

fn spectral_threshold(f: &DenseMatrix, r: usize) -> f64 {
    let sv = dense::svd(f).unwrap();
    sv.sigma_min() / (PRECOND_ALPHA * (r as f64).sqrt())
}

/// Criterion 1: exact index-set recovery on 200 noiseless instances
/// (d = 50, m = 200, r in {2, 5, 10}, kappa in {1, 1000}) for both the plain
/// and the preconditioned strategy.
#[test]
fn acceptance_1_noiseless_exactness() {
    let start = Instant::now();
    let combos: Vec<(usize, f64)> = vec![
        (2, 1.0),
        (2, 1e3),
        (5, 1.0),
        (5, 1e3),
        (10, 1.0),
        (10, 1e3),
    ];
    let opts = ExtractOptions::default();
    let spa = SpaSelector;
    let pspa = PrecondSpaSelector;
    let mut spa_hits = 0usize;
    let mut pspa_hits = 0usize;
    let total = 200usize;
    for i in 0..total {
        let (r, kappa) = combos[i % combos.len()];
        let interior = if i % 2 == 0 {
            InteriorModel::Dirichlet
        } else {
            InteriorModel::Midpoints
        };
        let inst = synth::gen_instance(50, 200, r, kappa, interior, 1_000 + i as u64).unwrap();
        if spa
            .extract(&inst.a_tilde, r, &opts)
            .unwrap()
            .extraction()
            .matches_set(&inst.true_indices)
        {
            spa_hits += 1;
        }
        if pspa
            .extract(&inst.a_tilde, r, &opts)
            .unwrap()
            .extraction()
            .matches_set(&inst.true_indices)
        {
            pspa_hits += 1;
        }
    }
    assert_eq!(spa_hits, total, "plain recovery {spa_hits}/{total}");
    assert_eq!(pspa_hits, total, "preconditioned recovery {pspa_hits}/{total}");
    println!(
        "[acceptance] criterion 1 (noiseless exactness): PASS \
         (spa {spa_hits}/{total}, pspa {pspa_hits}/{total}, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 2: on noiseless reductions the solved ellipsoid matches the
/// closed form (GG^T)^{-1} to 10*tol and whitening flattens the basis
/// condition number to 1 + 1e-4.
#[test]
fn acceptance_2_mvee_identity() {
    let start = Instant::now();
    let kappas = [1.0, 10.0, 100.0, 1e3];
    let ranks = [2usize, 3, 5, 8];
    let mut worst_dev: f64 = 0.0;
    let mut worst_kappa: f64 = 0.0;
    for i in 0..50 {
        let r = ranks[i % ranks.len()];
        let kappa = kappas[(i / ranks.len()) % kappas.len()];
        let interior = if i % 2 == 0 {
            InteriorModel::Dirichlet
        } else {
            InteriorModel::Midpoints
        };
        let inst = synth::gen_instance(30, 120, r, kappa, interior, 2_000 + i as u64).unwrap();
        let factors = dense::svd(&inst.a_tilde).unwrap();
        let red = reduce_from_factors(&factors, r).unwrap();
        let truth = reduced_truth(&inst, &factors).unwrap();
        let sol = mvee::solve_mvee(&red.p, &MveeOptions::default()).unwrap();
        assert!(sol.certified);

        let gram = &truth.g * &truth.g.transpose();
        let target = gram.try_inverse().unwrap();
        let dev = dense::spectral_norm(&(&sol.l_star - &target)).unwrap()
            / dense::spectral_norm(&target).unwrap();
        assert!(dev <= 10.0 * MVEE_TOL, "trial {i}: deviation {dev:.3e}");
        worst_dev = worst_dev.max(dev);

        let whitened = &dense::psd_sqrt(&sol.l_star).unwrap() * &truth.g;
        let kap = dense::cond_number(&whitened).unwrap();
        assert!(kap <= 1.0 + 1e-4, "trial {i}: kappa {kap}");
        worst_kappa = worst_kappa.max(kap - 1.0);
    }
    println!(
        "[acceptance] criterion 2 (ellipsoid identity): PASS \
         (worst deviation {worst_dev:.2e}, worst kappa-1 {worst_kappa:.2e}, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 3: every accepted solve carries a valid certificate
/// (feasibility <= 1 + 1e-6, relative gap <= 1e-6) and the logged dual
/// objective never decreases.
#[test]
fn acceptance_3_mvee_certificates() {
    let start = Instant::now();
    let opts = MveeOptions {
        record_objective: true,
        ..Default::default()
    };
    let mut solves = 0usize;
    for i in 0..30 {
        let r = [2usize, 4, 8][i % 3];
        let kappa = [1.0, 50.0, 1e3][(i / 3) % 3];
        let inst =
            synth::gen_instance(40, 150, r, kappa, InteriorModel::Dirichlet, 3_000 + i as u64)
                .unwrap();
        // noiseless, at the guarantee threshold, and far above it
        let eps_threshold = spectral_threshold(&inst.f, r);
        for scale in [0.0, 1.0, 50.0] {
            let noisy = synth::add_noise(
                &inst,
                &NoiseSpec {
                    model: NoiseModel::Spectral,
                    epsilon: scale * eps_threshold,
                },
                7 + i as u64,
            )
            .unwrap();
            let red = pipeline::build_reduced(&noisy.a_tilde, r).unwrap();
            let sol = mvee::solve_mvee(&red.p, &opts).unwrap();
            assert!(sol.certified, "trial {i} scale {scale} not certified");
            assert!(sol.gap <= MVEE_TOL);
            assert!(sol.max_feasibility(&red.p) <= 1.0 + MVEE_TOL);
            assert!(
                sol.objective_trace.windows(2).all(|w| w[1] >= w[0]),
                "objective decreased in trial {i}"
            );
            solves += 1;
        }
    }
    println!(
        "[acceptance] criterion 3 (ellipsoid certificates): PASS \
         ({solves} certified solves, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 4: with spectral noise at the guarantee threshold, the
/// bottleneck-matched basis error never exceeds (432 kappa + 4) epsilon.
/// 100 trials per (r, kappa) in {2,5,10} x {1,10,1000}.
#[test]
fn acceptance_4_preconditioned_error_bound() {
    let start = Instant::now();
    let pspa = PrecondSpaSelector;
    let opts = ExtractOptions::default();
    let mut worst_ratio: f64 = 0.0;
    for &r in &[2usize, 5, 10] {
        for &kappa in &[1.0, 10.0, 1e3] {
            for trial in 0..100u64 {
                let seed = 4_000 + trial + (r as u64) * 101 + (kappa as u64) * 7;
                let inst =
                    synth::gen_instance(50, 200, r, kappa, InteriorModel::Dirichlet, seed)
                        .unwrap();
                let eps = spectral_threshold(&inst.f, r);
                let noisy = synth::add_noise(
                    &inst,
                    &NoiseSpec {
                        model: NoiseModel::Spectral,
                        epsilon: eps,
                    },
                    seed ^ 0xabcd,
                )
                .unwrap();
                let report = pspa.extract(&noisy.a_tilde, r, &opts).unwrap();
                let selected = noisy
                    .a_tilde
                    .select_columns(&report.extraction().indices)
                    .unwrap();
                let (_, matched) = metrics::bottleneck_match(&selected, &noisy.f).unwrap();
                let (_, bound) = metrics::precond_bounds(&noisy.f, eps, r).unwrap();
                assert!(
                    matched <= bound,
                    "r={r} kappa={kappa} trial={trial}: error {matched:.3e} > bound {bound:.3e}"
                );
                worst_ratio = worst_ratio.max(matched / bound);
            }
        }
    }
    println!(
        "[acceptance] criterion 4 (threshold-noise error bound): PASS \
         (900 trials, worst error/bound {worst_ratio:.2e}, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 5: at threshold noise and r = 2 every eigenvalue of G^T L* G
/// lies in the analytic box [1 - sqrt(1-a), 1 + sqrt(1-a)]; the eigenvalue
/// sum stays below r + 1e-5 for r in {2, 5, 10}.
#[test]
fn acceptance_5_eigenvalue_box_and_trace() {
    let start = Instant::now();
    let a = ((PRECOND_ALPHA * 2f64.sqrt() - 2.0) / (PRECOND_ALPHA * 2f64.sqrt() + 2.0)).powi(4);
    let lo = 1.0 - (1.0 - a).sqrt();
    let hi = 1.0 + (1.0 - a).sqrt();
    assert!((lo - 0.904).abs() < 1e-3 && (hi - 1.096).abs() < 1e-3);

    let run = |r: usize, trial: u64| -> Vec<f64> {
        let kappa = [1.0, 10.0, 1e3][(trial % 3) as usize];
        let inst =
            synth::gen_instance(30, 100, r, kappa, InteriorModel::Dirichlet, 5_000 + trial)
                .unwrap();
        let eps = spectral_threshold(&inst.f, r);
        let noisy = synth::add_noise(
            &inst,
            &NoiseSpec {
                model: NoiseModel::Spectral,
                epsilon: eps,
            },
            trial + 13,
        )
        .unwrap();
        let factors = dense::svd(&noisy.a_tilde).unwrap();
        let red = reduce_from_factors(&factors, r).unwrap();
        let truth = reduced_truth(&noisy, &factors).unwrap();
        let sol = mvee::solve_mvee(&red.p, &MveeOptions::default()).unwrap();
        pipeline::diagnostics_c_star(&truth.g, &sol).unwrap()
    };

    let mut box_lo = f64::INFINITY;
    let mut box_hi = f64::NEG_INFINITY;
    for trial in 0..100u64 {
        let eig = run(2, trial);
        for &lam in &eig {
            assert!(
                lam >= lo && lam <= hi,
                "trial {trial}: eigenvalue {lam} outside [{lo:.4}, {hi:.4}]"
            );
            box_lo = box_lo.min(lam);
            box_hi = box_hi.max(lam);
        }
        let trace: f64 = eig.iter().sum();
        assert!(trace <= 2.0 + 1e-5);
    }
    for &r in &[5usize, 10] {
        for trial in 0..30u64 {
            let eig = run(r, trial);
            let trace: f64 = eig.iter().sum();
            assert!(trace <= r as f64 + 1e-5, "r={r} trial={trial}: trace {trace}");
        }
    }
    println!(
        "[acceptance] criterion 5 (eigenvalue box and trace): PASS \
         (eigenvalues in [{box_lo:.4}, {box_hi:.4}] vs [{lo:.4}, {hi:.4}], {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 6: reduction-transfer inequalities on synthetic ground truth,
/// 100 trials, zero violations: the discarded spectral mass is bounded by
/// the noise norm, reduced noise columns by 4x, singular value drift by 2x,
/// and lifted basis errors by the reduced error plus 3x.
#[test]
fn acceptance_6_reduction_lemma_suite() {
    let start = Instant::now();
    for trial in 0..100u64 {
        let r = 2 + (trial % 7) as usize; // 2..=8
        let d = 20 + (trial % 4) as usize * 10;
        let m = 80 + (trial % 3) as usize * 40;
        let kappa = [1.0, 10.0, 1e3][(trial % 3) as usize];
        let interior = if trial % 2 == 0 {
            InteriorModel::Dirichlet
        } else {
            InteriorModel::Midpoints
        };
        let model = if trial % 3 == 0 {
            NoiseModel::Column
        } else {
            NoiseModel::Spectral
        };
        // lemma bounds hold at any noise level; sweep tiny to large
        let eps = 10f64.powf(-6.0 + 5.0 * ((trial % 11) as f64) / 10.0);
        let inst = synth::gen_instance(d, m, r, kappa, interior, 6_000 + trial).unwrap();
        let noisy = synth::add_noise(
            &inst,
            &NoiseSpec {
                model,
                epsilon: eps,
            },
            trial * 3 + 1,
        )
        .unwrap();
        let n_norm = dense::spectral_norm(&noisy.n).unwrap();

        let factors = dense::svd(&noisy.a_tilde).unwrap();
        let red = reduce_from_factors(&factors, r).unwrap();
        assert!(
            red.sigma_tail <= n_norm + 1e-9,
            "trial {trial}: tail {} > noise {n_norm}",
            red.sigma_tail
        );

        let truth = reduced_truth(&noisy, &factors).unwrap();
        for i in 0..truth.s.cols() {
            assert!(
                truth.s.column_norm(i) <= 4.0 * n_norm + 1e-9,
                "trial {trial}: reduced noise column {i}"
            );
        }
        let sf = dense::svd(&noisy.f).unwrap();
        let sg = dense::svd(&truth.g).unwrap();
        for (a, b) in sf.sigma().iter().zip(sg.sigma()) {
            assert!(
                (a - b).abs() <= 2.0 * n_norm + 1e-9,
                "trial {trial}: singular value drift"
            );
        }
        for k in 0..m {
            for j in 0..r {
                let lifted: f64 = (0..d)
                    .map(|i| (noisy.a_tilde.get(i, k) - noisy.f.get(i, j)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let reduced: f64 = (0..r)
                    .map(|i| (red.p.get(i, k) - truth.g.get(i, j)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(
                    lifted <= reduced + 3.0 * n_norm + 1e-8,
                    "trial {trial}: lifting bound at ({k}, {j})"
                );
            }
        }
    }
    println!(
        "[acceptance] criterion 6 (reduction lemma suite): PASS (100 trials, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 7: on ill-conditioned ensembles the preconditioned strategy
/// tolerates at least as much column noise as the plain one. The sweep
/// artifact (CSV + JSON) lands in the cargo tmp dir.
#[test]
fn acceptance_7_preconditioning_benefit() {
    let start = Instant::now();
    let cfg = SweepConfig {
        d: 50,
        m: 200,
        r: 10,
        kappa: 1e3,
        interior_model: InteriorModel::Midpoints,
        noise_model: NoiseModel::Column,
        epsilons: log_grid(1e-6, 1e-1, 20),
        trials: 50,
        seed: 7_000,
    };
    let spa_table = sweep::threshold_sweep(&cfg, &SpaSelector).unwrap();
    let pspa_table = sweep::threshold_sweep(&cfg, &PrecondSpaSelector).unwrap();

    let artifact_dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(artifact_dir).unwrap();
    let tables = vec![spa_table.clone(), pspa_table.clone()];
    std::fs::write(
        artifact_dir.join("preconditioning_benefit.csv"),
        sepnmf::report::sweep_tables_to_csv(&tables),
    )
    .unwrap();
    std::fs::write(
        artifact_dir.join("preconditioning_benefit.json"),
        serde_json::to_string_pretty(&tables).unwrap(),
    )
    .unwrap();

    // None orders below any grid point
    let spa_thr = spa_table.threshold;
    let pspa_thr = pspa_table.threshold;
    let ge = match (pspa_thr, spa_thr) {
        (_, None) => true,
        (Some(p), Some(s)) => p >= s,
        (None, Some(_)) => false,
    };
    assert!(
        ge,
        "preconditioned threshold {pspa_thr:?} < plain threshold {spa_thr:?}"
    );
    println!(
        "[acceptance] criterion 7 (preconditioning benefit): PASS \
         (plain threshold {spa_thr:?}, preconditioned {pspa_thr:?}, artifact in {}, {:.1}s)",
        artifact_dir.display(),
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 8: the bottleneck matcher equals factorial brute force on 1000
/// random cases with r <= 7, exactly.
#[test]
fn acceptance_8_bottleneck_oracle_equivalence() {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let start = Instant::now();

    // independent oracle: enumerate all permutations, minimize the max
    fn brute_force(extracted: &DenseMatrix, truth: &DenseMatrix) -> f64 {
        let r = truth.cols();
        let d = truth.rows();
        let dist = |i: usize, j: usize| -> f64 {
            (0..d)
                .map(|k| (extracted.get(k, i) - truth.get(k, j)).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        fn recurse(
            j: usize,
            used: &mut Vec<bool>,
            current: f64,
            best: &mut f64,
            r: usize,
            dist: &impl Fn(usize, usize) -> f64,
        ) {
            if j == r {
                *best = best.min(current);
                return;
            }
            for i in 0..r {
                if !used[i] {
                    used[i] = true;
                    recurse(j + 1, used, current.max(dist(i, j)), best, r, dist);
                    used[i] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        recurse(0, &mut vec![false; r], 0.0, &mut best, r, &dist);
        best
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8_000);
    for case in 0..1000 {
        let r = rng.random_range(1..=7);
        let d = rng.random_range(1..=6);
        let truth = DenseMatrix::from_fn(d, r, |_, _| rng.random::<f64>() * 4.0 - 2.0).unwrap();
        let extracted = if case % 5 == 0 {
            // permuted truth: minimax must be exactly zero
            let mut perm: Vec<usize> = (0..r).collect();
            perm.shuffle(&mut rng);
            truth.select_columns(&perm).unwrap()
        } else {
            DenseMatrix::from_fn(d, r, |_, _| rng.random::<f64>() * 4.0 - 2.0).unwrap()
        };
        let (_, fast) = metrics::bottleneck_match(&extracted, &truth).unwrap();
        let slow = brute_force(&extracted, &truth);
        assert!(
            fast == slow,
            "case {case}: matcher {fast:.17e} != oracle {slow:.17e}"
        );
    }
    println!(
        "[acceptance] criterion 8 (bottleneck oracle equivalence): PASS (1000 cases, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

/// Criterion 9: CLI contract. Round trips, the exit-code table, and the
/// generate -> extract pipeline reproducing the sidecar indices.
#[test]
fn acceptance_9_cli_contract() {
    use std::process::Command;
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_sepnmf");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    // exit 0 + correct indices on a trivial instance
    std::fs::write(path("eye.csv"), "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let out = run(&[
        "extract",
        "--input",
        path("eye.csv").to_str().unwrap(),
        "--rank",
        "3",
        "--algo",
        "spa",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["indices"], serde_json::json!([0, 1, 2]));

    // exit 2: malformed matrix file
    std::fs::write(path("ragged.csv"), "1,2\n3\n").unwrap();
    let out = run(&[
        "extract",
        "--input",
        path("ragged.csv").to_str().unwrap(),
        "--rank",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // exit 3: rank constraint violations, named in the message
    let out = run(&[
        "extract",
        "--input",
        path("eye.csv").to_str().unwrap(),
        "--rank",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--rank"));
    let out = run(&[
        "extract",
        "--input",
        path("eye.csv").to_str().unwrap(),
        "--rank",
        "1",
        "--algo",
        "pspa",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // exit 4: numerical failure (rank-deficient input)
    std::fs::write(path("rank1.csv"), "1,2,4\n1,2,4\n1,2,4\n").unwrap();
    let out = run(&[
        "extract",
        "--input",
        path("rank1.csv").to_str().unwrap(),
        "--rank",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));

    // exit 5: missing file
    let out = run(&[
        "extract",
        "--input",
        path("nope.csv").to_str().unwrap(),
        "--rank",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(5));

    // generate twice with the same seed: byte-identical artifacts
    for tag in ["a", "b"] {
        let out = run(&[
            "generate",
            "--rows",
            "20",
            "--cols",
            "60",
            "--rank",
            "4",
            "--kappa",
            "100",
            "--seed",
            "11",
            "--out",
            path(&format!("gen_{tag}.mtx")).to_str().unwrap(),
            "--sidecar",
            path(&format!("gen_{tag}.truth.json")).to_str().unwrap(),
            "--basis-out",
            path(&format!("gen_{tag}_basis.csv")).to_str().unwrap(),
            "--bin-out",
            path(&format!("gen_{tag}.bin")).to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(path("gen_a.mtx")).unwrap(),
        std::fs::read(path("gen_b.mtx")).unwrap()
    );
    assert_eq!(
        std::fs::read(path("gen_a.bin")).unwrap(),
        std::fs::read(path("gen_b.bin")).unwrap()
    );

    // sidecar kappa agrees with the written basis to 1%
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path("gen_a.truth.json")).unwrap())
            .unwrap();
    let basis = sepnmf::io::read_matrix(&path("gen_a_basis.csv"), None).unwrap();
    let kappa = dense::cond_number(&basis).unwrap();
    let sidecar_kappa = sidecar["kappa_f"].as_f64().unwrap();
    assert!((kappa - sidecar_kappa).abs() <= 0.01 * sidecar_kappa);

    // round trip: matrix-market -> csv preserves values exactly
    let mtx = sepnmf::io::read_matrix(&path("gen_a.mtx"), None).unwrap();
    sepnmf::io::write_matrix(&path("rt.csv"), &mtx, None).unwrap();
    assert_eq!(sepnmf::io::read_matrix(&path("rt.csv"), None).unwrap(), mtx);
    let bin = sepnmf::io::read_matrix(&path("gen_a.bin"), None).unwrap();
    assert_eq!(bin, mtx);

    // generate -> extract (pspa) reproduces the sidecar indices, exit 0
    let out = run(&[
        "extract",
        "--input",
        path("gen_a.mtx").to_str().unwrap(),
        "--rank",
        "4",
        "--algo",
        "pspa",
        "--sidecar",
        path("gen_a.truth.json").to_str().unwrap(),
        "--out",
        path("report.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path("report.json")).unwrap()).unwrap();
    assert_eq!(report["exact_recovery"], serde_json::json!(true));
    assert_eq!(report["bounds"]["exact_recovery"], serde_json::json!(true));
    let mut got: Vec<u64> = report["indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    let mut want: Vec<u64> = sidecar["true_indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    got.sort_unstable();
    want.sort_unstable();
    assert_eq!(got, want);

    // report determinism: identical runs agree apart from timing
    let rerun = run(&[
        "extract",
        "--input",
        path("gen_a.mtx").to_str().unwrap(),
        "--rank",
        "4",
        "--algo",
        "pspa",
        "--sidecar",
        path("gen_a.truth.json").to_str().unwrap(),
        "--out",
        path("report2.json").to_str().unwrap(),
    ]);
    assert_eq!(rerun.status.code(), Some(0));
    let mut second: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path("report2.json")).unwrap()).unwrap();
    let mut first = report.clone();
    first["timing"] = serde_json::Value::Null;
    second["timing"] = serde_json::Value::Null;
    first["command"] = serde_json::Value::Null;
    second["command"] = serde_json::Value::Null;
    assert_eq!(first, second);

    // bench: single-point grid at zero noise recovers everywhere
    std::fs::write(
        path("bench.cfg"),
        "d = 10\nm = 30\nr = 3\nkappa = 1\ninterior = dirichlet\n\
         noise_model = column\nepsilons = 0\ntrials = 3\nseed = 5\n",
    )
    .unwrap();
    let out = run(&[
        "bench",
        "--config",
        path("bench.cfg").to_str().unwrap(),
        "--out",
        path("bench_out").to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(path("bench_out.csv")).unwrap();
    for line in csv.lines().skip(1) {
        assert!(line.contains(",1,"), "recovery fraction not 1.0: {line}");
    }
    let bench: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path("bench_out.json")).unwrap()).unwrap();
    assert_eq!(bench["tables"].as_array().unwrap().len(), 2);

    // bad bench config is a parse failure
    std::fs::write(path("bad.cfg"), "nonsense\n").unwrap();
    let out = run(&[
        "bench",
        "--config",
        path("bad.cfg").to_str().unwrap(),
        "--out",
        path("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // standalone ellipsoid solve
    std::fs::write(path("points.csv"), "2,0,0.3\n0,1,0.3\n").unwrap();
    let out = run(&[
        "mvee",
        "--input",
        path("points.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sol["certified"], serde_json::json!(true));
    assert!((sol["l_star"][0][0].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert!((sol["l_star"][1][1].as_f64().unwrap() - 1.0).abs() < 1e-6);

    println!(
        "[acceptance] criterion 9 (cli contract): PASS ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}
