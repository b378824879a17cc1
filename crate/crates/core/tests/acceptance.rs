//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::Instant;

use common::{
    box_sum_by_enumeration, reference_blind, reference_intelligent, spectral, svt_by_svd,
};
use densecluster::certificate::{
    build_basis, build_w0, certify, converse_gap, mu_residual, project_mu,
};
use densecluster::harness::{parse_config, run_sweep, SweepConfig, SweepResult};
use densecluster::matops::{project_box_sum, soft_threshold, spectral_norm, svt};
use densecluster::model::generate;
use densecluster::solvers::{
    default_lambda, solve_blind, solve_intelligent, LambdaMode, Method, SolverConfig,
};
use densecluster::{derive_seed, rng_from_seed, ClusterLayout, ModelParams, SymMatrix};
use nalgebra::DMatrix;
use rand::Rng;

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn sweep(text: &str) -> SweepResult {
    let cfg = parse_config(text, "acceptance.cfg").expect("config parses");
    let sweep = SweepConfig::from_config(&cfg).expect("config is valid");
    run_sweep(&sweep, 1).expect("sweep runs")
}

fn rate(result: &SweepResult, method: Method, p: f64) -> f64 {
    result.row(method, p).expect("row present").success_rate()
}

fn fig1() -> Verdict {
    let r = sweep(
        "n = 64\nk = 28, 28\nq = 0.15\np_grid = 0.5, 0.85\nlambda_mode = simulation\ntrials = 20\n\
         base_seed = 1\nmethod = both\nregion_size_mode = planted\n",
    );
    let blind_hi = rate(&r, Method::Blind, 0.85);
    let intel_hi = rate(&r, Method::Intelligent, 0.85);
    let blind_lo = rate(&r, Method::Blind, 0.5);
    Verdict {
        pass: blind_hi >= 0.9 && intel_hi >= 0.9 && blind_lo <= 0.1,
        detail: format!(
            "p=0.85 blind {blind_hi:.2} intelligent {intel_hi:.2}; p=0.50 blind {blind_lo:.2}"
        ),
    }
}

fn fig2() -> Verdict {
    let r = sweep(
        "n = 50\nk = 40\nq = 0.1\np_grid = 0.7, 0.85\nlambda_mode = simulation\ntrials = 20\n\
         base_seed = 2\nmethod = both\nregion_size_mode = planted\n",
    );
    let intel_mid = rate(&r, Method::Intelligent, 0.7);
    let blind_mid = rate(&r, Method::Blind, 0.7);
    let blind_hi = rate(&r, Method::Blind, 0.85);
    let intel_hi = rate(&r, Method::Intelligent, 0.85);
    Verdict {
        pass: intel_mid >= 0.8 && blind_mid <= 0.5 && blind_hi >= 0.9 && intel_hi >= 0.9,
        detail: format!(
            "p=0.70 intelligent {intel_mid:.2} blind {blind_mid:.2}; p=0.85 intelligent {intel_hi:.2} blind {blind_hi:.2}"
        ),
    }
}

fn converse() -> Verdict {
    let n = 100;
    let lambda = default_lambda(n, LambdaMode::Simulation);
    let count = |sizes: &[usize], p: Vec<f64>, q: f64, base: u64| {
        let layout = ClusterLayout::contiguous(n, sizes).unwrap();
        let params = ModelParams::new(p, q).unwrap();
        (0..20u32)
            .filter(|&trial| {
                let seed = derive_seed(base, 0, trial);
                let g = generate(&layout, &params, seed, &mut rng_from_seed(seed)).unwrap();
                converse_gap(&g, lambda).unwrap().gap > 0.0
            })
            .count()
    };
    let weak = count(&[50], vec![0.4], 0.1, 300);
    let dense = count(&[40, 40], vec![0.95, 0.95], 0.8, 301);
    Verdict {
        pass: weak >= 19 && dense >= 19,
        detail: format!("positive gap: p_min <= 1/2 {weak}/20, q > 1/2 {dense}/20"),
    }
}

fn solver_correctness() -> Verdict {
    let mut rng = rng_from_seed(400);
    let mut worst_rel = 0.0f64;
    let mut worst_feas = 0.0f64;
    let mut worst_identity = 0.0f64;
    for case in 0..20u64 {
        let n = rng.random_range(3..=8);
        let k = rng.random_range(2..=n);
        let q = rng.random_range(0.0..0.6);
        let p = rng.random_range(q + 0.05..=1.0);
        let layout = ClusterLayout::contiguous(n, &[k]).unwrap();
        let params = ModelParams::new(vec![p], q).unwrap();
        let g = generate(&layout, &params, case, &mut rng).unwrap();
        let a = g.adjacency();
        let lambda = 1.0 / (n as f64).sqrt();
        let region = layout.region_size() as f64;
        let cfg = SolverConfig::new(lambda);

        let blind = solve_blind(&a, &cfg).unwrap();
        let reference = reference_blind(a.as_dense(), lambda);
        worst_rel = worst_rel.max(
            (blind.objective - reference.objective).abs() / reference.objective.abs().max(1.0),
        );
        let l = blind.low_rank.as_dense();
        let s = blind.sparse.as_dense();
        worst_feas = worst_feas.max((l + s - a.as_dense()).abs().max());
        worst_feas = worst_feas.max(
            l.iter()
                .map(|&v| (-v).max(v - 1.0).max(0.0))
                .fold(0.0, f64::max),
        );

        let intel = solve_intelligent(&a, region, &cfg).unwrap();
        let reference = reference_intelligent(a.as_dense(), lambda, region);
        worst_rel = worst_rel.max(
            (intel.objective - reference.objective).abs() / reference.objective.abs().max(1.0),
        );
        let l = intel.low_rank.as_dense();
        let s = intel.sparse.as_dense();
        let mut trace = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (lv, sv, av) = (l[(i, j)], s[(i, j)], a.get(i, j));
                let violation = [lv - 1.0, sv - lv, -sv].into_iter().fold(0.0, f64::max);
                worst_feas = worst_feas.max(violation);
                trace += (1.0 - av) * (lv - sv);
                let identity = if av == 0.0 { (sv - lv).abs() } else { sv.abs() };
                worst_identity = worst_identity.max(identity);
            }
        }
        worst_feas = worst_feas.max(trace.abs()).max((region - l.sum()).max(0.0));
    }
    Verdict {
        pass: worst_rel <= 1e-4 && worst_feas <= 1e-6 && worst_identity <= 1e-6,
        detail: format!(
            "max relative objective error {worst_rel:.2e}, max feasibility violation {worst_feas:.2e}, \
             max S/L identity error {worst_identity:.2e}"
        ),
    }
}

fn certificates() -> Verdict {
    let n = 400;
    let lambda = default_lambda(n, LambdaMode::IntelligentTheorem);
    let layout = ClusterLayout::contiguous(n, &[100]).unwrap();
    let params = ModelParams::new(vec![0.8], 0.2).unwrap();
    let basis = build_basis(&layout).unwrap();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_norm = 0.0f64;
    let mut worst_f = f64::INFINITY;
    for trial in 0..10u32 {
        let seed = derive_seed(500, 0, trial);
        let g = generate(&layout, &params, seed, &mut rng_from_seed(seed)).unwrap();
        let report = certify(&g, lambda, Method::Intelligent, 1000, seed ^ 1).unwrap();
        let w = project_mu(&build_w0(&g, lambda, Method::Intelligent), &basis);
        let ok = report.e > 0.0
            && report.norm_w0 < 1.0
            && report.norm_w <= report.norm_w0 + 1e-9
            && report.mu_residual <= 1e-8 * report.norm_w0_fro
            && mu_residual(&w, &basis) <= 1e-8 * report.norm_w0_fro
            && report.f_min_sampled >= -1e-9
            && report.pass;
        worst_norm = worst_norm.max(report.norm_w0);
        worst_f = worst_f.min(report.f_min_sampled);
        if !ok {
            failures.push(trial);
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Verdict {
        pass: failures.is_empty() && seconds < 300.0,
        detail: format!(
            "failing instances {failures:?}, max ||W0|| {worst_norm:.3}, min sampled f {worst_f:.3e}"
        ),
    }
}

fn kernels() -> Verdict {
    let mut rng = rng_from_seed(600);
    let mut worst = [0.0f64; 4];
    for case in 0..100 {
        let n = rng.random_range(1..=16);
        let m = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let tau = rng.random_range(0.0..1.5);

        let oracle = svt_by_svd(m.as_dense(), tau);
        worst[0] = worst[0].max((svt(&m, tau).unwrap().as_dense() - oracle).abs().max());

        let oracle = m.as_dense().map(|x| x - x.clamp(-tau, tau));
        worst[1] = worst[1].max((soft_threshold(&m, tau).as_dense() - oracle).abs().max());

        let small = SymMatrix::from_fn(3, |_, _| rng.random_range(-0.8..1.5));
        let s = rng.random_range(0.0..9.0);
        let oracle = DMatrix::from_vec(
            3,
            3,
            box_sum_by_enumeration(small.as_dense().as_slice(), 0.0, 1.0, s),
        );
        worst[2] = worst[2].max(
            (project_box_sum(&small, 0.0, 1.0, s).unwrap().as_dense() - oracle)
                .abs()
                .max(),
        );

        let big = if case % 4 == 0 && n >= 2 {
            let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
                .qr()
                .q();
            let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            d[0] = 1.0;
            d[1] = -0.9999;
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
            SymMatrix::symmetric_part(&q * diag * q.transpose())
        } else {
            m.clone()
        };
        let oracle = spectral(big.as_dense());
        worst[3] =
            worst[3].max((spectral_norm(&big, 1e-10).unwrap() - oracle).abs() / oracle.max(1.0));
    }
    Verdict {
        pass: worst.iter().all(|&w| w <= 1e-6),
        detail: format!(
            "max error svt {:.1e}, soft_threshold {:.1e}, project_box_sum {:.1e}, spectral_norm {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

fn determinism() -> Verdict {
    let text = "n = 40\nk = 15, 10\nq = 0.1\np_grid = 0.6, 0.8, 0.95\ntrials = 3\nbase_seed = 9\n\
                method = both\nregion_size_mode = planted\n";
    let cfg = SweepConfig::from_config(&parse_config(text, "determinism.cfg").unwrap()).unwrap();
    let first = run_sweep(&cfg, 1).unwrap().without_timing().to_csv_string();
    let second = run_sweep(&cfg, 1).unwrap().without_timing().to_csv_string();
    let parallel = run_sweep(&cfg, 3).unwrap().without_timing().to_csv_string();
    Verdict {
        pass: first == second && first == parallel,
        detail: format!("{} bytes compared across three runs", first.len()),
    }
}

fn main() {
    let criteria: [Check; 7] = [
        ("1 two-cluster phase transition", fig1),
        ("2 single-cluster phase transition", fig2),
        ("3 converse constructions", converse),
        ("4 solver correctness", solver_correctness),
        ("5 certificate suite", certificates),
        ("6 kernel oracles", kernels),
        ("7 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({}; {:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
