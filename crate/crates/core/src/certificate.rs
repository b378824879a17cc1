//! Optimality certificates for the planted solution.
//!
//! For a planted layout with normalised cluster indicators `U`, the planted
//! low-rank part `1_R` is optimal when (a) every perturbation `E` in the span
//! `{V M^T + N V^T}` increases the objective, measured by [`eval_g`], and
//! (b) a dual matrix `W` with `WU = W^T U = 0` and `||W|| < 1` makes
//! [`eval_f`] nonnegative on every feasible perturbation. This module builds
//! the candidate `W0`, projects it onto `{X : XU = X^T U = 0}`, and measures
//! everything needed to check both conditions numerically.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matops::{inf_norm, inner, spectral_norm_with, Dense, PowerIteration, SymMatrix};
use crate::model::{region_r, ClusterLayout, ModelParams, PlantedGraph};
use crate::rng::rng_from_seed;
use crate::solvers::{default_lambda, objective, LambdaMode, Method};

/// Normalised cluster indicators and the projector onto their span.
#[derive(Clone, Debug)]
pub struct CharacteristicBasis {
    /// `n x t`; column `l` is `1/sqrt(k_l)` on cluster `l`.
    pub u: DMatrix<f64>,
    /// `n x t`; column `l` is the 0/1 indicator of cluster `l`.
    pub v: DMatrix<f64>,
    /// `P = U U^T`.
    pub projector: SymMatrix,
}

pub fn build_basis(layout: &ClusterLayout) -> Result<CharacteristicBasis> {
    let t = layout.t();
    if t == 0 {
        return Err(Error::InvalidLayout(
            "the characteristic basis needs at least one cluster".into(),
        ));
    }
    let n = layout.n();
    let mut u = DMatrix::zeros(n, t);
    let mut v = DMatrix::zeros(n, t);
    for (l, cluster) in layout.clusters().iter().enumerate() {
        let w = 1.0 / (cluster.len() as f64).sqrt();
        for &node in cluster {
            u[(node, l)] = w;
            v[(node, l)] = 1.0;
        }
    }
    // Entries of P are exactly 1/k_l on R_ll.
    let owner = layout.membership();
    let sizes = layout.sizes();
    let projector = SymMatrix::from_fn(n, |i, j| match (owner[i], owner[j]) {
        (Some(a), Some(b)) if a == b => 1.0 / sizes[a] as f64,
        _ => 0.0,
    });
    Ok(CharacteristicBasis { u, v, projector })
}

/// `min_l (p_l - q - 1/(k_l lambda)) / 2`.
pub fn distinctness_e_intelligent(params: &ModelParams, lambda: f64, sizes: &[usize]) -> f64 {
    assert_eq!(params.p.len(), sizes.len(), "one probability per cluster");
    params
        .p
        .iter()
        .zip(sizes)
        .map(|(&p, &k)| 0.5 * (p - params.q - 1.0 / (k as f64 * lambda)))
        .fold(f64::INFINITY, f64::min)
}

/// `min(1 - 2q, min_l (2 p_l - 1/(lambda k_l) - 1)) / 2`.
pub fn distinctness_e_blind(params: &ModelParams, lambda: f64, sizes: &[usize]) -> f64 {
    assert_eq!(params.p.len(), sizes.len(), "one probability per cluster");
    let clusters = params
        .p
        .iter()
        .zip(sizes)
        .map(|(&p, &k)| 2.0 * p - 1.0 / (lambda * k as f64) - 1.0)
        .fold(f64::INFINITY, f64::min);
    0.5 * (1.0 - 2.0 * params.q).min(clusters)
}

pub fn distinctness_e(params: &ModelParams, lambda: f64, sizes: &[usize], method: Method) -> f64 {
    match method {
        Method::Intelligent => distinctness_e_intelligent(params, lambda, sizes),
        Method::Blind => distinctness_e_blind(params, lambda, sizes),
    }
}

/// Coefficients `(c, c_i)` that zero the mean of `W0` on `R^c` and on each
/// `R_ii`.
pub fn certificate_coefficients(
    params: &ModelParams,
    lambda: f64,
    method: Method,
) -> (f64, Vec<f64>) {
    match method {
        Method::Intelligent => (
            -lambda * params.q,
            params.p.iter().map(|p| lambda * (params.q - p)).collect(),
        ),
        Method::Blind => (
            -lambda * (2.0 * params.q - 1.0),
            params.p.iter().map(|p| -lambda * (2.0 * p - 1.0)).collect(),
        ),
    }
}

/// The candidate certificate: `scale * (1_A - prob)` entrywise, where `prob`
/// is `p_l` on `R_ll` and `q` elsewhere; `scale` is `lambda` for the
/// intelligent program and `2 lambda` for the blind one.
pub fn build_w0(graph: &PlantedGraph, lambda: f64, method: Method) -> SymMatrix {
    let scale = match method {
        Method::Intelligent => lambda,
        Method::Blind => 2.0 * lambda,
    };
    let owner = graph.layout().membership();
    let params = graph.params();
    SymMatrix::from_fn(graph.n(), |i, j| {
        let prob = match (owner[i], owner[j]) {
            (Some(a), Some(b)) if a == b => params.p[a],
            _ => params.q,
        };
        let hit = if graph.has_edge(i, j) { 1.0 } else { 0.0 };
        scale * (hit - prob)
    })
}

/// Orthogonal projection onto `{X : XU = X^T U = 0}`: `(I - P) X (I - P)`.
pub fn project_mu(x: &SymMatrix, basis: &CharacteristicBasis) -> SymMatrix {
    let u = &basis.u;
    let xd = x.as_dense();
    // P X = U (U^T X); X P = (P X)^T for symmetric X.
    let ut_x = u.transpose() * xd;
    let px = u * &ut_x;
    let pxp = u * (&ut_x * u) * u.transpose();
    let out = xd - &px - px.transpose() + pxp;
    SymMatrix::symmetric_part(out)
}

/// `max(||W U||_F, ||W^T U||_F)`.
pub fn mu_residual<M: Dense + ?Sized>(w: &M, basis: &CharacteristicBasis) -> f64 {
    let wd = w.dense();
    let left = (wd * &basis.u).norm();
    let right = (wd.transpose() * &basis.u).norm();
    left.max(right)
}

/// Sums of `E` over the regions the functionals need.
struct RegionSums {
    /// `sum_l sum(E over R_ll) / k_l`.
    nuclear_part: f64,
    missing: f64,
    present: f64,
}

fn region_sums<M: Dense + ?Sized>(e: &M, graph: &PlantedGraph) -> RegionSums {
    let e = e.dense();
    let n = graph.n();
    assert_eq!((e.nrows(), e.ncols()), (n, n), "perturbation shape");
    let owner = graph.layout().membership();
    let inv_sizes: Vec<f64> = graph
        .layout()
        .sizes()
        .iter()
        .map(|&k| 1.0 / k as f64)
        .collect();
    let support = graph.support();
    let mut sums = RegionSums {
        nuclear_part: 0.0,
        missing: 0.0,
        present: 0.0,
    };
    for j in 0..n {
        for i in 0..n {
            let v = e[(i, j)];
            if let (Some(a), Some(b)) = (owner[i], owner[j]) {
                if a == b {
                    sums.nuclear_part += v * inv_sizes[a];
                }
            }
            if support.contains(i, j) {
                sums.present += v;
            } else {
                sums.missing += v;
            }
        }
    }
    sums
}

/// Lower bound on the objective increase along `E` that ignores the dual
/// matrix: `sum_l sum(E_{R_ll})/k_l + lambda * sparse(E)`, where the sparse
/// part is `sum(E over A^c)` (intelligent) or
/// `sum(E over A^c) - sum(E over A)` (blind).
pub fn eval_g<M: Dense + ?Sized>(e: &M, graph: &PlantedGraph, lambda: f64, method: Method) -> f64 {
    let s = region_sums(e, graph);
    let sparse = match method {
        Method::Intelligent => s.missing,
        Method::Blind => s.missing - s.present,
    };
    s.nuclear_part + lambda * sparse
}

/// `eval_g(E) + <E, W>`.
pub fn eval_f<M: Dense + ?Sized, W: Dense + ?Sized>(
    e: &M,
    w: &W,
    graph: &PlantedGraph,
    lambda: f64,
    method: Method,
) -> f64 {
    eval_g(e, graph, lambda, method) + inner(e, w)
}

/// A perturbation `E = V M^T + N V^T` in the orthogonal complement of
/// `{X : XU = X^T U = 0}`.
#[derive(Clone, Debug)]
pub struct PerpPerturbation {
    pub m_coeffs: DMatrix<f64>,
    pub n_coeffs: DMatrix<f64>,
    pub e: DMatrix<f64>,
}

impl PerpPerturbation {
    pub fn from_coefficients(
        basis: &CharacteristicBasis,
        m_coeffs: DMatrix<f64>,
        n_coeffs: DMatrix<f64>,
    ) -> Self {
        let e = &basis.v * m_coeffs.transpose() + &n_coeffs * basis.v.transpose();
        PerpPerturbation {
            m_coeffs,
            n_coeffs,
            e,
        }
    }
}

/// Draws a perturbation with the sign pattern of a feasible direction at the
/// planted solution: coefficient `(j, l)` is nonpositive when node `j` is in
/// cluster `l` and nonnegative otherwise, so `E <= 0` on `R` and `E >= 0` on
/// `R^c`. Magnitudes are uniform on `[0, 1)` with a random per-cluster scale;
/// if the total is negative the nonpositive coefficients are shrunk until
/// `sum(E) >= 0`.
pub fn sample_perp_perturbation<R: Rng + ?Sized>(
    basis: &CharacteristicBasis,
    layout: &ClusterLayout,
    rng: &mut R,
) -> PerpPerturbation {
    let n = layout.n();
    let t = layout.t();
    let owner = layout.membership();
    let draw = |rng: &mut R| {
        let scales: Vec<f64> = (0..t).map(|_| rng.random::<f64>()).collect();
        DMatrix::from_fn(n, t, |j, l| {
            let mag = scales[l] * rng.random::<f64>();
            if owner[j] == Some(l) {
                -mag
            } else {
                mag
            }
        })
    };
    let mut m = draw(rng);
    let mut nn = draw(rng);

    // Each entry of E collects coefficients of a single sign, so the positive
    // and negative totals can be balanced independently.
    let positive =
        contribution(&basis.v, &m, |x| x > 0.0) + contribution(&basis.v, &nn, |x| x > 0.0);
    let negative =
        contribution(&basis.v, &m, |x| x < 0.0) + contribution(&basis.v, &nn, |x| x < 0.0);
    if positive + negative < 0.0 {
        let alpha = positive / -negative * (1.0 - 1e-12);
        let shrink = |x: f64| if x < 0.0 { alpha * x } else { x };
        m.apply(|x| *x = shrink(*x));
        nn.apply(|x| *x = shrink(*x));
    }
    PerpPerturbation::from_coefficients(basis, m, nn)
}

/// `sum(V C^T)` restricted to coefficients selected by `keep`.
fn contribution(v: &DMatrix<f64>, coeffs: &DMatrix<f64>, keep: impl Fn(f64) -> bool) -> f64 {
    // sum(V C^T) = sum_l (sum_i V_il) (sum_j C_jl).
    (0..coeffs.ncols())
        .map(|l| {
            let k = v.column(l).sum();
            let c: f64 = coeffs.column(l).iter().copied().filter(|&x| keep(x)).sum();
            k * c
        })
        .sum()
}

/// Which recovery guarantee a [`TheoremCheck`] evaluates.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub method: Method,
    /// Weight the guarantee is stated for.
    pub lambda: f64,
    /// `p_min > q` (intelligent) or `p_min > 1/2 > q` (blind).
    pub probabilities_ok: bool,
    /// Minimum size per cluster: `4 sqrt n / (p_i - q)` or `8 sqrt n / (2 p_i - 1)`.
    pub required_sizes: Vec<f64>,
    pub sizes_ok: Vec<bool>,
    /// All of the above hold.
    pub guarantee: bool,
    /// The blind program provably fails for large n: `p_min <= 1/2`, or
    /// `q > 1/2` with clusters not covering the whole grid.
    pub converse: bool,
}

pub fn check_theorem(layout: &ClusterLayout, params: &ModelParams, method: Method) -> TheoremCheck {
    let n = layout.n();
    let root = (n as f64).sqrt();
    let sizes = layout.sizes();
    let (lambda, probabilities_ok, required_sizes): (f64, bool, Vec<f64>) = match method {
        Method::Intelligent => (
            default_lambda(n, LambdaMode::IntelligentTheorem),
            params.p_min() > params.q,
            params
                .p
                .iter()
                .map(|p| 4.0 * root / (p - params.q))
                .collect(),
        ),
        Method::Blind => (
            default_lambda(n, LambdaMode::BlindTheorem),
            params.p_min() > 0.5 && 0.5 > params.q,
            params
                .p
                .iter()
                .map(|p| 8.0 * root / (2.0 * p - 1.0))
                .collect(),
        ),
    };
    // Required sizes are only meaningful when the denominators are positive.
    let sizes_ok: Vec<bool> = sizes
        .iter()
        .zip(&required_sizes)
        .map(|(&k, &req)| req > 0.0 && k as f64 >= req * (1.0 - 1e-12))
        .collect();
    let guarantee = probabilities_ok && sizes_ok.iter().all(|&ok| ok);
    let covers_all = layout.region_size() == n * n;
    let converse = params.p_min() <= 0.5 || (params.q > 0.5 && !covers_all);
    TheoremCheck {
        method,
        lambda,
        probabilities_ok,
        required_sizes,
        sizes_ok,
        guarantee,
        converse,
    }
}

/// Which alternative the converse comparison used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConverseCase {
    /// Drop clusters with `p_i <= 1/2` from the low-rank part.
    DropWeakClusters,
    /// Replace the low-rank part by the all-ones matrix.
    AllOnes,
}

impl ConverseCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConverseCase::DropWeakClusters => "drop_weak_clusters",
            ConverseCase::AllOnes => "all_ones",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConverseGap {
    pub case: ConverseCase,
    pub planted_objective: f64,
    pub alternative_objective: f64,
    /// `planted - alternative`; positive means the planted pair is not
    /// optimal for the blind program.
    pub gap: f64,
}

/// Compares the planted blind solution `(1_R, A - 1_R)` with a feasible
/// alternative. With `p_min <= 1/2` the alternative keeps only clusters with
/// `p_i > 1/2`; otherwise, when `q > 1/2`, it is `(1, -1_{A^c})`. Outside
/// both regimes the first construction is used and the gap is zero.
pub fn converse_gap(graph: &PlantedGraph, lambda: f64) -> Result<ConverseGap> {
    let n = graph.n();
    let params = graph.params();
    let layout = graph.layout();
    let a = graph.adjacency();
    let planted_l = SymMatrix::indicator(&region_r(layout));
    let planted_s = &a - &planted_l;
    let planted_objective = objective(&planted_l, &planted_s, lambda)?;

    let case = if params.p_min() <= 0.5 || params.q <= 0.5 {
        ConverseCase::DropWeakClusters
    } else {
        ConverseCase::AllOnes
    };
    let (alt_l, alt_s) = match case {
        ConverseCase::DropWeakClusters => {
            let kept: Vec<Vec<usize>> = layout
                .clusters()
                .iter()
                .zip(&params.p)
                .filter(|(_, &p)| p > 0.5)
                .map(|(c, _)| c.clone())
                .collect();
            let strong = ClusterLayout::new(n, kept)?;
            let l = SymMatrix::indicator(&region_r(&strong));
            let s = &a - &l;
            (l, s)
        }
        ConverseCase::AllOnes => {
            let l = SymMatrix::ones(n);
            let s = &a - &l;
            (l, s)
        }
    };
    let alternative_objective = objective(&alt_l, &alt_s, lambda)?;
    Ok(ConverseGap {
        case,
        planted_objective,
        alternative_objective,
        gap: planted_objective - alternative_objective,
    })
}

/// Measurements of the certificate for one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub method: Method,
    pub lambda: f64,
    pub e: f64,
    pub c: f64,
    pub c_i: Vec<f64>,
    pub norm_w0: f64,
    pub norm_w0_fro: f64,
    pub norm_w: f64,
    /// `||W0 - W||_inf`.
    pub inf_gap: f64,
    pub mu_residual: f64,
    pub samples: usize,
    /// Minimum of `eval_f(E, W)` over the sampled perturbations.
    pub f_min_sampled: f64,
    pub pass: bool,
}

pub const MU_RESIDUAL_RELATIVE_TOL: f64 = 1e-8;
pub const F_SLACK: f64 = 1e-9;

/// Builds `W0` and `W`, measures them, and evaluates `eval_f(E, W)` on
/// `samples` perturbations drawn from a generator seeded with `seed`.
pub fn certify(
    graph: &PlantedGraph,
    lambda: f64,
    method: Method,
    samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let layout = graph.layout();
    let basis = build_basis(layout)?;
    let e = distinctness_e(graph.params(), lambda, &layout.sizes(), method);
    let (c, c_i) = certificate_coefficients(graph.params(), lambda, method);
    let w0 = build_w0(graph, lambda, method);
    let w = project_mu(&w0, &basis);
    let power = PowerIteration {
        tol: 1e-10,
        ..PowerIteration::default()
    };
    let norm_w0 = spectral_norm_with(&w0, &power)?;
    let norm_w = spectral_norm_with(&w, &power)?;
    let norm_w0_fro = w0.frobenius();
    let inf_gap = inf_norm(&(&w0 - &w));
    let mu = mu_residual(&w, &basis);

    let mut rng = rng_from_seed(seed);
    let f_min_sampled = (0..samples)
        .map(|_| {
            let pert = sample_perp_perturbation(&basis, layout, &mut rng);
            eval_f(&pert.e, &w, graph, lambda, method)
        })
        .fold(f64::INFINITY, f64::min);

    let pass = e > 0.0
        && norm_w < 1.0
        && mu <= MU_RESIDUAL_RELATIVE_TOL * norm_w0_fro
        && (samples == 0 || f_min_sampled >= -F_SLACK);
    Ok(CertificateReport {
        method,
        lambda,
        e,
        c,
        c_i,
        norm_w0,
        norm_w0_fro,
        norm_w,
        inf_gap,
        mu_residual: mu,
        samples,
        f_min_sampled,
        pass,
    })
}

impl CertificateReport {
    pub const CSV_HEADER: &'static str =
        "method,lambda,e,c,c_i,norm_w0,norm_w0_fro,norm_w,inf_gap,mu_residual,samples,f_min_sampled,pass";

    fn joined_ci(&self, sep: &str) -> String {
        self.c_i
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// One `key = value` line per field, in CSV column order. `c_i` is
    /// comma-separated.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "method = {}", self.method);
        let _ = writeln!(s, "lambda = {}", self.lambda);
        let _ = writeln!(s, "e = {}", self.e);
        let _ = writeln!(s, "c = {}", self.c);
        let _ = writeln!(s, "c_i = {}", self.joined_ci(","));
        let _ = writeln!(s, "norm_w0 = {}", self.norm_w0);
        let _ = writeln!(s, "norm_w0_fro = {}", self.norm_w0_fro);
        let _ = writeln!(s, "norm_w = {}", self.norm_w);
        let _ = writeln!(s, "inf_gap = {}", self.inf_gap);
        let _ = writeln!(s, "mu_residual = {}", self.mu_residual);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "f_min_sampled = {}", self.f_min_sampled);
        let _ = writeln!(s, "pass = {}", self.pass);
        s
    }

    /// A row matching [`Self::CSV_HEADER`]; `c_i` is `;`-separated.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.lambda,
            self.e,
            self.c,
            self.joined_ci(";"),
            self.norm_w0,
            self.norm_w0_fro,
            self.norm_w,
            self.inf_gap,
            self.mu_residual,
            self.samples,
            self.f_min_sampled,
            self.pass
        )
    }
}
