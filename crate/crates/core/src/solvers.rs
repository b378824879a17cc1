//! ADMM solvers for the two decomposition programs.
//!
//! Both programs have the shape `min ||L||_* + g(L)` once the sparse part is
//! eliminated:
//!
//! * blind: `g(L) = lambda * ||A - L||_1` on the box `0 <= L <= 1`, with
//!   `S = A - L`;
//! * intelligent: `g(L) = lambda * sum(L over A^c)` on
//!   `{0 <= L <= 1, sum(L) >= |R|}`, with `S = L` restricted to `A^c`.
//!   For feasible `(L, S)` the original constraints force `S = L` on `A^c`
//!   and allow `S = 0` on `A` at no cost, which is what licenses the
//!   elimination.
//!
//! The splitting is `L = Z` with the nuclear norm on `L` (singular value
//! thresholding) and `g` on `Z` (an entrywise or box-and-sum prox). The
//! returned low-rank part is the last `Z`, so it satisfies the constraints
//! exactly; the nuclear-norm step only certifies it.

use crate::error::{Error, Result};
use crate::matops::{project_box_sum, shrink, svt, SymMatrix};

/// Which decomposition program to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Blind,
    Intelligent,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Blind => "blind",
            Method::Intelligent => "intelligent",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blind" => Ok(Method::Blind),
            "intelligent" => Ok(Method::Intelligent),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected blind or intelligent)"
            ))),
        }
    }
}

/// Rule for choosing the sparse-term weight from the graph size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaMode {
    /// `1 / (2 sqrt n)`, the weight of the size-informed recovery guarantee.
    IntelligentTheorem,
    /// `1 / (4 sqrt n)`, the weight of the blind recovery guarantee.
    BlindTheorem,
    /// `1 / sqrt n`, the weight used in the small simulations.
    Simulation,
}

impl LambdaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LambdaMode::IntelligentTheorem => "intelligent_theorem",
            LambdaMode::BlindTheorem => "blind_theorem",
            LambdaMode::Simulation => "simulation",
        }
    }
}

impl std::str::FromStr for LambdaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intelligent_theorem" => Ok(LambdaMode::IntelligentTheorem),
            "blind_theorem" => Ok(LambdaMode::BlindTheorem),
            "simulation" => Ok(LambdaMode::Simulation),
            other => Err(Error::Config(format!(
                "unknown lambda mode `{other}` (expected intelligent_theorem, blind_theorem or simulation)"
            ))),
        }
    }
}

pub fn default_lambda(n: usize, mode: LambdaMode) -> f64 {
    assert!(n >= 1, "lambda needs n >= 1");
    let root = (n as f64).sqrt();
    match mode {
        LambdaMode::IntelligentTheorem => 1.0 / (2.0 * root),
        LambdaMode::BlindTheorem => 1.0 / (4.0 * root),
        LambdaMode::Simulation => 1.0 / root,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Weight of the sparse term.
    pub lambda: f64,
    /// Initial ADMM penalty.
    pub rho: f64,
    pub max_iter: usize,
    /// Absolute primal tolerance per unit of `n` (`||L - Z||_F <= n * tol_primal`).
    pub tol_primal: f64,
    /// Absolute dual tolerance per unit of `n`.
    pub tol_dual: f64,
    /// Residual balancing: double or halve `rho` when one residual exceeds
    /// the other by `10x`. Only applied during the first `adapt_until`
    /// iterations so that the tail of the run uses a fixed penalty.
    pub adaptive_rho: bool,
    pub adapt_until: usize,
    /// Residual history is sampled every this many iterations.
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            rho: 1.0,
            max_iter: 5000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            adaptive_rho: true,
            adapt_until: 1000,
            record_every: 10,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_primal = tol;
        self.tol_dual = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSolverConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda = {} must be a finite nonnegative number",
                self.lambda
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho = {} must be positive", self.rho));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iter == 0 || self.record_every == 0 {
            return bad("max_iter and record_every must be at least 1".into());
        }
        Ok(())
    }
}

/// Residuals sampled during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualRecord {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// Low-rank part `L`; satisfies the program's constraints exactly.
    pub low_rank: SymMatrix,
    /// Sparse part `S`.
    pub sparse: SymMatrix,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `objective - dual bound` for the dual point produced by the final
    /// nuclear-norm step. Nonnegative up to rounding; an upper bound on the
    /// suboptimality of `objective`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<ResidualRecord>,
}

/// `||L||_* + lambda * ||S||_1`.
pub fn objective(low_rank: &SymMatrix, sparse: &SymMatrix, lambda: f64) -> Result<f64> {
    if low_rank.order() != sparse.order() {
        return Err(Error::Shape {
            expected: format!("{0}x{0}", low_rank.order()),
            found: format!("{0}x{0}", sparse.order()),
        });
    }
    Ok(low_rank.nuclear_norm()? + lambda * sparse.l1_norm())
}

/// The part of the objective that lives on `Z`.
trait Regulariser {
    /// `argmin_X g(X) + rho/2 ||X - V||_F^2`.
    fn prox(&self, v: &SymMatrix, rho: f64) -> Result<SymMatrix>;
    /// `min_X <Y, X> + g(X)`, a lower bound on the optimum whenever
    /// `||Y|| <= 1`.
    fn dual_bound(&self, y: &SymMatrix) -> f64;
    fn initial_point(&self) -> Result<SymMatrix>;
}

struct BlindTerm<'a> {
    adjacency: &'a SymMatrix,
    lambda: f64,
}

impl Regulariser for BlindTerm<'_> {
    fn prox(&self, v: &SymMatrix, rho: f64) -> Result<SymMatrix> {
        // Scalar prox of lambda|a - x| on [0, 1]: shrink toward a, then clamp.
        let tau = self.lambda / rho;
        let a = self.adjacency.as_dense();
        let n = v.order();
        Ok(SymMatrix::from_fn(n, |i, j| {
            let target = a[(i, j)];
            (target + shrink(v.get(i, j) - target, tau)).clamp(0.0, 1.0)
        }))
    }

    fn dual_bound(&self, y: &SymMatrix) -> f64 {
        // Piecewise linear in each x in [0, 1] with its kink at a in {0, 1}.
        let a = self.adjacency.as_dense();
        y.as_dense()
            .iter()
            .zip(a.iter())
            .map(|(&yv, &av)| (self.lambda * av).min(yv + self.lambda * (1.0 - av)))
            .sum()
    }

    fn initial_point(&self) -> Result<SymMatrix> {
        Ok(self.adjacency.clone())
    }
}

struct IntelligentTerm {
    /// `1_{A^c}`.
    missing: SymMatrix,
    lambda: f64,
    region_size: f64,
}

impl Regulariser for IntelligentTerm {
    fn prox(&self, v: &SymMatrix, rho: f64) -> Result<SymMatrix> {
        // Linear term plus indicator: shift, then project onto the feasible set.
        let shifted = v - &(&self.missing * (self.lambda / rho));
        project_box_sum(&shifted, 0.0, 1.0, self.region_size)
    }

    fn dual_bound(&self, y: &SymMatrix) -> f64 {
        // min <w, X> over 0 <= X <= 1, sum X >= s: take every negative weight,
        // then the cheapest remaining ones until the sum reaches s.
        let mut w: Vec<f64> = y
            .as_dense()
            .iter()
            .zip(self.missing.as_dense().iter())
            .map(|(&yv, &m)| yv + self.lambda * m)
            .collect();
        w.sort_unstable_by(f64::total_cmp);
        let mut remaining = self.region_size;
        let mut value = 0.0;
        for wv in w {
            if wv < 0.0 {
                value += wv;
                remaining -= 1.0;
            } else if remaining > 0.0 {
                let take = remaining.min(1.0);
                value += take * wv;
                remaining -= take;
            } else {
                break;
            }
        }
        value
    }

    fn initial_point(&self) -> Result<SymMatrix> {
        let ones_on_edges = &SymMatrix::ones(self.missing.order()) - &self.missing;
        project_box_sum(&ones_on_edges, 0.0, 1.0, self.region_size)
    }
}

fn check_adjacency(a: &SymMatrix) -> Result<()> {
    let n = a.order();
    for j in 0..n {
        for i in 0..n {
            let v = a.get(i, j);
            if v != 0.0 && v != 1.0 {
                return Err(Error::NotAdjacency(format!("entry ({i}, {j}) = {v}")));
            }
        }
        if a.get(j, j) != 1.0 {
            return Err(Error::NotAdjacency(format!("diagonal entry {j} is not 1")));
        }
    }
    Ok(())
}

struct AdmmOutput {
    z: SymMatrix,
    dual_point: SymMatrix,
    primal: f64,
    dual: f64,
    iterations: usize,
    converged: bool,
    history: Vec<ResidualRecord>,
}

const BALANCE_RATIO: f64 = 10.0;
const BALANCE_FACTOR: f64 = 2.0;
const BALANCE_EVERY: usize = 10;

fn run_admm(term: &dyn Regulariser, n: usize, config: &SolverConfig) -> Result<AdmmOutput> {
    let mut rho = config.rho;
    let mut z = term.initial_point()?;
    let mut u = SymMatrix::zeros(n);
    let mut dual_point = SymMatrix::zeros(n);
    let mut history = Vec::new();
    let scale = n as f64;
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);

    for iter in 1..=config.max_iter {
        let anchor = &z - &u;
        let l = svt(&anchor, 1.0 / rho)?;
        // rho (anchor - L) lies in the subdifferential of ||.||_* at L, so its
        // spectral norm is at most one: a valid dual point.
        dual_point = &(&anchor - &l) * rho;

        let z_prev = z;
        z = term.prox(&(&l + &u), rho)?;
        let diff = &l - &z;
        u = &u + &diff;

        primal = diff.frobenius();
        dual = rho * (&z - &z_prev).frobenius();

        if iter % config.record_every == 0 {
            history.push(ResidualRecord {
                iteration: iter,
                primal,
                dual,
                rho,
            });
        }
        if primal <= scale * config.tol_primal && dual <= scale * config.tol_dual {
            return Ok(AdmmOutput {
                z,
                dual_point,
                primal,
                dual,
                iterations: iter,
                converged: true,
                history,
            });
        }
        if config.adaptive_rho && iter <= config.adapt_until && iter % BALANCE_EVERY == 0 {
            let factor = if primal > BALANCE_RATIO * dual {
                BALANCE_FACTOR
            } else if dual > BALANCE_RATIO * primal {
                1.0 / BALANCE_FACTOR
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u = &u * (1.0 / factor);
            }
        }
    }
    Ok(AdmmOutput {
        z,
        dual_point,
        primal,
        dual,
        iterations: config.max_iter,
        converged: false,
        history,
    })
}

/// Solves `min ||L||_* + lambda ||S||_1  s.t.  0 <= L <= 1, L + S = A`.
///
/// `S` is returned as `A - L`, so the equality holds exactly.
pub fn solve_blind(adjacency: &SymMatrix, config: &SolverConfig) -> Result<Decomposition> {
    config.validate()?;
    check_adjacency(adjacency)?;
    let n = adjacency.order();
    let term = BlindTerm {
        adjacency,
        lambda: config.lambda,
    };
    let out = run_admm(&term, n, config)?;
    let low_rank = out.z;
    let sparse = adjacency - &low_rank;
    finish(
        low_rank,
        sparse,
        &term,
        out.dual_point,
        config.lambda,
        out.primal,
        out.dual,
        out.iterations,
        out.converged,
        out.history,
    )
}

/// Solves the size-informed program
/// `min ||L||_* + lambda ||S||_1  s.t.  1 >= L >= S >= 0,
/// <1 - A, L - S> = 0, sum(L) >= region_size`
/// through its reduction to `L` alone; `S` is `L` restricted to `A^c`.
pub fn solve_intelligent(
    adjacency: &SymMatrix,
    region_size: f64,
    config: &SolverConfig,
) -> Result<Decomposition> {
    config.validate()?;
    check_adjacency(adjacency)?;
    let n = adjacency.order();
    let max = (n * n) as f64;
    if region_size > max {
        return Err(Error::RegionTooLarge { region_size, max });
    }
    let missing = adjacency.map(|a| 1.0 - a);
    let term = IntelligentTerm {
        missing,
        lambda: config.lambda,
        region_size,
    };
    let out = run_admm(&term, n, config)?;
    let low_rank = out.z;
    let sparse = SymMatrix::from_fn(n, |i, j| {
        if adjacency.get(i, j) == 0.0 {
            low_rank.get(i, j)
        } else {
            0.0
        }
    });
    finish(
        low_rank,
        sparse,
        &term,
        out.dual_point,
        config.lambda,
        out.primal,
        out.dual,
        out.iterations,
        out.converged,
        out.history,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    low_rank: SymMatrix,
    sparse: SymMatrix,
    term: &dyn Regulariser,
    dual_point: SymMatrix,
    lambda: f64,
    primal_residual: f64,
    dual_residual: f64,
    iterations: usize,
    converged: bool,
    history: Vec<ResidualRecord>,
) -> Result<Decomposition> {
    let objective = objective(&low_rank, &sparse, lambda)?;
    let duality_gap = objective - term.dual_bound(&dual_point);
    Ok(Decomposition {
        low_rank,
        sparse,
        objective,
        primal_residual,
        dual_residual,
        duality_gap,
        iterations,
        converged,
        history,
    })
}
