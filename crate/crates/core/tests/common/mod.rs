//! Independent reference implementations used as test oracles. Nothing here
//! calls the library's kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub fn matrix_from_rows(rows: &[&str]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| match rows[i].as_bytes()[j] {
        b'1' => 1.0,
        b'0' => 0.0,
        other => panic!("bad adjacency character {other}"),
    })
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(0.5 * (m + m.transpose()))
}

/// Nuclear norm from a general SVD.
pub fn nuclear(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.sum()
}

/// Largest singular value from a general SVD.
pub fn spectral(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Singular value thresholding through a general (not symmetric) SVD.
pub fn svt_by_svd(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s = svd.singular_values.map(|s| (s - tau).max(0.0));
    &u * DMatrix::from_diagonal(&s) * &vt
}

/// Projection of a matrix onto the spectral-norm unit ball.
fn clip_spectrum(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = sym_eigen(m);
    let d = e.eigenvalues.map(|x| x.clamp(-1.0, 1.0));
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

/// Exact projection onto `{lo <= x <= hi, sum(x) >= s}` by walking the
/// sorted breakpoints of the piecewise-linear map
/// `mu -> sum clamp(x + mu, lo, hi)`.
pub fn box_sum_by_breakpoints(x: &[f64], lo: f64, hi: f64, s: f64) -> Vec<f64> {
    let clamp = |mu: f64| {
        x.iter()
            .map(|&v| (v + mu).clamp(lo, hi))
            .collect::<Vec<_>>()
    };
    let total = |mu: f64| x.iter().map(|&v| (v + mu).clamp(lo, hi)).sum::<f64>();
    if total(0.0) >= s {
        return clamp(0.0);
    }
    let mut points: Vec<f64> = x
        .iter()
        .flat_map(|&v| [lo - v, hi - v])
        .filter(|&b| b > 0.0)
        .collect();
    points.push(0.0);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (total(a), total(b));
        if fb >= s {
            // Linear on [a, b].
            let mu = if fb > fa {
                a + (s - fa) * (b - a) / (fb - fa)
            } else {
                b
            };
            return clamp(mu);
        }
    }
    panic!("sum target {s} is not attainable");
}

/// Smallest value of `<w, L>` over `{0 <= L <= 1, sum(L) >= s}`: take every
/// negative weight, then the cheapest remaining mass until the sum is met.
fn knapsack_min(w: &[f64], s: f64) -> f64 {
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut value = 0.0;
    let mut mass = 0.0;
    for &c in &sorted {
        if c < 0.0 {
            value += c;
            mass += 1.0;
        } else if mass < s {
            let take = (s - mass).min(1.0);
            value += take * c;
            mass += take;
        }
    }
    value
}

#[derive(Clone, Debug)]
pub struct Reference {
    pub low_rank: DMatrix<f64>,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Primal-dual hybrid gradient on `min_L max_{||Y|| <= 1} <Y, L> + h(L)`.
/// `prox(v, t)` is the prox of `t h` and `dual(Y)` is `min_L <Y, L> + h(L)`.
fn pdhg(
    n: usize,
    start: DMatrix<f64>,
    h: impl Fn(&DMatrix<f64>) -> f64,
    prox: impl Fn(&DMatrix<f64>, f64) -> DMatrix<f64>,
    dual: impl Fn(&DMatrix<f64>) -> f64,
) -> Reference {
    let tau = 0.95;
    let sigma = 0.95;
    let mut l = start;
    let mut bar = l.clone();
    let mut y = DMatrix::zeros(n, n);
    let mut best_dual = f64::NEG_INFINITY;
    let mut best = (f64::INFINITY, l.clone());
    let mut iterations = 0;
    for it in 1..=100_000 {
        iterations = it;
        y = clip_spectrum(&(&y + sigma * &bar));
        let next = prox(&(&l - tau * &y), tau);
        bar = 2.0 * &next - &l;
        l = next;
        if it % 20 == 0 {
            let primal = nuclear(&l) + h(&l);
            if primal < best.0 {
                best = (primal, l.clone());
            }
            best_dual = best_dual.max(dual(&y));
            if best.0 - best_dual <= 1e-9 * best.0.abs().max(1.0) {
                break;
            }
        }
    }
    Reference {
        low_rank: best.1,
        objective: best.0,
        gap: best.0 - best_dual,
        iterations,
    }
}

/// Blind program: `min ||L||_* + lambda ||A - L||_1` over `0 <= L <= 1`.
pub fn reference_blind(a: &DMatrix<f64>, lambda: f64) -> Reference {
    let n = a.nrows();
    let h = |l: &DMatrix<f64>| lambda * (a - l).abs().sum();
    // Entrywise: on [0, 1] the term is linear, lambda (1 - l) or lambda l.
    let prox = |v: &DMatrix<f64>, t: f64| {
        DMatrix::from_fn(n, n, |i, j| {
            let push = if a[(i, j)] == 1.0 {
                t * lambda
            } else {
                -t * lambda
            };
            (v[(i, j)] + push).clamp(0.0, 1.0)
        })
    };
    let dual = |y: &DMatrix<f64>| {
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ends = [lambda * a[(i, j)], y[(i, j)] + lambda * (1.0 - a[(i, j)])];
                total += ends[0].min(ends[1]);
            }
        }
        total
    };
    pdhg(n, a.clone(), h, prox, dual)
}

/// Size-informed program reduced to `L`: `min ||L||_* + lambda sum(L over
/// A^c)` over `{0 <= L <= 1, sum(L) >= s}`.
pub fn reference_intelligent(a: &DMatrix<f64>, lambda: f64, s: f64) -> Reference {
    let n = a.nrows();
    let miss = a.map(|x| 1.0 - x);
    let h = |l: &DMatrix<f64>| lambda * l.component_mul(&miss).sum();
    let prox = |v: &DMatrix<f64>, t: f64| {
        let shifted = v - t * lambda * &miss;
        let out = box_sum_by_breakpoints(shifted.as_slice(), 0.0, 1.0, s);
        DMatrix::from_vec(n, n, out)
    };
    let dual = |y: &DMatrix<f64>| {
        let w = y + lambda * &miss;
        knapsack_min(w.as_slice(), s)
    };
    let start = DMatrix::from_vec(n, n, box_sum_by_breakpoints(a.as_slice(), 0.0, 1.0, s));
    pdhg(n, start, h, prox, dual)
}

/// Brute-force projection onto `{lo <= x <= hi, sum(x) >= s}` for short
/// vectors: enumerate which entries sit at `lo`, at `hi`, or are free, and
/// whether the sum constraint is active; keep the closest feasible point.
pub fn box_sum_by_enumeration(x: &[f64], lo: f64, hi: f64, s: f64) -> Vec<f64> {
    let d = x.len();
    let patterns = 3usize.pow(d as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..patterns {
        let mut state = vec![0u8; d];
        let mut c = code;
        for slot in state.iter_mut() {
            *slot = (c % 3) as u8;
            c /= 3;
        }
        for sum_active in [false, true] {
            let fixed: f64 = state
                .iter()
                .map(|&st| match st {
                    0 => lo,
                    1 => hi,
                    _ => 0.0,
                })
                .sum();
            let free: Vec<usize> = (0..d).filter(|&i| state[i] == 2).collect();
            let mu = if sum_active {
                if free.is_empty() {
                    0.0
                } else {
                    (s - fixed - free.iter().map(|&i| x[i]).sum::<f64>()) / free.len() as f64
                }
            } else {
                0.0
            };
            let cand: Vec<f64> = (0..d)
                .map(|i| match state[i] {
                    0 => lo,
                    1 => hi,
                    _ => x[i] + mu,
                })
                .collect();
            let eps = 1e-12;
            let feasible = cand.iter().all(|&v| v >= lo - eps && v <= hi + eps)
                && cand.iter().sum::<f64>() >= s - 1e-9;
            if !feasible {
                continue;
            }
            let dist: f64 = cand.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                best = Some((dist, cand));
            }
        }
    }
    best.expect("feasible set is nonempty").1
}
