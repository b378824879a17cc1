//! The probabilistic cluster model: layouts, parameters, random supports and
//! planted graphs.

mod coords;
pub mod io;

pub use coords::CoordSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matops::SymMatrix;

/// `t` disjoint clusters over nodes `0..n`. Nodes outside every cluster form
/// the background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLayout {
    n: usize,
    clusters: Vec<Vec<usize>>,
}

impl ClusterLayout {
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![false; n];
        for (id, cluster) in clusters.iter().enumerate() {
            if cluster.is_empty() {
                return Err(Error::InvalidLayout(format!("cluster {id} is empty")));
            }
            for &node in cluster {
                if node >= n {
                    return Err(Error::InvalidLayout(format!(
                        "cluster {id} contains node {node}, but n = {n}"
                    )));
                }
                if owner[node] {
                    return Err(Error::InvalidLayout(format!(
                        "node {node} appears in more than one cluster (or twice in cluster {id})"
                    )));
                }
                owner[node] = true;
            }
        }
        Ok(ClusterLayout { n, clusters })
    }

    /// Clusters placed on consecutive node ranges: the first `sizes[0]` nodes,
    /// then the next `sizes[1]`, and so on.
    pub fn contiguous(n: usize, sizes: &[usize]) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if total > n {
            return Err(Error::InvalidLayout(format!(
                "cluster sizes sum to {total}, more than n = {n}"
            )));
        }
        let mut start = 0;
        let clusters = sizes
            .iter()
            .map(|&k| {
                let c: Vec<usize> = (start..start + k).collect();
                start += k;
                c
            })
            .collect();
        Self::new(n, clusters)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// `|R| = sum k_i^2`.
    pub fn region_size(&self) -> usize {
        self.clusters.iter().map(|c| c.len() * c.len()).sum()
    }

    /// Cluster index of every node; `None` for background nodes.
    pub fn membership(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.n];
        for (id, cluster) in self.clusters.iter().enumerate() {
            for &node in cluster {
                owner[node] = Some(id);
            }
        }
        owner
    }

    /// Nodes that belong to no cluster.
    pub fn background(&self) -> Vec<usize> {
        self.membership()
            .iter()
            .enumerate()
            .filter_map(|(node, owner)| owner.is_none().then_some(node))
            .collect()
    }

    /// Same clusters with nodes sorted and clusters ordered by smallest node.
    pub fn canonical(&self) -> Self {
        let mut clusters: Vec<Vec<usize>> = self
            .clusters
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        clusters.sort_unstable_by_key(|c| c[0]);
        ClusterLayout {
            n: self.n,
            clusters,
        }
    }

    /// Equality as a set of node sets.
    pub fn same_partition(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical() == other.canonical()
    }
}

/// `R = union of C_i x C_i`.
pub fn region_r(layout: &ClusterLayout) -> CoordSet {
    let mut region = CoordSet::empty(layout.n, layout.n);
    for cluster in &layout.clusters {
        for &i in cluster {
            for &j in cluster {
                region.insert(i, j);
            }
        }
    }
    region
}

/// In-cluster probabilities `p`, background probability `q`, and the
/// observation rate `r` that has already been applied to them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub p: Vec<f64>,
    pub q: f64,
    pub r: f64,
}

impl ModelParams {
    pub fn new(p: Vec<f64>, q: f64) -> Result<Self> {
        let params = ModelParams { p, q, r: 1.0 };
        params.check_ranges()?;
        Ok(params)
    }

    fn check_ranges(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if let Some(bad) = self.p.iter().find(|&&x| !in_unit(x)) {
            return Err(Error::InvalidParams(format!("p = {bad} is outside [0, 1]")));
        }
        if !in_unit(self.q) {
            return Err(Error::InvalidParams(format!(
                "q = {} is outside [0, 1]",
                self.q
            )));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "r = {} is outside (0, 1]",
                self.r
            )));
        }
        Ok(())
    }

    pub fn p_min(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_max(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Requires `p_min > q`, the denser-clusters assumption.
    pub fn validate(&self) -> Result<()> {
        self.check_ranges()?;
        if self.p_min() <= self.q {
            return Err(Error::InvalidParams(format!(
                "p_min = {} must exceed q = {}",
                self.p_min(),
                self.q
            )));
        }
        Ok(())
    }

    /// Parameters of the complement graph: `(1 - p_i, 1 - q)`.
    pub fn complemented(&self) -> Self {
        ModelParams {
            p: self.p.iter().map(|p| 1.0 - p).collect(),
            q: 1.0 - self.q,
            r: self.r,
        }
    }

    fn check_layout(&self, layout: &ClusterLayout) -> Result<()> {
        if self.p.len() != layout.t() {
            return Err(Error::InvalidParams(format!(
                "{} in-cluster probabilities for {} clusters",
                self.p.len(),
                layout.t()
            )));
        }
        Ok(())
    }
}

/// A graph drawn from the cluster model, stored as its coordinate set `A`
/// (edges plus every diagonal coordinate).
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedGraph {
    support: CoordSet,
    layout: ClusterLayout,
    params: ModelParams,
    seed: u64,
}

impl PlantedGraph {
    /// Wraps an existing support. The support must be symmetric and contain
    /// the diagonal.
    pub fn from_parts(
        support: CoordSet,
        layout: ClusterLayout,
        params: ModelParams,
        seed: u64,
    ) -> Result<Self> {
        let n = layout.n();
        if support.rows() != n || support.cols() != n {
            return Err(Error::Shape {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", support.rows(), support.cols()),
            });
        }
        if let Some((i, j)) = support.first_asymmetry() {
            return Err(Error::NotSymmetric { row: i, col: j });
        }
        if let Some(i) = (0..n).find(|&i| !support.contains(i, i)) {
            return Err(Error::NotAdjacency(format!(
                "diagonal entry {i} is not set"
            )));
        }
        params.check_layout(&layout)?;
        Ok(PlantedGraph {
            support,
            layout,
            params,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    /// The coordinate set `A` of nonzero adjacency entries.
    pub fn support(&self) -> &CoordSet {
        &self.support
    }

    pub fn layout(&self) -> &ClusterLayout {
        &self.layout
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.support.contains(i, j)
    }

    pub fn adjacency(&self) -> SymMatrix {
        SymMatrix::indicator(&self.support)
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.support.iter().filter(|&(i, j)| i < j)
    }
}

/// Each coordinate of `[rows] x [cols]` independently with probability `rate`.
pub fn sample_support<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rate: f64,
    rng: &mut R,
) -> CoordSet {
    assert!((0.0..=1.0).contains(&rate), "rate {rate} outside [0, 1]");
    CoordSet::from_fn(rows, cols, |_, _| rng.random::<f64>() < rate)
}

/// A random support with every diagonal coordinate added.
pub fn sample_corrected_support<R: Rng + ?Sized>(dim: usize, rate: f64, rng: &mut R) -> CoordSet {
    sample_support(dim, dim, rate, rng).union(&CoordSet::diagonal(dim))
}

/// Draws a graph from the cluster model. Lower-triangular entries are drawn
/// in row-major order (`i` ascending, then `j < i` ascending), then mirrored.
pub fn generate<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    params: &ModelParams,
    seed: u64,
    rng: &mut R,
) -> Result<PlantedGraph> {
    params.validate()?;
    if params.r != 1.0 {
        return Err(Error::InvalidParams(
            "generate draws fully observed graphs (r = 1); apply observe_partial afterwards".into(),
        ));
    }
    draw(layout, params, seed, rng)
}

fn draw<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    params: &ModelParams,
    seed: u64,
    rng: &mut R,
) -> Result<PlantedGraph> {
    params.check_layout(layout)?;
    let n = layout.n();
    let owner = layout.membership();
    let mut support = CoordSet::diagonal(n);
    for i in 0..n {
        for j in 0..i {
            let prob = match (owner[i], owner[j]) {
                (Some(a), Some(b)) if a == b => params.p[a],
                _ => params.q,
            };
            if rng.random::<f64>() < prob {
                support.insert(i, j);
                support.insert(j, i);
            }
        }
    }
    Ok(PlantedGraph {
        support,
        layout: layout.clone(),
        params: params.clone(),
        seed,
    })
}

/// Draws a graph whose clusters are sparser than the background
/// (`p_max < q`) by drawing the complement model and complementing.
pub fn generate_sparse_clusters<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    params: &ModelParams,
    seed: u64,
    rng: &mut R,
) -> Result<PlantedGraph> {
    let flipped = params.complemented();
    let dense = generate(layout, &flipped, seed, rng)?;
    let mut sparse = complement(&dense);
    sparse.params = params.clone();
    Ok(sparse)
}

/// Keeps each off-diagonal edge independently with probability `r`.
/// The returned parameters are `(r p_i, r q)`.
pub fn observe_partial<R: Rng + ?Sized>(
    graph: &PlantedGraph,
    r: f64,
    rng: &mut R,
) -> Result<PlantedGraph> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "observation rate {r} outside (0, 1]"
        )));
    }
    let n = graph.n();
    let mut support = CoordSet::diagonal(n);
    for (i, j) in graph.edges() {
        if rng.random::<f64>() < r {
            support.insert(i, j);
            support.insert(j, i);
        }
    }
    let params = ModelParams {
        p: graph.params.p.iter().map(|p| r * p).collect(),
        q: r * graph.params.q,
        r: r * graph.params.r,
    };
    Ok(PlantedGraph {
        support,
        layout: graph.layout.clone(),
        params,
        seed: graph.seed,
    })
}

/// Flips every off-diagonal entry; the diagonal stays set.
pub fn complement(graph: &PlantedGraph) -> PlantedGraph {
    let mut support = graph.support.complement();
    for i in 0..graph.n() {
        support.insert(i, i);
    }
    PlantedGraph {
        support,
        layout: graph.layout.clone(),
        params: graph.params.complemented(),
        seed: graph.seed,
    }
}
