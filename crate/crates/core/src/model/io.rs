//! Plain-text edge-list format.
//!
//! ```text
//! # comment lines start with '#'
//! <n> <t>
//! params p=<p_1>,...,<p_t> q=<q> r=<r> seed=<seed>
//! cluster 0: <node> <node> ...
//! ...
//! cluster <t-1>: ...
//! <i> <j>
//! ...
//! ```
//!
//! The header comes first. The `params` line is optional; the writer always
//! emits it. There is one `cluster` line per cluster id in `0..t`, and one
//! `i j` line per undirected edge with `i < j`. Self-loops are implicit and
//! never written. Blank lines are ignored. The writer emits clusters in id
//! order and edges in row-major order, so writing is deterministic.

use std::io::{BufRead, Write};

use super::{ClusterLayout, CoordSet, ModelParams, PlantedGraph};
use crate::error::{Error, Result};

/// Contents of an edge-list file. Model parameters are optional because a
/// graph can be solved and scored without them.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeListGraph {
    pub support: CoordSet,
    pub layout: ClusterLayout,
    pub params: Option<ModelParams>,
    pub seed: Option<u64>,
}

impl EdgeListGraph {
    pub fn into_planted(self) -> Result<PlantedGraph> {
        let params = self.params.ok_or_else(|| {
            Error::Config("graph file has no `params` line; model parameters are required".into())
        })?;
        PlantedGraph::from_parts(self.support, self.layout, params, self.seed.unwrap_or(0))
    }
}

impl From<&PlantedGraph> for EdgeListGraph {
    fn from(g: &PlantedGraph) -> Self {
        EdgeListGraph {
            support: g.support().clone(),
            layout: g.layout().clone(),
            params: Some(g.params().clone()),
            seed: Some(g.seed()),
        }
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_edge_list<W: Write>(graph: &PlantedGraph, mut out: W) -> Result<()> {
    let layout = graph.layout();
    let params = graph.params();
    writeln!(out, "{} {}", layout.n(), layout.t())?;
    writeln!(
        out,
        "params p={} q={} r={} seed={}",
        join(&params.p),
        params.q,
        params.r,
        graph.seed()
    )?;
    for (id, cluster) in layout.clusters().iter().enumerate() {
        let nodes: Vec<String> = cluster.iter().map(usize::to_string).collect();
        writeln!(out, "cluster {id}: {}", nodes.join(" "))?;
    }
    for (i, j) in graph.edges() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: &str, what: &str, src: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(src, line, format!("cannot parse {what} from `{tok}`")))
}

fn parse_params(rest: &str, src: &str, line: usize) -> Result<(ModelParams, Option<u64>)> {
    let mut p = None;
    let mut q = None;
    let mut r = 1.0;
    let mut seed = None;
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| {
            Error::parse(src, line, format!("expected key=value, found `{field}`"))
        })?;
        match key {
            "p" => {
                let list = value
                    .split(',')
                    .map(|v| parse_num::<f64>(v, "p", src, line))
                    .collect::<Result<Vec<_>>>()?;
                p = Some(list);
            }
            "q" => q = Some(parse_num::<f64>(value, "q", src, line)?),
            "r" => r = parse_num::<f64>(value, "r", src, line)?,
            "seed" => seed = Some(parse_num::<u64>(value, "seed", src, line)?),
            other => {
                return Err(Error::parse(
                    src,
                    line,
                    format!("unknown params key `{other}`"),
                ))
            }
        }
    }
    let p = p.ok_or_else(|| Error::parse(src, line, "params line lacks p="))?;
    let q = q.ok_or_else(|| Error::parse(src, line, "params line lacks q="))?;
    let mut params = ModelParams::new(p, q).map_err(|e| Error::parse(src, line, e.to_string()))?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::parse(src, line, format!("r = {r} outside (0, 1]")));
    }
    params.r = r;
    Ok((params, seed))
}

/// Parses the edge-list format. `source_name` appears in error messages.
pub fn read_edge_list<R: BufRead>(input: R, source_name: &str) -> Result<EdgeListGraph> {
    let src = source_name;
    let mut header: Option<(usize, usize)> = None;
    let mut params = None;
    let mut seed = None;
    let mut clusters: Vec<Option<Vec<usize>>> = Vec::new();
    let mut support: Option<CoordSet> = None;

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let raw = raw?;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((n, t)) = header else {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::parse(src, line_no, "expected header `<n> <t>`"));
            }
            let n = parse_num::<usize>(toks[0], "n", src, line_no)?;
            let t = parse_num::<usize>(toks[1], "t", src, line_no)?;
            header = Some((n, t));
            clusters = vec![None; t];
            support = Some(CoordSet::diagonal(n));
            continue;
        };

        if let Some(rest) = line.strip_prefix("params") {
            if params.is_some() {
                return Err(Error::parse(src, line_no, "duplicate params line"));
            }
            let (p, s) = parse_params(rest, src, line_no)?;
            if p.p.len() != t {
                return Err(Error::parse(
                    src,
                    line_no,
                    format!("{} probabilities given for {t} clusters", p.p.len()),
                ));
            }
            params = Some(p);
            seed = s;
        } else if let Some(rest) = line.strip_prefix("cluster") {
            let (id, nodes) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(src, line_no, "expected `cluster <id>: <nodes>`"))?;
            let id = parse_num::<usize>(id.trim(), "cluster id", src, line_no)?;
            if id >= t {
                return Err(Error::parse(
                    src,
                    line_no,
                    format!("cluster id {id} out of range 0..{t}"),
                ));
            }
            if clusters[id].is_some() {
                return Err(Error::parse(
                    src,
                    line_no,
                    format!("cluster {id} listed twice"),
                ));
            }
            let nodes = nodes
                .split_whitespace()
                .map(|tok| parse_num::<usize>(tok, "node index", src, line_no))
                .collect::<Result<Vec<_>>>()?;
            clusters[id] = Some(nodes);
        } else {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(Error::parse(
                    src,
                    line_no,
                    format!("unrecognised line `{line}`"),
                ));
            }
            let i = parse_num::<usize>(toks[0], "node index", src, line_no)?;
            let j = parse_num::<usize>(toks[1], "node index", src, line_no)?;
            if i >= j || j >= n {
                return Err(Error::parse(
                    src,
                    line_no,
                    format!("edge ({i}, {j}) must satisfy i < j < n = {n}"),
                ));
            }
            let s = support.as_mut().expect("support allocated with header");
            s.insert(i, j);
            s.insert(j, i);
        }
    }

    let (n, _) = header.ok_or_else(|| Error::parse(src, 0, "missing header line"))?;
    let clusters = clusters
        .into_iter()
        .enumerate()
        .map(|(id, c)| {
            c.ok_or_else(|| Error::parse(src, 0, format!("missing line for cluster {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let layout =
        ClusterLayout::new(n, clusters).map_err(|e| Error::parse(src, 0, e.to_string()))?;
    Ok(EdgeListGraph {
        support: support.expect("support allocated with header"),
        layout,
        params,
        seed,
    })
}
