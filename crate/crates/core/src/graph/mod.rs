//! Input graphs and partitioners.
//!
//! Graphs are undirected and stored as sorted adjacency lists (both
//! directions of every edge). Vertex ids are dense `0..n`.

mod io;
mod partition;

pub use io::{read_edge_list, read_edge_list_from, write_edge_list, write_edge_list_to};
pub use partition::{
    partition_greedy, partition_hash, partition_random, CrossEdge, HashMode, Partition,
    Partitioning,
};

use crate::rng::{self, Rng};

pub type VertexId = u32;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("edge list line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds an undirected graph; duplicate edges are collapsed.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::Parameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(GraphError::Parameter(format!("self-loop at {u}")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    /// Undirected edges `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&v| (u as VertexId) < v)
                .map(move |&v| (u as VertexId, v))
        })
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }
}

fn check_probability(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::Parameter(format!("probability {p} not in [0, 1]")))
    }
}

/// Moore-neighborhood torus; vertex `(x, y)` has id `y * width + x`.
pub fn torus2d(width: usize, height: usize) -> Result<Graph, GraphError> {
    if width < 3 || height < 3 {
        return Err(GraphError::Parameter(format!(
            "torus needs both dimensions >= 3, got {width}x{height}"
        )));
    }
    let mut adj = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let mut list = Vec::with_capacity(8);
            for dy in [height - 1, 0, 1] {
                for dx in [width - 1, 0, 1] {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = (x + dx) % width;
                    let ny = (y + dy) % height;
                    list.push((ny * width + nx) as VertexId);
                }
            }
            list.sort_unstable();
            adj.push(list);
        }
    }
    Ok(Graph { adj })
}

/// Erdős–Rényi G(n, p): every pair `u < v`, visited in lexicographic order,
/// is an edge with probability `p`.
pub fn erm(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    check_probability(p)?;
    let mut rng = rng::keyed(seed, 0xE5);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                adj[u].push(v as VertexId);
                adj[v].push(u as VertexId);
            }
        }
    }
    Ok(Graph { adj })
}

/// Stochastic block model with `blocks` equal consecutive blocks: pairs in
/// one block connect with `p_in`, other pairs with `p_out`.
pub fn sbm(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph, GraphError> {
    check_probability(p_in)?;
    check_probability(p_out)?;
    if blocks == 0 || n % blocks != 0 {
        return Err(GraphError::Parameter(format!(
            "{blocks} blocks do not divide {n} vertices"
        )));
    }
    let size = n / blocks;
    let mut rng = rng::keyed(seed, 0x5B);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / size == v / size { p_in } else { p_out };
            if rng.gen_bool(p) {
                adj[u].push(v as VertexId);
                adj[v].push(u as VertexId);
            }
        }
    }
    Ok(Graph { adj })
}

/// Vertex 0 joined to every other vertex.
pub fn star(n: usize) -> Result<Graph, GraphError> {
    if n < 2 {
        return Err(GraphError::Parameter(format!("star needs n >= 2, got {n}")));
    }
    Graph::from_edges(n, (1..n as VertexId).map(|v| (0, v)))
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n as VertexId).map(|v| (v - 1, v))).expect("valid path")
}

/// Cycle `0 - 1 - ... - (n-1) - 0`; needs `n >= 3`.
pub fn ring(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::Parameter(format!("ring needs n >= 3, got {n}")));
    }
    Graph::from_edges(n, (0..n as VertexId).map(|v| (v, (v + 1) % n as VertexId)))
}

/// Complete graph on `n` vertices.
pub fn complete(n: usize) -> Graph {
    Graph::from_edges(
        n,
        (0..n as VertexId).flat_map(|u| (u + 1..n as VertexId).map(move |v| (u, v))),
    )
    .expect("valid complete graph")
}
