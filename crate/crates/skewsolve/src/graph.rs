//! Hardware connectivity graphs: complete, 2-D lattice, path, and explicit
//! edge lists. Lattice vertices are addressed by snakelike labels so one
//! integer index works everywhere; helpers convert labels to (row, col).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Qubit connectivity. Vertices are 0..n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ConnectivityGraph {
    Complete { n: usize },
    /// l1 rows by l2 columns, labeled in snakelike order: row 0 runs left to
    /// right, row 1 right to left, and so on.
    Lattice { l1: usize, l2: usize },
    Path { n: usize },
    Explicit { n: usize, edges: Vec<(usize, usize)> },
}

impl ConnectivityGraph {
    pub fn complete(n: usize) -> Self {
        ConnectivityGraph::Complete { n }
    }

    pub fn lattice(l1: usize, l2: usize) -> Self {
        ConnectivityGraph::Lattice { l1, l2 }
    }

    pub fn path(n: usize) -> Self {
        ConnectivityGraph::Path { n }
    }

    pub fn explicit(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::contract(format!(
                    "edge ({a}, {b}) outside vertex range 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::contract(format!("self-loop on vertex {a}")));
            }
        }
        Ok(ConnectivityGraph::Explicit { n, edges })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConnectivityGraph::Complete { n } | ConnectivityGraph::Path { n } => {
                if *n == 0 {
                    return Err(Error::contract("graph needs at least one vertex"));
                }
            }
            ConnectivityGraph::Lattice { l1, l2 } => {
                if *l1 == 0 || *l2 == 0 {
                    return Err(Error::contract("lattice dimensions must be positive"));
                }
            }
            ConnectivityGraph::Explicit { n, edges } => {
                if *n == 0 {
                    return Err(Error::contract("graph needs at least one vertex"));
                }
                for &(a, b) in edges {
                    if a >= *n || b >= *n {
                        return Err(Error::contract(format!(
                            "edge ({a}, {b}) outside vertex range 0..{n}"
                        )));
                    }
                    if a == b {
                        return Err(Error::contract(format!("self-loop on vertex {a}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            ConnectivityGraph::Complete { n } | ConnectivityGraph::Path { n } => *n,
            ConnectivityGraph::Lattice { l1, l2 } => l1 * l2,
            ConnectivityGraph::Explicit { n, .. } => *n,
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b || a >= self.vertex_count() || b >= self.vertex_count() {
            return false;
        }
        match self {
            ConnectivityGraph::Complete { .. } => true,
            ConnectivityGraph::Path { .. } => a.abs_diff(b) == 1,
            ConnectivityGraph::Lattice { l1, l2 } => {
                let (r1, c1) = snake_to_cell(*l1, *l2, a);
                let (r2, c2) = snake_to_cell(*l1, *l2, b);
                r1.abs_diff(r2) + c1.abs_diff(c2) == 1
            }
            ConnectivityGraph::Explicit { edges, .. } => edges
                .iter()
                .any(|&(x, y)| (x == a && y == b) || (x == b && y == a)),
        }
    }

    /// Undirected edge list (each edge once, smaller index first).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertex_count();
        match self {
            ConnectivityGraph::Explicit { edges, .. } => {
                let mut out: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| (a.min(b), a.max(b)))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            _ => {
                let mut out = Vec::new();
                for a in 0..n {
                    for b in (a + 1)..n {
                        if self.has_edge(a, b) {
                            out.push((a, b));
                        }
                    }
                }
                out
            }
        }
    }

    /// Graph diameter (longest shortest path). Errors on a disconnected
    /// explicit graph; a single vertex has diameter 0.
    pub fn diameter(&self) -> Result<u64> {
        match self {
            ConnectivityGraph::Complete { n } => Ok(if *n <= 1 { 0 } else { 1 }),
            ConnectivityGraph::Path { n } => Ok((*n as u64).saturating_sub(1)),
            ConnectivityGraph::Lattice { l1, l2 } => Ok((l1 + l2) as u64 - 2),
            ConnectivityGraph::Explicit { n, .. } => {
                let adj = self.adjacency();
                let mut best = 0u64;
                for start in 0..*n {
                    let mut dist = vec![usize::MAX; *n];
                    dist[start] = 0;
                    let mut queue = std::collections::VecDeque::from([start]);
                    while let Some(v) = queue.pop_front() {
                        for &w in &adj[v] {
                            if dist[w] == usize::MAX {
                                dist[w] = dist[v] + 1;
                                queue.push_back(w);
                            }
                        }
                    }
                    for &d in &dist {
                        if d == usize::MAX {
                            return Err(Error::contract("graph is disconnected"));
                        }
                        best = best.max(d as u64);
                    }
                }
                Ok(best)
            }
        }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for (a, b) in self.edges() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

/// Snakelike label of lattice cell (row, col), rows and columns 0-based.
pub fn cell_to_snake(_l1: usize, l2: usize, row: usize, col: usize) -> usize {
    if row % 2 == 0 {
        row * l2 + col
    } else {
        row * l2 + (l2 - 1 - col)
    }
}

/// Inverse of [`cell_to_snake`].
pub fn snake_to_cell(_l1: usize, l2: usize, label: usize) -> (usize, usize) {
    let row = label / l2;
    let within = label % l2;
    let col = if row % 2 == 0 { within } else { l2 - 1 - within };
    (row, col)
}
