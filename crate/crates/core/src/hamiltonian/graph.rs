use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Simple undirected weighted graph. Edges are stored as `(u, v, w)` with
/// `u < v`, sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(Error::InvalidInput(alloc::format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n_vertices}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(alloc::format!("self-loop on vertex {u}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInput(alloc::format!("non-finite weight on ({u}, {v})")));
            }
            normalized.push((u.min(v), u.max(v), w));
        }
        normalized.sort_by_key(|e| (e.0, e.1));
        if let Some(pair) = normalized.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(Error::InvalidInput(alloc::format!(
                "duplicate edge ({}, {})",
                pair[0].0,
                pair[0].1
            )));
        }
        Ok(Self {
            n_vertices,
            edges: normalized,
        })
    }

    pub fn unweighted(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(n_vertices, edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect())
    }

    /// Complete graph `K_n` with unit weights.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::unweighted(n, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|(a, b, _)| *a == v || *b == v).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Graph::unweighted(3, alloc::vec![(1, 1)]).is_err());
        assert!(Graph::unweighted(3, alloc::vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::unweighted(3, alloc::vec![(0, 3)]).is_err());
    }

    #[test]
    fn complete_graph_edge_count() {
        let k5 = Graph::complete(5).unwrap();
        assert_eq!(k5.edges().len(), 10);
        assert!((0..5).all(|v| k5.degree(v) == 4));
    }
}
