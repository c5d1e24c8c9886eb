use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::RngStream;
use crate::hamiltonian::Graph;
use crate::{Error, Result};

/// Uniformly random simple `degree`-regular graph on `n` vertices.
///
/// Configuration model: `n * degree` half-edges are paired at random and the
/// whole pairing is rejected if it contains a self-loop or a repeated edge.
pub fn random_regular_graph(n: usize, degree: usize, rng: &mut RngStream) -> Result<Graph> {
    if (n * degree) % 2 == 1 || degree >= n {
        return Err(Error::InfeasibleGraph {
            vertices: n,
            degree,
        });
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
    'attempt: loop {
        stubs.shuffle(rng);
        let mut edges = BTreeSet::new();
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !edges.insert((u, v)) {
                continue 'attempt;
            }
        }
        return Graph::unweighted(n, edges.into_iter().collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_vertices_degree_three_is_complete() {
        let mut rng = RngStream::new(1, 0);
        let g = random_regular_graph(4, 3, &mut rng).unwrap();
        assert_eq!(g, Graph::complete(4).unwrap());
    }

    #[test]
    fn eight_vertices_degree_three() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..20 {
            let g = random_regular_graph(8, 3, &mut rng).unwrap();
            assert_eq!(g.edges().len(), 12);
            assert!((0..8).all(|v| g.degree(v) == 3));
        }
    }

    #[test]
    fn odd_product_is_infeasible() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(
            random_regular_graph(5, 3, &mut rng),
            Err(Error::InfeasibleGraph {
                vertices: 5,
                degree: 3
            })
        );
        assert!(random_regular_graph(3, 3, &mut rng).is_err());
    }
}
