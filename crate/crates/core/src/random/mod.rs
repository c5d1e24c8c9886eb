//! Every source of randomness: seeded streams, Haar unitaries and states,
//! unitary 2-designs, pool draws and random regular graphs.

mod circuit;
mod clifford;
mod design;
mod graph;
mod haar;
mod stream;

pub use circuit::{Circuit, Gate};
pub use clifford::{random_clifford, reduce_pair_to_x_z, SymplecticPauli};
pub use design::{two_design_circuit, two_design_unitary, DesignFlavor, SampledUnitary, TwoDesignConfig};
pub use graph::random_regular_graph;
pub use haar::{haar_unitary, random_state, HouseholderUnitary};
pub use stream::{splitmix64, stream_seed, RngStream};

use crate::linalg::PauliString;
use crate::{Error, Result};
use rand::Rng;

/// Uniform draw from an ordered pool.
pub fn sample_pool<'a>(pool: &'a [PauliString], rng: &mut RngStream) -> Result<&'a PauliString> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(&pool[rng.random_range(0..pool.len())])
}
