use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clifford::CliffordTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub cliffords: Vec<usize>,
    pub recovery: usize,
}

/// Independent stream seed for sequence `index` at length `m`, so serial and
/// parallel runs draw identical sequences.
pub fn sequence_seed(seed: u64, m: usize, index: usize) -> u64 {
    crate::seed::derive_seed(seed, &[m as u64, index as u64])
}

/// Draw `m` random Cliffords and the element that undoes them, optionally
/// with `interleaved` applied after each one.
pub fn draw_sequence(table: &CliffordTable, m: usize, seed: u64, interleaved: Option<usize>) -> Sequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = table.len();
    let cliffords: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
    let mut net = table.identity_index();
    for &c in &cliffords {
        net = table.then(net, c);
        if let Some(g) = interleaved {
            net = table.then(net, g);
        }
    }
    Sequence { cliffords, recovery: table.inverse(net) }
}

/// Reference sequence of `m` Cliffords plus recovery.
pub fn generate_sequence(table: &CliffordTable, m: usize, seed: u64) -> Sequence {
    draw_sequence(table, m, seed, None)
}
