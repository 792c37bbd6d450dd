use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::linalg::{identity, phase_free_overlap, rotation, CMat};

/// Physical single-qubit generators used to compile Cliffords.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    I,
    X,
    Y,
    X2,
    MinusX2,
    Y2,
    MinusY2,
}

impl Generator {
    pub const ALL: [Generator; 7] =
        [Generator::I, Generator::X, Generator::Y, Generator::X2, Generator::MinusX2, Generator::Y2, Generator::MinusY2];

    /// Rotation angle and axis azimuth. `I` is a zero-angle idle.
    pub fn rotation(self) -> (f64, f64) {
        match self {
            Generator::I => (0.0, 0.0),
            Generator::X => (PI, 0.0),
            Generator::Y => (PI, FRAC_PI_2),
            Generator::X2 => (FRAC_PI_2, 0.0),
            Generator::MinusX2 => (-FRAC_PI_2, 0.0),
            Generator::Y2 => (FRAC_PI_2, FRAC_PI_2),
            Generator::MinusY2 => (-FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn matrix(self) -> CMat {
        let (angle, axis) = self.rotation();
        rotation(angle, axis)
    }

    pub fn label(self) -> &'static str {
        match self {
            Generator::I => "I",
            Generator::X => "X",
            Generator::Y => "Y",
            Generator::X2 => "X/2",
            Generator::MinusX2 => "-X/2",
            Generator::Y2 => "Y/2",
            Generator::MinusY2 => "-Y/2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub index: usize,
    pub matrix: CMat,
    /// Generators in time order.
    pub generator_word: Vec<Generator>,
}

/// The 24 single-qubit Cliffords with their multiplication table.
#[derive(Debug, Clone)]
pub struct CliffordTable {
    pub elements: Vec<CliffordElement>,
    /// `compose[a][b]` is the index of "apply `a`, then `b`" (matrix `C_b·C_a`).
    compose: Vec<[usize; 24]>,
    inverse: [usize; 24],
}

fn words() -> Vec<Vec<Generator>> {
    use Generator::*;
    vec![
        // Paulis
        vec![I],
        vec![X],
        vec![Y],
        vec![Y, X],
        // 2π/3 rotations
        vec![X2, Y2],
        vec![X2, MinusY2],
        vec![MinusX2, Y2],
        vec![MinusX2, MinusY2],
        vec![Y2, X2],
        vec![Y2, MinusX2],
        vec![MinusY2, X2],
        vec![MinusY2, MinusX2],
        // π/2 rotations
        vec![X2],
        vec![MinusX2],
        vec![Y2],
        vec![MinusY2],
        vec![MinusX2, Y2, X2],
        vec![MinusX2, MinusY2, X2],
        // Hadamard-like
        vec![X, Y2],
        vec![X, MinusY2],
        vec![Y, X2],
        vec![Y, MinusX2],
        vec![X2, Y2, X2],
        vec![MinusX2, Y2, MinusX2],
    ]
}

pub fn word_matrix(word: &[Generator]) -> CMat {
    word.iter().fold(identity(2), |acc, g| g.matrix() * acc)
}

/// Build and verify the table: every product and inverse must land back in
/// the set up to global phase.
pub fn clifford_table() -> CliffordTable {
    let elements: Vec<CliffordElement> = words()
        .into_iter()
        .enumerate()
        .map(|(index, generator_word)| CliffordElement { index, matrix: word_matrix(&generator_word), generator_word })
        .collect();
    let find = |m: &CMat| elements.iter().position(|e| phase_free_overlap(&e.matrix, m) > 1.0 - 1e-9);
    let mut compose = vec![[0usize; 24]; 24];
    for a in 0..24 {
        for b in 0..24 {
            let m = &elements[b].matrix * &elements[a].matrix;
            compose[a][b] = find(&m).expect("Clifford set is not closed under multiplication");
        }
    }
    let mut inverse = [0usize; 24];
    for (a, inv) in inverse.iter_mut().enumerate() {
        *inv = find(&elements[a].matrix.adjoint()).expect("Clifford inverse missing");
    }
    CliffordTable { elements, compose, inverse }
}

impl CliffordTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of "apply `first`, then `second`".
    pub fn then(&self, first: usize, second: usize) -> usize {
        self.compose[first][second]
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse[index]
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// Locate a unitary in the table up to global phase.
    pub fn find(&self, m: &CMat) -> Option<usize> {
        self.elements.iter().position(|e| phase_free_overlap(&e.matrix, m) > 1.0 - 1e-9)
    }

    pub fn mean_word_length(&self) -> f64 {
        self.elements.iter().map(|e| e.generator_word.len()).sum::<usize>() as f64 / self.len() as f64
    }
}
