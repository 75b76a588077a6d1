//! Small dense complex matrices, density matrices and Lindblad superoperators.

pub(crate) mod density;
mod expm;
mod matrix;
mod superop;

pub use density::{devectorize, vectorize, DensityMatrix};
pub use expm::matexp;
pub use matrix::ComplexMatrix;
pub use superop::{lindblad_generator, Channel, Dissipators, Superoperator};

/// `|i⟩⟨j|` in dimension `d`.
pub fn ket_bra(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d);
    m[(i, j)] = crate::C64::new(1.0, 0.0);
    m
}
