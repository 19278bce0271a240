//! Walsh–Hadamard machinery.
//!
//! Subsets of `E = {1, …, n}` are encoded as `n`-bit integers, bit `i` for
//! element `i + 1`, enumerated in ascending order. Under that ordering the
//! sign matrix `C(A, B) = (−1)^{|A ∩ B|}` is the Sylvester matrix
//! `C₁ = [[1, 1], [1, −1]]`, `C_{n+1} = [[Cₙ, Cₙ], [Cₙ, −Cₙ]]`.

mod barker;
mod matrix;
mod transform;

pub use barker::{
    autocorrelations, barker_search, barker_search_with, barker_sequences_of_length, is_barker,
    SignSequence, BARKER_SEARCH_CAP,
};
pub use matrix::{
    circulant_from_row, det_f64, exact_det, hadamard_det_bound_check, is_hadamard,
    walsh_det_log2, DetBound, WalshDeterminant, EXACT_DET_MAX_N,
};
pub use transform::{
    dense_walsh, fwht, fwht_with, solve_uniform_system, walsh_entry, UniformSolution,
    MAX_TRANSFORM_BITS,
};
