pub mod check_matrix;
pub mod reconstruct;
pub mod roundtrip;
pub mod sample;
pub mod simulate;
