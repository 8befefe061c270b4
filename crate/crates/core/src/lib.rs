pub mod combinatorics;
pub mod dictionary;
pub mod error;
pub mod matrix_io;
pub mod numlin;
pub mod observation;
pub mod pursuit;
pub mod guarantees;
pub mod harness;
