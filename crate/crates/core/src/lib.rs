pub mod dense;
pub mod error;
pub mod grassmann;
pub mod rank;
pub mod svd;
pub mod solver;
pub mod bounds;
pub mod montecarlo;
pub mod operator;
pub mod cases;
pub mod io;
pub mod cli;
