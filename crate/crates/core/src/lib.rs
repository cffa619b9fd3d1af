pub mod error;
pub mod linalg;
pub mod operator;
pub mod liouvillian;
pub mod sieve;
pub mod decomposition;
pub mod models;
pub mod config;
pub mod cli;
