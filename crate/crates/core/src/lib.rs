pub mod bath;
pub mod cli;
pub mod codes;
pub mod error;
pub mod linalg;
pub mod system;
pub mod zeno;
