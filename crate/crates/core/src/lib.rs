//! Degree tables for private distributed matrix multiplication under grid
//! partitioning: validation, the OPP-to-grid extensions, a cyclic-addition
//! construction, an end-to-end protocol simulator, and a brute-force oracle
//! with a parameter sweep.

pub mod construction;
pub mod error;
pub mod extension;
pub mod ffield;
pub mod oracle;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
pub use table::{DegreeTable, TableParams};
