//! Curvature-dimension analysis of left-invariant sub-Riemannian structures.
//!
//! The pipeline runs from structure constants ([`liealg`]) through the Bott
//! connection ([`connection`]) and the bound constants ([`invariants`]) to
//! curvature-dimension parameters and pointwise Γ₂ verification ([`cdcore`]),
//! spectral-gap bounds with a representation-theoretic oracle ([`spectral`]),
//! and Monte Carlo simulation of the sub-Laplacian diffusion ([`diffusion`]).

pub mod cdcore;
pub mod connection;
pub mod diffusion;
pub mod error;
pub mod invariants;
pub mod liealg;
pub mod numeric;
pub mod spectral;
pub mod tensor;

pub use connection::ConnectionData;
pub use error::{Error, Result};
pub use liealg::{build_example, Example, LieSRStructure};
pub use numeric::ExtReal;
pub use tensor::{Tensor3, Tensor4};
