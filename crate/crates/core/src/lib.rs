//! Mixed states of one-dimensional quantum systems in matrix-product-density-
//! operator and local-purification form.
//!
//! The crate provides
//!
//! * dense and tensor-network state containers with rank computations across
//!   linear bipartitions ([`tensor`]),
//! * generators for benchmark eigenvalue distributions ([`spectra`]),
//! * the sum-of-squares polynomial purification method ([`sos`]) together with
//!   a small interior-point SDP solver ([`sdp`]) and the fitting front-end
//!   built on top of it ([`fit`]),
//! * the eigenbasis purification method ([`eigen`]),
//! * the regular-polygon slack-matrix family separating operator Schmidt rank
//!   from purification rank ([`counterexample`]).
//!
//! Everything that materializes a `d^N x d^N` matrix refuses dimensions above
//! [`dense_cap`], which defaults to 4096 and can be overridden with the
//! `PURIKIT_DENSE_CAP` environment variable.

pub mod counterexample;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod sdp;
pub mod sos;
pub mod spectra;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Default relative cutoff for numerical ranks.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Default largest `d^N` for which dense matrices are materialized.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Largest Hilbert-space dimension for which dense operators are built.
pub fn dense_cap() -> usize {
    std::env::var("PURIKIT_DENSE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}

/// Fails with [`Error::DenseCapExceeded`] when `dim` exceeds [`dense_cap`].
pub fn check_dense(dim: usize) -> Result<()> {
    let cap = dense_cap();
    if dim > cap {
        Err(Error::DenseCapExceeded { dim, cap })
    } else {
        Ok(())
    }
}
