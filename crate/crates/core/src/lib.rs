//! Thermodynamic formalism for correspondences.
//!
//! Finite correspondences live in [`correspondence`]; pressure, the
//! variational principle and equilibrium states in [`pressure`]; the transfer
//! operator and Gibbs estimates in [`ruelle`]. [`complex`] handles the
//! holomorphic family `(w - c)^p = z^q` and its weighted backward orbits.
//!
//! ```
//! use thermoform::correspondence::{EdgePotential, FiniteCorrespondence};
//! use thermoform::pressure::pressure_spectral;
//!
//! let t = FiniteCorrespondence::full_shift(2)?;
//! let p = pressure_spectral(&t, &EdgePotential::zero(&t))?;
//! assert!((p - 2f64.ln()).abs() < 1e-12);
//! # Ok::<(), thermoform::error::Error>(())
//! ```

pub mod complex;
pub mod correspondence;
pub mod error;
pub mod instances;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod perron;
pub mod pressure;
pub mod ruelle;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/correspondences.md")]
    mod correspondences {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/pressure.md")]
    mod pressure {}
    #[doc = include_str!("../../../book/src/transfer-operator.md")]
    mod transfer_operator {}
    #[doc = include_str!("../../../book/src/backward-orbits.md")]
    mod backward_orbits {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
