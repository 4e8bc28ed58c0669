//! Quasiconformal extensions of schlicht functions built from Loewner chains.
//!
//! The pipeline evaluates the Ahlfors-Weill extension of `f`, switches to a chain of
//! exterior conformal maps of recentred curves past a cutoff time, and glues the two into
//! one map of the plane with a measured dilatation. Everything is generic over the scalar
//! ([`Real`]); the aliases at the bottom fix it to `f64`.

// Negated float comparisons are deliberate: they send NaN down the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod analytic;
pub mod bounds;
pub mod conformal;
pub mod construction;
pub mod error;
pub mod geometry;
pub mod loewner;
pub mod ode;
pub mod qc;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// `f64` instantiations of the generic types.
pub type Complex = Cx<f64>;
pub type Schlicht = analytic::SchlichtFunction<f64>;
pub type ExteriorMap = conformal::ExteriorMap<f64>;
pub type Construction = construction::Construction<f64>;
pub type ConstructionState = construction::ConstructionState<f64>;
