//! Jet-level smooth invariants of pinched-torus fibration germs.
//!
//! The crate works with truncated Taylor series ("jets") of plane maps
//! around a pinched fiber of a singular Lagrangian fibration.  It
//! classifies which plane jets lift through the local model fibration
//! `(u, v) -> u v`, normalizes transition-map tuples under the induced
//! gauge action, extracts the first-order moduli (the `mu` invariants),
//! and recovers the same invariants numerically from moment-map Hessians
//! so that declarative fibration families can be scanned for
//! obstructions to being a direct product.
//!
//! Module map:
//! - [`jet2`] / [`jet4`]: truncated power-series arithmetic,
//! - [`germ`]: liftability through the model fibration,
//! - [`orbit`]: gauge action, normal forms, moduli dimensions,
//! - [`geom`]: complex structures, trace and eigenvalue invariants,
//! - [`lab`]: finite-difference Hessians and family scans,
//! - [`textio`]: plain-text exchange formats,
//! - [`acceptance`]: the executable acceptance checklist.

pub mod acceptance;
pub mod error;
pub mod geom;
pub mod germ;
pub mod jet2;
pub mod jet4;
pub mod lab;
pub mod orbit;
pub mod textio;

pub use error::{Error, Result};
pub use germ::{classify_liftable, lift_to_model, verify_lift, DiffeoJet, LiftClass, Orientation};
pub use jet2::{Jet2, DEFAULT_ORDER, MAX_ORDER};
pub use jet4::Jet4;
pub use orbit::{
    canonicalize_invariant, equivalent_double_pinched, first_order_invariants, gauge_act,
    mu_double, normalize_double_pinched, orbit_tangent_rank, symplectize_gluing, Equivalence,
    FirstOrderInvariant, GaugeTuple, GluingTuple, OrbitRank,
};
