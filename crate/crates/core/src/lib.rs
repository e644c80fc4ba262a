//! Exact arithmetic for truncated big and p-typical Witt vectors.

pub mod error;
pub mod profiles;
pub mod rings;
pub mod universal;
pub mod witt;
pub mod lambda;
pub mod artin_hasse;
pub mod canonical;
pub mod padic;
pub mod selfcheck;

pub use error::{Error, Result};
pub use profiles::Profile;
pub use rings::{CommRing, RingDescriptor, RingElement, RingKind};
pub use universal::{StructuralKind, UPoly, UVar};
pub use witt::{GhostVector, WittVector};
