//! Dynamics of Hecke triangle groups `G_q`: the λ_q-continued fraction
//! algorithm, the G_q-BCZ map, the Stern–Brocot polygon suspension with its
//! side identification, and the symmetric G_q-Farey and G_q-Gauss maps with
//! their natural extensions.

pub mod algebra;
pub mod bcz;
pub mod cfrac;
pub mod error;
pub mod hecke;
pub mod intervalmaps;
pub mod orbit;
pub mod sampling;
pub mod suspension;
pub mod verify;

pub use error::{Error, Result};
