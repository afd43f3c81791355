//! Extended Gevrey sequences `M_p = p^{τ p^σ}`: Lambert W evaluation,
//! associated functions, Young conjugates and numerical checks of the
//! conditions and equivalences these sequences satisfy.

mod error;

pub mod assocfn;
pub mod cli;
pub mod conjugate;
pub mod equivalence;
pub mod grid;
pub mod io;
pub mod lambertw;
pub mod quad;
pub mod sequences;
pub mod verify;

pub use error::{Error, Result};
