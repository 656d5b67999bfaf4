//! Probabilistic model of Selmer ranks in `p`-th twist families of CM
//! abelian varieties.
//!
//! * [`gfq`]: the residue field `k = F_p` or `F_{p^2}` with its involution.
//! * [`isospace`]: symplectic/unitary spaces over `k` and the local plane
//!   with its unramified and ramified isotropic lines.
//! * [`rankdist`]: the distributions `D_q^ε` and the Markov operator `M_ε`.
//! * [`twistsim`]: the fan-structure twisting simulator.
//! * [`bounds`]: density and rank bounds derived from `D_q^ε`.
//! * [`output`]: the record type shared by the CLI encoders.

pub mod bounds;
pub mod error;
pub mod gfq;
pub mod isospace;
pub mod output;
pub mod rankdist;
pub mod twistsim;

pub use error::{Error, Result};
pub use gfq::{Epsilon, FieldParams, Flavor, FqElem};
pub use isospace::{HermitianSpace, LocalPlane, Subspace};
pub use rankdist::{MarkovOperator, RankDistribution};
