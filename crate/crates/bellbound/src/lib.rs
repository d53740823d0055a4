//! Bounds on Bell violations for finite multipartite correlation scenarios.
//!
//! The crate covers the classical side (LHV constants, the maximal violation
//! as a linear program over deterministic strategies), the quantum side
//! (states, POVMs, seesaw search), source-operator dilations with
//! covering-norm estimates, and a catalog of closed-form upper bounds.
//!
//! ```
//! use bellbound::{functionals, lhv};
//!
//! let k = lhv::lhv_constants(&functionals::chsh()).unwrap();
//! assert_eq!((k.b_inf, k.b_sup), (-2.0, 2.0));
//! ```

pub mod bounds;
pub mod dilation;
pub mod error;
pub mod functionals;
pub mod io;
pub mod lhv;
pub mod linalg;
pub mod lp;
pub mod quantum;
pub mod scenario;
pub mod tol;

pub use error::{Error, Result};
pub use lhv::{lhv_constants, maximal_violation, LhvConstants, LqhvModel, ViolationCertificate};
pub use quantum::{joint_probabilities, DensityState, PovmFamily};
pub use scenario::{behavior_average, BellFunctional, Behavior, DeterministicStrategy, Scenario};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/maximal-violation.md")]
    mod maximal_violation {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    mod quantum {}
    #[doc = include_str!("../../../book/src/source-operators.md")]
    mod source_operators {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
