//! Exact-arithmetic kernel for Lie supergroups modeled as Harish-Chandra
//! pairs: structure constants and superalgebra axioms, the enveloping
//! superalgebra with its Hopf operations and PBW factorization, matrix group
//! models with right-invariant derivations, the section calculus for the
//! structure sheaf, and homogeneous-space isotropy data with split criteria.
//!
//! All scalars are Gaussian rationals; every verification is an exact
//! identity check at desk scale, never a floating-point comparison.

pub mod error;
pub mod exactnum;
pub mod linalg;
pub mod liesuper;
pub mod envelope;
pub mod groupmodel;
pub mod supergroup;
pub mod homogeneous;
pub mod fixtures;
pub mod report;
pub mod io;

pub use error::{Error, Result};
pub use exactnum::Scalar;

#[cfg(test)]
mod thread_safety {
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn shared_types_are_send_and_sync() {
        assert_send_sync::<crate::exactnum::Scalar>();
        assert_send_sync::<crate::exactnum::Jet1>();
        assert_send_sync::<crate::linalg::Mat>();
        assert_send_sync::<crate::liesuper::LieSuperAlgebra>();
        assert_send_sync::<crate::envelope::Enveloping>();
        assert_send_sync::<crate::envelope::UeaElement>();
        assert_send_sync::<crate::groupmodel::GroupModel>();
        assert_send_sync::<crate::supergroup::HcPair>();
        assert_send_sync::<crate::supergroup::Section>();
        assert_send_sync::<crate::supergroup::ProductSection>();
        assert_send_sync::<crate::homogeneous::HcSubpair>();
    }
}
