//! Executable combinatorics of finite multiclass hypothesis classes: one-inclusion
//! hypergraphs, ℓ-density, ℓ-DS and ℓ-Natarajan dimensions, monomial spanning
//! sets, min-max list orientations, and small list learners built on them.

pub mod agnostic;
pub mod algebra;
pub mod combinatorics;
pub mod dims;
pub mod error;
pub mod flow;
pub mod hclass;
pub mod learn;
pub mod oig;

pub use error::{Error, Result};
pub use hclass::{gen_cube, gen_random, load_class, CoordSeq, HypothesisClass, Label, LabeledSample};
pub use oig::{build_oig, density, Density, OneInclusionGraph, Orientation, SearchMode, SearchOptions};
