//! Exact computer algebra for differential polynomials, evolutionary PDEs,
//! Miura and reciprocal transformations, and the KdV hierarchy.

#![allow(clippy::needless_range_loop)]

pub mod calculus;
pub mod drpaper;
pub mod lax;
pub mod ring;
pub mod scalar;
pub mod text;
pub mod transforms;

pub use ring::{DiffPoly, TruncationContext};
pub use scalar::{Param, ParamScalar, Rational};

/// Guide chapters, compiled so that their snippets run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/ring.md")]
    struct Ring;
    #[doc = include_str!("../../../book/src/flows.md")]
    struct Flows;
    #[doc = include_str!("../../../book/src/kdv.md")]
    struct Kdv;
    #[doc = include_str!("../../../book/src/transforms.md")]
    struct Transforms;
    #[doc = include_str!("../../../book/src/series.md")]
    struct Series;
    #[doc = include_str!("../../../book/src/family.md")]
    struct Family;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
