#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod dirichlet;
pub mod error;
pub mod extension;
pub mod fractional;
pub mod harnack;
pub mod io;
pub mod krein;
pub mod linalg;
pub mod special;

pub use error::{Error, Result};

/// Book chapters, compiled so their snippets run under `cargo test`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/index.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    pub mod chapter1 {}
    #[doc = include_str!("../../../book/src/fractional.md")]
    pub mod chapter2 {}
    #[doc = include_str!("../../../book/src/extension.md")]
    pub mod chapter3 {}
    #[doc = include_str!("../../../book/src/krein.md")]
    pub mod chapter4 {}
    #[doc = include_str!("../../../book/src/harnack.md")]
    pub mod chapter5 {}
    #[doc = include_str!("../../../book/src/files.md")]
    pub mod chapter6 {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    pub mod chapter7 {}
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
}
