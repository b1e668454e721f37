//! The chapters of `book/` as modules, so `cargo test --doc -p guide` runs every listing.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod chapter1 {}

#[doc = include_str!("../../../book/src/targets.md")]
pub mod chapter2 {}

#[doc = include_str!("../../../book/src/maps.md")]
pub mod chapter3 {}

#[doc = include_str!("../../../book/src/replacement.md")]
pub mod chapter4 {}

#[doc = include_str!("../../../book/src/constructions.md")]
pub mod chapter5 {}

#[doc = include_str!("../../../book/src/minmax.md")]
pub mod chapter6 {}

#[doc = include_str!("../../../book/src/bubbles.md")]
pub mod chapter7 {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod chapter8 {}
