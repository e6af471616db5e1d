//! The book chapters from `book/src`, included as doc comments so that every
//! code snippet in the guide compiles and runs under `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
