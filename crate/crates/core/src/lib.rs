//! Certification and numerical verification of weighted Hardy inequalities
//! in Orlicz spaces.

pub mod expr;
pub mod ext;
pub mod search;
pub mod func;
pub mod nfunction;
pub mod quad;
pub mod integrate;
pub mod weights;
pub mod classify;
pub mod verifier;
pub mod bloomkerman;
pub mod spec_file;
pub mod catalog;
pub mod config;
