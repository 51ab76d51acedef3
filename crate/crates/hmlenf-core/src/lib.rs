//! Runtime enforcement toolkit for recHML: symbolic events, regular CCS processes,
//! formula normalization, detection monitors and suppression enforcers.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bisim;
pub mod cond;
pub mod enforcer;
pub mod error;
pub mod formula;
pub mod logic;
pub mod lts;
pub mod monitor;
pub mod normalize;
pub mod parse;
pub mod pattern;
pub mod process;
pub mod solver;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
