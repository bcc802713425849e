//! Generative modeling of Laman graphs through validity-preserving edit
//! chains.
//!
//! The crate is organized around a Markov chain whose states are Laman
//! graphs (minimally rigid 2D constraint graphs) and whose transitions are
//! limited to four local inductive moves. A single transition first applies
//! a short random sequence of moves (the corrupter) and then lets a learned
//! model undo them one move at a time until it emits a stop action (the
//! reconstructor). Because every move preserves the Laman property, every
//! state the chain visits is valid by construction.
//!
//! Modules:
//! - [`graph`]: shared graph representation and fingerprinting
//! - [`rigidity`]: pebble-game Laman checks, brute-force oracles, and the
//!   decomposability metric
//! - [`moves`]: the four inductive moves, enumeration, application, inverses
//! - [`corrupt`]: the fixed corruption distribution
//! - [`datagen`]: synthetic Laman dataset generation
//! - [`model`]: the learned reconstruction distribution and its training loop
//! - [`chain`]: the alternating corrupt/reconstruct sampler
//! - [`stats`]: evaluation statistics (KS distance, validity, random baseline)
//!
//! The crate is `no_std`-compatible (requires `alloc`); all IO lives in the
//! companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod chain;
pub mod corrupt;
pub mod datagen;
pub mod graph;
pub mod model;
pub mod moves;
pub mod rigidity;
pub mod rng;
pub mod stats;

mod fmath;

pub use graph::{Graph, GraphError, NodeId};
pub use moves::{Move, MoveReceipt};
