//! Search and certification engine for single-cut full-open (SCFO) card
//! protocols over two-color decks.
//!
//! An SCFO protocol arranges commitments to the input bits of a Boolean
//! function, permutes the cards, inserts additional cards, applies one random
//! cut and opens everything. This crate decides, for a given function,
//! whether such a protocol exists when every additional card is a club, by
//! exhaustively solving an integer program over all arrangements and shift
//! vectors. Runs end in one of two machine-checkable artifacts: a protocol
//! certificate or an impossibility report.
//!
//! Module map:
//!
//! * [`words`] binary card words, rotations, gap vectors, zero insertion
//! * [`boolfun`] truth tables, NPN classification, the named catalog
//! * [`encoding`] input word classes, arrangements, integer program assembly
//! * [`optimize`] exact minimizer for the insertion program
//! * [`search`] the exhaustive search and its result artifacts
//! * [`verify`] independent protocol simulation and the bundled fixtures
//! * [`report`] text document rendering and parsing
//! * [`cli`] command line front end

#![forbid(unsafe_code)]

pub mod boolfun;
pub mod cli;
pub mod encoding;
pub mod optimize;
pub mod report;
pub mod search;
pub mod verify;
pub mod words;
