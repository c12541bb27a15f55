//! Semantic-degree toolkit for industrial automation.
//!
//! * [`degrees`]: the structural × behavioral degree lattice, selection rules
//!   and the technology catalog.
//! * [`semstore`]: terminology, glossary, thesaurus, taxonomy and triples.
//! * [`units`]: affine unit converters and chain search.
//! * [`constraints`]: a small predicate language over unit-carrying data.
//! * [`busnet`]: plug-and-sense harness over a Modbus-TCP subset.
//! * [`linectl`]: discrete-event production line with bounded buffers.
//! * [`confmap`]: production parameters to machine configurations, and
//!   function-block signal matching.

pub mod degrees;
pub mod semstore;
pub mod units;
pub mod constraints;
pub mod busnet;
pub mod linectl;
pub mod confmap;
