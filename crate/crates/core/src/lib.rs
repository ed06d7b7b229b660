//! Overlapping substitution tilings.
//!
//! An overlapping substitution replaces each proto-tile by a patch that may
//! protrude beyond the inflated tile, with the protrusions of neighbouring
//! tiles agreeing. The substitution matrix then counts boundary letters
//! fractionally and may have non-integer entries; the Perron-Frobenius
//! eigendata still control tile lengths and patch frequencies.
//!
//! The crate provides:
//!
//! * [`num`] — exact rational and algebraic-number arithmetic (Sturm root
//!   isolation, dynamic-evaluation quotient rings) plus a float fallback,
//! * [`rules`] — a small DSL for symbolic overlapping substitutions,
//! * [`adjacency`] — adjacency graphs `G_k` and their consistency check,
//! * [`spectral`] — substitution matrix, primitivity, characteristic
//!   polynomial and Perron-Frobenius data,
//! * [`geometry`] — 1D geometric realization, patch iteration and
//!   consistency certification,
//! * [`weighted`] — weighted patterns, the lifted substitution and
//!   empirical frequency reports,
//! * [`algebra`] — certification of the expansion constant as an algebraic
//!   integer via return-vector modules,
//! * [`delone`] — spectra of real numbers, 1D Voronoi cells and
//!   substitution rules derived from Delone sets with inflation symmetry,
//! * [`gifs`] — a generic verifier for graph-directed IFS open-set and
//!   linear conditions,
//! * [`render`] — deterministic SVG output.

pub mod adjacency;
pub mod algebra;
pub mod delone;
pub mod geometry;
pub mod gifs;
pub mod num;
pub mod render;
pub mod rules;
pub mod spectral;
pub mod weighted;

pub use num::{FieldContext, FieldElement, Mode, Rational, Scalar};
