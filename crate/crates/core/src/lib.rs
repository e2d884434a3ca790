//! Exact certification of Sperner-type labellings on cubical complexes.
//!
//! The crate builds abstract cubical complexes (piles of unit cubes, carved
//! piles, hand-glued surfaces), extends vertex labels to piecewise
//! multilinear maps, decides which cells are centrally labelled with exact
//! rational/algebraic arithmetic, and computes boundary degrees both by the
//! 2-D transition count and by signed preimages of a regular value. Theorem
//! checkers assemble those pieces into structured pass/fail reports; an
//! independent oracle module re-derives the small cases by brute force.

pub mod central;
pub mod complex;
pub mod degree;
pub mod fixtures;
pub mod io;
pub mod labelling;
pub mod multilinear;
pub mod num;
pub mod oracle;
pub mod poly;
pub mod system;
pub mod theorems;

pub use complex::{build_2complex, build_pile, carve, CellId, CubicalComplex, VertexId};
pub use labelling::{random_sperner, validate_nl, validate_sperner, Label, Labelling};
pub use multilinear::{BoxR, MultilinearMap, Point};
pub use num::Rat;
