//! Vertex labels (cube corners), labellings of a complex, and the Sperner /
//! neighboring-labelling validators.

use crate::complex::{CellId, CubicalComplex};
use crate::multilinear::Point;
use crate::num::{rat, Rat};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A vertex of the unit d-cube, stored as a little-endian bit mask: bit `i`
/// is the i-th coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    bits: u16,
    dim: u8,
}

impl std::fmt::Debug for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tuple: Vec<String> = (0..self.dim)
            .map(|i| ((self.bits >> i) & 1).to_string())
            .collect();
        write!(f, "({})", tuple.join(","))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: usize },
    #[error("color {0} out of range 1..=4")]
    ColorOutOfRange(u64),
    #[error("colors are only defined for dimension 2, got {0}")]
    ColorDimension(usize),
}

impl Label {
    pub fn new(bits: u16, dim: usize) -> Result<Self, LabelError> {
        if dim == 0 || dim > 16 || (bits as u64) >= (1u64 << dim) {
            return Err(LabelError::IndexOutOfRange {
                index: bits as u64,
                dim,
            });
        }
        Ok(Label {
            bits,
            dim: dim as u8,
        })
    }

    pub fn from_index(index: u64, dim: usize) -> Result<Self, LabelError> {
        if dim == 0 || dim > 16 || index >= (1u64 << dim) {
            return Err(LabelError::IndexOutOfRange { index, dim });
        }
        Ok(Label {
            bits: index as u16,
            dim: dim as u8,
        })
    }

    pub fn from_bits_slice(bits: &[u8]) -> Self {
        let mut mask = 0u16;
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                mask |= 1 << i;
            }
        }
        Label {
            bits: mask,
            dim: bits.len() as u8,
        }
    }

    /// Integer alias in `0..2^d`.
    pub fn index(&self) -> u64 {
        self.bits as u64
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    /// The label as a rational point (a corner of the unit cube).
    pub fn to_point(&self) -> Point {
        (0..self.dim()).map(|i| rat(self.bit(i) as i64)).collect()
    }

    /// Two labels are antipodal when they sum to the all-ones tuple.
    pub fn is_antipodal(&self, other: &Label) -> bool {
        self.dim == other.dim && self.bits ^ other.bits == ((1u16 << self.dim) - 1)
    }

    /// 2-D color alias. The fixed correspondence is
    /// 1 <-> (0,0), 2 <-> (1,0), 3 <-> (1,1), 4 <-> (0,1).
    pub fn from_color(color: u8) -> Result<Self, LabelError> {
        let bits = match color {
            1 => 0b00,
            2 => 0b01,
            3 => 0b11,
            4 => 0b10,
            c => return Err(LabelError::ColorOutOfRange(c as u64)),
        };
        Ok(Label { bits, dim: 2 })
    }

    pub fn to_color(&self) -> Result<u8, LabelError> {
        if self.dim != 2 {
            return Err(LabelError::ColorDimension(self.dim as usize));
        }
        Ok(match self.bits {
            0b00 => 1,
            0b01 => 2,
            0b11 => 3,
            0b10 => 4,
            _ => unreachable!(),
        })
    }
}

/// Total labelling of the vertices of a complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    labels: Vec<Label>,
}

impl Labelling {
    pub fn new(complex: &CubicalComplex, labels: Vec<Label>) -> Result<Self, LabellingError> {
        if labels.len() != complex.vertex_count() {
            return Err(LabellingError::WrongLength {
                got: labels.len(),
                want: complex.vertex_count(),
            });
        }
        for (v, l) in labels.iter().enumerate() {
            if l.dim() != complex.dim() {
                return Err(LabellingError::WrongLabelDim {
                    vertex: v,
                    got: l.dim(),
                    want: complex.dim(),
                });
            }
        }
        Ok(Labelling { labels })
    }

    pub fn from_indices(complex: &CubicalComplex, indices: &[u64]) -> Result<Self, LabellingError> {
        let labels = indices
            .iter()
            .map(|&i| Label::from_index(i, complex.dim()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(complex, labels)
    }

    pub fn from_colors(complex: &CubicalComplex, colors: &[u8]) -> Result<Self, LabellingError> {
        if complex.dim() != 2 {
            return Err(LabelError::ColorDimension(complex.dim()).into());
        }
        let labels = colors
            .iter()
            .map(|&c| Label::from_color(c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(complex, labels)
    }

    pub fn label(&self, vertex: usize) -> Label {
        self.labels[vertex]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn set(&mut self, vertex: usize, label: Label) {
        self.labels[vertex] = label;
    }

    /// Labels at the slots of a cell, in slot (corner) order.
    pub fn cell_labels(&self, complex: &CubicalComplex, cell: CellId) -> Vec<Label> {
        complex
            .cell(cell)
            .slots()
            .iter()
            .map(|v| self.labels[v.0])
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabellingError {
    #[error("labelling has {got} entries, complex has {want} vertices")]
    WrongLength { got: usize, want: usize },
    #[error("label of vertex {vertex} has dimension {got}, complex has dimension {want}")]
    WrongLabelDim {
        vertex: usize,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("complex is not a full pile; Sperner validation needs box structure")]
    NotAPile,
}

/// Verdict of a validator, with the offending items when invalid.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum Violation {
    /// A pile corner does not carry its own cube-corner label.
    Corner { vertex: usize, expected: u64, got: u64 },
    /// A boundary vertex carries a label outside its carrier face.
    Face { vertex: usize, got: u64 },
    /// A boundary cell whose labels pin no coordinate.
    BoundaryCell { cell_dim: usize, vertices: Vec<usize> },
}

impl Verdict {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Verdict {
            valid: violations.is_empty(),
            violations,
        }
    }
}

/// Sperner validity on a pile: every corner carries its own corner label and
/// every vertex on the box boundary carries a label that is a vertex of its
/// carrier face. Interior vertices are unconstrained.
pub fn validate_sperner(pile: &CubicalComplex, l: &Labelling) -> Result<Verdict, LabellingError> {
    let extents = pile.pile_extents().ok_or(LabellingError::NotAPile)?;
    let d = pile.dim();
    let mut violations = Vec::new();
    for v in 0..pile.vertex_count() {
        let coords = pile.coords().unwrap()[v].clone();
        let label = l.label(v);
        let mut pinned_all = true;
        let mut ok = true;
        let mut corner_bits = 0u64;
        for i in 0..d {
            let (lo, hi) = (coords[i] == 0, coords[i] == extents[i] as i64);
            if hi {
                corner_bits |= 1 << i;
            }
            if lo && label.bit(i) != 0 {
                ok = false;
            }
            if hi && label.bit(i) != 1 {
                ok = false;
            }
            if !lo && !hi {
                pinned_all = false;
            }
        }
        if !ok {
            if pinned_all {
                violations.push(Violation::Corner {
                    vertex: v,
                    expected: corner_bits,
                    got: label.index(),
                });
            } else {
                violations.push(Violation::Face {
                    vertex: v,
                    got: label.index(),
                });
            }
        }
    }
    Ok(Verdict::from_violations(violations))
}

/// Neighboring-labelling validity: the induced map sends the boundary of the
/// complex into the boundary of the cube. Decided exactly by the constant
/// coordinate criterion: a boundary facet maps into a cube facet iff some
/// label coordinate is constant over its vertices (interior values of a
/// multilinear 0/1 extension are strict averages). For d=2 this forbids
/// boundary edges labelled {1,3} or {2,4}. An empty boundary is vacuously
/// accepted.
pub fn validate_nl(complex: &CubicalComplex, l: &Labelling) -> Verdict {
    let mut violations = Vec::new();
    for facet in complex.boundary_facets() {
        let cell = complex.cell(facet);
        let labels: Vec<Label> = cell.slots().iter().map(|v| l.label(v.0)).collect();
        if !has_constant_coordinate(&labels, complex.dim()) {
            violations.push(Violation::BoundaryCell {
                cell_dim: cell.dim(),
                vertices: cell.slots().iter().map(|v| v.0).collect(),
            });
        }
    }
    Verdict::from_violations(violations)
}

pub(crate) fn has_constant_coordinate(labels: &[Label], d: usize) -> bool {
    (0..d).any(|i| {
        let first = labels[0].bit(i);
        labels.iter().all(|l| l.bit(i) == first)
    })
}

/// Random Sperner labelling of a pile: corners fixed, boundary vertices
/// uniform over the vertices of their carrier face, interior vertices
/// uniform over all labels. Deterministic per seed.
pub fn random_sperner(pile: &CubicalComplex, seed: u64) -> Result<Labelling, LabellingError> {
    let extents = pile.pile_extents().ok_or(LabellingError::NotAPile)?;
    let d = pile.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = pile.coords().unwrap();
    let mut labels = Vec::with_capacity(pile.vertex_count());
    for v in 0..pile.vertex_count() {
        let mut bits = 0u16;
        for i in 0..d {
            let c = coords[v][i];
            let bit = if c == 0 {
                0
            } else if c == extents[i] as i64 {
                1
            } else {
                rng.gen_range(0..2u16)
            };
            bits |= bit << i;
        }
        labels.push(Label::new(bits, d).expect("bits in range"));
    }
    Labelling::new(pile, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_table_is_fixed() {
        assert_eq!(Label::from_color(1).unwrap().to_point(), vec![rat(0), rat(0)]);
        assert_eq!(Label::from_color(2).unwrap().to_point(), vec![rat(1), rat(0)]);
        assert_eq!(Label::from_color(3).unwrap().to_point(), vec![rat(1), rat(1)]);
        assert_eq!(Label::from_color(4).unwrap().to_point(), vec![rat(0), rat(1)]);
        for c in 1..=4u8 {
            assert_eq!(Label::from_color(c).unwrap().to_color().unwrap(), c);
        }
        assert_eq!(Label::from_color(5), Err(LabelError::ColorOutOfRange(5)));
    }

    #[test]
    fn adjacent_colors_differ_in_one_bit_and_opposites_are_antipodal() {
        let l = |c| Label::from_color(c).unwrap();
        for (a, b) in [(1, 2), (2, 3), (3, 4), (4, 1)] {
            let diff = l(a).index() ^ l(b).index();
            assert_eq!(diff.count_ones(), 1, "colors {} {}", a, b);
        }
        assert!(l(1).is_antipodal(&l(3)));
        assert!(l(2).is_antipodal(&l(4)));
        assert!(!l(1).is_antipodal(&l(2)));
    }

    #[test]
    fn label_index_round_trip() {
        for d in 1..=4usize {
            for i in 0..(1u64 << d) {
                let l = Label::from_index(i, d).unwrap();
                assert_eq!(l.index(), i);
                assert_eq!(l.dim(), d);
            }
            assert!(Label::from_index(1 << d, d).is_err());
        }
    }
}
