//! Exact multilinear interpolation on the unit k-cube.
//!
//! A map is stored as one dense coefficient table per output coordinate:
//! `f_i(x) = sum_w a_w x^w` where `w` ranges over `{0,1}^k` and
//! `x^w = prod_j x_j^{w_j}`. Corner index bits are little-endian: bit `j` of
//! the slot index is the exponent of coordinate `j`.

use crate::labelling::Label;
use crate::num::{rat_to_f64, rat_zero, Rat};


/// A point with exact rational coordinates.
pub type Point = Vec<Rat>;

/// An axis-aligned box `[lo, hi]` with rational corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxR {
    pub lo: Point,
    pub hi: Point,
}

impl BoxR {
    pub fn unit(k: usize) -> Self {
        BoxR {
            lo: vec![rat_zero(); k],
            hi: vec![Rat::from_integer(1.into()); k],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Corner `w` of the box, bit `j` of `w` picking `hi[j]` over `lo[j]`.
    pub fn corner(&self, w: usize) -> Point {
        (0..self.dim())
            .map(|j| {
                if w >> j & 1 == 1 {
                    self.hi[j].clone()
                } else {
                    self.lo[j].clone()
                }
            })
            .collect()
    }

    pub fn midpoint(&self) -> Point {
        let h = crate::num::half();
        (0..self.dim())
            .map(|j| (&self.lo[j] + &self.hi[j]) * &h)
            .collect()
    }

    /// Split along the widest axis (ties to the lowest index).
    pub fn bisect(&self) -> (BoxR, BoxR) {
        let mut axis = 0;
        let mut widest = &self.hi[0] - &self.lo[0];
        for j in 1..self.dim() {
            let w = &self.hi[j] - &self.lo[j];
            if w > widest {
                widest = w;
                axis = j;
            }
        }
        let mid = (&self.lo[axis] + &self.hi[axis]) * crate::num::half();
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[axis] = mid.clone();
        right.lo[axis] = mid;
        (left, right)
    }
}

/// Exact multilinear map `C^k -> R^d`, as coefficient tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearMap {
    /// Domain dimension.
    pub k: usize,
    /// Codomain dimension.
    pub d: usize,
    /// `coeffs[i][w]` is the coefficient of `x^w` in output coordinate `i`.
    pub coeffs: Vec<Vec<Rat>>,
}

/// Coefficient table from prescribed corner values.
///
/// `vertex_values[w]` is the value at corner `w` (little-endian bits). The
/// returned table `a` satisfies `a_w = sum_{u <= w} (-1)^{h(u,w)} b_u` and
/// evaluation at each corner reproduces `b_w` exactly.
pub fn coefficients(vertex_values: &[Rat]) -> Vec<Rat> {
    let n = vertex_values.len();
    assert!(n.is_power_of_two(), "table must have 2^k entries");
    let k = n.trailing_zeros() as usize;
    let mut a: Vec<Rat> = vertex_values.to_vec();
    // Finite difference transform, one axis at a time:
    // a[w | bit] -= a[w] realizes the Hamming-signed Moebius sum.
    for j in 0..k {
        let bit = 1usize << j;
        for w in 0..n {
            if w & bit != 0 {
                a[w] = &a[w] - &a[w ^ bit];
            }
        }
    }
    a
}

impl MultilinearMap {
    pub fn from_corner_values(k: usize, d: usize, corner_values: &[Point]) -> Self {
        assert_eq!(corner_values.len(), 1 << k);
        for v in corner_values {
            assert_eq!(v.len(), d);
        }
        let coeffs = (0..d)
            .map(|i| {
                let table: Vec<Rat> = corner_values.iter().map(|v| v[i].clone()).collect();
                coefficients(&table)
            })
            .collect();
        MultilinearMap { k, d, coeffs }
    }

    /// Map induced by labels at the corners of a cell (slot order).
    pub fn from_labels(labels: &[Label]) -> Self {
        let n = labels.len();
        assert!(n.is_power_of_two());
        let k = n.trailing_zeros() as usize;
        let d = labels[0].dim();
        let corners: Vec<Point> = labels.iter().map(|l| l.to_point()).collect();
        Self::from_corner_values(k, d, &corners)
    }

    /// Exact evaluation.
    pub fn evaluate(&self, x: &[Rat]) -> Point {
        assert_eq!(x.len(), self.k);
        self.coeffs
            .iter()
            .map(|table| eval_table(table, x))
            .collect()
    }

    /// Floating point evaluation (cross-check mode only).
    pub fn evaluate_f64(&self, x: &[f64]) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|table| {
                let mut cur: Vec<f64> = table.iter().map(rat_to_f64).collect();
                for &xj in x {
                    let mut next = Vec::with_capacity(cur.len() / 2);
                    for idx in 0..cur.len() / 2 {
                        next.push(cur[2 * idx] + xj * cur[2 * idx + 1]);
                    }
                    cur = next;
                }
                cur[0]
            })
            .collect()
    }

    /// Corner value `b_w` (exact evaluation at a cube corner is a table read
    /// in coefficient form only after re-summation, so just evaluate).
    pub fn corner_value(&self, w: usize) -> Point {
        let x: Vec<Rat> = (0..self.k)
            .map(|j| {
                if w >> j & 1 == 1 {
                    Rat::from_integer(1.into())
                } else {
                    rat_zero()
                }
            })
            .collect();
        self.evaluate(&x)
    }

    /// Exact Jacobian matrix, `d` rows by `k` columns.
    pub fn jacobian(&self, x: &[Rat]) -> Vec<Vec<Rat>> {
        assert_eq!(x.len(), self.k);
        self.coeffs
            .iter()
            .map(|table| {
                (0..self.k)
                    .map(|j| eval_table(&partial_table(table, j), x))
                    .collect()
            })
            .collect()
    }

    /// Coefficient table of `d f_i / d x_j`, still over `{0,1}^k` with the
    /// `j`-bit slots zeroed.
    pub fn partial(&self, i: usize, j: usize) -> Vec<Rat> {
        partial_table(&self.coeffs[i], j)
    }

    /// Exact per-coordinate range over a box. A multilinear function is
    /// affine in each variable separately, so each coordinate attains its
    /// extremes at box corners; the bound is tight per coordinate.
    pub fn corner_range(&self, boxr: &BoxR) -> Vec<(Rat, Rat)> {
        assert_eq!(boxr.dim(), self.k);
        let mut ranges: Vec<Option<(Rat, Rat)>> = vec![None; self.d];
        for w in 0..1usize << self.k {
            let corner = boxr.corner(w);
            let val = self.evaluate(&corner);
            for (i, v) in val.into_iter().enumerate() {
                match &mut ranges[i] {
                    None => ranges[i] = Some((v.clone(), v)),
                    Some((lo, hi)) => {
                        if v < *lo {
                            *lo = v;
                        } else if v > *hi {
                            *hi = v;
                        }
                    }
                }
            }
        }
        ranges.into_iter().map(|r| r.unwrap()).collect()
    }

    /// Restriction to a sub-box, re-parametrized over the unit cube.
    pub fn restrict(&self, boxr: &BoxR) -> MultilinearMap {
        let corners: Vec<Point> = (0..1usize << self.k)
            .map(|w| self.evaluate(&boxr.corner(w)))
            .collect();
        MultilinearMap::from_corner_values(self.k, self.d, &corners)
    }

    /// Restriction to the facet `x_axis = side` (a map on k-1 variables; the
    /// remaining variables keep their relative order).
    pub fn face(&self, axis: usize, side: u8) -> MultilinearMap {
        assert!(axis < self.k);
        let k2 = self.k - 1;
        let corners: Vec<Point> = (0..1usize << k2)
            .map(|u| {
                let w = insert_bit(u, axis, side);
                self.corner_value(w)
            })
            .collect();
        MultilinearMap::from_corner_values(k2, self.d, &corners)
    }
}

/// Evaluate a single coefficient table at a point. Folds one axis per round:
/// after combining the `x_0` pairs the table is indexed by the remaining bits
/// shifted down, so every round pairs consecutive entries.
pub fn eval_table(table: &[Rat], x: &[Rat]) -> Rat {
    assert_eq!(table.len(), 1usize << x.len());
    let mut cur = table.to_vec();
    for xj in x {
        let mut next = Vec::with_capacity(cur.len() / 2);
        for idx in 0..cur.len() / 2 {
            next.push(&cur[2 * idx] + &(xj * &cur[2 * idx + 1]));
        }
        cur = next;
    }
    cur.pop().unwrap()
}

fn partial_table(table: &[Rat], j: usize) -> Vec<Rat> {
    let bit = 1usize << j;
    (0..table.len())
        .map(|w| {
            if w & bit == 0 {
                table[w | bit].clone()
            } else {
                rat_zero()
            }
        })
        .collect()
}

/// Insert `side` as bit `axis`, shifting higher bits up (corner index of a
/// facet lifted to the parent cube).
pub fn insert_bit(u: usize, axis: usize, side: u8) -> usize {
    let low = u & ((1 << axis) - 1);
    let high = u >> axis;
    low | ((side as usize) << axis) | (high << (axis + 1))
}

/// Drop bit `axis` (inverse of `insert_bit` on the matching side).
pub fn drop_bit(w: usize, axis: usize) -> usize {
    let low = w & ((1 << axis) - 1);
    let high = w >> (axis + 1);
    low | (high << axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{half, rat, ratio};

    fn pt(vals: &[(i64, i64)]) -> Point {
        vals.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    #[test]
    fn coefficients_linear() {
        // k=1, b0=0, b1=1 -> a0=0, a1=1
        let a = coefficients(&[rat(0), rat(1)]);
        assert_eq!(a, vec![rat(0), rat(1)]);
    }

    #[test]
    fn coefficients_bilinear_example() {
        // b00=1, b01=0, b10=0, b11=1 -> a00=1, a01=-1, a10=-1, a11=2.
        // Little-endian slots: index 1 = (1,0), index 2 = (0,1).
        let b = vec![rat(1), rat(0), rat(0), rat(1)];
        let a = coefficients(&b);
        assert_eq!(a, vec![rat(1), rat(-1), rat(-1), rat(2)]);
    }

    #[test]
    fn identity_labelling_has_unit_coefficients() {
        for k in 1..=4usize {
            let corners: Vec<Point> = (0..1usize << k)
                .map(|w| (0..k).map(|j| rat((w >> j & 1) as i64)).collect())
                .collect();
            let m = MultilinearMap::from_corner_values(k, k, &corners);
            for i in 0..k {
                for w in 0..1usize << k {
                    let expect = if w == 1 << i { rat(1) } else { rat(0) };
                    assert_eq!(m.coeffs[i][w], expect, "k={} i={} w={}", k, i, w);
                }
            }
        }
    }

    #[test]
    fn interpolation_property() {
        // Random-ish integer corner data, exhaustive corner check.
        for k in 1..=5usize {
            let n = 1usize << k;
            let corners: Vec<Point> = (0..n)
                .map(|w| vec![rat(((w * 37 + 11) % 19) as i64 - 9), rat((w as i64 * 5) % 7 - 3)])
                .collect();
            let m = MultilinearMap::from_corner_values(k, 2, &corners);
            for w in 0..n {
                assert_eq!(m.corner_value(w), corners[w], "k={} w={}", k, w);
            }
        }
    }

    #[test]
    fn evaluate_hand_example() {
        // corners b00=(0,0), b10=(1,1), b11=(1,0), b01=(0,1):
        // f1 = x1, f2 = x1 + x2 - 2 x1 x2; at (1/2, 1/3) -> (1/2, 1/2).
        let corners = vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (1, 1)]),
                           pt(&[(0, 1), (1, 1)]), pt(&[(1, 1), (0, 1)])];
        let m = MultilinearMap::from_corner_values(2, 2, &corners);
        let v = m.evaluate(&[half(), ratio(1, 3)]);
        assert_eq!(v, vec![half(), half()]);
        // Cross-check against the positive-weight corner average.
        let avg = corner_average(&corners, &[half(), ratio(1, 3)]);
        assert_eq!(v, avg);
    }

    fn corner_average(corners: &[Point], x: &[Rat]) -> Point {
        let k = x.len();
        let d = corners[0].len();
        let mut acc = vec![rat(0); d];
        for (w, b) in corners.iter().enumerate() {
            let mut weight = rat(1);
            for (j, xj) in x.iter().enumerate().take(k) {
                if w >> j & 1 == 1 {
                    weight *= xj.clone();
                } else {
                    weight *= rat(1) - xj.clone();
                }
            }
            for i in 0..d {
                acc[i] = &acc[i] + &(&weight * &b[i]);
            }
        }
        acc
    }

    #[test]
    fn jacobian_identity_and_degenerate_row() {
        let corners = vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (1, 1)]),
                           pt(&[(0, 1), (1, 1)]), pt(&[(1, 1), (0, 1)])];
        let m = MultilinearMap::from_corner_values(2, 2, &corners);
        let j = m.jacobian(&[half(), half()]);
        // f2 = x1 + x2 - 2x1x2 has vanishing gradient at the center.
        assert_eq!(j[1], vec![rat(0), rat(0)]);
        assert_eq!(j[0], vec![rat(1), rat(0)]);

        let id = MultilinearMap::from_corner_values(
            2,
            2,
            &[pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)]),
              pt(&[(0, 1), (1, 1)]), pt(&[(1, 1), (1, 1)])],
        );
        let j = id.jacobian(&[ratio(1, 3), ratio(2, 7)]);
        assert_eq!(j, vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]);
    }

    #[test]
    fn corner_range_examples() {
        // f = x1 + x2 - 2 x1 x2 on [0,1]^2 -> (0, 1)
        let corners = vec![pt(&[(0, 1)]), pt(&[(1, 1)]), pt(&[(1, 1)]), pt(&[(0, 1)])];
        let m = MultilinearMap::from_corner_values(2, 1, &corners);
        let r = m.corner_range(&BoxR::unit(2));
        assert_eq!(r[0], (rat(0), rat(1)));
        // On [1/4,1/2]^2: corner evaluations give min 3/8 at (1/4,1/4) and
        // max 1/2 (attained on the x=1/2 edge corners).
        let b = BoxR {
            lo: vec![ratio(1, 4), ratio(1, 4)],
            hi: vec![half(), half()],
        };
        let r = m.corner_range(&b);
        assert_eq!(r[0], (ratio(3, 8), half()));
        assert_eq!(m.evaluate(&[ratio(1, 4), ratio(1, 4)])[0], ratio(3, 8));
    }

    #[test]
    fn corner_range_dominates_grid() {
        let corners = vec![pt(&[(0, 1)]), pt(&[(1, 1)]), pt(&[(1, 1)]), pt(&[(0, 1)])];
        let m = MultilinearMap::from_corner_values(2, 1, &corners);
        let b = BoxR {
            lo: vec![ratio(1, 8), ratio(1, 3)],
            hi: vec![ratio(3, 4), ratio(5, 6)],
        };
        let (lo, hi) = m.corner_range(&b)[0].clone();
        for i in 0..=16 {
            for j in 0..=16 {
                let x = vec![
                    &b.lo[0] + (&b.hi[0] - &b.lo[0]) * ratio(i, 16),
                    &b.lo[1] + (&b.hi[1] - &b.lo[1]) * ratio(j, 16),
                ];
                let v = m.evaluate(&x)[0].clone();
                assert!(v >= lo && v <= hi);
            }
        }
    }

    #[test]
    fn restrict_matches_direct_evaluation() {
        let corners = vec![pt(&[(0, 1), (1, 1)]), pt(&[(1, 1), (1, 1)]),
                           pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)])];
        let m = MultilinearMap::from_corner_values(2, 2, &corners);
        let b = BoxR {
            lo: vec![ratio(1, 4), ratio(1, 2)],
            hi: vec![ratio(3, 4), ratio(7, 8)],
        };
        let r = m.restrict(&b);
        // Point (1/3, 1/5) in restricted coordinates.
        let local = vec![ratio(1, 3), ratio(1, 5)];
        let global: Vec<Rat> = (0..2)
            .map(|j| &b.lo[j] + (&b.hi[j] - &b.lo[j]) * &local[j])
            .collect();
        assert_eq!(r.evaluate(&local), m.evaluate(&global));
    }

    #[test]
    fn bit_insert_drop_round_trip() {
        for axis in 0..4 {
            for side in 0..2u8 {
                for u in 0..16usize {
                    let w = insert_bit(u, axis, side);
                    assert_eq!(w >> axis & 1, side as usize);
                    assert_eq!(drop_bit(w, axis), u);
                }
            }
        }
    }
}
