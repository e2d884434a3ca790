//! Univariate polynomials over exact rationals, Sturm sequences, real root
//! isolation, and sign evaluation at isolated algebraic roots.
//!
//! This is the algebra kernel behind the exact system solvers: elimination of
//! a multilinear system produces a univariate resultant (degree <= 8 for the
//! cases this crate decides), whose real roots are isolated here and carried
//! around as [`AlgebraicReal`] values. All decisions reduce to exact sign
//! computations of polynomials at such roots.

use crate::num::{half, rat, rat_zero, sign, simplest_rational_between, Rat};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Dense univariate polynomial; `coeffs[i]` multiplies `x^i`. No trailing
/// zeros; the zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{}", c),
                1 => format!("({})x", c),
                _ => format!("({})x^{}", c, i),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn x() -> Self {
        Poly {
            coeffs: vec![rat_zero(), rat(1)],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(rat_zero)
    }

    fn trim(&mut self) {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = rat_zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::num::rat_to_f64(c);
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + other.coeff(i));
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) - other.coeff(i));
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![rat_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division. Panics on zero divisor.
    pub fn divmod(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dd = divisor.degree().unwrap();
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = vec![rat_zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.leading().unwrap() / &lead;
            let shift = rd - dd;
            quot[shift] = factor.clone();
            let mut sub = vec![rat_zero(); shift];
            sub.extend(divisor.coeffs.iter().map(|c| c * &factor));
            rem = rem.sub(&Poly::from_coeffs(sub));
        }
        (Poly::from_coeffs(quot), rem)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat(i as i64))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// Monic normalization (leading coefficient 1). Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = l.recip();
                self.scale(&inv)
            }
        }
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let mut p = a.clone();
        let mut q = b.clone();
        while !q.is_zero() {
            let (_, r) = p.divmod(&q);
            p = q;
            q = r;
        }
        p.monic()
    }

    /// `self / gcd(self, self')`, monic: same roots, all simple.
    pub fn squarefree_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let g = Poly::gcd(self, &self.derivative());
        if g.degree() == Some(0) {
            return self.monic();
        }
        let (q, r) = self.divmod(&g);
        debug_assert!(r.is_zero());
        q.monic()
    }

    /// Substitute `x -> c*x` (used to rescale intervals).
    pub fn compose_linear(&self, a: &Rat, b: &Rat) -> Poly {
        // p(a*x + b) by Horner over polynomial arguments.
        let lin = Poly::from_coeffs(vec![b.clone(), a.clone()]);
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }
}

/// Sturm chain of a squarefree (or arbitrary) polynomial.
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let mut chain = Vec::new();
        if p.is_zero() {
            return SturmChain { chain };
        }
        chain.push(p.clone());
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(d);
            loop {
                let n = chain.len();
                let (_, r) = chain[n - 2].divmod(&chain[n - 1]);
                if r.is_zero() {
                    break;
                }
                chain.push(r.neg());
            }
        }
        SturmChain { chain }
    }

    fn variations_at(&self, x: &Rat) -> usize {
        let mut vars = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = sign(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    vars += 1;
                }
                last = s;
            }
        }
        vars
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    /// Requires `a < b`.
    pub fn count_roots_half_open(&self, a: &Rat, b: &Rat) -> usize {
        assert!(a < b);
        if self.chain.is_empty() {
            return 0;
        }
        self.variations_at(a) - self.variations_at(b)
    }

    /// Number of distinct real roots in the open interval `(a, b)`.
    pub fn count_roots_open(&self, a: &Rat, b: &Rat) -> usize {
        if a >= b {
            return 0;
        }
        let mut n = self.count_roots_half_open(a, b);
        if self.chain[0].eval(b).is_zero() {
            n -= 1;
        }
        n
    }
}

/// A real root of a squarefree polynomial, localized to an open isolating
/// interval. Invariants: `poly(lo) != 0`, `poly(hi) != 0`, exactly one root
/// of `poly` lies in `(lo, hi)`.
#[derive(Clone)]
pub struct AlgebraicReal {
    pub poly: Poly,
    pub lo: Rat,
    pub hi: Rat,
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "AlgebraicReal({:?} in ({}, {}))",
            self.poly, self.lo, self.hi
        )
    }
}

impl AlgebraicReal {
    /// One bisection step. Returns `Some(r)` if the midpoint is itself the
    /// root (so the root is rational); otherwise narrows the interval.
    pub fn refine_step(&mut self) -> Option<Rat> {
        let mid = (&self.lo + &self.hi) * half();
        let sm = sign(&self.poly.eval(&mid));
        if sm == 0 {
            return Some(mid);
        }
        let sl = sign(&self.poly.eval(&self.lo));
        debug_assert!(sl != 0);
        if sl != sm {
            self.hi = mid;
        } else {
            self.lo = mid;
        }
        None
    }

    /// Narrow the isolating interval below `width`. Returns the root if it is
    /// discovered to be rational along the way.
    pub fn refine_below(&mut self, width: &Rat) -> Option<Rat> {
        while &(&self.hi - &self.lo) > width {
            if let Some(r) = self.refine_step() {
                return Some(r);
            }
        }
        None
    }

    /// Try to recognize the root as a rational number. Exact: only returns
    /// `Some` when `poly(candidate) == 0`.
    pub fn try_rational(&mut self, refine_steps: usize) -> Option<Rat> {
        for _ in 0..refine_steps {
            if let Some(r) = self.refine_step() {
                return Some(r);
            }
        }
        let cand = simplest_rational_between(&self.lo, &self.hi);
        if self.poly.eval(&cand).is_zero() {
            Some(cand)
        } else {
            None
        }
    }

    /// Exact sign of `h` at this root (-1, 0, +1).
    pub fn sign_of(&mut self, h: &Poly) -> i8 {
        if h.is_zero() {
            return 0;
        }
        // h(root) == 0 iff gcd(poly, h) vanishes at the root, i.e. has a root
        // in the isolating interval.
        let g = Poly::gcd(&self.poly, h);
        if g.degree().map(|d| d >= 1).unwrap_or(false) {
            let chain = SturmChain::new(&g);
            if chain.count_roots_open(&self.lo, &self.hi) > 0 {
                return 0;
            }
        }
        // Otherwise h has constant sign on a small enough isolating interval.
        let chain = SturmChain::new(h);
        loop {
            if chain.count_roots_open(&self.lo, &self.hi) == 0
                && !h.eval(&self.lo).is_zero()
                && !h.eval(&self.hi).is_zero()
            {
                let mid = (&self.lo + &self.hi) * half();
                let s = sign(&h.eval(&mid));
                debug_assert!(s != 0);
                return s;
            }
            if let Some(r) = self.refine_step() {
                // Root turned out rational; evaluate directly.
                return sign(&h.eval(&r));
            }
        }
    }

    /// Exact comparison with a rational.
    pub fn cmp_rat(&mut self, c: &Rat) -> Ordering {
        if c <= &self.lo {
            return Ordering::Greater;
        }
        if c >= &self.hi {
            return Ordering::Less;
        }
        if self.poly.eval(c).is_zero() {
            return Ordering::Equal;
        }
        // Shrink until c falls outside.
        loop {
            if let Some(r) = self.refine_step() {
                return r.cmp(c);
            }
            if c <= &self.lo {
                return Ordering::Greater;
            }
            if c >= &self.hi {
                return Ordering::Less;
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mut probe = self.clone();
        let _ = probe.refine_below(&Rat::new(1.into(), num_bigint::BigInt::from(1u64 << 40)));
        (crate::num::rat_to_f64(&probe.lo) + crate::num::rat_to_f64(&probe.hi)) / 2.0
    }
}

/// One isolated real root: either recognized rational or algebraic.
#[derive(Clone, Debug)]
pub enum RealRoot {
    Rational(Rat),
    Algebraic(AlgebraicReal),
}

impl RealRoot {
    pub fn cmp_rat(&mut self, c: &Rat) -> Ordering {
        match self {
            RealRoot::Rational(r) => (&*r).cmp(c),
            RealRoot::Algebraic(a) => a.cmp_rat(c),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealRoot::Rational(r) => crate::num::rat_to_f64(r),
            RealRoot::Algebraic(a) => a.to_f64(),
        }
    }
}

/// Isolate all distinct real roots of `p` inside the closed interval
/// `[lo, hi]`, returned in increasing order. Rational roots are recognized
/// when cheaply possible (linear factors, dyadic bisection hits, simplest
/// rational probing); all other roots come back as isolating intervals.
pub fn isolate_roots(p: &Poly, lo: &Rat, hi: &Rat) -> Vec<RealRoot> {
    let sf = p.squarefree_part();
    let mut out = Vec::new();
    if sf.is_zero() || sf.degree() == Some(0) {
        return out;
    }
    if sf.degree() == Some(1) {
        // Exact rational root of a linear polynomial.
        let root = -sf.coeff(0) / sf.coeff(1);
        if &root >= lo && &root <= hi {
            out.push(RealRoot::Rational(root));
        }
        return out;
    }
    let chain = SturmChain::new(&sf);

    // Endpoint roots handled explicitly so the recursion can assume open
    // endpoints.
    if sf.eval(lo).is_zero() {
        out.push(RealRoot::Rational(lo.clone()));
    }

    let mut stack = vec![(lo.clone(), hi.clone())];
    let mut inner: Vec<RealRoot> = Vec::new();
    while let Some((a, b)) = stack.pop() {
        let n = {
            // Count roots in (a, b): both endpoints are non-roots except the
            // original lo/hi which were peeled off above.
            let mut n = chain.count_roots_half_open(&a, &b);
            if sf.eval(&b).is_zero() {
                n -= 1;
            }
            n
        };
        if n == 0 {
            continue;
        }
        if n == 1 && !sf.eval(&a).is_zero() {
            inner.push(finish_isolation(&sf, a, b));
            continue;
        }
        let mid = (&a + &b) * half();
        if sf.eval(&mid).is_zero() {
            inner.push(RealRoot::Rational(mid.clone()));
        }
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    inner.sort_by(|x, y| root_order(x, y));
    out.extend(inner);
    if sf.eval(hi).is_zero() {
        out.push(RealRoot::Rational(hi.clone()));
    }
    out
}

fn root_order(a: &RealRoot, b: &RealRoot) -> Ordering {
    let key = |r: &RealRoot| match r {
        RealRoot::Rational(x) => (x.clone(), x.clone()),
        RealRoot::Algebraic(ar) => (ar.lo.clone(), ar.hi.clone()),
    };
    let (al, ah) = key(a);
    let (bl, bh) = key(b);
    (al, ah).cmp(&(bl, bh))
}

fn finish_isolation(sf: &Poly, a: Rat, b: Rat) -> RealRoot {
    let mut ar = AlgebraicReal {
        poly: sf.clone(),
        lo: a,
        hi: b,
    };
    match ar.try_rational(24) {
        Some(r) => RealRoot::Rational(r),
        None => RealRoot::Algebraic(ar),
    }
}

/// Resultant of two polynomials via the Sylvester matrix (small degrees).
/// Returns zero when either input is zero.
pub fn resultant(p: &Poly, q: &Poly) -> Rat {
    let (dp, dq) = match (p.degree(), q.degree()) {
        (Some(a), Some(b)) => (a, b),
        _ => return rat_zero(),
    };
    if dp == 0 {
        return pow_rat(p.coeff(0), dq as u32);
    }
    if dq == 0 {
        return pow_rat(q.coeff(0), dp as u32);
    }
    let n = dp + dq;
    let mut m = vec![vec![rat_zero(); n]; n];
    for row in 0..dq {
        for i in 0..=dp {
            m[row][row + i] = p.coeff(dp - i);
        }
    }
    for row in 0..dp {
        for i in 0..=dq {
            m[dq + row][row + i] = q.coeff(dq - i);
        }
    }
    det_rat(m)
}

fn pow_rat(base: Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= base.clone();
    }
    acc
}

fn det_rat(mut m: Vec<Vec<Rat>>) -> Rat {
    // Fraction-aware Gaussian elimination.
    let n = m.len();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return rat_zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= pv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pv;
            for c in col..n {
                let sub = &m[col][c] * &factor;
                m[r][c] = &m[r][c] - &sub;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::ratio;

    fn p(coeffs: &[i64]) -> Poly {
        Poly::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn divmod_round_trips() {
        let a = p(&[2, 0, -3, 1, 4]);
        let b = p(&[1, 2, 1]);
        let (q, r) = a.divmod(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let common = p(&[-1, 2]); // 2x - 1
        let a = common.mul(&p(&[3, 1]));
        let b = common.mul(&p(&[-5, 0, 2]));
        let g = Poly::gcd(&a, &b);
        assert_eq!(g, common.monic());
    }

    #[test]
    fn squarefree_strips_multiplicity() {
        let a = p(&[-1, 1]); // x - 1
        let sq = a.mul(&a).mul(&p(&[2, 1]));
        let sf = sq.squarefree_part();
        assert_eq!(sf.degree(), Some(2));
        assert!(sf.eval(&rat(1)).is_zero());
        assert!(sf.eval(&rat(-2)).is_zero());
    }

    #[test]
    fn sturm_counts_quadratic() {
        // (x - 1/2)(x - 3) has one root in (0, 1).
        let q = p(&[-1, 2]).mul(&p(&[-3, 1]));
        let chain = SturmChain::new(&q);
        assert_eq!(chain.count_roots_open(&rat(0), &rat(1)), 1);
        assert_eq!(chain.count_roots_open(&rat(0), &rat(4)), 2);
        assert_eq!(chain.count_roots_open(&rat(1), &rat(2)), 0);
    }

    #[test]
    fn isolates_and_recognizes_rational_roots() {
        // roots 1/2 and 2/3
        let q = p(&[-1, 2]).mul(&p(&[-2, 3]));
        let roots = isolate_roots(&q, &rat(0), &rat(1));
        assert_eq!(roots.len(), 2);
        match (&roots[0], &roots[1]) {
            (RealRoot::Rational(a), RealRoot::Rational(b)) => {
                assert_eq!(a, &half());
                assert_eq!(b, &ratio(2, 3));
            }
            other => panic!("expected rational roots, got {:?}", other),
        }
    }

    #[test]
    fn isolates_irrational_roots() {
        // 2x^2 - 1: roots +-1/sqrt(2); only the positive one in [0,1].
        let q = p(&[-1, 0, 2]);
        let roots = isolate_roots(&q, &rat(0), &rat(1));
        assert_eq!(roots.len(), 1);
        match &roots[0] {
            RealRoot::Algebraic(ar) => {
                let mut ar = ar.clone();
                // sign of x^2 - 1/2 at the root is 0
                let h = Poly::from_coeffs(vec![ratio(-1, 2), rat_zero(), rat(1)]);
                assert_eq!(ar.sign_of(&h), 0);
                // sign of x - 0.7 is positive (1/sqrt2 ~ 0.7071)
                let h2 = Poly::from_coeffs(vec![ratio(-7, 10), rat(1)]);
                assert_eq!(ar.sign_of(&h2), 1);
                assert_eq!(ar.cmp_rat(&ratio(71, 100)), Ordering::Less);
            }
            RealRoot::Rational(r) => panic!("1/sqrt2 reported rational: {}", r),
        }
    }

    #[test]
    fn endpoint_roots_are_reported() {
        let q = p(&[0, 1]).mul(&p(&[-1, 1])); // x(x-1)
        let roots = isolate_roots(&q, &rat(0), &rat(1));
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn resultant_detects_common_roots() {
        let a = p(&[-1, 2]).mul(&p(&[1, 1]));
        let b = p(&[-1, 2]).mul(&p(&[-7, 1]));
        assert!(resultant(&a, &b).is_zero());
        let c = p(&[-3, 1]);
        assert!(!resultant(&a, &c).is_zero());
    }

    #[test]
    fn degree_eight_isolation() {
        // Product of four quadratics with known root pattern in [0,1].
        let q = p(&[-1, 0, 2]) // 1/sqrt2
            .mul(&p(&[-1, 0, 3])) // 1/sqrt3
            .mul(&p(&[-1, 4])) // 1/4
            .mul(&p(&[-3, 4])) // 3/4
            .mul(&p(&[1, 1])); // -1 (outside)
        let roots = isolate_roots(&q, &rat(0), &rat(1));
        assert_eq!(roots.len(), 4);
        let approx: Vec<f64> = roots.iter().map(|r| r.to_f64()).collect();
        let expect = [0.25, 1.0 / 3f64.sqrt(), 1.0 / 2f64.sqrt(), 0.75];
        for (a, e) in approx.iter().zip(expect.iter()) {
            assert!((a - e).abs() < 1e-9, "{} vs {}", a, e);
        }
    }
}
