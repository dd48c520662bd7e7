//! Complete 2-descent for `y^2 = x1 x2 x3` and the induced parametrization
//! of non-trivial integral points on the twists `E_{n,e}`.
//!
//! Every solution of `y^2 = x1 x2 x3` in nonzero integers is written uniquely
//! as
//!
//! ```text
//! x_i = d_j d_k w^2 a_i^2 a_j a_k b_i^2        ({i,j,k} = {1,2,3})
//! y   = d1 d2 d3 w^3 a1^2 a2^2 a3^2 b1 b2 b3
//! ```
//!
//! with `a_i` squarefree, `a_i, b_i > 0`, `d1 d2 d3 > 0` and
//! `gcd(d_i a_j b_j, d_j a_i b_i) = 1` for `i != j`. The sign of `y` is
//! carried by `w`.

use std::fmt;

use crate::arith::{gcd, gcd3, is_squarefree, sign, squarefree_decompose, TwistFamily};
use crate::error::{invalid, Error, Result};

/// The cyclic index triples `(i, j, k)`.
pub(crate) const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DescentTuple {
    pub d: [i128; 3],
    pub w: i128,
    pub a: [i128; 3],
    pub b: [i128; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    ZeroD(usize),
    ZeroW,
    NonPositiveA(usize),
    NonPositiveB(usize),
    NotSquarefree(usize),
    /// `gcd(d_i a_j b_j, d_j a_i b_i) != 1`.
    NotCoprime(usize, usize),
    /// `d1 d2 d3 < 0`.
    NegativeSign,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::ZeroD(i) => write!(f, "d{} is zero", i + 1),
            Violation::ZeroW => write!(f, "w is zero"),
            Violation::NonPositiveA(i) => write!(f, "a{} is not positive", i + 1),
            Violation::NonPositiveB(i) => write!(f, "b{} is not positive", i + 1),
            Violation::NotSquarefree(i) => write!(f, "a{} not squarefree", i + 1),
            Violation::NotCoprime(i, j) => write!(
                f,
                "gcd(d{i1} a{j1} b{j1}, d{j1} a{i1} b{i1}) != 1",
                i1 = i + 1,
                j1 = j + 1
            ),
            Violation::NegativeSign => write!(f, "d1d2d3 < 0"),
        }
    }
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b)
        .ok_or(Error::Overflow("descent arithmetic"))
}

fn mul_all(xs: &[i128]) -> Result<i128> {
    xs.iter().try_fold(1i128, |acc, &x| mul(acc, x))
}

fn exact_div(num: i128, den: i128, what: &str) -> Result<i128> {
    if den == 0 || num % den != 0 {
        return Err(Error::Inconsistent(format!(
            "{what}: {num} is not divisible by {den}"
        )));
    }
    Ok(num / den)
}

impl DescentTuple {
    /// Strict constructor: fails unless every invariant holds.
    pub fn new(d: [i128; 3], w: i128, a: [i128; 3], b: [i128; 3]) -> Result<Self> {
        let t = DescentTuple { d, w, a, b };
        let v = t.validate();
        if let Some(first) = v.first() {
            return Err(invalid(format!("not a descent tuple: {first}")));
        }
        Ok(t)
    }

    /// Every violated invariant, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for i in 0..3 {
            if self.d[i] == 0 {
                out.push(Violation::ZeroD(i));
            }
        }
        if self.w == 0 {
            out.push(Violation::ZeroW);
        }
        for i in 0..3 {
            if self.a[i] <= 0 {
                out.push(Violation::NonPositiveA(i));
            } else if !is_squarefree(self.a[i]) {
                out.push(Violation::NotSquarefree(i));
            }
        }
        for i in 0..3 {
            if self.b[i] <= 0 {
                out.push(Violation::NonPositiveB(i));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let lhs = self.d[i]
                .saturating_mul(self.a[j])
                .saturating_mul(self.b[j]);
            let rhs = self.d[j]
                .saturating_mul(self.a[i])
                .saturating_mul(self.b[i]);
            if gcd(lhs, rhs) != 1 {
                out.push(Violation::NotCoprime(i, j));
            }
        }
        if self.d.iter().map(|&x| sign(x)).product::<i128>() < 0 {
            out.push(Violation::NegativeSign);
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// `w^2 a1 a2 a3`, the factor shared by all three `x_i`.
    fn common_factor(&self) -> Result<i128> {
        mul_all(&[self.w, self.w, self.a[0], self.a[1], self.a[2]])
    }

    /// `x_i` without its shared factor: `d_j d_k a_i b_i^2`.
    fn reduced_x(&self, i: usize) -> Result<i128> {
        let (_, j, k) = CYCLIC[i];
        mul_all(&[self.d[j], self.d[k], self.a[i], self.b[i], self.b[i]])
    }

    pub fn y(&self) -> Result<i128> {
        let a = mul_all(&self.a)?;
        mul_all(&[
            self.d[0], self.d[1], self.d[2], self.w, self.w, self.w, a, a, self.b[0], self.b[1],
            self.b[2],
        ])
    }
}

/// The unique descent tuple of a solution of `y^2 = x1 x2 x3` in nonzero
/// integers.
pub fn decompose(y: i128, x1: i128, x2: i128, x3: i128) -> Result<DescentTuple> {
    let xs = [x1, x2, x3];
    if y == 0 || xs.contains(&0) {
        return Err(invalid("decompose needs y, x1, x2, x3 all nonzero"));
    }
    if mul(y, y)? != mul_all(&xs)? {
        return Err(invalid(format!(
            "y^2 != x1 x2 x3 for (y, x1, x2, x3) = ({y}, {x1}, {x2}, {x3})"
        )));
    }

    let g = gcd3(x1, x2, x3);
    let xp = xs.map(|x| x / g);
    let yp = exact_div(y, g, "y / gcd(x1,x2,x3)")?;

    let mut d = [0i128; 3];
    for (i, j, k) in CYCLIC {
        d[i] = sign(xp[i]) * gcd(xp[j], xp[k]);
    }

    let mut xi = [0i128; 3];
    for (i, j, k) in CYCLIC {
        xi[i] = exact_div(xp[i], d[j] * d[k], "x_i' / (d_j d_k)")?;
        if xi[i] <= 0 {
            return Err(Error::Inconsistent(format!(
                "xi_{} = {} is not positive",
                i + 1,
                xi[i]
            )));
        }
    }
    let z = exact_div(yp, d[0] * d[1] * d[2], "y' / (d1 d2 d3)")?;

    let mut a = [0i128; 3];
    let mut b = [0i128; 3];
    for i in 0..3 {
        (a[i], b[i]) = squarefree_decompose(xi[i])?;
    }
    let zp = exact_div(z, b[0] * b[1] * b[2], "z / (b1 b2 b3)")?;
    let w = exact_div(zp, a[0] * a[1] * a[2], "z' / (a1 a2 a3)")?;
    if mul_all(&[w, w, a[0], a[1], a[2]])? != g {
        return Err(Error::Inconsistent(format!(
            "gcd(x1,x2,x3) = {g} != w^2 a1 a2 a3 for w = {w}"
        )));
    }

    let t = DescentTuple { d, w, a, b };
    if let Some(v) = t.validate().first() {
        return Err(Error::Inconsistent(format!("decomposition violates {v}")));
    }
    Ok(t)
}

/// `(y, [x1, x2, x3])` from a descent tuple.
pub fn recompose(t: &DescentTuple) -> Result<(i128, [i128; 3])> {
    let c = t.common_factor()?;
    let mut xs = [0i128; 3];
    for (i, x) in xs.iter_mut().enumerate() {
        *x = mul(c, t.reduced_x(i)?)?;
    }
    Ok((t.y()?, xs))
}

/// A non-trivial integral point `(x, y)` on `E_{n,e}` with `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwistPoint {
    pub n: i128,
    pub x: i128,
    pub y: i128,
}

/// `(x - e1 n)(x - e2 n)(x - e3 n)`, or `None` on overflow.
pub fn twist_rhs(family: &TwistFamily, n: i128, x: i128) -> Option<i128> {
    let e = family.e();
    let mut acc = 1i128;
    for ei in e {
        let f = x.checked_sub(ei.checked_mul(n)?)?;
        acc = acc.checked_mul(f)?;
    }
    Some(acc)
}

impl TwistPoint {
    pub fn new(family: &TwistFamily, n: i128, x: i128, y: i128) -> Result<Self> {
        if n < 1 {
            return Err(invalid(format!("twist parameter n = {n} must be positive")));
        }
        if y == 0 {
            return Err(invalid(
                "y = 0 is a 2-torsion point, not a non-trivial point",
            ));
        }
        let rhs = twist_rhs(family, n, x).ok_or(Error::Overflow("twist curve evaluation"))?;
        if y.checked_mul(y) != Some(rhs) {
            return Err(invalid(format!(
                "({x}, {y}) is not on E_{{{n},({family})}}"
            )));
        }
        Ok(TwistPoint { n, x, y })
    }
}

fn checked_point(t: &DescentTuple, family: &TwistFamily) -> Option<TwistPoint> {
    let e = family.e();
    let c = t.common_factor().ok()?;
    // (e_i - e_j) n = d_k c (d_i a_j b_j^2 - d_j a_i b_i^2)
    let rhs = |i: usize, j: usize, k: usize| -> Option<i128> {
        let left = t.d[i]
            .checked_mul(t.a[j])?
            .checked_mul(t.b[j])?
            .checked_mul(t.b[j])?;
        let right = t.d[j]
            .checked_mul(t.a[i])?
            .checked_mul(t.b[i])?
            .checked_mul(t.b[i])?;
        t.d[k].checked_mul(c)?.checked_mul(left.checked_sub(right)?)
    };
    let (i0, j0, k0) = CYCLIC[0];
    let lead = rhs(i0, j0, k0)?;
    let gap = e[i0] - e[j0];
    if lead % gap != 0 {
        return None;
    }
    let n = lead / gap;
    if n < 1 {
        return None;
    }
    for &(i, j, k) in &CYCLIC[1..] {
        if (e[i] - e[j]).checked_mul(n)? != rhs(i, j, k)? {
            return None;
        }
    }
    let x = e[0]
        .checked_mul(n)?
        .checked_add(c.checked_mul(t.reduced_x(0).ok()?)?)?;
    let y = t.y().ok()?;
    TwistPoint::new(family, n, x, y).ok()
}

/// The twist point parametrized by `t`, if the three linear equations for
/// `n` have a common positive integral solution.
pub fn tuple_to_twist_point(t: &DescentTuple, family: &TwistFamily) -> Option<TwistPoint> {
    if !t.is_valid() {
        return None;
    }
    checked_point(t, family)
}

/// Inverse of [`tuple_to_twist_point`].
pub fn twist_point_to_tuple(family: &TwistFamily, p: &TwistPoint) -> Result<DescentTuple> {
    let e = family.e();
    let mut xs = [0i128; 3];
    for (i, x) in xs.iter_mut().enumerate() {
        *x = mul(e[i], p.n).and_then(|en| {
            p.x.checked_sub(en)
                .ok_or(Error::Overflow("twist point factors"))
        })?;
    }
    decompose(p.y, xs[0], xs[1], xs[2])
}

/// Reduces the ternary relation for the divisor triple `d` to its primitive
/// form: `c_i = (e_j - e_k) / d_i`, `h = gcd(c)`, `f = c / h`.
///
/// `f` satisfies `d1 f1 + d2 f2 + d3 f3 = 0`. Pairwise coprimality of `f`
/// holds for every `d` that occurs in an actual descent tuple.
pub fn reduce_to_ternary(family: &TwistFamily, d: [i128; 3]) -> Result<[i128; 3]> {
    let e = family.e();
    let mut c = [0i128; 3];
    for (i, j, k) in CYCLIC {
        if d[i] == 0 || (e[j] - e[k]) % d[i] != 0 {
            return Err(invalid(format!(
                "d{} = {} does not divide e{} - e{} = {}",
                i + 1,
                d[i],
                j + 1,
                k + 1,
                e[j] - e[k]
            )));
        }
        c[i] = (e[j] - e[k]) / d[i];
    }
    let h = gcd3(c[0], c[1], c[2]);
    Ok(c.map(|ci| ci / h))
}
