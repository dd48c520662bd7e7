//! Exact integer helpers and the parameter types shared by every module.
//!
//! All quantities are `i128`. The largest values handled are of size `B^6`
//! (the square of a y-coordinate), which overflows 64 bits already for
//! `B` around `10^3`.

use std::fmt;

use crate::error::{invalid, Result};

/// Nonnegative gcd, with `gcd(0, m) = |m|`.
pub fn gcd(a: i128, b: i128) -> i128 {
    num_integer::gcd(a, b)
}

pub fn gcd3(a: i128, b: i128, c: i128) -> i128 {
    gcd(gcd(a, b), c)
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: i128) -> i128 {
    debug_assert!(n >= 0);
    (n as u128).isqrt() as i128
}

/// Smallest `r >= 0` with `r * r >= n`.
pub fn ceil_sqrt(n: i128) -> i128 {
    if n <= 0 {
        return 0;
    }
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

/// Returns `Some(r)` with `r >= 0` and `r * r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn sign(m: i128) -> i128 {
    m.signum()
}

/// Distinct prime factors of `|m|` by trial division, ascending. `m != 0`.
pub fn prime_factors(m: i128) -> Vec<i128> {
    let mut m = m.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub fn is_squarefree(m: i128) -> bool {
    if m == 0 {
        return false;
    }
    let mut m = m.abs();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// Writes `m = a * b^2` with `a` squarefree, both positive.
pub fn squarefree_decompose(m: i128) -> Result<(i128, i128)> {
    if m <= 0 {
        return Err(invalid(format!(
            "squarefree_decompose needs m >= 1, got {m}"
        )));
    }
    let mut rest = m;
    let mut a = 1;
    let mut b = 1;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            if k % 2 == 1 {
                a *= p;
            }
            for _ in 0..k / 2 {
                b *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    a *= rest;
    Ok((a, b))
}

pub fn two_adic_valuation(m: i128) -> Result<u32> {
    if m == 0 {
        return Err(invalid("two_adic_valuation is undefined at 0"));
    }
    Ok(m.trailing_zeros())
}

/// Number of positive divisors.
pub fn divisor_count(n: i128) -> Result<u64> {
    if n <= 0 {
        return Err(invalid(format!("divisor_count needs n >= 1, got {n}")));
    }
    let mut rest = n;
    let mut count = 1u64;
    let mut p = 2;
    while p * p <= rest {
        if rest % p == 0 {
            let mut k = 0u64;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            count *= k + 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        count *= 2;
    }
    Ok(count)
}

/// Positive divisors of `|n|` in increasing order. `n != 0`.
pub fn positive_divisors(n: i128) -> Vec<i128> {
    let n = n.abs();
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// The triple `e = (e1, e2, e3)` of pairwise distinct integers that fixes
/// the twist family `E_{n,e}` and the surface `V_{e,Q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwistFamily {
    e: [i64; 3],
}

/// Largest supported `|e_i|`.
pub const MAX_E: i64 = 1_000_000;

impl TwistFamily {
    pub fn new(e1: i64, e2: i64, e3: i64) -> Result<Self> {
        let e = [e1, e2, e3];
        if e.iter().any(|v| v.abs() > MAX_E) {
            return Err(invalid(format!(
                "e = ({e1},{e2},{e3}) exceeds the supported range |e_i| <= {MAX_E}"
            )));
        }
        if e1 == e2 || e2 == e3 || e1 == e3 {
            return Err(invalid(format!(
                "e = ({e1},{e2},{e3}) must have pairwise distinct entries"
            )));
        }
        Ok(TwistFamily { e })
    }

    pub fn from_array(e: [i64; 3]) -> Result<Self> {
        Self::new(e[0], e[1], e[2])
    }

    pub fn e(&self) -> [i128; 3] {
        self.e.map(i128::from)
    }

    pub fn raw(&self) -> [i64; 3] {
        self.e
    }

    pub fn product_nonzero(&self) -> bool {
        self.e.iter().all(|&v| v != 0)
    }

    /// `-e`, the family carrying the negative twists `E_{-n,e} = E_{n,-e}`.
    pub fn negated(&self) -> Self {
        TwistFamily {
            e: self.e.map(|v| -v),
        }
    }

    pub fn permuted(&self, sigma: [usize; 3]) -> Self {
        TwistFamily {
            e: [self.e[sigma[0]], self.e[sigma[1]], self.e[sigma[2]]],
        }
    }

    /// Smallest gap `min |e_i - e_j|`.
    pub fn min_gap(&self) -> i128 {
        let e = self.e();
        (e[0] - e[1])
            .abs()
            .min((e[1] - e[2]).abs())
            .min((e[0] - e[2]).abs())
    }

    /// Reordering with the largest entry last, keeping the relative order of
    /// the other two.
    pub fn largest_last(&self) -> Self {
        let e = self.e;
        let top = (0..3).max_by_key(|&i| e[i]).unwrap();
        let rest: Vec<usize> = (0..3).filter(|&i| i != top).collect();
        self.permuted([rest[0], rest[1], top])
    }
}

impl fmt::Display for TwistFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.e[0], self.e[1], self.e[2])
    }
}

/// `Q(u,v) = q11 u^2 + q12 uv + q22 v^2`, non-degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadForm {
    pub q11: i64,
    pub q12: i64,
    pub q22: i64,
}

impl QuadForm {
    pub fn new(q11: i64, q12: i64, q22: i64) -> Result<Self> {
        let q = QuadForm { q11, q12, q22 };
        if q.discriminant() == 0 {
            return Err(invalid(format!(
                "Q = ({q11},{q12},{q22}) is degenerate (discriminant 0)"
            )));
        }
        Ok(q)
    }

    /// The split form `uv`.
    pub fn split() -> Self {
        QuadForm {
            q11: 0,
            q12: 1,
            q22: 0,
        }
    }

    pub fn discriminant(&self) -> i128 {
        let (a, b, c) = self.coefficients();
        b * b - 4 * a * c
    }

    pub fn coefficients(&self) -> (i128, i128, i128) {
        (self.q11.into(), self.q12.into(), self.q22.into())
    }

    pub fn eval(&self, u: i128, v: i128) -> i128 {
        let (a, b, c) = self.coefficients();
        a * u * u + b * u * v + c * v * v
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.q11, self.q12, self.q22)
    }
}

/// The surface `y^2 = (x - e1 Q)(x - e2 Q)(x - e3 Q)` in `P(3,2,1,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SurfaceSpec {
    pub family: TwistFamily,
    pub form: QuadForm,
}

impl SurfaceSpec {
    pub fn new(family: TwistFamily, form: QuadForm) -> Self {
        SurfaceSpec { family, form }
    }
}

/// All `(d1, d2, d3)` with `d1 | e2-e3`, `d2 | e3-e1`, `d3 | e1-e2` and
/// `d1 d2 d3 > 0`, sorted lexicographically.
pub fn signed_divisor_triples(family: &TwistFamily) -> Vec<[i128; 3]> {
    let e = family.e();
    let gaps = [e[1] - e[2], e[2] - e[0], e[0] - e[1]];
    let signed: Vec<Vec<i128>> = gaps
        .iter()
        .map(|&g| {
            let pos = positive_divisors(g);
            let mut all: Vec<i128> = pos
                .iter()
                .rev()
                .map(|d| -d)
                .chain(pos.iter().copied())
                .collect();
            all.sort_unstable();
            all
        })
        .collect();
    let mut out = Vec::new();
    for &d1 in &signed[0] {
        for &d2 in &signed[1] {
            for &d3 in &signed[2] {
                if d1 * d2 * d3 > 0 {
                    out.push([d1, d2, d3]);
                }
            }
        }
    }
    out
}
