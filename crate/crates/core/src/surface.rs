//! Rational points of bounded anticanonical height on
//! `V_{e,Q} : y^2 = (x - e1 Q(u,v))(x - e2 Q(u,v))(x - e3 Q(u,v))`
//! in `P(3,2,1,1)`, away from `y = 0` and `Q(u,v) = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::arith::{
    exact_sqrt, gcd, prime_factors, two_adic_valuation, QuadForm, SurfaceSpec, TwistFamily,
};
use crate::error::{invalid, Budget, Error, Result};
use crate::twists::{descent_points, family_constants, PointsByTwist};

/// Normalized integer coordinates `(y : x : u : v)` of weights `(3, 2, 1, 1)`.
///
/// No prime `p` has `p | u`, `p | v`, `p^2 | x` and `p^3 | y` at once, and
/// the first nonzero coordinate among `u`, `v`, `y` is positive. The
/// scaling by `-1` fixes `x`, so `x` takes no part in the sign rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightedPoint {
    pub y: i128,
    pub x: i128,
    pub u: i128,
    pub v: i128,
}

impl fmt::Display for WeightedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} : {} : {} : {})", self.y, self.x, self.u, self.v)
    }
}

fn divides_power(value: i128, p: i128, k: u32) -> bool {
    match p.checked_pow(k) {
        Some(q) => value % q == 0,
        None => value == 0,
    }
}

/// Primes that could divide the weighted gcd of `(y, x, u, v)`.
fn candidate_primes(y: i128, x: i128, u: i128, v: i128) -> Vec<i128> {
    let g = if u != 0 || v != 0 {
        gcd(u, v)
    } else {
        gcd(x, y)
    };
    if g <= 1 {
        Vec::new()
    } else {
        prime_factors(g)
    }
}

/// True when no prime divides `u`, `v`, and divides `x` twice and `y` three
/// times.
pub fn is_normalized(y: i128, x: i128, u: i128, v: i128) -> bool {
    candidate_primes(y, x, u, v)
        .into_iter()
        .all(|p| !(u % p == 0 && v % p == 0 && divides_power(x, p, 2) && divides_power(y, p, 3)))
}

pub fn normalize(y: i128, x: i128, u: i128, v: i128) -> Result<WeightedPoint> {
    if y == 0 && x == 0 && u == 0 && v == 0 {
        return Err(invalid("the all-zero tuple is not a point of P(3,2,1,1)"));
    }
    let (mut y, mut x, mut u, mut v) = (y, x, u, v);
    for p in candidate_primes(y, x, u, v) {
        while u % p == 0 && v % p == 0 && divides_power(x, p, 2) && divides_power(y, p, 3) {
            u /= p;
            v /= p;
            x /= p * p;
            y /= p * p * p;
        }
    }
    let lead = [u, v, y].into_iter().find(|&c| c != 0).unwrap_or(0);
    if lead < 0 {
        y = -y;
        u = -u;
        v = -v;
    }
    Ok(WeightedPoint { y, x, u, v })
}

/// `H <= B`, i.e. `|y| <= B^3`, `|x| <= B^2`, `|u|, |v| <= B`.
pub fn height_leq(p: &WeightedPoint, bound: u64) -> bool {
    let b = bound as i128;
    p.y.abs() <= b * b * b && p.x.abs() <= b * b && p.u.abs() <= b && p.v.abs() <= b
}

/// Right-hand side of the surface equation, `None` on overflow.
fn surface_rhs(family: &TwistFamily, n: i128, x: i128) -> Option<i128> {
    crate::descent::twist_rhs(family, n, x)
}

/// True when `p` lies on the open part `U_{e,Q}` of the surface.
pub fn on_open_surface(spec: &SurfaceSpec, p: &WeightedPoint) -> bool {
    let n = spec.form.eval(p.u, p.v);
    n != 0
        && p.y != 0
        && surface_rhs(&spec.family, n, p.x).is_some_and(|r| p.y.checked_mul(p.y) == Some(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceMethod {
    Brute,
    Fibration,
}

impl fmt::Display for SurfaceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SurfaceMethod::Brute => "brute",
            SurfaceMethod::Fibration => "fibration",
        })
    }
}

impl FromStr for SurfaceMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(SurfaceMethod::Brute),
            "fibration" => Ok(SurfaceMethod::Fibration),
            other => Err(invalid(format!(
                "unknown surface method '{other}' (expected brute or fibration)"
            ))),
        }
    }
}

/// `N_{U,H}(B)` with the points counted, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceCensus {
    pub spec: SurfaceSpec,
    pub bound: u64,
    pub method: SurfaceMethod,
    pub count: u64,
    pub points: Vec<WeightedPoint>,
}

impl SurfaceCensus {
    pub fn contains(&self, p: &WeightedPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }
}

/// `(u, v)` with `|u|, |v| <= B`, one per sign orbit: `u > 0`, or `u = 0`
/// and `v > 0`.
fn canonical_pairs(bound: u64) -> impl Iterator<Item = (i128, i128)> {
    let b = bound as i128;
    let first = (1..=b).map(|v| (0, v));
    let rest = (1..=b).flat_map(move |u| (-b..=b).map(move |v| (u, v)));
    first.chain(rest)
}

fn finish(
    spec: &SurfaceSpec,
    bound: u64,
    method: SurfaceMethod,
    mut points: Vec<WeightedPoint>,
) -> SurfaceCensus {
    points.sort_unstable();
    SurfaceCensus {
        spec: *spec,
        bound,
        method,
        count: points.len() as u64,
        points,
    }
}

/// Direct scan over `(u, v, x)`.
pub fn count_bruteforce(spec: &SurfaceSpec, bound: u64, budget: Budget) -> Result<SurfaceCensus> {
    if bound == 0 {
        return Err(invalid("height bound B must be at least 1"));
    }
    let b = bound as i128;
    let (b2, b3) = (b * b, b * b * b);
    let b6 = b3 * b3;
    let pairs: Vec<(i128, i128)> = canonical_pairs(bound).collect();
    budget.check(pairs.len() as u128 * (2 * b2 as u128 + 1))?;
    let points: Vec<WeightedPoint> = pairs
        .par_iter()
        .flat_map_iter(|&(u, v)| {
            let n = spec.form.eval(u, v);
            let mut found = Vec::new();
            if n == 0 {
                return found;
            }
            for x in -b2..=b2 {
                let Some(rhs) = surface_rhs(&spec.family, n, x) else {
                    continue;
                };
                if rhs <= 0 || rhs > b6 {
                    continue;
                }
                if let Some(y) = exact_sqrt(rhs) {
                    for y in [-y, y] {
                        if is_normalized(y, x, u, v) {
                            found.push(WeightedPoint { y, x, u, v });
                        }
                    }
                }
            }
            found
        })
        .collect();
    Ok(finish(spec, bound, SurfaceMethod::Brute, points))
}

/// Canonical `(u, v)` in the box grouped by `Q(u, v)`, zero excluded.
pub fn representations_by_value(q: &QuadForm, bound: u64) -> BTreeMap<i128, Vec<(i128, i128)>> {
    let mut out: BTreeMap<i128, Vec<(i128, i128)>> = BTreeMap::new();
    for (u, v) in canonical_pairs(bound) {
        let n = q.eval(u, v);
        if n != 0 {
            out.entry(n).or_default().push((u, v));
        }
    }
    out
}

/// Groups the box by fibre `n = Q(u, v)` and takes the curve points from
/// the descent enumeration of `E_{n,e}` (for `n > 0`) and `E_{|n|,-e}`
/// (for `n < 0`).
pub fn count_fibration(spec: &SurfaceSpec, bound: u64, budget: Budget) -> Result<SurfaceCensus> {
    if bound == 0 {
        return Err(invalid("height bound B must be at least 1"));
    }
    let side = 2 * bound as u128 + 1;
    budget.check(side * side)?;
    let fibres = representations_by_value(&spec.form, bound);
    let pos_max = fibres
        .keys()
        .next_back()
        .copied()
        .filter(|&n| n > 0)
        .unwrap_or(0);
    let neg_max = fibres
        .keys()
        .next()
        .copied()
        .filter(|&n| n < 0)
        .map(|n| -n)
        .unwrap_or(0);
    let positive = descent_points(&spec.family, bound, pos_max, budget)?;
    let negative = descent_points(&spec.family.negated(), bound, neg_max, budget)?;

    let curve = |n: i128| -> Option<&Vec<(i128, i128)>> {
        let side: &PointsByTwist = if n > 0 { &positive } else { &negative };
        side.get(&n.abs())
    };
    let mut points = Vec::new();
    for (&n, pairs) in &fibres {
        let Some(curve_points) = curve(n) else {
            continue;
        };
        for &(u, v) in pairs {
            for &(x, y) in curve_points {
                if is_normalized(y, x, u, v) {
                    points.push(WeightedPoint { y, x, u, v });
                }
            }
        }
    }
    Ok(finish(spec, bound, SurfaceMethod::Fibration, points))
}

pub fn count(
    spec: &SurfaceSpec,
    bound: u64,
    method: SurfaceMethod,
    budget: Budget,
) -> Result<SurfaceCensus> {
    match method {
        SurfaceMethod::Brute => count_bruteforce(spec, bound, budget),
        SurfaceMethod::Fibration => count_fibration(spec, bound, budget),
    }
}

/// `r_Q(n) = #{(u, v) : |u|, |v| <= B, Q(u, v) = n}`, solving for `v` at
/// each `u`.
pub fn representation_count(q: &QuadForm, n: i128, bound: u64, budget: Budget) -> Result<u64> {
    budget.check(2 * bound as u128 + 1)?;
    let b = bound as i128;
    let (a, bb, c) = q.coefficients();
    let in_box = |v: i128| v.abs() <= b;
    let mut total = 0u64;
    for u in -b..=b {
        // c v^2 + (b u) v + (a u^2 - n) = 0
        let lin = bb * u;
        let cons = a * u * u - n;
        if c != 0 {
            let disc = lin * lin - 4 * c * cons;
            let Some(s) = exact_sqrt(disc) else {
                continue;
            };
            let roots: &[i128] = if s == 0 { &[0] } else { &[-1, 1] };
            for &sgn in roots {
                let num = -lin + sgn * s;
                if num % (2 * c) == 0 && in_box(num / (2 * c)) {
                    total += 1;
                }
            }
        } else if lin != 0 {
            if (-cons) % lin == 0 && in_box(-cons / lin) {
                total += 1;
            }
        } else if cons == 0 {
            total += 2 * bound + 1;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOutcome {
    pub count: u64,
    pub beta: f64,
}

/// `log N_{U,H}(B) / log B`.
pub fn beta_from_count(count: u64, bound: u64) -> Result<f64> {
    if bound < 2 {
        return Err(invalid("beta needs B >= 2"));
    }
    if count == 0 {
        return Err(invalid("beta is undefined when N(B) = 0"));
    }
    Ok((count as f64).ln() / (bound as f64).ln())
}

pub fn beta(
    spec: &SurfaceSpec,
    bound: u64,
    method: SurfaceMethod,
    budget: Budget,
) -> Result<BetaOutcome> {
    if bound < 2 {
        return Err(invalid("beta needs B >= 2"));
    }
    let census = count(spec, bound, method, budget)?;
    Ok(BetaOutcome {
        count: census.count,
        beta: beta_from_count(census.count, bound)?,
    })
}

/// The explicit points on `V_e` (with `Q = uv`) parametrized by
/// `(w1, w2)`, `w2` odd and `gcd(w1, (2e3 - e1 - e2) w2) = 1`, of height at
/// most `B`. All of them are normalized since `gcd(u, v) = 1`.
pub fn surface_lower_family(family: &TwistFamily, bound: u64) -> Result<Vec<WeightedPoint>> {
    let (c, s, delta) = family_constants(family);
    let k = two_adic_valuation(c)?;
    let u0 = 1i128 << (1 + k);
    let v0 = c >> k;
    let b = bound as i128;
    let mut out = Vec::new();
    let mut w1: i128 = 1;
    while u0 * w1 * w1 <= b {
        let mut w2: i128 = 1;
        while v0 * w2 * w2 <= b {
            if gcd(w1, c * w2) == 1 {
                let m = w1 * w2;
                let p = WeightedPoint {
                    y: 4 * delta * m * m * m,
                    x: 2 * s * m * m,
                    u: u0 * w1 * w1,
                    v: v0 * w2 * w2,
                };
                if height_leq(&p, bound) {
                    out.push(p);
                }
            }
            w2 += 2;
        }
        w1 += 1;
    }
    out.sort_unstable();
    Ok(out)
}
