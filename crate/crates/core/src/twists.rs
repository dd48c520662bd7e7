//! Non-trivial integral points of bounded naive height on the quadratic
//! twists `E_{n,e} : y^2 = (x - e1 n)(x - e2 n)(x - e3 n)`.
//!
//! Two independent enumerations are provided. The brute-force scan walks
//! every `x` with `|x| <= B^2` for each twist. The descent enumeration walks
//! descent tuples `(d, w, a, b)` and solves for the last `b` exactly; it is
//! what makes large `B` feasible. Both return the same point sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::arith::{
    ceil_sqrt, exact_sqrt, gcd, is_squarefree, isqrt, signed_divisor_triples, TwistFamily,
};
use crate::descent::{tuple_to_twist_point, twist_rhs, DescentTuple, TwistPoint, CYCLIC};
use crate::error::{invalid, Budget, Error, Result};

/// Points grouped by twist parameter, each group sorted by `(x, y)`.
pub type PointsByTwist = BTreeMap<i128, Vec<(i128, i128)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwistMethod {
    Brute,
    Descent,
}

impl fmt::Display for TwistMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwistMethod::Brute => "brute",
            TwistMethod::Descent => "descent",
        })
    }
}

impl FromStr for TwistMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(TwistMethod::Brute),
            "descent" => Ok(TwistMethod::Descent),
            other => Err(invalid(format!(
                "unknown twist method '{other}' (expected brute or descent)"
            ))),
        }
    }
}

/// `sum_n #{P in E*_{n,e}(Z) : H(P) <= B}` together with the points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistCensus {
    pub family: TwistFamily,
    pub bound: u64,
    pub method: TwistMethod,
    pub total: u64,
    pub per_n: PointsByTwist,
}

impl TwistCensus {
    pub fn points(&self) -> impl Iterator<Item = TwistPoint> + '_ {
        self.per_n
            .iter()
            .flat_map(|(&n, pts)| pts.iter().map(move |&(x, y)| TwistPoint { n, x, y }))
    }

    pub fn contains(&self, p: &TwistPoint) -> bool {
        self.per_n
            .get(&p.n)
            .is_some_and(|pts| pts.binary_search(&(p.x, p.y)).is_ok())
    }
}

fn powers(bound: u64) -> (i128, i128) {
    let b = bound as i128;
    (b * b, b * b * b)
}

/// `max(|y|^(1/3), |x|^(1/2)) <= B`, decided in integers.
pub fn naive_height_leq(x: i128, y: i128, bound: u64) -> bool {
    let (b2, b3) = powers(bound);
    x.abs() <= b2 && y.abs() <= b3
}

/// A twist parameter beyond which `E*_{n,e}` has no point of height `<= B`.
///
/// `2 B^2` when `e1 e2 e3 != 0`; otherwise `ceil(2 B^3 / g)` with `g` the
/// smallest gap between the `e_i`: two of the three factors of `y^2` are
/// then at least `g n / 2` in absolute value.
pub fn n_cutoff(family: &TwistFamily, bound: u64) -> i128 {
    let (b2, b3) = powers(bound);
    if family.product_nonzero() {
        2 * b2
    } else {
        let g = family.min_gap();
        (2 * b3 + g - 1) / g
    }
}

/// All `(x, y)` with `y != 0`, `|x| <= B^2`, `|y| <= B^3` on `E_{n,e}`,
/// sorted.
pub fn enumerate_points_bruteforce(family: &TwistFamily, n: i128, bound: u64) -> Vec<(i128, i128)> {
    let (b2, b3) = powers(bound);
    let b6 = b3 * b3;
    let mut out = Vec::new();
    for x in -b2..=b2 {
        let Some(rhs) = twist_rhs(family, n, x) else {
            continue;
        };
        if rhs <= 0 || rhs > b6 {
            continue;
        }
        if let Some(y) = exact_sqrt(rhs) {
            out.push((x, -y));
            out.push((x, y));
        }
    }
    out
}

/// Brute-force scan of every twist `1 <= n <= n_max`.
pub fn brute_points(
    family: &TwistFamily,
    bound: u64,
    n_max: i128,
    budget: Budget,
) -> Result<PointsByTwist> {
    let (b2, _) = powers(bound);
    let n_max = n_max.max(0);
    budget.check(n_max as u128 * (2 * b2 as u128 + 1))?;
    let found: Vec<(i128, Vec<(i128, i128)>)> = (1..=n_max as u64)
        .into_par_iter()
        .filter_map(|n| {
            let pts = enumerate_points_bruteforce(family, n as i128, bound);
            (!pts.is_empty()).then_some((n as i128, pts))
        })
        .collect();
    Ok(found.into_iter().collect())
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Shared bounds of one descent enumeration.
struct DescentScan<'a> {
    family: &'a TwistFamily,
    e: [i128; 3],
    bound: u64,
    b2: i128,
    b3: i128,
    n_max: i128,
    /// `|x - e_i n| <= B^2 + |e_i| n_max`.
    factor_bound: [i128; 3],
}

/// One `(d, w, a)` cell; the `b_i` are searched inside it.
#[derive(Debug, Clone, Copy)]
struct Cell {
    d: [i128; 3],
    w: i128,
    a: [i128; 3],
}

impl<'a> DescentScan<'a> {
    fn new(family: &'a TwistFamily, bound: u64, n_max: i128) -> Self {
        let e = family.e();
        let (b2, b3) = powers(bound);
        let n_max = n_max.min(n_cutoff(family, bound));
        DescentScan {
            family,
            e,
            bound,
            b2,
            b3,
            n_max,
            factor_bound: e.map(|ei| b2 + ei.abs() * n_max),
        }
    }

    fn feasible(&self, d: &[i128; 3], w: i128, a: &[i128; 3]) -> bool {
        let dabs = d.map(i128::abs);
        for (i, j, k) in CYCLIC {
            let least = dabs[j]
                .saturating_mul(dabs[k])
                .saturating_mul(w * w)
                .saturating_mul(a[i] * a[i])
                .saturating_mul(a[j] * a[k]);
            if least > self.factor_bound[i] {
                return false;
            }
        }
        let prod_a = a[0] * a[1] * a[2];
        let ylow = (dabs[0] * dabs[1] * dabs[2])
            .saturating_mul(w * w * w)
            .saturating_mul(prod_a.saturating_mul(prod_a));
        ylow <= self.b3
    }

    fn divisor_triples(&self) -> Vec<[i128; 3]> {
        signed_divisor_triples(self.family)
            .into_iter()
            .filter(|d| gcd(d[0], d[1]) == 1 && gcd(d[0], d[2]) == 1 && gcd(d[1], d[2]) == 1)
            .collect()
    }

    /// Top-level `(d, w, a1)` work items.
    fn tasks(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        if self.n_max < 1 {
            return out;
        }
        for d in self.divisor_triples() {
            let mut w = 1;
            while self.feasible(&d, w, &[1, 1, 1]) {
                let mut a1 = 1;
                while self.feasible(&d, w, &[a1, 1, 1]) {
                    if is_squarefree(a1) && gcd(a1, d[0]) == 1 {
                        out.push(Cell {
                            d,
                            w,
                            a: [a1, 1, 1],
                        });
                    }
                    a1 += 1;
                }
                w += 1;
            }
        }
        out
    }

    /// Every admissible cell below a top-level task.
    fn for_each_cell(&self, task: Cell, mut f: impl FnMut(Cell)) {
        let Cell {
            d,
            w,
            a: [a1, _, _],
        } = task;
        let mut a2 = 1;
        while self.feasible(&d, w, &[a1, a2, 1]) {
            if is_squarefree(a2) && gcd(a2, a1) == 1 && gcd(a2, d[1]) == 1 {
                let mut a3 = 1;
                while self.feasible(&d, w, &[a1, a2, a3]) {
                    if is_squarefree(a3) && gcd(a3, a1 * a2) == 1 && gcd(a3, d[2]) == 1 {
                        f(Cell {
                            d,
                            w,
                            a: [a1, a2, a3],
                        });
                    }
                    a3 += 1;
                }
            }
            a2 += 1;
        }
    }

    /// `x_i = coef_i b_i^2`, the per-index box `b_i <= limit_i`, the cap on
    /// `b1 b2 b3` from `|y| <= B^3`, and the loop order (outer, middle,
    /// solved).
    fn cell_layout(&self, c: &Cell) -> ([i128; 3], [i128; 3], i128, [usize; 3]) {
        let Cell { d, w, a } = *c;
        let mut coef = [0i128; 3];
        let mut limit = [0i128; 3];
        for (i, j, k) in CYCLIC {
            coef[i] = d[j] * d[k] * w * w * a[i] * a[i] * a[j] * a[k];
            limit[i] = isqrt(self.factor_bound[i] / coef[i].abs());
        }
        let pa = a[0] * a[1] * a[2];
        let b_product_cap = self.b3 / ((d[0] * d[1] * d[2]).abs() * w * w * w * pa * pa);
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&i| (limit[i], i));
        (coef, limit, b_product_cap, order)
    }

    fn cell_cost(&self, c: &Cell) -> u128 {
        let (_, limit, _, order) = self.cell_layout(c);
        (limit[order[0]] as u128) * (limit[order[1]] as u128)
    }

    fn search_cell(&self, c: &Cell, out: &mut Vec<TwistPoint>) -> Result<()> {
        let Cell { d, w, a } = *c;
        let e = self.e;
        let (coef, limit, cap, order) = self.cell_layout(c);
        let [o, m, s] = order;
        let gap_m = e[o] - e[m];
        let gap_s = e[o] - e[s];
        for bo in 1..=limit[o] {
            if bo > cap {
                break;
            }
            if gcd(bo, d[o] * a[m] * a[s]) != 1 {
                continue;
            }
            let xo = coef[o] * bo * bo;
            // n must keep x = xo + e_o n inside [-B^2, B^2].
            let (mut nlo, mut nhi) = (1i128, self.n_max);
            if e[o] == 0 {
                if xo.abs() > self.b2 {
                    continue;
                }
            } else {
                let (lo, hi) = (-self.b2 - xo, self.b2 - xo);
                if e[o] > 0 {
                    nlo = nlo.max(ceil_div(lo, e[o]));
                    nhi = nhi.min(floor_div(hi, e[o]));
                } else {
                    nlo = nlo.max(ceil_div(hi, e[o]));
                    nhi = nhi.min(floor_div(lo, e[o]));
                }
            }
            if nlo > nhi {
                continue;
            }
            // x_m = xo + (e_o - e_m) n ranges over an interval.
            let (p, q) = (xo + gap_m * nlo, xo + gap_m * nhi);
            let (xlo, xhi) = (p.min(q), p.max(q));
            let cm = coef[m];
            let (tlo, thi) = if cm > 0 {
                (ceil_div(xlo, cm), floor_div(xhi, cm))
            } else {
                (ceil_div(xhi, cm), floor_div(xlo, cm))
            };
            let tlo = tlo.max(1);
            let thi = thi.min(limit[m] * limit[m]);
            if tlo > thi {
                continue;
            }
            let bm_lo = ceil_sqrt(tlo);
            let bm_hi = isqrt(thi).min(cap / bo);
            for bm in bm_lo..=bm_hi {
                if gcd(bm, d[m] * a[o] * a[s] * bo) != 1 {
                    continue;
                }
                let diff = cm * bm * bm - xo;
                if diff % gap_m != 0 {
                    continue;
                }
                let n = diff / gap_m;
                if n < nlo || n > nhi {
                    continue;
                }
                let xs = xo + gap_s * n;
                if xs % coef[s] != 0 {
                    continue;
                }
                let Some(bs) = exact_sqrt(xs / coef[s]) else {
                    continue;
                };
                if bs < 1 || bo * bm * bs > cap {
                    continue;
                }
                if gcd(bs, d[s] * a[o] * a[m] * bo * bm) != 1 {
                    continue;
                }
                let mut b = [0i128; 3];
                b[o] = bo;
                b[m] = bm;
                b[s] = bs;
                for sw in [w, -w] {
                    let t = DescentTuple { d, w: sw, a, b };
                    let p = tuple_to_twist_point(&t, self.family).ok_or_else(|| {
                        Error::Inconsistent(format!("descent cell produced no point for {t:?}"))
                    })?;
                    if p.n != n {
                        return Err(Error::Inconsistent(format!(
                            "descent cell solved n = {n} but the tuple gives n = {}",
                            p.n
                        )));
                    }
                    if p.n <= self.n_max && naive_height_leq(p.x, p.y, self.bound) {
                        out.push(p);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Descent enumeration of every point with `1 <= n <= n_max` and naive
/// height at most `B`.
pub fn descent_points(
    family: &TwistFamily,
    bound: u64,
    n_max: i128,
    budget: Budget,
) -> Result<PointsByTwist> {
    let scan = DescentScan::new(family, bound, n_max);
    let tasks = scan.tasks();
    let mut cost: u128 = 0;
    for t in &tasks {
        scan.for_each_cell(*t, |c| cost += scan.cell_cost(&c) + 1);
    }
    budget.check(cost)?;

    let chunks: Vec<Vec<TwistPoint>> = tasks
        .par_iter()
        .map(|t| {
            let mut found = Vec::new();
            let mut status = Ok(());
            scan.for_each_cell(*t, |c| {
                if status.is_ok() {
                    status = scan.search_cell(&c, &mut found);
                }
            });
            status.map(|_| found)
        })
        .collect::<Result<_>>()?;

    let mut all: Vec<TwistPoint> = chunks.into_iter().flatten().collect();
    all.sort_unstable();
    all.dedup();
    let mut per_n = PointsByTwist::new();
    for p in all {
        per_n.entry(p.n).or_default().push((p.x, p.y));
    }
    Ok(per_n)
}

/// The census of all twists at height `B`, by the chosen method.
pub fn aggregate_census(
    family: &TwistFamily,
    bound: u64,
    method: TwistMethod,
    budget: Budget,
) -> Result<TwistCensus> {
    if bound == 0 {
        return Err(invalid("height bound B must be at least 1"));
    }
    let n_max = n_cutoff(family, bound);
    let per_n = match method {
        TwistMethod::Brute => brute_points(family, bound, n_max, budget)?,
        TwistMethod::Descent => descent_points(family, bound, n_max, budget)?,
    };
    let total = per_n.values().map(|v| v.len() as u64).sum();
    Ok(TwistCensus {
        family: *family,
        bound,
        method,
        total,
        per_n,
    })
}

/// Exponent of `log B` in the upper bound for the census: 4 if no `e_i`
/// vanishes, else 6.
pub fn delta_exponent(family: &TwistFamily) -> u32 {
    if family.product_nonzero() {
        4
    } else {
        6
    }
}

/// Constants of the explicit one-parameter family, computed with the largest
/// `e_i` moved last: `(2e3 - e1 - e2, -2e1e2 + e1e3 + e2e3, (e1-e2)(e2-e3)(e3-e1))`.
pub(crate) fn family_constants(family: &TwistFamily) -> (i128, i128, i128) {
    let [e1, e2, e3] = family.largest_last().e();
    (
        2 * e3 - e1 - e2,
        -2 * e1 * e2 + e1 * e3 + e2 * e3,
        (e1 - e2) * (e2 - e3) * (e3 - e1),
    )
}

/// The explicit points `n = 2(2e3-e1-e2) w^2`, `x = 2(-2e1e2+e1e3+e2e3) w^2`,
/// `y = 4(e1-e2)(e2-e3)(e3-e1) w^3` of naive height at most `B`.
pub fn twist_lower_family(family: &TwistFamily, bound: u64) -> Result<Vec<TwistPoint>> {
    let (c, s, delta) = family_constants(family);
    let (b2, b3) = powers(bound);
    let mut out = Vec::new();
    let mut w: i128 = 1;
    while 4 * delta.abs() * w * w * w <= b3 && 2 * s.abs() * w * w <= b2 {
        out.push(TwistPoint::new(
            family,
            2 * c * w * w,
            2 * s * w * w,
            4 * delta * w * w * w,
        )?);
        w += 1;
    }
    Ok(out)
}

/// Number of twists `n <= big_n` of the explicit family, i.e. `#{w >= 1 : 2(2e3-e1-e2) w^2 <= N}`.
pub fn lower_family_twist_count(family: &TwistFamily, big_n: u64) -> u64 {
    let (c, _, _) = family_constants(family);
    isqrt(big_n as i128 / (2 * c)) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOutcome {
    /// `#{n <= N : some P has H(P) <= n^(1/2) (log n)^(-A)}`.
    pub numerator: u64,
    /// Certified lower bound for `#{n <= N : E*_{n,e}(Z) nonempty}`.
    pub denominator_lower: u64,
    /// Twists below `N` covered by the explicit family alone.
    pub family_lower: u64,
    /// Twists whose height threshold exceeded `cap` and was capped.
    pub capped: u64,
    /// Thresholds within `1e-6` of an integer where both roundings disagree.
    pub tie_discrepancies: u64,
}

const TIE_BAND: f64 = 1e-6;

fn height_threshold(n: u64, a: f64) -> f64 {
    let nf = n as f64;
    nf.sqrt() * nf.ln().powf(-a)
}

pub fn density_experiment(
    family: &TwistFamily,
    big_n: u64,
    a: f64,
    cap: u64,
    budget: Budget,
) -> Result<DensityOutcome> {
    if big_n < 16 {
        return Err(invalid(format!(
            "density experiment needs N >= 16, got {big_n}"
        )));
    }
    if a.is_nan() || a <= 6.0 || a.is_infinite() {
        return Err(invalid(format!("density experiment needs A > 6, got {a}")));
    }
    if cap == 0 {
        return Err(invalid("height cap must be at least 1"));
    }

    struct Probe {
        n: u64,
        bound: u64,
        tie: Option<u64>,
    }
    let mut probes = Vec::new();
    let mut capped = 0u64;
    let mut volume: u128 = 0;
    for n in 1..=big_n {
        let t = height_threshold(n, a);
        let (bound, tie) = if !t.is_finite() || t >= cap as f64 {
            capped += 1;
            (cap, None)
        } else {
            let k = t.round();
            let tie = ((t - k).abs() < TIE_BAND && k >= 1.0).then_some(k as u64);
            (t.floor() as u64, tie)
        };
        if bound >= 1 || tie.is_some() {
            let b = bound.max(tie.unwrap_or(0)) as u128;
            volume += 2 * b * b + 1;
            probes.push(Probe { n, bound, tie });
        }
    }
    budget.check(volume)?;

    let results: Vec<(bool, bool)> = probes
        .par_iter()
        .map(|p| {
            let hit =
                |b: u64| b >= 1 && !enumerate_points_bruteforce(family, p.n as i128, b).is_empty();
            let found = hit(p.bound);
            let disagree = p.tie.is_some_and(|k| hit(k - 1) != hit(k));
            (found, disagree)
        })
        .collect();
    let numerator = results.iter().filter(|r| r.0).count() as u64;
    let tie_discrepancies = results.iter().filter(|r| r.1).count() as u64;

    let found = descent_points(family, cap, big_n as i128, budget)?;
    let mut nonempty: BTreeSet<i128> = found.keys().copied().collect();
    let (c, _, _) = family_constants(family);
    let family_lower = lower_family_twist_count(family, big_n);
    for w in 1..=family_lower as i128 {
        nonempty.insert(2 * c * w * w);
    }
    Ok(DensityOutcome {
        numerator,
        denominator_lower: nonempty.len() as u64,
        family_lower,
        capped,
        tie_discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(a: i64, b: i64, c: i64) -> TwistFamily {
        TwistFamily::new(a, b, c).unwrap()
    }

    #[test]
    fn height_examples() {
        assert!(naive_height_leq(4, 8, 2));
        assert!(!naive_height_leq(5, 8, 2));
        assert!(!naive_height_leq(4, 9, 2));
        assert!(naive_height_leq(-4, -8, 2));
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(n_cutoff(&fam(1, 2, 3), 10), 200);
        assert_eq!(n_cutoff(&fam(0, 1, 2), 10), 2000);
        assert_eq!(n_cutoff(&fam(1, 2, 3), 1), 2);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_exponent(&fam(1, 2, 3)), 4);
        assert_eq!(delta_exponent(&fam(0, 1, 2)), 6);
        assert_eq!(delta_exponent(&fam(-1, 1, 2)), 4);
    }

    #[test]
    fn brute_examples() {
        let e = fam(0, 1, 2);
        let pts = enumerate_points_bruteforce(&e, 6, 3);
        assert!(pts.contains(&(4, 8)) && pts.contains(&(4, -8)));
        assert!(enumerate_points_bruteforce(&e, 1, 1).is_empty());
    }

    #[test]
    fn lower_family_examples() {
        let e = fam(0, 1, 2);
        let pts = twist_lower_family(&e, 3).unwrap();
        assert_eq!(pts[0], TwistPoint { n: 6, x: 4, y: 8 });
        let f = fam(1, 2, 3);
        let w1 = twist_lower_family(&f, 10).unwrap()[0];
        assert_eq!(w1, TwistPoint { n: 6, x: 10, y: 8 });
        assert_eq!(lower_family_twist_count(&e, 100), 4);
    }

    #[test]
    fn lower_family_survives_permutation() {
        let e = fam(2, 0, 1);
        for p in twist_lower_family(&e, 50).unwrap() {
            assert!(TwistPoint::new(&e, p.n, p.x, p.y).is_ok());
        }
    }

    #[test]
    fn census_small() {
        let e = fam(0, 1, 2);
        let brute = aggregate_census(&e, 3, TwistMethod::Brute, Budget::default()).unwrap();
        let desc = aggregate_census(&e, 3, TwistMethod::Descent, Budget::default()).unwrap();
        assert!(brute.contains(&TwistPoint { n: 6, x: 4, y: 8 }));
        assert!(brute.contains(&TwistPoint { n: 6, x: 4, y: -8 }));
        assert_eq!(brute.per_n, desc.per_n);
        assert_eq!(brute.total, desc.total);

        let f = fam(1, 2, 3);
        let b = aggregate_census(&f, 1, TwistMethod::Brute, Budget::default()).unwrap();
        let d = aggregate_census(&f, 1, TwistMethod::Descent, Budget::default()).unwrap();
        assert_eq!(b.per_n, d.per_n);
    }

    #[test]
    fn budget_guard_trips() {
        let e = fam(0, 1, 2);
        let err = aggregate_census(&e, 20, TwistMethod::Brute, Budget::new(1000)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
        let err = aggregate_census(&e, 20, TwistMethod::Descent, Budget::new(10)).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn density_small() {
        let e = fam(0, 1, 2);
        let out = density_experiment(&e, 100, 7.0, 10, Budget::default()).unwrap();
        assert!(out.denominator_lower >= 4);
        assert_eq!(out.family_lower, 4);
        let out16 = density_experiment(&e, 16, 7.0, 10, Budget::default()).unwrap();
        assert_eq!(out16.numerator, 0);
        assert!(density_experiment(&e, 15, 7.0, 10, Budget::default()).is_err());
        assert!(density_experiment(&e, 100, 6.0, 10, Budget::default()).is_err());
    }

    #[test]
    fn integer_division_rounding() {
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(floor_div(7, -2), -4);
        assert_eq!(ceil_div(7, -2), -3);
        assert_eq!(ceil_div(6, 3), 2);
    }
}
