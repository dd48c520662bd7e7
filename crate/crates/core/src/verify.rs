//! Cross-method consistency suites, run by `delpezzo verify`.
//!
//! Each check pairs a fast path with an independent scan and counts the
//! cases where they disagree.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::arith::{exact_sqrt, gcd, positive_divisors, QuadForm, SurfaceSpec, TwistFamily};
use crate::descent::{
    decompose, recompose, tuple_to_twist_point, twist_point_to_tuple, DescentTuple, TwistPoint,
};
use crate::error::{invalid, Budget, Error, Result};
use crate::surface::{count_bruteforce, count_fibration, surface_lower_family};
use crate::ternary::{count_solutions, count_solutions_exhaustive, TernaryInstance};
use crate::twists::{
    aggregate_census, enumerate_points_bruteforce, twist_lower_family, TwistMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Small,
    Full,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Suite::Small),
            "full" => Ok(Suite::Full),
            other => Err(invalid(format!(
                "unknown suite '{other}' (expected small or full)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Small => "small",
            Suite::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: u64,
    pub mismatches: u64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

fn families(list: &[[i64; 3]]) -> Vec<TwistFamily> {
    list.iter()
        .map(|&e| TwistFamily::from_array(e).unwrap())
        .collect()
}

fn signed_divisors(m: i128) -> Vec<i128> {
    positive_divisors(m.abs())
        .into_iter()
        .flat_map(|d| [d, -d])
        .collect()
}

/// Every valid tuple recomposing to `(y, x)`, by scanning divisors of the
/// `x_i`. Independent of [`decompose`]; each component divides some `x_i`,
/// so this covers all tuples with components up to `max |x_i|`.
pub fn exhaustive_preimages(y: i128, x: [i128; 3]) -> Vec<DescentTuple> {
    let mut out = Vec::new();
    let ws = signed_divisors(x[0]);
    for &d1 in &signed_divisors(gcd(x[1], x[2])) {
        for &d2 in &signed_divisors(gcd(x[0], x[2])) {
            for &d3 in &signed_divisors(gcd(x[0], x[1])) {
                let d = [d1, d2, d3];
                if x[0] % (d2 * d3) != 0 || x[1] % (d3 * d1) != 0 || x[2] % (d1 * d2) != 0 {
                    continue;
                }
                for &w in &ws {
                    if (0..3).any(|i| x[i] % (w * w) != 0) {
                        continue;
                    }
                    // r_i = x_i / (d_j d_k w^2) = a_i^2 a_j a_k b_i^2
                    let r = [
                        x[0] / (d2 * d3 * w * w),
                        x[1] / (d3 * d1 * w * w),
                        x[2] / (d1 * d2 * w * w),
                    ];
                    for a1 in positive_divisors(r[0].abs()) {
                        if r[0] % (a1 * a1) != 0 || r[1] % a1 != 0 || r[2] % a1 != 0 {
                            continue;
                        }
                        for a2 in positive_divisors(r[1].abs()) {
                            if r[1] % (a2 * a2 * a1) != 0 || r[0] % (a1 * a1 * a2) != 0 {
                                continue;
                            }
                            for a3 in positive_divisors(r[2].abs()) {
                                let a = [a1, a2, a3];
                                let rest = |i: usize| {
                                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                                    let base = d[j] * d[k] * w * w * a[i] * a[i] * a[j] * a[k];
                                    (x[i] % base == 0)
                                        .then(|| exact_sqrt(x[i] / base))
                                        .flatten()
                                        .filter(|&b| b > 0)
                                };
                                let (Some(b1), Some(b2), Some(b3)) = (rest(0), rest(1), rest(2))
                                else {
                                    continue;
                                };
                                let t = DescentTuple {
                                    d,
                                    w,
                                    a,
                                    b: [b1, b2, b3],
                                };
                                if t.is_valid() && recompose(&t).ok() == Some((y, x)) {
                                    out.push(t);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Over every solution with `|x_i| <= limit`: `decompose` succeeds,
/// `recompose` inverts it, and it is the only valid preimage.
pub fn check_descent_roundtrip(limit: i128) -> CheckOutcome {
    let range: Vec<i128> = (-limit..=limit).filter(|&x| x != 0).collect();
    let (cases, mismatches) = range
        .par_iter()
        .map(|&x1| {
            let mut acc = (0u64, 0u64);
            for &x2 in &range {
                for &x3 in &range {
                    let Some(y) = exact_sqrt(x1 * x2 * x3).filter(|&y| y > 0) else {
                        continue;
                    };
                    for y in [y, -y] {
                        acc.0 += 1;
                        let ok = decompose(y, x1, x2, x3).is_ok_and(|t| {
                            recompose(&t).is_ok_and(|r| r == (y, [x1, x2, x3]))
                                && exhaustive_preimages(y, [x1, x2, x3]) == [t]
                        });
                        if !ok {
                            acc.1 += 1;
                        }
                    }
                }
            }
            acc
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    CheckOutcome {
        name: "descent-roundtrip",
        cases,
        mismatches,
    }
}

/// Twist points found by brute force map to tuples and back, injectively.
pub fn check_bijection(fams: &[TwistFamily], n_max: i128, bound: u64) -> CheckOutcome {
    let mut cases = 0;
    let mut mismatches = 0;
    for fam in fams {
        let mut seen = std::collections::BTreeSet::new();
        for n in 1..=n_max {
            for (x, y) in enumerate_points_bruteforce(fam, n, bound) {
                cases += 1;
                let p = TwistPoint { n, x, y };
                match twist_point_to_tuple(fam, &p) {
                    Ok(t) if tuple_to_twist_point(&t, fam) == Some(p) && seen.insert(t) => {}
                    _ => mismatches += 1,
                }
            }
        }
    }
    CheckOutcome {
        name: "twist-bijection",
        cases,
        mismatches,
    }
}

pub fn check_twist_methods(
    fams: &[TwistFamily],
    bounds: &[u64],
    budget: Budget,
) -> Result<CheckOutcome> {
    let mut cases = 0;
    let mut mismatches = 0;
    for fam in fams {
        for &b in bounds {
            cases += 1;
            let brute = aggregate_census(fam, b, TwistMethod::Brute, budget)?;
            let desc = aggregate_census(fam, b, TwistMethod::Descent, budget)?;
            if brute.per_n != desc.per_n {
                mismatches += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "twist-methods",
        cases,
        mismatches,
    })
}

pub fn standard_forms() -> Vec<QuadForm> {
    vec![
        QuadForm::split(),
        QuadForm::new(1, 0, 1).unwrap(),
        QuadForm::new(1, 0, -2).unwrap(),
    ]
}

pub fn check_surface_methods(
    fams: &[TwistFamily],
    forms: &[QuadForm],
    bounds: &[u64],
    budget: Budget,
) -> Result<CheckOutcome> {
    let mut cases = 0;
    let mut mismatches = 0;
    for fam in fams {
        for q in forms {
            let spec = SurfaceSpec::new(*fam, *q);
            for &b in bounds {
                cases += 1;
                let brute = count_bruteforce(&spec, b, budget)?;
                let fib = count_fibration(&spec, b, budget)?;
                if brute.points != fib.points {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(CheckOutcome {
        name: "surface-methods",
        cases,
        mismatches,
    })
}

pub fn check_ternary(coeffs: &[[i64; 3]], sides: &[u64], budget: Budget) -> Result<CheckOutcome> {
    let mut cases = 0;
    let mut mismatches = 0;
    for &f in coeffs {
        for &u1 in sides {
            for &u2 in sides {
                for &u3 in sides {
                    for &v1 in sides {
                        for &v2 in sides {
                            for &v3 in sides {
                                let inst = TernaryInstance::new(f, [u1, u2, u3], [v1, v2, v3])?;
                                cases += 1;
                                if count_solutions(&inst, budget)?
                                    != count_solutions_exhaustive(&inst)
                                {
                                    mismatches += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CheckOutcome {
        name: "ternary-oracle",
        cases,
        mismatches,
    })
}

/// Explicit family points lie in the matching censuses.
pub fn check_families(fams: &[TwistFamily], bound: u64, budget: Budget) -> Result<CheckOutcome> {
    let mut cases = 0;
    let mut mismatches = 0;
    for fam in fams {
        let census = aggregate_census(fam, bound, TwistMethod::Brute, budget)?;
        for p in twist_lower_family(fam, bound)? {
            cases += 1;
            if !census.contains(&p) {
                mismatches += 1;
            }
        }
        let spec = SurfaceSpec::new(*fam, QuadForm::split());
        let surf = count_bruteforce(&spec, bound, budget)?;
        for p in surface_lower_family(fam, bound)? {
            cases += 1;
            if !surf.contains(&p) {
                mismatches += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "explicit-families",
        cases,
        mismatches,
    })
}

pub fn run_suite(suite: Suite, budget: Budget) -> Result<Vec<CheckOutcome>> {
    let twist_fams = families(&[[0, 1, 2], [1, 2, 3], [-2, 1, 3]]);
    let surf_fams = families(&[[0, 1, 2], [1, 2, 3]]);
    let forms = standard_forms();
    let coeffs = [[1, 1, -2], [1, 2, -3], [2, 3, -5]];
    Ok(match suite {
        Suite::Small => vec![
            check_descent_roundtrip(12),
            check_bijection(&surf_fams, 20, 20),
            check_twist_methods(&twist_fams, &[5, 10], budget)?,
            check_surface_methods(&surf_fams, &forms, &[4, 8], budget)?,
            check_ternary(&coeffs, &[1, 2], budget)?,
            check_families(&surf_fams, 10, budget)?,
        ],
        Suite::Full => vec![
            check_descent_roundtrip(40),
            check_bijection(&surf_fams, 50, 40),
            check_twist_methods(&twist_fams, &[5, 10, 20, 25], budget)?,
            check_surface_methods(&surf_fams, &forms, &[5, 10, 15], budget)?,
            check_ternary(&coeffs, &[1, 2, 4], budget)?,
            check_families(&surf_fams, 15, budget)?,
        ],
    })
}
