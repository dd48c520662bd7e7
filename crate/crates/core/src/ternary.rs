//! Coprime solutions of `f1 u1 v1^2 + f2 u2 v2^2 + f3 u3 v3^2 = 0` in boxes,
//! and the shape of the upper bound they are compared against.

use rayon::prelude::*;

use crate::arith::{exact_sqrt, gcd};
use crate::error::{invalid, Budget, Result};

/// Coefficients and box `|u_i| <= U_i`, `|v_i| <= V_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TernaryInstance {
    pub f: [i64; 3],
    pub u: [u64; 3],
    pub v: [u64; 3],
}

/// Default `eps` for the bound shape.
pub const DEFAULT_EPS: f64 = 0.25;

impl TernaryInstance {
    pub fn new(f: [i64; 3], u: [u64; 3], v: [u64; 3]) -> Result<Self> {
        if f.contains(&0) {
            return Err(invalid(format!(
                "ternary coefficients {f:?} must be nonzero"
            )));
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if gcd(f[i].into(), f[j].into()) != 1 {
                return Err(invalid(format!(
                    "ternary coefficients {f:?} must be pairwise coprime"
                )));
            }
        }
        if u.contains(&0) || v.contains(&0) {
            return Err(invalid("ternary box bounds must be at least 1"));
        }
        Ok(TernaryInstance { f, u, v })
    }

    /// Number of `(u, v)` sextuples in the box.
    pub fn volume(&self) -> u128 {
        (0..3)
            .map(|i| 4 * self.u[i] as u128 * self.v[i] as u128)
            .product()
    }

    pub fn permuted(&self, sigma: [usize; 3]) -> Self {
        TernaryInstance {
            f: sigma.map(|i| self.f[i]),
            u: sigma.map(|i| self.u[i]),
            v: sigma.map(|i| self.v[i]),
        }
    }
}

/// Counts solutions by scanning two `(u_i, v_i)` pairs and solving for the
/// third. The `v_i` enter squared, so only positive `v` are scanned and the
/// result is multiplied by 8.
pub fn count_solutions(inst: &TernaryInstance, budget: Budget) -> Result<u64> {
    // Solve for the index with the largest box.
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| (inst.u[i] as u128 * inst.v[i] as u128, i));
    let p = inst.permuted(order);
    let [f1, f2, f3] = p.f.map(i128::from);
    let [u1m, u2m, u3m] = p.u.map(|x| x as i128);
    let [v1m, v2m, v3m] = p.v.map(|x| x as i128);

    let cost = (2 * p.u[0] as u128 * p.v[0] as u128)
        * (2 * p.u[1] as u128 * p.v[1] as u128)
        * (p.u[2].min(p.v[2]) as u128);
    budget.check(cost)?;

    let outer: Vec<(i128, i128)> = (1..=u1m)
        .flat_map(|u| [-u, u])
        .flat_map(|u| (1..=v1m).map(move |v| (u, v)))
        .collect();
    let positive_v: u64 = outer
        .par_iter()
        .map(|&(u1, v1)| {
            let mut hits = 0u64;
            let g1 = u1 * v1;
            let t1 = f1 * u1 * v1 * v1;
            for u2 in (1..=u2m).flat_map(|u| [-u, u]) {
                for v2 in 1..=v2m {
                    let g2 = u2 * v2;
                    if gcd(g1, g2) != 1 {
                        continue;
                    }
                    let r = -(t1 + f2 * u2 * v2 * v2);
                    if r == 0 || r % f3 != 0 {
                        continue;
                    }
                    // u3 v3^2 = m
                    let m = r / f3;
                    let mut check = |u3: i128, v3: i128| {
                        let g3 = u3 * v3;
                        if gcd(g3, g1) == 1 && gcd(g3, g2) == 1 {
                            hits += 1;
                        }
                    };
                    if u3m <= v3m {
                        for au in 1..=u3m.min(m.abs()) {
                            if m % au != 0 {
                                continue;
                            }
                            if let Some(v3) = exact_sqrt(m.abs() / au) {
                                if v3 >= 1 && v3 <= v3m {
                                    check(au * m.signum(), v3);
                                }
                            }
                        }
                    } else {
                        let mut v3 = 1;
                        while v3 <= v3m && v3 * v3 <= m.abs() {
                            if m % (v3 * v3) == 0 && (m / (v3 * v3)).abs() <= u3m {
                                check(m / (v3 * v3), v3);
                            }
                            v3 += 1;
                        }
                    }
                }
            }
            hits
        })
        .sum();
    Ok(positive_v * 8)
}

/// Reference count: a plain loop over all six coordinates.
pub fn count_solutions_exhaustive(inst: &TernaryInstance) -> u64 {
    // Each coordinate pair (u_i, v_i) as (f_i u_i v_i^2, u_i v_i).
    let pairs = |i: usize| -> Vec<(i128, i128)> {
        let (um, vm) = (inst.u[i] as i128, inst.v[i] as i128);
        let mut out = Vec::with_capacity((4 * um * vm) as usize);
        for u in (1..=um).flat_map(|x| [-x, x]) {
            for v in (1..=vm).flat_map(|x| [-x, x]) {
                out.push((i128::from(inst.f[i]) * u * v * v, u * v));
            }
        }
        out
    };
    let (p1, p2, p3) = (pairs(0), pairs(1), pairs(2));
    let mut count = 0;
    for &(t1, g1) in &p1 {
        for &(t2, g2) in &p2 {
            let t12 = t1 + t2;
            for &(t3, g3) in &p3 {
                if t12 + t3 != 0 {
                    continue;
                }
                if gcd(g1, g2) == 1 && gcd(g1, g3) == 1 && gcd(g2, g3) == 1 {
                    count += 1;
                }
            }
        }
    }
    count
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(invalid(format!("eps = {eps} must lie in (0, 1/2)")))
    }
}

/// `1 + max over {i,j,k} of (U_i U_j)^(-1/2 + eps) log(2 U_k)`.
pub fn m_eps(u: [u64; 3], eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let u = u.map(|x| x as f64);
    let term = |i: usize, j: usize, k: usize| (u[i] * u[j]).powf(-0.5 + eps) * (2.0 * u[k]).ln();
    Ok(1.0 + term(0, 1, 2).max(term(1, 2, 0)).max(term(0, 2, 1)))
}

/// `(U1 U2 U3)^(2/3) (V1 V2 V3)^(1/3) M_eps(U)`, without the implied
/// constant.
pub fn box_bound(inst: &TernaryInstance, eps: f64) -> Result<f64> {
    let pu: f64 = inst.u.iter().map(|&x| x as f64).product();
    let pv: f64 = inst.v.iter().map(|&x| x as f64).product();
    Ok(pu.powf(2.0 / 3.0) * pv.powf(1.0 / 3.0) * m_eps(inst.u, eps)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub u: [u64; 3],
    pub v: [u64; 3],
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// Boxes with `U = V` and every `U_i` a power of two up to `2^kmax`.
pub fn dyadic_grid(kmax: u32) -> Vec<([u64; 3], [u64; 3])> {
    let sides: Vec<u64> = (0..=kmax).map(|k| 1u64 << k).collect();
    let mut out = Vec::new();
    for &a in &sides {
        for &b in &sides {
            for &c in &sides {
                out.push(([a, b, c], [a, b, c]));
            }
        }
    }
    out
}

pub fn ratio_scan(
    f: [i64; 3],
    grid: &[([u64; 3], [u64; 3])],
    eps: f64,
    budget: Budget,
) -> Result<Vec<RatioRow>> {
    check_eps(eps)?;
    grid.iter()
        .map(|&(u, v)| {
            let inst = TernaryInstance::new(f, u, v)?;
            let count = count_solutions(&inst, budget)?;
            let bound = box_bound(&inst, eps)?;
            Ok(RatioRow {
                u,
                v,
                count,
                bound,
                ratio: count as f64 / bound,
            })
        })
        .collect()
}

/// Largest ratio among rows whose boxes are all at most `side` in each
/// coordinate; used to see whether the ratio keeps growing as boxes double.
pub fn max_ratio_up_to(rows: &[RatioRow], side: u64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.u.iter().chain(r.v.iter()).all(|&x| x <= side))
        .map(|r| r.ratio)
        .reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(f: [i64; 3]) -> TernaryInstance {
        TernaryInstance::new(f, [1; 3], [1; 3]).unwrap()
    }

    #[test]
    fn unit_boxes() {
        let b = Budget::default();
        assert_eq!(count_solutions(&unit([1, 1, -1]), b).unwrap(), 0);
        assert_eq!(count_solutions(&unit([1, 1, -2]), b).unwrap(), 16);
        assert_eq!(count_solutions(&unit([1, 2, -3]), b).unwrap(), 16);
        assert_eq!(count_solutions_exhaustive(&unit([1, 1, -2])), 16);
    }

    #[test]
    fn instance_checks() {
        assert!(TernaryInstance::new([2, 4, -3], [1; 3], [1; 3]).is_err());
        assert!(TernaryInstance::new([0, 1, -1], [1; 3], [1; 3]).is_err());
        assert!(TernaryInstance::new([1, 1, -2], [0, 1, 1], [1; 3]).is_err());
    }

    #[test]
    fn bound_shape() {
        assert!((m_eps([1, 1, 1], 0.25).unwrap() - (1.0 + 2f64.ln())).abs() < 1e-12);
        assert!((m_eps([4, 4, 4], 0.25).unwrap() - 2.0397).abs() < 1e-4);
        assert!(m_eps([1, 1, 1], 0.5).is_err());
        assert!(m_eps([1, 1, 1], 0.0).is_err());
        let inst = TernaryInstance::new([1, 1, -2], [4; 3], [1; 3]).unwrap();
        assert!((box_bound(&inst, 0.25).unwrap() - 32.635).abs() < 1e-2);
        let doubled = TernaryInstance::new([1, 1, -2], [4; 3], [2; 3]).unwrap();
        let r = box_bound(&doubled, 0.25).unwrap() / box_bound(&inst, 0.25).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_rows() {
        assert!(ratio_scan([1, 1, -2], &[], 0.25, Budget::default())
            .unwrap()
            .is_empty());
        let rows = ratio_scan([1, 1, -2], &[([1; 3], [1; 3])], 0.25, Budget::default()).unwrap();
        assert!((rows[0].ratio - 9.45).abs() < 1e-2);
        assert_eq!(dyadic_grid(3).len(), 64);
    }

    #[test]
    fn budget_guard() {
        let inst = TernaryInstance::new([1, 1, -2], [50; 3], [50; 3]).unwrap();
        assert!(count_solutions(&inst, Budget::new(100)).is_err());
    }
}
