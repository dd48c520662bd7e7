//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use delpezzo_core::arith::divisor_count;
use delpezzo_core::descent::twist_rhs;
use delpezzo_core::surface::{
    self, height_leq, is_normalized, on_open_surface, representation_count,
};
use delpezzo_core::ternary::{count_solutions, count_solutions_exhaustive};
use delpezzo_core::twists::{
    aggregate_census, brute_points, density_experiment, twist_lower_family,
};
use delpezzo_core::verify;
use delpezzo_core::{
    Budget, QuadForm, SurfaceMethod, SurfaceSpec, TernaryInstance, TwistFamily, TwistMethod,
};

// Tolerances and limits.
const GROWTH_RATIO_MAX: f64 = 50.0;
const BETA_WINDOW: (f64, f64) = (0.7, 1.6);
const BETA_DRIFT: f64 = 0.05;
const TERNARY_VOLUME_MAX: u128 = 1_000_000;
const DENSITY_A: f64 = 7.0;
const DENSITY_CAP: u64 = 300;

fn fam(e: [i64; 3]) -> TwistFamily {
    TwistFamily::from_array(e).unwrap()
}

fn budget() -> Budget {
    Budget::new(100_000_000_000)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn outcome(c: verify::CheckOutcome) -> Verdict {
    verdict(
        c.cases > 0 && c.passed(),
        format!("{} cases, {} mismatches", c.cases, c.mismatches),
    )
}

fn c1() -> Verdict {
    outcome(verify::check_descent_roundtrip(40))
}

fn c2() -> Verdict {
    outcome(verify::check_bijection(
        &[fam([0, 1, 2]), fam([1, 2, 3])],
        50,
        40,
    ))
}

fn c3() -> Verdict {
    let fams = [fam([0, 1, 2]), fam([1, 2, 3]), fam([-2, 1, 3])];
    outcome(verify::check_twist_methods(&fams, &[5, 10, 20, 25], budget()).unwrap())
}

fn c4() -> Verdict {
    let b = 20u64;
    let limit = 2 * (b as i128) * (b as i128);
    let wide = brute_points(&fam([1, 2, 3]), b, 2 * limit, budget()).unwrap();
    let beyond = wide.keys().filter(|&&n| n > limit).count();
    let found: usize = wide.values().map(Vec::len).sum();
    verdict(
        beyond == 0,
        format!(
            "{found} points for n <= {}, {beyond} twists beyond {limit}",
            2 * limit
        ),
    )
}

fn c5() -> Verdict {
    let f = fam([1, 2, 3]);
    let mut ratios = Vec::new();
    let mut below_family = Vec::new();
    for k in 4..=10u32 {
        let b = 1u64 << k;
        let s = aggregate_census(&f, b, TwistMethod::Descent, budget())
            .unwrap()
            .total;
        let p = twist_lower_family(&f, b).unwrap().len() as u64;
        if s < p {
            below_family.push(k);
        }
        ratios.push(s as f64 / (b as f64 * (k as f64 * 2f64.ln()).powi(4)));
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    verdict(
        below_family.is_empty() && max / min <= GROWTH_RATIO_MAX,
        format!(
            "S/(B log^4 B) in [{min:.4}, {max:.4}], spread {:.2} (limit {GROWTH_RATIO_MAX}), below family at k={below_family:?}",
            max / min
        ),
    )
}

fn c6() -> Verdict {
    let bounds: Vec<u64> = (1..=15).collect();
    outcome(
        verify::check_surface_methods(
            &[fam([0, 1, 2]), fam([1, 2, 3])],
            &verify::standard_forms(),
            &bounds,
            budget(),
        )
        .unwrap(),
    )
}

fn c7() -> Verdict {
    let mut checked = 0u64;
    let mut bad = 0u64;
    for e in [[0, 1, 2], [1, 2, 3], [-2, 1, 3]] {
        let f = fam(e);
        for p in twist_lower_family(&f, 1000).unwrap() {
            checked += 1;
            let on_curve = twist_rhs(&f, p.n, p.x) == p.y.checked_mul(p.y);
            if !on_curve || !delpezzo_core::twists::naive_height_leq(p.x, p.y, 1000) {
                bad += 1;
            }
        }
        let spec = SurfaceSpec::new(f, QuadForm::split());
        for p in surface::surface_lower_family(&f, 1000).unwrap() {
            checked += 1;
            if !on_open_surface(&spec, &p)
                || !height_leq(&p, 1000)
                || !is_normalized(p.y, p.x, p.u, p.v)
            {
                bad += 1;
            }
        }
        for b in [5u64, 10, 15] {
            let census = aggregate_census(&f, b, TwistMethod::Brute, budget()).unwrap();
            for p in twist_lower_family(&f, b).unwrap() {
                checked += 1;
                bad += u64::from(!census.contains(&p));
            }
            let surf = surface::count_bruteforce(&spec, b, budget()).unwrap();
            for p in surface::surface_lower_family(&f, b).unwrap() {
                checked += 1;
                bad += u64::from(!surf.contains(&p));
            }
        }
    }
    verdict(
        checked > 0 && bad == 0,
        format!("{checked} family points, {bad} failures"),
    )
}

fn c8() -> Verdict {
    let b = 100u64;
    let mut worst = 0.0f64;
    let mut bad = 0;
    for n in 1..=(b * b) as i128 {
        let r = representation_count(&QuadForm::split(), n, b, budget()).unwrap();
        let tau = divisor_count(n).unwrap();
        if r > 2 * tau {
            bad += 1;
        }
        worst = worst.max(r as f64 / (2 * tau) as f64);
    }
    verdict(
        bad == 0,
        format!(
            "n <= {}, max r/(2 tau) = {worst:.3}, {bad} violations",
            b * b
        ),
    )
}

fn ternary_boxes() -> Vec<([u64; 3], [u64; 3])> {
    let mut out = Vec::new();
    let mut push_all = |sides: &[u64]| {
        for &u1 in sides {
            for &u2 in sides {
                for &u3 in sides {
                    for &v1 in sides {
                        for &v2 in sides {
                            for &v3 in sides {
                                out.push(([u1, u2, u3], [v1, v2, v3]));
                            }
                        }
                    }
                }
            }
        }
    };
    push_all(&[1, 2, 3]);
    push_all(&[1, 2, 4, 8, 16, 32]);
    out.sort_unstable();
    out.dedup();
    out
}

fn c9() -> Verdict {
    let b = budget();
    let unit = |f| count_solutions(&TernaryInstance::new(f, [1; 3], [1; 3]).unwrap(), b).unwrap();
    let hand = [unit([1, 1, -1]), unit([1, 1, -2]), unit([1, 2, -3])];
    let mut boxes = 0u64;
    let mut bad = 0u64;
    for f in [[1, 1, -2], [1, 2, -3], [2, 3, -5]] {
        for (u, v) in ternary_boxes() {
            let inst = TernaryInstance::new(f, u, v).unwrap();
            if inst.volume() > TERNARY_VOLUME_MAX {
                continue;
            }
            boxes += 1;
            if count_solutions(&inst, b).unwrap() != count_solutions_exhaustive(&inst) {
                bad += 1;
            }
        }
    }
    verdict(
        hand == [0, 16, 16] && bad == 0,
        format!("unit boxes {hand:?}, {boxes} boxes of volume <= {TERNARY_VOLUME_MAX}, {bad} mismatches"),
    )
}

fn c10() -> Verdict {
    let spec = SurfaceSpec::new(fam([0, 1, 2]), QuadForm::split());
    let b256 = surface::beta(&spec, 256, SurfaceMethod::Fibration, budget()).unwrap();
    let b512 = surface::beta(&spec, 512, SurfaceMethod::Fibration, budget()).unwrap();
    let drift = if b512.beta <= b256.beta + BETA_DRIFT {
        ""
    } else {
        " WARNING: beta(512) > beta(256) + 0.05"
    };
    verdict(
        (BETA_WINDOW.0..=BETA_WINDOW.1).contains(&b256.beta),
        format!(
            "N(256) = {}, beta(256) = {:.4} (window {:?}); N(512) = {}, beta(512) = {:.4}{drift}",
            b256.count, b256.beta, BETA_WINDOW, b512.count, b512.beta
        ),
    )
}

fn c11() -> Verdict {
    let f = fam([0, 1, 2]);
    let mut ratios = Vec::new();
    let mut floor_ok = true;
    let mut detail = Vec::new();
    for n in [1_000u64, 10_000, 100_000] {
        let out = density_experiment(&f, n, DENSITY_A, DENSITY_CAP, budget()).unwrap();
        floor_ok &= out.denominator_lower >= ((n / 6) as f64).sqrt().floor() as u64;
        let r = out.numerator as f64 / out.denominator_lower as f64;
        ratios.push(r);
        detail.push(format!(
            "N={n}: {}/{}",
            out.numerator, out.denominator_lower
        ));
    }
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
    verdict(floor_ok && monotone, detail.join(", "))
}

fn cli(args: &[&str], threads: &str) -> (i32, Vec<u8>) {
    let mut argv = vec!["delpezzo", "--deterministic", "--threads", threads];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = delpezzo_cli::run(argv, &mut out, &mut err);
    (code, out)
}

fn c12() -> Verdict {
    let commands: &[&[&str]] = &[
        &[
            "decompose",
            "--y",
            "6",
            "--x1",
            "4",
            "--x2",
            "9",
            "--x3",
            "1",
        ],
        &["twist-enum", "--e", "0,1,2", "--n", "6", "--B", "40"],
        &[
            "twist-count",
            "--e",
            "-2,1,3",
            "--B",
            "25",
            "--method",
            "brute",
            "--points",
        ],
        &[
            "twist-count",
            "--e",
            "1,2,3",
            "--B",
            "256",
            "--method",
            "descent",
            "--points",
            "--format",
            "csv",
        ],
        &[
            "surface-count",
            "--e",
            "0,1,2",
            "--Q",
            "1,0,-2",
            "--B",
            "15",
            "--method",
            "brute",
            "--points",
        ],
        &[
            "surface-count",
            "--e",
            "1,2,3",
            "--Q",
            "0,1,0",
            "--B",
            "64",
            "--method",
            "fibration",
            "--points",
        ],
        &["beta", "--e", "0,1,2", "--Q", "0,1,0", "--B", "128"],
        &["ternary", "--f", "2,3,-5", "--U", "8,4,2", "--V", "2,4,8"],
        &[
            "ternary-scan",
            "--f",
            "1,2,-3",
            "--grid",
            "dyadic:3",
            "--format",
            "csv",
        ],
        &[
            "density", "--e", "0,1,2", "--N", "10000", "--A", "7", "--cap", "100",
        ],
        &["verify", "--suite", "small"],
    ];
    let mut differing = Vec::new();
    for args in commands {
        let one = cli(args, "1");
        let eight = cli(args, "8");
        if one.0 != 0 || one != eight {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} commands at 1 and 8 workers, differing or failing: {differing:?}",
            commands.len()
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            "descent roundtrip and uniqueness",
            Duration::from_secs(30),
            c1,
        ),
        ("twist/tuple bijection", Duration::from_secs(30), c2),
        ("twist method equivalence", Duration::from_secs(120), c3),
        ("cutoff soundness", Duration::from_secs(30), c4),
        ("growth window", Duration::from_secs(300), c5),
        ("surface method equivalence", Duration::from_secs(120), c6),
        ("explicit families", Duration::from_secs(60), c7),
        ("divisor bound for r_Q", Duration::from_secs(60), c8),
        ("ternary oracle", Duration::from_secs(120), c9),
        ("beta window", Duration::from_secs(300), c10),
        ("density trend", Duration::from_secs(300), c11),
        ("determinism across workers", Duration::from_secs(600), c12),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let pass = v.pass && took <= *limit;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {}: {name} — {} [{:.1}s of {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
