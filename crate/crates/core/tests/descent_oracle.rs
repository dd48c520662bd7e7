use delpezzo_core::descent::{decompose, recompose};
use delpezzo_core::verify::{check_descent_roundtrip, exhaustive_preimages};
use delpezzo_core::DescentTuple;

#[test]
fn decomposition_is_unique() {
    let c = check_descent_roundtrip(40);
    assert!(c.cases > 1000, "{c:?}");
    assert!(c.passed(), "{c:?}");
}

#[test]
fn oracle_finds_known_preimage() {
    let t = decompose(6, 4, 9, 1).unwrap();
    assert_eq!(exhaustive_preimages(6, [4, 9, 1]), vec![t]);
    assert!(exhaustive_preimages(5, [4, 9, 1]).is_empty());
}

#[test]
fn valid_small_tuples_roundtrip() {
    let r: Vec<i128> = (1..=4).collect();
    let sr: Vec<i128> = r.iter().flat_map(|&v| [v, -v]).collect();
    let mut valid = 0;
    for &d1 in &sr {
        for &d2 in &sr {
            for &d3 in &sr {
                for &w in &sr {
                    for &a1 in &r {
                        for &a2 in &r {
                            for &a3 in &r {
                                for &b1 in &r {
                                    for &b2 in &r {
                                        for &b3 in &r {
                                            let t = DescentTuple {
                                                d: [d1, d2, d3],
                                                w,
                                                a: [a1, a2, a3],
                                                b: [b1, b2, b3],
                                            };
                                            if !t.is_valid() {
                                                continue;
                                            }
                                            valid += 1;
                                            let (y, x) = recompose(&t).unwrap();
                                            assert_eq!(decompose(y, x[0], x[1], x[2]).unwrap(), t);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(valid > 1000, "{valid}");
}
