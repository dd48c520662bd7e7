//! Shared workloads for the benchmarks.

use delpezzo_core::{QuadForm, SurfaceSpec, TernaryInstance, TwistFamily};

pub fn family(e: [i64; 3]) -> TwistFamily {
    TwistFamily::from_array(e).expect("benchmark family")
}

/// Families covering both cutoff regimes (`e1 e2 e3 = 0` and `!= 0`).
pub fn families() -> Vec<(&'static str, TwistFamily)> {
    vec![
        ("0,1,2", family([0, 1, 2])),
        ("1,2,3", family([1, 2, 3])),
        ("-2,1,3", family([-2, 1, 3])),
    ]
}

pub fn split_surface(e: [i64; 3]) -> SurfaceSpec {
    SurfaceSpec::new(family(e), QuadForm::split())
}

pub fn ternary_cube(f: [i64; 3], side: u64) -> TernaryInstance {
    TernaryInstance::new(f, [side; 3], [side; 3]).expect("benchmark box")
}
