//! Counting rational points on the degree-1 del Pezzo surfaces
//! `y^2 = (x - e1 Q(u,v)) (x - e2 Q(u,v)) (x - e3 Q(u,v))` and on the
//! quadratic twists `E_{n,e}: y^2 = (x - e1 n)(x - e2 n)(x - e3 n)`.
//!
//! All arithmetic is exact `i128` with checked overflow on the hot paths.

pub mod arith;
pub mod descent;
pub mod error;
pub mod report;
pub mod surface;
pub mod ternary;
pub mod twists;
pub mod verify;

pub use arith::{QuadForm, SurfaceSpec, TwistFamily};
pub use descent::{DescentTuple, TwistPoint, Violation};
pub use error::{Budget, Error, Result, DEFAULT_BUDGET};
pub use report::{CountRecord, Format, Value};
pub use surface::{BetaOutcome, SurfaceCensus, SurfaceMethod, WeightedPoint};
pub use ternary::{RatioRow, TernaryInstance, DEFAULT_EPS};
pub use twists::{DensityOutcome, PointsByTwist, TwistCensus, TwistMethod};
pub use verify::{CheckOutcome, Suite};
