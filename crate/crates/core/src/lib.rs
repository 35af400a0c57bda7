//! Projective umbilics of polynomial surfaces.

pub mod acceptance;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod jets;
pub mod nodes;
pub mod sweep;
pub mod tolerance;
pub mod tracing;

pub use error::{Error, Result};
pub use geometry::{AsymptoticFrame, ChartMode, Direction, Label, PointClass, PointKind};
pub use invariants::{ExtendedReal, NodeFlag, PrenormalForm};
pub use jets::{FamilyJet, Matrix2, MongeJet, Partials, ProjectiveMap};
pub use nodes::{NodeKind, NodeRecord};
pub use sweep::{SweepReport, Transition, TransitionKind};
pub use tracing::{CurveKind, TracedCurve, Window};
