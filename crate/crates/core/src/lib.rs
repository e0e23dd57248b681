//! Filippov dynamics and bifurcation analysis for Welander's convection model.
//!
//! [`pws`] and [`filippov`] hold the generic planar piecewise-smooth
//! machinery, [`integrator`] the event-driven Filippov integrator,
//! [`welander`] the model itself, and [`nonsmooth`] / [`smooth`] the
//! bifurcation analyses of the Heaviside and arctan variants.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filippov;
pub mod integrator;
pub mod nonsmooth;
pub mod ode;
pub mod pws;
pub mod roots;
pub mod smooth;
pub mod welander;

pub use error::{Error, Result};
pub use filippov::{
    classify_manifold_point, normal_projection, sliding_lambda, sliding_region_bounds, sliding_stability_sign,
    sliding_vector_field, LambdaStar, ManifoldPointClass, SlidingAnalysis, SlidingInterval,
};
pub use integrator::{integrate, integrate_until, IntegratorOptions, Side, UnstableSlidePolicy};
pub use nonsmooth::{
    BifurcationKind, BifurcationRecord, HomoclinicReport, PeriodicOrbitRecord, PseudoClass, PseudoEquilibrium,
    ReturnMapSample, EPSILON_0,
};
pub use pws::{
    eval_field, region_of, Event, EventKind, Params, PwsSystem, RegionLabel, Sample, State, Trajectory, Velocity,
};
pub use smooth::{LimitStudyRow, SmoothEquilibrium, SmoothOrbit};
pub use welander::{build_nonsmooth, build_smooth, EquilibriumInfo, OriginalState, SmoothWelander, SmoothingParam};
