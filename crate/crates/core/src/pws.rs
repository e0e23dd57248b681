//! Planar piecewise-smooth systems and the shared geometry types.
//!
//! A [`PwsSystem`] is a pair of smooth planar vector fields glued along the
//! zero set of a scalar switching function `h`. The field below the manifold
//! (`h < 0`) is the `lambda = 0` field, the one above is the `lambda = 1`
//! field, and points on the manifold are handled through the convex
//! combination `f(s, lambda)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default thickness of the switching manifold used by [`region_of`].
pub const DEFAULT_TOL_H: f64 = 1e-10;

/// A point (or a velocity) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

/// Velocities share the representation of states.
pub type Velocity = State;

impl State {
    pub const ORIGIN: State = State { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(&self, other: State) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: State) -> f64 {
        (*self - other).norm()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite state {self:?}")))
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for State {
    type Output = State;
    fn add(self, rhs: State) -> State {
        State::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for State {
    fn add_assign(&mut self, rhs: State) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for State {
    type Output = State;
    fn sub(self, rhs: State) -> State {
        State::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for State {
    type Output = State;
    fn neg(self) -> State {
        State::new(-self.x, -self.y)
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, rhs: State) -> State {
        State::new(self * rhs.x, self * rhs.y)
    }
}

impl Mul<f64> for State {
    type Output = State;
    fn mul(self, rhs: f64) -> State {
        State::new(self.x * rhs, self.y * rhs)
    }
}

/// Model parameters of the convection model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Params {
    pub const DEFAULT_ALPHA: f64 = 0.8;
    pub const DEFAULT_BETA: f64 = 0.5;

    /// Default `alpha = 4/5`, `beta = 1/2` with the given `epsilon`.
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            epsilon,
        }
    }

    pub fn new(alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain(format!("beta must be > 0, got {}", self.beta)));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::Domain("epsilon must be finite".into()));
        }
        Ok(())
    }
}

/// Which side of the switching manifold a state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Lower,
    Upper,
    Manifold,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Lower => "lower",
            RegionLabel::Upper => "upper",
            RegionLabel::Manifold => "manifold",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Crossing,
    SlideStart,
    SlideExit,
    Escape,
    EquilibriumReached,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub state: State,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub state: State,
    pub region: RegionLabel,
}

/// Time-ordered samples plus the log of discrete events met on the way.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<State> {
        self.samples.last().map(|s| s.state)
    }

    pub fn last_event(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.time)
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Appends a sample, keeping times strictly increasing. A sample at the
    /// time of the last one replaces it.
    pub(crate) fn push_sample(&mut self, time: f64, state: State, region: RegionLabel) {
        if let Some(last) = self.samples.last_mut() {
            if time <= last.time {
                last.state = state;
                last.region = region;
                return;
            }
        }
        self.samples.push(Sample {
            time,
            state,
            region,
        });
    }

    pub(crate) fn push_event(&mut self, time: f64, state: State, kind: EventKind) {
        self.events.push(Event { time, state, kind });
    }
}

pub type FieldFn = Arc<dyn Fn(State) -> Velocity + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(State) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(State) -> Velocity + Send + Sync>;
pub type BlendFn = Arc<dyn Fn(State, f64) -> Velocity + Send + Sync>;
pub type ChartFn = Arc<dyn Fn(f64) -> State + Send + Sync>;

/// How the field depends on the convex-combination parameter.
#[derive(Clone)]
pub enum LambdaDependence {
    /// `f(s, lambda) = (1 - lambda) f_lower(s) + lambda f_upper(s)`.
    Affine,
    /// Arbitrary smooth dependence; must agree with the pure fields at 0 and 1.
    General(BlendFn),
}

impl fmt::Debug for LambdaDependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaDependence::Affine => f.write_str("Affine"),
            LambdaDependence::General(_) => f.write_str("General(..)"),
        }
    }
}

/// Two smooth planar vector fields separated by the zero set of `h`.
///
/// Immutable after construction; clones share the underlying closures.
#[derive(Clone)]
pub struct PwsSystem {
    field_lower: FieldFn,
    field_upper: FieldFn,
    switching_fn: ScalarFn,
    gradient: GradientFn,
    lambda_dependence: LambdaDependence,
    lambda_derivative: Option<FieldFn>,
    chart: Option<ChartFn>,
    equilibria: Vec<State>,
    name: String,
}

impl fmt::Debug for PwsSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PwsSystem")
            .field("name", &self.name)
            .field("lambda_dependence", &self.lambda_dependence)
            .field("equilibria", &self.equilibria)
            .finish_non_exhaustive()
    }
}

impl PwsSystem {
    /// Affine system from the two pure fields, `h` and its gradient.
    pub fn affine(
        field_lower: impl Fn(State) -> Velocity + Send + Sync + 'static,
        field_upper: impl Fn(State) -> Velocity + Send + Sync + 'static,
        switching_fn: impl Fn(State) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(State) -> Velocity + Send + Sync + 'static,
    ) -> Self {
        Self {
            field_lower: Arc::new(field_lower),
            field_upper: Arc::new(field_upper),
            switching_fn: Arc::new(switching_fn),
            gradient: Arc::new(gradient),
            lambda_dependence: LambdaDependence::Affine,
            lambda_derivative: None,
            chart: None,
            equilibria: Vec::new(),
            name: String::from("pws"),
        }
    }

    /// System whose field depends on lambda through `blend`. The pure fields
    /// are taken as `blend(s, 0)` and `blend(s, 1)`.
    pub fn general(
        blend: impl Fn(State, f64) -> Velocity + Send + Sync + 'static,
        switching_fn: impl Fn(State) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(State) -> Velocity + Send + Sync + 'static,
    ) -> Self {
        let blend: BlendFn = Arc::new(blend);
        let lo = blend.clone();
        let hi = blend.clone();
        Self {
            field_lower: Arc::new(move |s| lo(s, 0.0)),
            field_upper: Arc::new(move |s| hi(s, 1.0)),
            switching_fn: Arc::new(switching_fn),
            gradient: Arc::new(gradient),
            lambda_dependence: LambdaDependence::General(blend),
            lambda_derivative: None,
            chart: None,
            equilibria: Vec::new(),
            name: String::from("pws"),
        }
    }

    /// Parameterization `u -> s(u)` of the switching manifold, used to scan
    /// it for sliding segments.
    pub fn with_chart(mut self, chart: impl Fn(f64) -> State + Send + Sync + 'static) -> Self {
        self.chart = Some(Arc::new(chart));
        self
    }

    /// Closed form of `df/dlambda`, used instead of differencing the fields.
    pub fn with_lambda_derivative(
        mut self,
        derivative: impl Fn(State) -> Velocity + Send + Sync + 'static,
    ) -> Self {
        self.lambda_derivative = Some(Arc::new(derivative));
        self
    }

    /// `df/dlambda` when it is known in closed form; affine systems fall
    /// back to `f_upper - f_lower`.
    pub fn lambda_derivative(&self, s: State) -> Option<Velocity> {
        match (&self.lambda_derivative, &self.lambda_dependence) {
            (Some(d), _) => Some(d(s)),
            (None, LambdaDependence::Affine) => Some(self.upper(s) - self.lower(s)),
            (None, LambdaDependence::General(_)) => None,
        }
    }

    /// Known attracting equilibria (real, boundary or pseudo) the integrator
    /// may stop at.
    pub fn with_equilibria(mut self, equilibria: impl IntoIterator<Item = State>) -> Self {
        self.equilibria.extend(equilibria);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lambda_dependence(&self) -> &LambdaDependence {
        &self.lambda_dependence
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.lambda_dependence, LambdaDependence::Affine)
    }

    pub fn equilibria(&self) -> &[State] {
        &self.equilibria
    }

    pub fn chart(&self) -> Option<&ChartFn> {
        self.chart.as_ref()
    }

    pub fn lower(&self, s: State) -> Velocity {
        (self.field_lower)(s)
    }

    pub fn upper(&self, s: State) -> Velocity {
        (self.field_upper)(s)
    }

    pub fn h(&self, s: State) -> f64 {
        (self.switching_fn)(s)
    }

    pub fn grad_h(&self, s: State) -> Velocity {
        (self.gradient)(s)
    }

    /// Field with lambda in `[0, 1]` without argument checks. Used on hot
    /// paths where lambda may leave the unit interval by rounding.
    pub(crate) fn blend(&self, s: State, lambda: f64) -> Velocity {
        match &self.lambda_dependence {
            LambdaDependence::Affine => {
                if lambda == 0.0 {
                    self.lower(s)
                } else if lambda == 1.0 {
                    self.upper(s)
                } else {
                    (1.0 - lambda) * self.lower(s) + lambda * self.upper(s)
                }
            }
            LambdaDependence::General(f) => f(s, lambda),
        }
    }

    /// Pulls `s` back onto the manifold with Newton steps along `grad h`.
    pub(crate) fn project(&self, mut s: State) -> State {
        for _ in 0..4 {
            let h = self.h(s);
            if h == 0.0 {
                break;
            }
            let g = self.grad_h(s);
            let gg = g.dot(g);
            if gg == 0.0 {
                break;
            }
            s = s - (h / gg) * g;
        }
        s
    }
}

/// `f(s, lambda)`; the pure fields are returned exactly at the endpoints.
pub fn eval_field(sys: &PwsSystem, s: State, lambda: f64) -> Result<Velocity> {
    s.check_finite()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(sys.blend(s, lambda))
}

/// Region label of `s` with a manifold of half-thickness `tol_h`.
pub fn region_of(sys: &PwsSystem, s: State, tol_h: f64) -> RegionLabel {
    let h = sys.h(s);
    if h > tol_h {
        RegionLabel::Upper
    } else if h < -tol_h {
        RegionLabel::Lower
    } else {
        RegionLabel::Manifold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> PwsSystem {
        PwsSystem::affine(
            |s: State| State::new(1.0 + s.y, -s.x),
            |s: State| State::new(-2.0 * s.x, 3.0 + s.y * s.y),
            |s: State| s.y - 0.25 * s.x,
            |_| State::new(-0.25, 1.0),
        )
    }

    #[test]
    fn endpoints_return_pure_fields() {
        let sys = toy();
        let s = State::new(0.3, -0.7);
        assert_eq!(eval_field(&sys, s, 0.0).unwrap(), sys.lower(s));
        assert_eq!(eval_field(&sys, s, 1.0).unwrap(), sys.upper(s));
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = toy();
        assert!(matches!(
            eval_field(&sys, State::new(f64::NAN, 0.0), 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval_field(&sys, State::new(0.0, f64::INFINITY), 0.5),
            Err(Error::Domain(_))
        ));
        assert!(eval_field(&sys, State::ORIGIN, 1.5).is_err());
        assert!(Params::new(-0.1, 0.5, 0.0).is_err());
        assert!(Params::new(0.8, 0.0, 0.0).is_err());
    }

    #[test]
    fn general_dependence_uses_blend() {
        let sys = PwsSystem::general(
            |s: State, l: f64| State::new(l * l, s.x - l),
            |s: State| s.y,
            |_| State::new(0.0, 1.0),
        );
        let v = eval_field(&sys, State::new(2.0, 0.0), 0.5).unwrap();
        assert_eq!(v, State::new(0.25, 1.5));
        assert_eq!(sys.lower(State::new(2.0, 0.0)), State::new(0.0, 2.0));
        assert!(!sys.is_affine());
    }

    #[test]
    fn projection_lands_on_tilted_manifold() {
        let sys = toy();
        let p = sys.project(State::new(0.4, 0.3));
        assert!(sys.h(p).abs() < 1e-15);
    }

    #[test]
    fn push_sample_keeps_times_strictly_increasing() {
        let mut tr = Trajectory::default();
        tr.push_sample(0.0, State::ORIGIN, RegionLabel::Manifold);
        tr.push_sample(0.5, State::new(1.0, 1.0), RegionLabel::Upper);
        tr.push_sample(0.5, State::new(1.0, 0.0), RegionLabel::Manifold);
        assert_eq!(tr.samples.len(), 2);
        assert_eq!(tr.samples[1].region, RegionLabel::Manifold);
    }
}
