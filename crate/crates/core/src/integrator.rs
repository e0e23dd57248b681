//! Event-driven integration of Filippov trajectories.
//!
//! Inside each region the pure field is integrated with an adaptive
//! Dormand-Prince 5(4) scheme. Sign changes of `h` over an accepted step are
//! located on the dense output, and the manifold point is classified to
//! decide between crossing and sliding. Sliding is integrated along the
//! Filippov sliding vector with projection back onto the manifold, and ends
//! when `lambda*` leaves `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filippov::{
    classify_projections, lambda_star_raw, normal_unchecked, sliding_velocity, ManifoldPointClass,
    DEFAULT_TOL_S,
};
use crate::ode::{Accepted, Dopri5, Tolerances};
use crate::pws::{region_of, EventKind, PwsSystem, RegionLabel, State, Trajectory, Velocity, DEFAULT_TOL_H};
use crate::roots::brent;

/// Side of the manifold, identified with the pure field used there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }

    pub fn lambda(self) -> f64 {
        match self {
            Side::Lower => 0.0,
            Side::Upper => 1.0,
        }
    }

    fn from_sign(v: f64) -> Side {
        if v > 0.0 {
            Side::Upper
        } else {
            Side::Lower
        }
    }
}

/// What to do on a repelling sliding segment, where the forward Filippov
/// solution is not unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnstableSlidePolicy {
    EscapeUpper,
    EscapeLower,
    /// Follow the sliding flow for `duration` (or until the segment ends),
    /// then leave towards `then`.
    Hold { duration: f64, then: Side },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    /// Event localisation tolerance on `|h|`.
    pub event_tol: f64,
    /// Half-thickness of the manifold for labelling and for initial states.
    pub tol_h: f64,
    pub unstable_slide_policy: UnstableSlidePolicy,
    pub equilibrium_radius: f64,
    pub max_events: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            t_max: 200.0,
            event_tol: 1e-12,
            tol_h: DEFAULT_TOL_H,
            unstable_slide_policy: UnstableSlidePolicy::EscapeUpper,
            equilibrium_radius: 1e-7,
            max_events: 100_000,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("t_max", self.t_max),
            ("event_tol", self.event_tol),
            ("tol_h", self.tol_h),
            ("equilibrium_radius", self.equilibrium_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if let UnstableSlidePolicy::Hold { duration, .. } = self.unstable_slide_policy {
            if !(duration >= 0.0) {
                return Err(Error::Domain(format!("hold duration must be >= 0, got {duration}")));
            }
        }
        Ok(())
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_policy(mut self, policy: UnstableSlidePolicy) -> Self {
        self.unstable_slide_policy = policy;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Smooth { side: Side, armed: bool },
    Sliding { stable: bool, deadline: f64, then: Side },
}

/// Integrates until timeout or until a known equilibrium is reached.
pub fn integrate(sys: &PwsSystem, s0: State, opts: &IntegratorOptions) -> Result<Trajectory> {
    integrate_until(sys, s0, opts, |_| false)
}

/// Like [`integrate`], but also stops right after the first logged event for
/// which `stop` returns `true`.
pub fn integrate_until(
    sys: &PwsSystem,
    s0: State,
    opts: &IntegratorOptions,
    stop: impl FnMut(&crate::pws::Event) -> bool,
) -> Result<Trajectory> {
    s0.check_finite()?;
    opts.validate()?;
    let mut run = Run {
        sys,
        opts,
        traj: Trajectory::default(),
        t: 0.0,
        s: s0,
        mode: Mode::Smooth {
            side: Side::Upper,
            armed: false,
        },
        stepper: Dopri5::new(Tolerances {
            rel: opts.rel_tol,
            abs: opts.abs_tol,
        }),
        stop,
        done: false,
    };
    run.start()?;
    while !run.done {
        run.advance()?;
    }
    Ok(run.traj)
}

struct Run<'a, F> {
    sys: &'a PwsSystem,
    opts: &'a IntegratorOptions,
    traj: Trajectory,
    t: f64,
    s: State,
    mode: Mode,
    stepper: Dopri5,
    stop: F,
    done: bool,
}

impl<F: FnMut(&crate::pws::Event) -> bool> Run<'_, F> {
    fn event(&mut self, kind: EventKind) -> Result<()> {
        if self.traj.events.len() >= self.opts.max_events {
            return Err(Error::Chattering(self.opts.max_events));
        }
        self.traj.push_event(self.t, self.s, kind);
        let last = *self.traj.events.last().expect("just pushed");
        if matches!(kind, EventKind::EquilibriumReached | EventKind::Timeout) || (self.stop)(&last) {
            self.done = true;
        }
        Ok(())
    }

    fn sample(&mut self, label: Option<RegionLabel>) {
        let label = label.unwrap_or_else(|| region_of(self.sys, self.s, self.opts.tol_h));
        self.traj.push_sample(self.t, self.s, label);
    }

    fn near_equilibrium(&self, s: State) -> Option<State> {
        self.sys
            .equilibria()
            .iter()
            .copied()
            .find(|e| e.distance(s) <= self.opts.equilibrium_radius)
    }

    /// Both ends of the last step are near a known equilibrium that is a
    /// rest point of the active flow.
    fn settled(&self, start: State) -> bool {
        let r = self.opts.equilibrium_radius;
        self.near_equilibrium(start).is_some()
            && self.near_equilibrium(self.s).is_some()
            && self.velocity(self.s).norm() <= 10.0 * r
    }

    fn velocity(&self, s: State) -> Velocity {
        match self.mode {
            Mode::Smooth { side, .. } => self.sys.blend(s, side.lambda()),
            Mode::Sliding { .. } => sliding_velocity(self.sys, s),
        }
    }

    fn start(&mut self) -> Result<()> {
        let region = region_of(self.sys, self.s, self.opts.tol_h);
        self.sample(Some(region));
        match region {
            RegionLabel::Upper | RegionLabel::Lower => {
                let side = if region == RegionLabel::Upper { Side::Upper } else { Side::Lower };
                let armed = side.sign() * self.sys.h(self.s) > 2.0 * self.opts.event_tol;
                self.mode = Mode::Smooth { side, armed };
            }
            RegionLabel::Manifold => {
                self.s = self.sys.project(self.s);
                self.sample(Some(RegionLabel::Manifold));
                self.enter_manifold(None)?;
            }
        }
        if !self.done {
            if let Some(eq) = self.near_equilibrium(self.s) {
                let fixed = eq == self.s || self.velocity(self.s).norm() <= self.opts.equilibrium_radius;
                if fixed && !matches!(self.mode, Mode::Sliding { stable: false, .. }) {
                    self.event(EventKind::EquilibriumReached)?;
                }
            }
        }
        Ok(())
    }

    /// Decides what happens at a manifold point. `from` is the side the
    /// trajectory arrived from, `None` for an initial state.
    fn enter_manifold(&mut self, from: Option<Side>) -> Result<()> {
        let s0 = normal_unchecked(self.sys, self.s, 0.0);
        let s1 = normal_unchecked(self.sys, self.s, 1.0);
        self.stepper.h = 0.0;
        match classify_projections(s0, s1, DEFAULT_TOL_S) {
            ManifoldPointClass::Crossing => self.leave_towards(Side::from_sign(s0), from),
            ManifoldPointClass::Tangency => {
                if s0.abs() <= DEFAULT_TOL_S && s1.abs() <= DEFAULT_TOL_S {
                    if sliding_velocity(self.sys, self.s).norm() <= self.opts.equilibrium_radius {
                        return self.event(EventKind::EquilibriumReached);
                    }
                    return Err(Error::Tangency {
                        time: self.t,
                        state: self.s,
                    });
                }
                let dominant = if s0.abs() >= s1.abs() { s0 } else { s1 };
                self.leave_towards(Side::from_sign(dominant), from)
            }
            ManifoldPointClass::StableSliding => {
                self.mode = Mode::Sliding {
                    stable: true,
                    deadline: f64::INFINITY,
                    then: Side::Upper,
                };
                self.event(EventKind::SlideStart)
            }
            ManifoldPointClass::UnstableSliding => match self.opts.unstable_slide_policy {
                UnstableSlidePolicy::EscapeUpper => self.escape(Side::Upper),
                UnstableSlidePolicy::EscapeLower => self.escape(Side::Lower),
                UnstableSlidePolicy::Hold { duration, then } => {
                    self.mode = Mode::Sliding {
                        stable: false,
                        deadline: self.t + duration,
                        then,
                    };
                    self.event(EventKind::SlideStart)
                }
            },
        }
    }

    fn leave_towards(&mut self, to: Side, from: Option<Side>) -> Result<()> {
        self.mode = Mode::Smooth { side: to, armed: false };
        if from.is_some_and(|f| f != to) {
            self.event(EventKind::Crossing)?;
        }
        Ok(())
    }

    fn escape(&mut self, to: Side) -> Result<()> {
        self.mode = Mode::Smooth { side: to, armed: false };
        self.stepper.h = 0.0;
        self.event(EventKind::Escape)
    }

    fn step(&mut self, h_max: f64) -> Result<Accepted> {
        let sys = self.sys;
        let (t, s) = (self.t, self.s);
        let res = match self.mode {
            Mode::Smooth { side, .. } => {
                let lambda = side.lambda();
                let f = |st: State| sys.blend(st, lambda);
                let f0 = f(s);
                self.stepper.step(&f, t, s, f0, h_max)
            }
            Mode::Sliding { .. } => {
                let f = |st: State| sliding_velocity(sys, sys.project(st));
                let f0 = f(s);
                self.stepper.step(&f, t, s, f0, h_max)
            }
        };
        res.map_err(|e| match e {
            Error::Tangency { .. } => Error::Tangency { time: t, state: s },
            other => other,
        })
    }

    fn advance(&mut self) -> Result<()> {
        let opts = self.opts;
        if self.t >= opts.t_max * (1.0 - 1e-15) {
            return self.event(EventKind::Timeout);
        }
        let mut h_max = opts.max_step.min(opts.t_max - self.t);
        if let Mode::Sliding { deadline, .. } = self.mode {
            if deadline <= self.t {
                return self.finish_hold();
            }
            h_max = h_max.min(deadline - self.t);
        }
        let acc = self.step(h_max)?;
        let start = self.s;
        match self.mode {
            Mode::Smooth { side, armed } => self.after_smooth_step(&acc, side, armed)?,
            Mode::Sliding { stable, deadline, .. } => self.after_sliding_step(&acc, stable, deadline)?,
        }
        if self.done {
            return Ok(());
        }
        let unstable_slide = matches!(self.mode, Mode::Sliding { stable: false, .. });
        if !unstable_slide && self.settled(start) {
            self.event(EventKind::EquilibriumReached)?;
        }
        Ok(())
    }

    fn after_smooth_step(&mut self, acc: &Accepted, side: Side, armed: bool) -> Result<()> {
        let sys = self.sys;
        let tol = self.opts.event_tol;
        let g = |st: State| side.sign() * sys.h(st);
        let g1 = g(acc.y1);
        if armed && g1 < 0.0 {
            let d = acc.dense;
            let te = brent(|t| g(d.eval(t)), d.t0, d.t1(), 1e-15 * d.t1().abs().max(1.0), tol)?;
            self.t = te;
            self.s = d.eval(te);
            self.sample(Some(RegionLabel::Manifold));
            return self.enter_manifold(Some(side));
        }
        self.t = acc.dense.t1();
        self.s = acc.y1;
        self.sample(None);
        if !armed {
            if g1 > 2.0 * tol {
                self.mode = Mode::Smooth { side, armed: true };
            } else if g1 < -2.0 * tol {
                // left the manifold on the wrong side: re-classify there
                self.s = sys.project(self.s);
                self.sample(Some(RegionLabel::Manifold));
                return self.enter_manifold(Some(side));
            }
        }
        Ok(())
    }

    fn after_sliding_step(&mut self, acc: &Accepted, stable: bool, deadline: f64) -> Result<()> {
        let sys = self.sys;
        let d = acc.dense;
        let s1 = sys.project(acc.y1);
        let lam = |st: State| lambda_star_raw(sys, sys.project(st)).unwrap_or(f64::NAN);
        let l1 = lam(s1);
        if !(0.0..=1.0).contains(&l1) {
            let bound = if l1 > 1.0 { 1.0 } else { 0.0 };
            let te = brent(|t| lam(d.eval(t)) - bound, d.t0, d.t1(), 1e-15 * d.t1().abs().max(1.0), 1e-14)
                .unwrap_or(d.t1());
            self.t = te;
            self.s = sys.project(d.eval(te));
            self.sample(Some(RegionLabel::Manifold));
            // leave along the side the non-tangent field points to
            let other = if bound == 0.0 {
                normal_unchecked(sys, self.s, 1.0)
            } else {
                normal_unchecked(sys, self.s, 0.0)
            };
            self.mode = Mode::Smooth {
                side: Side::from_sign(other),
                armed: false,
            };
            self.stepper.h = 0.0;
            return self.event(EventKind::SlideExit);
        }
        self.t = d.t1();
        self.s = s1;
        self.sample(Some(RegionLabel::Manifold));
        if !stable && self.t >= deadline {
            return self.finish_hold();
        }
        Ok(())
    }

    fn finish_hold(&mut self) -> Result<()> {
        match self.mode {
            Mode::Sliding { then, .. } => self.escape(then),
            Mode::Smooth { .. } => Ok(()),
        }
    }
}
