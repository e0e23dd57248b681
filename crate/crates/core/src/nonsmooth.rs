//! Bifurcations of the Heaviside Welander system: pseudo-equilibria, border
//! collisions, the return map on the splitting line and the homoclinic orbit
//! at the upper border collision.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filippov::normal_slope;
use crate::integrator::{integrate, integrate_until, IntegratorOptions, Side, UnstableSlidePolicy};
use crate::pws::{EventKind, Params, State, Trajectory};
use crate::roots::{bisect_by, try_bisect_by};
use crate::welander::{
    border_collision_epsilons, branch_equilibrium, build_nonsmooth, lambda_star_closed, manifold_coefficients,
    pseudo_equilibrium_xs, sliding_interval_closed,
};

/// Upper border collision at the default parameters, `-1/15`.
pub const EPSILON_0: f64 = -1.0 / 15.0;

/// Offset from the boundary equilibrium used to start the sliding family.
pub const FAMILY_LAUNCH_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PseudoClass {
    Pseudonode,
    Pseudosaddle,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoEquilibrium {
    pub x: f64,
    pub lambda_star: f64,
    /// Derivative of the sliding flow along the manifold.
    pub flow_derivative: f64,
    /// `dS/dlambda`; negative on attracting sliding segments.
    pub sliding_stability: f64,
    pub classification: PseudoClass,
}

impl PseudoEquilibrium {
    /// Attracting in the full Filippov sense.
    pub fn is_stable(&self) -> bool {
        self.classification == PseudoClass::Pseudonode && self.flow_derivative < 0.0
    }

    pub fn state(&self) -> State {
        State::new(self.x, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BifurcationKind {
    BorderCollision,
    FusedFocus,
    Hopf,
    Snpo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRecord {
    pub kind: BifurcationKind,
    pub epsilon: f64,
    pub branch: Option<Side>,
    pub witness: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapSample {
    pub x_in: f64,
    pub x_out: f64,
    pub crossings: Vec<State>,
    pub flight_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitRecord {
    pub epsilon: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub period: f64,
    /// `R'(x_left)` by central difference.
    pub multiplier: f64,
    pub stable: bool,
    pub samples: Trajectory,
}

impl PeriodicOrbitRecord {
    pub fn amplitude(&self) -> f64 {
        self.x_right - self.x_left
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicReport {
    pub launch: State,
    pub crossing_x: f64,
    pub return_distance: f64,
    pub verified: bool,
    pub crossings: usize,
    pub slide_time: Option<f64>,
    pub escape: Option<Side>,
    pub final_time: f64,
}

/// Residual of the pseudo-equilibrium condition at the default parameters.
pub fn pseudoeq_condition(x: f64, epsilon: f64) -> f64 {
    -10.0 * epsilon - 3.0 * x + 5.0 * x * epsilon + 4.0 * x * x
}

/// Parameter value at which `x` is a pseudo-equilibrium.
pub fn epsilon_of_pseudo_x(x: f64) -> Result<f64> {
    if x == 2.0 {
        return Err(Error::Pole(x));
    }
    Ok((4.0 * x * x - 3.0 * x) / (10.0 - 5.0 * x))
}

pub fn find_pseudoequilibria(epsilon: f64) -> Result<Vec<PseudoEquilibrium>> {
    find_pseudoequilibria_with(&Params::with_epsilon(epsilon))
}

/// Pseudo-equilibria for general parameters, classified by comparing the
/// sign of the sliding-flow derivative with `dS/dlambda`.
pub fn find_pseudoequilibria_with(p: &Params) -> Result<Vec<PseudoEquilibrium>> {
    p.validate()?;
    if p.epsilon == 0.0 {
        return Err(Error::Precondition("epsilon must be nonzero".into()));
    }
    let sys = build_nonsmooth(p);
    let (_, c1) = manifold_coefficients(p);
    Ok(pseudo_equilibrium_xs(p)
        .into_iter()
        .map(|x| {
            let lambda_star = lambda_star_closed(p, x).expect("epsilon is nonzero");
            let flow_derivative = -(1.0 + lambda_star) - x * c1 / p.epsilon;
            let sliding_stability = normal_slope(&sys, State::new(x, 0.0), lambda_star);
            let classification = if flow_derivative.abs() < 1e-12 {
                PseudoClass::Degenerate
            } else if flow_derivative.signum() == sliding_stability.signum() {
                PseudoClass::Pseudonode
            } else {
                PseudoClass::Pseudosaddle
            };
            PseudoEquilibrium {
                x,
                lambda_star,
                flow_derivative,
                sliding_stability,
                classification,
            }
        })
        .collect())
}

/// Sign changes of the branch equilibria's `y` over a uniform sweep, refined
/// by bisection.
pub fn detect_border_collisions(range: (f64, f64), n_steps: usize) -> Result<Vec<BifurcationRecord>> {
    detect_border_collisions_with(Params::with_epsilon(0.0), range, n_steps)
}

pub fn detect_border_collisions_with(
    base: Params,
    (lo, hi): (f64, f64),
    n_steps: usize,
) -> Result<Vec<BifurcationRecord>> {
    if !(lo < hi) || n_steps == 0 {
        return Err(Error::Domain(format!("bad sweep [{lo}, {hi}] with {n_steps} steps")));
    }
    let at = |eps: f64| Params { epsilon: eps, ..base };
    let mut out = Vec::new();
    for side in [Side::Upper, Side::Lower] {
        let above = |eps: f64| branch_equilibrium(side, &at(eps)).location.y > 0.0;
        let grid: Vec<f64> = (0..=n_steps)
            .map(|i| lo + (hi - lo) * i as f64 / n_steps as f64)
            .collect();
        for w in grid.windows(2) {
            if above(w[0]) != above(w[1]) {
                let eps = bisect_by(above, w[0], w[1], 1e-15)?;
                let e = branch_equilibrium(side, &at(eps)).location;
                let mut witness = BTreeMap::new();
                witness.insert("x".into(), e.x);
                witness.insert("y".into(), e.y);
                out.push(BifurcationRecord {
                    kind: BifurcationKind::BorderCollision,
                    epsilon: eps,
                    branch: Some(side),
                    witness,
                });
            }
        }
    }
    out.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    Ok(out)
}

/// Integrator settings used for return-map evaluations.
pub fn return_map_options() -> IntegratorOptions {
    IntegratorOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        t_max: 200.0,
        ..IntegratorOptions::default()
    }
}

/// Domain `I = (1/2, right)` of the return map, where `right` is the left end
/// of the repelling sliding segment.
pub fn return_interval(p: &Params) -> Result<(f64, f64)> {
    let (_, e1) = border_collision_epsilons(p.alpha, p.beta);
    if !(p.epsilon > e1 && p.epsilon < 0.0) {
        return Err(Error::Precondition(format!(
            "epsilon = {} outside ({e1}, 0)",
            p.epsilon
        )));
    }
    let left = branch_equilibrium(Side::Upper, p).location.x;
    let (lo, _, _) = sliding_interval_closed(p).ok_or(Error::Degenerate)?;
    Ok((left, lo))
}

pub fn return_map(epsilon: f64, x0: f64) -> Result<ReturnMapSample> {
    return_map_with(&Params::with_epsilon(epsilon), x0, &return_map_options()).map(|(r, _)| r)
}

/// Return map with the trajectory of the flight.
pub fn return_map_with(p: &Params, x0: f64, opts: &IntegratorOptions) -> Result<(ReturnMapSample, Trajectory)> {
    let (a, b) = return_interval(p)?;
    if !(x0 > a && x0 < b) {
        return Err(Error::Precondition(format!("x0 = {x0} outside ({a}, {b})")));
    }
    let sys = build_nonsmooth(p);
    let mut crossings = 0;
    let traj = integrate_until(&sys, State::new(x0, 0.0), opts, |e| {
        if e.kind == EventKind::Crossing {
            crossings += 1;
        }
        crossings >= 2 || matches!(e.kind, EventKind::SlideStart | EventKind::Escape)
    })?;
    let last = *traj.last_event().ok_or(Error::Timeout(opts.t_max))?;
    match last.kind {
        EventKind::Crossing => {}
        EventKind::SlideStart | EventKind::Escape => return Err(Error::SlidingEncountered(last.state)),
        EventKind::Timeout => return Err(Error::Timeout(opts.t_max)),
        _ => {
            return Err(Error::NoConvergence {
                iterations: traj.events.len(),
                last: last.state,
                residual: last.state.y,
            })
        }
    }
    let crossing_states: Vec<State> = traj.events_of(EventKind::Crossing).map(|e| e.state).collect();
    Ok((
        ReturnMapSample {
            x_in: x0,
            x_out: last.state.x,
            crossings: crossing_states,
            flight_time: last.time,
        },
        traj,
    ))
}

pub fn find_periodic_orbit(epsilon: f64) -> Result<PeriodicOrbitRecord> {
    find_periodic_orbit_with(&Params::with_epsilon(epsilon), &return_map_options())
}

/// Fixed point of the return map on `I`: sign change of `R(x) - x` on a
/// grid, then bisection to `1e-10`.
pub fn find_periodic_orbit_with(p: &Params, opts: &IntegratorOptions) -> Result<PeriodicOrbitRecord> {
    let (a, b) = return_interval(p)?;
    let g = |x: f64| -> Result<f64> { Ok(return_map_with(p, x, opts)?.0.x_out - x) };
    let n = 24;
    let width = b - a;
    let grid: Vec<f64> = (1..n).map(|i| a + width * i as f64 / n as f64).collect();
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let v = g(x)?;
        if let Some((xp, vp)) = prev {
            if (vp > 0.0) != (v > 0.0) {
                bracket = Some((xp, x));
                break;
            }
        }
        prev = Some((x, v));
    }
    let (lo, hi) = bracket.ok_or(Error::NoSignChange { lo: a, hi: b })?;
    let x_left = try_bisect_by(|x| Ok(g(x)? > 0.0), lo, hi, 1e-10)?;
    let (sample, traj) = return_map_with(p, x_left, opts)?;
    let d = 1e-6 * width;
    let multiplier = (return_map_with(p, x_left + d, opts)?.0.x_out - return_map_with(p, x_left - d, opts)?.0.x_out)
        / (2.0 * d);
    Ok(PeriodicOrbitRecord {
        epsilon: p.epsilon,
        x_left,
        x_right: sample.crossings[0].x,
        period: sample.flight_time,
        multiplier,
        stable: multiplier.abs() < 1.0,
        samples: traj,
    })
}

pub fn homoclinic_options() -> IntegratorOptions {
    IntegratorOptions {
        t_max: 200.0,
        ..IntegratorOptions::default()
    }
}

/// Checks the homoclinic orbit at the upper border collision.
pub fn verify_homoclinic(delta: f64, tol: f64) -> Result<HomoclinicReport> {
    verify_homoclinic_at(&Params::with_epsilon(EPSILON_0), delta, tol)
}

/// Launches below the boundary point `(1/2, 0)` of the upper field and
/// follows the orbit through its upward crossing. The return distance is the
/// closest approach to the launch point after that crossing.
pub fn verify_homoclinic_at(p: &Params, delta: f64, tol: f64) -> Result<HomoclinicReport> {
    if !(delta > 0.0 && delta < 0.1) {
        return Err(Error::Domain(format!("delta must be in (0, 0.1), got {delta}")));
    }
    let base = State::new(branch_equilibrium(Side::Upper, p).location.x, 0.0);
    let launch = State::new(base.x, -delta);
    let sys = build_nonsmooth(p);
    let opts = homoclinic_options();
    let mut crossings = 0;
    let traj = integrate_until(&sys, launch, &opts, |e| {
        if e.kind == EventKind::Crossing {
            crossings += 1;
        }
        crossings >= 2
    })?;
    Ok(assess_return(p, &traj, launch, base, tol, None, None))
}

fn assess_return(
    p: &Params,
    traj: &Trajectory,
    launch: State,
    base: State,
    tol: f64,
    slide_time: Option<f64>,
    escape: Option<Side>,
) -> HomoclinicReport {
    let first = traj.events_of(EventKind::Crossing).next().copied();
    let after = first.map_or(0.0, |e| e.time);
    let return_distance = traj
        .samples
        .iter()
        .filter(|s| s.time >= after)
        .map(|s| s.state.distance(base))
        .fold(f64::INFINITY, f64::min);
    let crossing_x = first.map_or(f64::NAN, |e| e.state.x);
    let ended_at_base = traj
        .last_event()
        .is_some_and(|e| e.kind == EventKind::EquilibriumReached && e.state.distance(base) <= tol);
    // a lower launch must cross upwards right of the sliding segment
    let crossing_ok = match first {
        Some(e) => sliding_interval_closed(p).is_some_and(|(_, hi, _)| e.state.x > hi),
        None => escape == Some(Side::Upper),
    };
    HomoclinicReport {
        launch,
        crossing_x,
        return_distance,
        verified: ended_at_base && return_distance <= tol && crossing_ok,
        crossings: traj.events_of(EventKind::Crossing).count(),
        slide_time,
        escape,
        final_time: traj.final_time(),
    }
}

/// Orbits that slide along the repelling segment from the boundary
/// equilibrium for each slide time, then escape up and down.
pub fn homoclinic_family(slide_times: &[f64], tol: f64) -> Result<Vec<HomoclinicReport>> {
    let p = Params::with_epsilon(EPSILON_0);
    let base = State::new(branch_equilibrium(Side::Upper, &p).location.x, 0.0);
    let launch = State::new(base.x + FAMILY_LAUNCH_OFFSET, 0.0);
    let sys = build_nonsmooth(&p);
    let mut out = Vec::with_capacity(2 * slide_times.len());
    for &slide_time in slide_times {
        if !(slide_time >= 0.0) {
            return Err(Error::Domain(format!("slide time must be >= 0, got {slide_time}")));
        }
        for escape in [Side::Upper, Side::Lower] {
            let opts = homoclinic_options().with_policy(UnstableSlidePolicy::Hold {
                duration: slide_time,
                then: escape,
            });
            let mut crossings = 0;
            let traj = integrate_until(&sys, launch, &opts, |e| {
                if e.kind == EventKind::Crossing {
                    crossings += 1;
                }
                crossings >= 2
            })?;
            if let Some(e) = traj.events_of(EventKind::SlideExit).next() {
                return Err(Error::Precondition(format!(
                    "slide time {slide_time} reaches the end of the sliding segment at x = {}",
                    e.state.x
                )));
            }
            out.push(assess_return(&p, &traj, launch, base, tol, Some(slide_time), Some(escape)));
        }
    }
    Ok(out)
}

/// Locates the change of sliding stability `dS/dlambda = -epsilon` and
/// checks the attractors on both sides.
pub fn fused_focus_check((lo, hi): (f64, f64)) -> Result<BifurcationRecord> {
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::Precondition(format!("[{lo}, {hi}] does not straddle 0")));
    }
    let slope = |eps: f64| {
        let p = Params::with_epsilon(eps);
        let sys = build_nonsmooth(&p);
        normal_slope(&sys, State::new(0.75, 0.0), 0.5)
    };
    let eps = bisect_by(|e| slope(e) > 0.0, lo, hi, 1e-14)?;
    let (_, e1) = border_collision_epsilons(Params::DEFAULT_ALPHA, Params::DEFAULT_BETA);
    let eps_neg = (0.5 * lo).max(0.5 * e1).min(-1e-3);
    let eps_pos = (0.5 * hi).clamp(1e-3, 0.1);
    let mut witness = BTreeMap::new();
    witness.insert("epsilon_below".into(), eps_neg);
    witness.insert("epsilon_above".into(), eps_pos);
    let orbit = find_periodic_orbit(eps_neg)?;
    witness.insert("orbit_amplitude_below".into(), orbit.amplitude());
    let p = Params::with_epsilon(eps_pos);
    let tr = integrate(&build_nonsmooth(&p), State::new(0.9, 0.2), &IntegratorOptions::default())?;
    let end = tr.last_event().map(|e| (e.kind, e.state));
    let pseudo = find_pseudoequilibria_with(&p)?.into_iter().find(|q| q.is_stable());
    let settled = match (end, pseudo) {
        (Some((EventKind::EquilibriumReached, s)), Some(q)) => s.distance(q.state()) < 1e-6,
        _ => false,
    };
    witness.insert("pseudoequilibrium_reached_above".into(), if settled { 1.0 } else { 0.0 });
    if let Some(q) = pseudo {
        witness.insert("pseudoequilibrium_x_above".into(), q.x);
    }
    Ok(BifurcationRecord {
        kind: BifurcationKind::FusedFocus,
        epsilon: eps,
        branch: None,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorKind {
    RealEquilibrium,
    Pseudoequilibrium,
    PeriodicOrbit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    pub epsilon: f64,
    pub attractor: Option<AttractorKind>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub x_left: Option<f64>,
    pub x_right: Option<f64>,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub note: Option<String>,
}

/// Attractor of the Heaviside system at one parameter value.
pub fn classify_attractor(epsilon: f64) -> DiagramRow {
    let mut row = DiagramRow {
        epsilon,
        attractor: None,
        x: None,
        y: None,
        x_left: None,
        x_right: None,
        amplitude: None,
        period: None,
        note: None,
    };
    let p = match Params::new(Params::DEFAULT_ALPHA, Params::DEFAULT_BETA, epsilon) {
        Ok(p) => p,
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    };
    for side in [Side::Upper, Side::Lower] {
        let e = branch_equilibrium(side, &p);
        if !e.is_virtual {
            row.attractor = Some(AttractorKind::RealEquilibrium);
            row.x = Some(e.location.x);
            row.y = Some(e.location.y);
            return row;
        }
    }
    if epsilon == 0.0 {
        // both fields share the normal component: the fused focus itself
        let (c0, c1) = manifold_coefficients(&p);
        row.attractor = Some(AttractorKind::Pseudoequilibrium);
        row.x = Some(-c0 / c1);
        row.y = Some(0.0);
        return row;
    }
    match find_pseudoequilibria_with(&p) {
        Ok(list) => {
            if let Some(q) = list.iter().find(|q| q.is_stable()) {
                row.attractor = Some(AttractorKind::Pseudoequilibrium);
                row.x = Some(q.x);
                row.y = Some(0.0);
                return row;
            }
        }
        Err(e) => {
            row.note = Some(e.to_string());
            return row;
        }
    }
    match find_periodic_orbit_with(&p, &return_map_options()) {
        Ok(orbit) => {
            row.attractor = Some(AttractorKind::PeriodicOrbit);
            row.x_left = Some(orbit.x_left);
            row.x_right = Some(orbit.x_right);
            row.amplitude = Some(orbit.amplitude());
            row.period = Some(orbit.period);
        }
        Err(e) => row.note = Some(e.to_string()),
    }
    row
}

/// Attractor table on `n` evenly spaced parameter values. Points are
/// computed in parallel; the output order follows the grid.
///
/// A grid value within roundoff of zero is snapped to zero: the orbit born
/// there is far too small for the return-map search.
pub fn bifurcation_diagram((lo, hi): (f64, f64), n: usize) -> Result<Vec<DiagramRow>> {
    if n < 2 || !(lo < hi) {
        return Err(Error::Domain(format!("need n >= 2 and lo < hi, got n = {n}, [{lo}, {hi}]")));
    }
    let snap = 1e-12 * (hi - lo);
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let eps = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            classify_attractor(if eps.abs() < snap { 0.0 } else { eps })
        })
        .collect())
}

/// Value at `x0` of the interpolating polynomial through `(xs, ys)`
/// (Neville's scheme).
pub fn polynomial_extrapolate(xs: &[f64], ys: &[f64], x0: f64) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Domain("need matching, nonempty abscissae and values".into()));
    }
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            let den = xs[i] - xs[i + m];
            if den == 0.0 {
                return Err(Error::Domain("repeated abscissa".into()));
            }
            p[i] = ((x0 - xs[i + m]) * p[i] + (xs[i] - x0) * p[i + 1]) / den;
        }
    }
    Ok(p[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicLimit {
    pub epsilons: Vec<f64>,
    pub x_left: Vec<f64>,
    pub extrapolated: f64,
}

/// Left intersection of the periodic orbit for each epsilon, extrapolated to
/// the border collision.
pub fn homoclinic_limit(epsilons: &[f64]) -> Result<HomoclinicLimit> {
    let x_left = epsilons
        .par_iter()
        .map(|&e| find_periodic_orbit(e).map(|o| o.x_left))
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = polynomial_extrapolate(epsilons, &x_left, EPSILON_0)?;
    Ok(HomoclinicLimit {
        epsilons: epsilons.to_vec(),
        x_left,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_and_inverse() {
        assert_eq!(pseudoeq_condition(0.75, 0.0), 0.0);
        assert!(pseudoeq_condition(0.5, EPSILON_0).abs() < 1e-15);
        assert!((epsilon_of_pseudo_x(0.5).unwrap() - EPSILON_0).abs() < 1e-16);
        assert_eq!(epsilon_of_pseudo_x(0.75).unwrap(), 0.0);
        assert!((epsilon_of_pseudo_x(0.6).unwrap() + 0.36 / 7.0).abs() < 1e-16);
        assert!(matches!(epsilon_of_pseudo_x(2.0), Err(Error::Pole(_))));
    }

    #[test]
    fn pseudoequilibria_by_regime() {
        let q = find_pseudoequilibria(-0.05).unwrap();
        assert_eq!(q.len(), 1);
        // quadratic formula oracle
        let x = (3.25 + (3.25f64 * 3.25 - 8.0).sqrt()) / 8.0;
        assert!((q[0].x - x).abs() < 1e-14);
        assert_eq!(q[0].classification, PseudoClass::Pseudonode);
        assert!(q[0].flow_derivative > 0.0 && !q[0].is_stable());
        assert!(find_pseudoequilibria(-0.1).unwrap().is_empty());
        let q = find_pseudoequilibria(0.1).unwrap();
        assert_eq!(q.len(), 1);
        assert!(q[0].is_stable());
        assert!(find_pseudoequilibria(0.0).is_err());
    }

    #[test]
    fn border_collisions_in_ranges() {
        let r = detect_border_collisions((-0.2, 0.3), 50).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].epsilon - EPSILON_0).abs() < 1e-12);
        assert_eq!(r[0].branch, Some(Side::Upper));
        assert!((r[1].epsilon - 0.2).abs() < 1e-12);
        assert_eq!(r[1].branch, Some(Side::Lower));
        assert!(detect_border_collisions((0.0, 0.1), 10).unwrap().is_empty());
        assert_eq!(detect_border_collisions((-0.07, -0.06), 3).unwrap().len(), 1);
    }

    #[test]
    fn neville_reproduces_polynomials() {
        let xs = [0.0, 1.0, 2.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 - 2.0 * x + x * x * x).collect();
        assert!((polynomial_extrapolate(&xs, &ys, -1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn return_map_preconditions() {
        assert!(matches!(return_map(-0.03, 0.49), Err(Error::Precondition(_))));
        assert!(matches!(return_map(-0.1, 0.55), Err(Error::Precondition(_))));
    }
}
