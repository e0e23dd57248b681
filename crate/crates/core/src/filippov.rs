//! Filippov analysis of the switching manifold: normal projections of the
//! convex combination, the sliding parameter `lambda*`, point classification
//! and the sliding flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pws::{PwsSystem, State, Velocity, DEFAULT_TOL_H};
use crate::roots::brent;

/// Normal projections with magnitude below this count as tangencies.
pub const DEFAULT_TOL_S: f64 = 1e-12;

/// Classification of a point of the switching manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldPointClass {
    Crossing,
    StableSliding,
    UnstableSliding,
    Tangency,
}

/// Solution of `S(lambda) = 0` at a manifold point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaStar {
    /// Root inside `[0, 1]`.
    Sliding(f64),
    /// No root in `[0, 1]`: the point is not a sliding point.
    None,
    /// `S` does not depend on lambda.
    Degenerate,
}

impl LambdaStar {
    pub fn value(&self) -> Option<f64> {
        match self {
            LambdaStar::Sliding(l) => Some(*l),
            _ => None,
        }
    }
}

/// A maximal segment of sliding points, in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingInterval {
    pub lo: f64,
    pub hi: f64,
    pub stable: bool,
}

impl SlidingInterval {
    pub fn contains(&self, u: f64) -> bool {
        self.lo <= u && u <= self.hi
    }
}

fn check_on_manifold(sys: &PwsSystem, s: State) -> Result<()> {
    s.check_finite()?;
    let h = sys.h(s);
    if h.abs() > DEFAULT_TOL_H {
        return Err(Error::Domain(format!("state {s} is off the manifold (h = {h:e})")));
    }
    Ok(())
}

/// `S = f(s, lambda) . grad h(s)`.
pub fn normal_projection(sys: &PwsSystem, s: State, lambda: f64) -> Result<f64> {
    check_on_manifold(sys, s)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(normal_unchecked(sys, s, lambda))
}

pub(crate) fn normal_unchecked(sys: &PwsSystem, s: State, lambda: f64) -> f64 {
    sys.blend(s, lambda).dot(sys.grad_h(s))
}

/// `dS/dlambda`, from the system's exact lambda-derivative when it has one.
pub(crate) fn normal_slope(sys: &PwsSystem, s: State, lambda: f64) -> f64 {
    if let Some(d) = sys.lambda_derivative(s) {
        return d.dot(sys.grad_h(s));
    }
    let dl = 1e-6;
    let lo = (lambda - dl).max(0.0);
    let hi = (lambda + dl).min(1.0);
    (normal_unchecked(sys, s, hi) - normal_unchecked(sys, s, lo)) / (hi - lo)
}

/// Unbounded sliding parameter used while integrating along the manifold.
/// For general lambda dependence the value is only exact inside `[0, 1]`;
/// outside it is a linear extrapolation good enough to detect exits.
pub(crate) fn lambda_star_raw(sys: &PwsSystem, s: State) -> Option<f64> {
    let s0 = normal_unchecked(sys, s, 0.0);
    if sys.is_affine() {
        let slope = normal_slope(sys, s, 0.5);
        return (slope != 0.0).then(|| -s0 / slope);
    }
    let s1 = normal_unchecked(sys, s, 1.0);
    let linear = if s0 == s1 { None } else { Some(s0 / (s0 - s1)) };
    if s0.signum() != s1.signum() {
        brent(|l| normal_unchecked(sys, s, l), 0.0, 1.0, 1e-15, 0.0).ok()
    } else {
        linear
    }
}

/// Root of `S(lambda) = 0` in `[0, 1]` at a manifold point.
pub fn sliding_lambda(sys: &PwsSystem, s: State) -> Result<LambdaStar> {
    check_on_manifold(sys, s)?;
    if sys.is_affine() {
        let s0 = normal_unchecked(sys, s, 0.0);
        let slope = normal_slope(sys, s, 0.5);
        if slope.abs() <= DEFAULT_TOL_S {
            return Ok(LambdaStar::Degenerate);
        }
        let l = -s0 / slope;
        return Ok(if (0.0..=1.0).contains(&l) {
            LambdaStar::Sliding(l)
        } else {
            LambdaStar::None
        });
    }
    let s0 = normal_unchecked(sys, s, 0.0);
    let s1 = normal_unchecked(sys, s, 1.0);
    if s0 == 0.0 {
        return Ok(LambdaStar::Sliding(0.0));
    }
    if s1 == 0.0 {
        return Ok(LambdaStar::Sliding(1.0));
    }
    if s0.signum() == s1.signum() {
        let flat = (0..=8).all(|i| (normal_unchecked(sys, s, i as f64 / 8.0) - s0).abs() <= DEFAULT_TOL_S);
        return Ok(if flat { LambdaStar::Degenerate } else { LambdaStar::None });
    }
    let l = brent(|l| normal_unchecked(sys, s, l), 0.0, 1.0, 1e-15, 0.0)?;
    Ok(LambdaStar::Sliding(l))
}

/// Crossing, sliding (by stability) or tangency from the one-sided normal
/// projections `S(0)` and `S(1)`.
pub fn classify_manifold_point(sys: &PwsSystem, s: State) -> Result<ManifoldPointClass> {
    check_on_manifold(sys, s)?;
    Ok(classify_unchecked(sys, s, DEFAULT_TOL_S))
}

pub(crate) fn classify_unchecked(sys: &PwsSystem, s: State, tol_s: f64) -> ManifoldPointClass {
    let s0 = normal_unchecked(sys, s, 0.0);
    let s1 = normal_unchecked(sys, s, 1.0);
    classify_projections(s0, s1, tol_s)
}

pub(crate) fn classify_projections(s0: f64, s1: f64, tol_s: f64) -> ManifoldPointClass {
    if s0.abs() <= tol_s || s1.abs() <= tol_s {
        ManifoldPointClass::Tangency
    } else if s0.signum() == s1.signum() {
        ManifoldPointClass::Crossing
    } else if s0 > 0.0 {
        // lower field pushes up, upper field pushes down
        ManifoldPointClass::StableSliding
    } else {
        ManifoldPointClass::UnstableSliding
    }
}

/// `dS/dlambda` at a manifold point. Negative means attracting sliding.
pub fn sliding_stability_sign(sys: &PwsSystem, s: State) -> Result<f64> {
    check_on_manifold(sys, s)?;
    let l = lambda_star_raw(sys, s).unwrap_or(0.5).clamp(0.0, 1.0);
    Ok(normal_slope(sys, s, l))
}

/// Unit tangent of the manifold, oriented as `grad h` rotated clockwise.
pub(crate) fn manifold_tangent(sys: &PwsSystem, s: State) -> Velocity {
    let g = sys.grad_h(s);
    let n = g.norm();
    State::new(g.y / n, -g.x / n)
}

/// Filippov sliding vector `f(s, lambda*(s))`, not range-checked.
pub(crate) fn sliding_velocity(sys: &PwsSystem, s: State) -> Velocity {
    match lambda_star_raw(sys, s) {
        Some(l) => sys.blend(s, l),
        None => State::ORIGIN,
    }
}

/// Tangential speed of the sliding flow at a manifold point.
pub fn sliding_vector_field(sys: &PwsSystem, s: State) -> Result<f64> {
    match sliding_lambda(sys, s)? {
        LambdaStar::Sliding(l) => Ok(sys.blend(s, l).dot(manifold_tangent(sys, s))),
        LambdaStar::None => Err(Error::Domain(format!("{s} is outside the sliding region"))),
        LambdaStar::Degenerate => Err(Error::Degenerate),
    }
}

/// Sliding segments of the manifold for chart coordinates in `window`,
/// located on a uniform scan of `n` cells and refined with Brent's method.
pub fn sliding_region_bounds(
    sys: &PwsSystem,
    window: (f64, f64),
    n: usize,
) -> Result<Vec<SlidingInterval>> {
    let chart = sys
        .chart()
        .ok_or_else(|| Error::Precondition("system has no manifold chart".into()))?
        .clone();
    let (lo, hi) = window;
    if !(lo < hi) || n < 2 {
        return Err(Error::InvalidBracket(format!("window ({lo}, {hi}) with {n} cells")));
    }
    let proj = |u: f64, l: f64| normal_unchecked(sys, chart(u), l);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let degenerate = grid
        .iter()
        .all(|&u| normal_slope(sys, chart(u), 0.5).abs() <= DEFAULT_TOL_S);
    if degenerate {
        return Err(Error::Degenerate);
    }
    let sliding_at = |u: f64| proj(u, 0.0).signum() != proj(u, 1.0).signum();

    // boundaries are zeros of S(0) or S(1)
    let mut cuts = Vec::new();
    for w in grid.windows(2) {
        for l in [0.0, 1.0] {
            let (a, b) = (proj(w[0], l), proj(w[1], l));
            if a == 0.0 {
                cuts.push(w[0]);
            } else if a.signum() != b.signum() && b != 0.0 {
                cuts.push(brent(|u| proj(u, l), w[0], w[1], 1e-15, 0.0)?);
            }
        }
    }
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

    let mut out: Vec<SlidingInterval> = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if w[1] - w[0] <= 1e-14 || !sliding_at(mid) {
            continue;
        }
        let stable = proj(mid, 0.0) > 0.0;
        match out.last_mut() {
            Some(prev) if prev.hi == w[0] && prev.stable == stable => prev.hi = w[1],
            _ => out.push(SlidingInterval {
                lo: w[0],
                hi: w[1],
                stable,
            }),
        }
    }
    Ok(out)
}

/// Sliding segments of a system together with its sliding parameter.
#[derive(Debug, Clone)]
pub struct SlidingAnalysis {
    system: PwsSystem,
    pub bounds: Vec<SlidingInterval>,
    /// `dS/dlambda` at the middle of the first segment (0 when there is none).
    pub stability_sign: f64,
}

impl SlidingAnalysis {
    pub fn new(sys: &PwsSystem, window: (f64, f64), n: usize) -> Result<Self> {
        let bounds = sliding_region_bounds(sys, window, n)?;
        let stability_sign = match (bounds.first(), sys.chart()) {
            (Some(iv), Some(chart)) => sliding_stability_sign(sys, chart(0.5 * (iv.lo + iv.hi)))?,
            _ => 0.0,
        };
        Ok(Self {
            system: sys.clone(),
            bounds,
            stability_sign,
        })
    }

    /// `lambda*` at chart coordinate `u`, if `u` is a sliding point.
    pub fn lambda_star(&self, u: f64) -> Option<f64> {
        let chart = self.system.chart()?;
        sliding_lambda(&self.system, chart(u)).ok()?.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sliding on y = 0 for |x| < 1; `stable` picks the orientation.
    fn toy(stable: bool) -> PwsSystem {
        let sgn = if stable { 1.0 } else { -1.0 };
        PwsSystem::affine(
            move |s: State| State::new(1.0, sgn * (1.0 - s.x)),
            move |s: State| State::new(1.0, -sgn * (1.0 + s.x)),
            |s: State| s.y,
            |_| State::new(0.0, 1.0),
        )
        .with_chart(|u| State::new(u, 0.0))
    }

    #[test]
    fn classification_by_signs() {
        let st = toy(true);
        let un = toy(false);
        let p = State::new(0.0, 0.0);
        assert_eq!(classify_manifold_point(&st, p).unwrap(), ManifoldPointClass::StableSliding);
        assert_eq!(classify_manifold_point(&un, p).unwrap(), ManifoldPointClass::UnstableSliding);
        assert_eq!(classify_manifold_point(&st, State::new(2.0, 0.0)).unwrap(), ManifoldPointClass::Crossing);
        assert_eq!(classify_manifold_point(&st, State::new(1.0, 0.0)).unwrap(), ManifoldPointClass::Tangency);
        assert!(classify_manifold_point(&st, State::new(0.0, 0.1)).is_err());
    }

    #[test]
    fn bounds_of_toy() {
        let b = sliding_region_bounds(&toy(true), (-3.0, 3.0), 7).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].lo + 1.0).abs() < 1e-14 && (b[0].hi - 1.0).abs() < 1e-14);
        assert!(b[0].stable);
        let b = sliding_region_bounds(&toy(false), (-3.0, 3.0), 7).unwrap();
        assert!(!b[0].stable);
    }

    #[test]
    fn lambda_star_zeroes_normal_component() {
        let sys = toy(true);
        for &x in &[-0.9, -0.2, 0.4, 0.95] {
            let s = State::new(x, 0.0);
            let l = sliding_lambda(&sys, s).unwrap().value().unwrap();
            assert!(normal_projection(&sys, s, l).unwrap().abs() < 1e-14);
            assert!(sliding_stability_sign(&sys, s).unwrap() < 0.0);
        }
        assert_eq!(sliding_lambda(&sys, State::new(1.5, 0.0)).unwrap(), LambdaStar::None);
        assert!(sliding_vector_field(&sys, State::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn general_dependence_matches_affine_route() {
        // quadratic in lambda, same endpoints as the stable toy
        let sys = PwsSystem::general(
            |s: State, l: f64| {
                let lo = State::new(1.0, 1.0 - s.x);
                let hi = State::new(1.0, -(1.0 + s.x));
                (1.0 - l * l) * lo + (l * l) * hi
            },
            |s: State| s.y,
            |_| State::new(0.0, 1.0),
        );
        let s = State::new(0.0, 0.0);
        // S(l) = (1 - l^2) - l^2 = 0  ->  l = 1/sqrt(2)
        let l = sliding_lambda(&sys, s).unwrap().value().unwrap();
        assert!((l - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(classify_manifold_point(&sys, s).unwrap(), ManifoldPointClass::StableSliding);
        assert!(sliding_stability_sign(&sys, s).unwrap() < 0.0);
    }
}
