//! Welander's two-box convection model in shifted coordinates
//! `x = T`, `y = S - alpha T - epsilon`, so that the density threshold is the
//! line `y = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Side;
use crate::pws::{Params, PwsSystem, RegionLabel, State, Velocity};

/// State in the original temperature/salinity variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginalState {
    pub t: f64,
    pub s: f64,
    pub rho: f64,
}

impl OriginalState {
    pub fn new(t: f64, s: f64, alpha: f64) -> Self {
        Self { t, s, rho: -alpha * t + s }
    }
}

/// Width `a > 0` of the arctan convection function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParam(f64);

impl SmoothingParam {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Self(a))
        } else {
            Err(Error::Domain(format!("smoothing width must be > 0, got {a}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn coordinate_change(os: OriginalState, p: &Params) -> State {
    State::new(os.t, os.s - p.alpha * os.t - p.epsilon)
}

pub fn inverse_coordinate_change(s: State, p: &Params) -> OriginalState {
    OriginalState::new(s.x, s.y + p.alpha * s.x + p.epsilon, p.alpha)
}

/// Right-hand side for a fixed convection strength `k`.
pub fn field_with_k(p: &Params, s: State, k: f64) -> Velocity {
    let Params { alpha, beta, epsilon } = *p;
    State::new(
        1.0 - s.x - k * s.x,
        beta - beta * epsilon - k * epsilon - alpha - (beta + k) * s.y - (alpha * beta - alpha) * s.x,
    )
}

/// Constant and slope of the normal component on `y = 0` at `lambda = 0`:
/// `ydot(x, 0; lambda) = c0 + c1 x - lambda epsilon`.
pub fn manifold_coefficients(p: &Params) -> (f64, f64) {
    let Params { alpha, beta, epsilon } = *p;
    (beta - beta * epsilon - alpha, -(alpha * beta - alpha))
}

/// Heaviside system: `k = 0` below the threshold, `k = 1` above.
pub fn build_nonsmooth(p: &Params) -> PwsSystem {
    let q = *p;
    let mut equilibria = Vec::new();
    for side in [Side::Lower, Side::Upper] {
        let e = branch_location(side, &q);
        // boundary equilibria count as real
        if side.sign() * e.y >= -1e-12 {
            equilibria.push(e);
        }
    }
    equilibria.extend(pseudo_equilibrium_xs(&q).into_iter().map(|x| State::new(x, 0.0)));
    PwsSystem::affine(
        move |s: State| field_with_k(&q, s, 0.0),
        move |s: State| field_with_k(&q, s, 1.0),
        |s: State| s.y,
        |_| State::new(0.0, 1.0),
    )
    .with_lambda_derivative(move |s: State| State::new(-s.x, -q.epsilon - s.y))
    .with_chart(|u| State::new(u, 0.0))
    .with_equilibria(equilibria)
    .with_name("welander-nonsmooth")
}

/// Welander system with `k(y) = atan(y / a) / pi + 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothWelander {
    pub params: Params,
    pub a: f64,
}

pub fn build_smooth(p: &Params, a: SmoothingParam) -> SmoothWelander {
    SmoothWelander {
        params: *p,
        a: a.value(),
    }
}

impl SmoothWelander {
    pub fn k(&self, y: f64) -> f64 {
        (y / self.a).atan() / PI + 0.5
    }

    pub fn dk(&self, y: f64) -> f64 {
        self.a / (PI * (self.a * self.a + y * y))
    }

    pub fn field(&self, s: State) -> Velocity {
        field_with_k(&self.params, s, self.k(s.y))
    }

    /// Row-major Jacobian `[[dxdot/dx, dxdot/dy], [dydot/dx, dydot/dy]]`.
    pub fn jacobian(&self, s: State) -> [[f64; 2]; 2] {
        let Params { alpha, beta, epsilon } = self.params;
        let k = self.k(s.y);
        let dk = self.dk(s.y);
        [
            [-(1.0 + k), -s.x * dk],
            [-(alpha * beta - alpha), -(beta + k) - (epsilon + s.y) * dk],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumInfo {
    pub location: State,
    pub branch: Side,
    pub region: RegionLabel,
    pub is_virtual: bool,
    pub eigenvalues: (f64, f64),
    pub eigenvectors: (State, State),
}

fn branch_location(side: Side, p: &Params) -> State {
    let Params { alpha, beta, epsilon } = *p;
    let k = side.lambda();
    let x = 1.0 / (1.0 + k);
    let y = (beta - (beta + k) * epsilon - alpha - (alpha * beta - alpha) * x) / (beta + k);
    State::new(x, y)
}

fn is_virtual_location(side: Side, e: State) -> bool {
    side.sign() * e.y < 0.0
}

/// Equilibrium of the pure field `k = 0` (lower) or `k = 1` (upper), with its
/// eigen-decomposition. It is virtual when it lies on the wrong side of `y = 0`.
pub fn branch_equilibrium(side: Side, p: &Params) -> EquilibriumInfo {
    let Params { alpha, beta, .. } = *p;
    let k = side.lambda();
    let location = branch_location(side, p);
    let region = if location.y > 0.0 {
        RegionLabel::Upper
    } else if location.y < 0.0 {
        RegionLabel::Lower
    } else {
        RegionLabel::Manifold
    };
    // the Jacobian is lower triangular
    let lx = -(1.0 + k);
    let ly = -(beta + k);
    let coupling = -(alpha * beta - alpha);
    let vx = if coupling == 0.0 {
        State::new(1.0, 0.0)
    } else {
        let v = State::new(lx - ly, coupling);
        (1.0 / v.norm()) * v
    };
    EquilibriumInfo {
        location,
        branch: side,
        region,
        is_virtual: is_virtual_location(side, location),
        eigenvalues: (lx, ly),
        eigenvectors: (vx, State::new(0.0, 1.0)),
    }
}

/// Values of epsilon at which the lower and the upper branch equilibria sit
/// on `y = 0`, in that order.
pub fn border_collision_epsilons(alpha: f64, beta: f64) -> (f64, f64) {
    let eps = |k: f64| (beta - alpha - (alpha * beta - alpha) / (1.0 + k)) / (beta + k);
    (eps(0.0), eps(1.0))
}

/// `lambda*` on `y = 0` in closed form; `None` when `epsilon = 0`.
pub fn lambda_star_closed(p: &Params, x: f64) -> Option<f64> {
    if p.epsilon == 0.0 {
        return None;
    }
    let (c0, c1) = manifold_coefficients(p);
    Some((c0 + c1 * x) / p.epsilon)
}

/// Sliding segment of `y = 0` in closed form as `(lo, hi, stable)`; `None`
/// when `epsilon = 0` and the two fields have the same normal component.
pub fn sliding_interval_closed(p: &Params) -> Option<(f64, f64, bool)> {
    let (c0, c1) = manifold_coefficients(p);
    if p.epsilon == 0.0 || c1 == 0.0 {
        return None;
    }
    let a = -c0 / c1;
    let b = (p.epsilon - c0) / c1;
    // dS/dlambda = -epsilon, negative means attracting
    Some((a.min(b), a.max(b), p.epsilon > 0.0))
}

/// Roots `x` of the pseudo-equilibrium condition with `lambda*` in `[0, 1]`,
/// ascending.
pub fn pseudo_equilibrium_xs(p: &Params) -> Vec<f64> {
    let eps = p.epsilon;
    if eps == 0.0 {
        return Vec::new();
    }
    let (c0, c1) = manifold_coefficients(p);
    let (qa, qb, qc) = (c1, c0 + eps, -eps);
    let mut roots = Vec::new();
    if qa == 0.0 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // stable form of the quadratic formula
            let q = -0.5 * (qb + sq.copysign(qb));
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots.retain(|&x| lambda_star_closed(p, x).is_some_and(|l| (0.0..=1.0).contains(&l)));
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}
