//! Smooth (arctan) Welander system: equilibrium continuation, Hopf points,
//! periodic orbits through a Poincaré section and their saddle-node.
//!
//! The section is the horizontal ray `y = y_e, x > x_e` through the
//! equilibrium, crossed upwards. Small orbits born at the Hopf point stay
//! inside the smoothing layer and never reach `y = 0`, so the ray is used
//! instead of the splitting line.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegratorOptions, Side};
use crate::ode::{Dopri5, Tolerances};
use crate::pws::{EventKind, Params, RegionLabel, State, Trajectory};
use crate::roots::{brent, try_bisect_by};
use crate::welander::{
    branch_equilibrium, build_smooth, lambda_star_closed, pseudo_equilibrium_xs, SmoothWelander, SmoothingParam,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothEquilibrium {
    pub location: State,
    pub jacobian: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    pub stable: bool,
}

impl SmoothEquilibrium {
    fn at(model: &SmoothWelander, location: State) -> Self {
        let j = model.jacobian(location);
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        Self {
            location,
            jacobian: j,
            trace,
            det,
            stable: trace < 0.0 && det > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothOrbit {
    pub epsilon: f64,
    pub a: f64,
    pub section_x: f64,
    pub section_y: f64,
    pub period: f64,
    /// Fixed-point residual of the map used to refine the orbit.
    pub residual: f64,
    pub floquet_multiplier: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitStudyRow {
    pub a: f64,
    pub eps_hopf: f64,
    pub eps_snpo: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Supercritical,
}

fn model(epsilon: f64, a: f64) -> Result<SmoothWelander> {
    let p = Params::new(Params::DEFAULT_ALPHA, Params::DEFAULT_BETA, epsilon)?;
    Ok(build_smooth(&p, SmoothingParam::new(a)?))
}

fn residual(m: &SmoothWelander, s: State) -> f64 {
    let f = m.field(s);
    f.x.abs().max(f.y.abs())
}

/// Damped Newton iteration with the analytic Jacobian.
pub fn newton(m: &SmoothWelander, guess: State) -> Result<State> {
    guess.check_finite()?;
    let mut s = guess;
    let mut r = residual(m, s);
    for it in 0..50 {
        if r < 1e-12 {
            return Ok(s);
        }
        let f = m.field(s);
        let [[a, b], [c, d]] = m.jacobian(s);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                last: s,
                residual: r,
            });
        }
        let step = State::new((-f.x * d + b * f.y) / det, (c * f.x - a * f.y) / det);
        let mut t = 1.0;
        loop {
            let trial = s + t * step;
            let rt = residual(m, trial);
            if rt < r || t < 1e-6 {
                s = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
    }
    if r < 1e-12 {
        return Ok(s);
    }
    Err(Error::NoConvergence {
        iterations: 50,
        last: s,
        residual: r,
    })
}

/// Starting points for Newton taken from the Heaviside limit: real branch
/// equilibria, and pseudo-equilibria lifted into the layer through
/// `k(y) = lambda*`.
pub fn default_guesses(m: &SmoothWelander) -> Vec<State> {
    let p = m.params;
    let mut out = Vec::new();
    for side in [Side::Upper, Side::Lower] {
        let e = branch_equilibrium(side, &p);
        if !e.is_virtual {
            out.push(e.location);
        }
    }
    for x in pseudo_equilibrium_xs(&p) {
        let l = lambda_star_closed(&p, x).unwrap_or(0.5).clamp(1e-9, 1.0 - 1e-9);
        out.push(State::new(x, m.a * (std::f64::consts::PI * (l - 0.5)).tan()));
    }
    out.push(State::new(0.75, 0.0));
    out
}

pub fn smooth_equilibrium(epsilon: f64, a: f64, guess: Option<State>) -> Result<SmoothEquilibrium> {
    let m = model(epsilon, a)?;
    equilibrium_of(&m, guess)
}

pub fn equilibrium_of(m: &SmoothWelander, guess: Option<State>) -> Result<SmoothEquilibrium> {
    let guesses = match guess {
        Some(g) => vec![g],
        None => default_guesses(m),
    };
    let mut last = None;
    for g in guesses {
        match newton(m, g) {
            Ok(s) => return Ok(SmoothEquilibrium::at(m, s)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::Degenerate))
}

/// Equilibrium continuation on a uniform grid with bisection of every sign
/// change of the trace where the determinant is positive.
pub fn hopf_scan(a: f64, epsilon_lo: f64, epsilon_hi: f64) -> Result<Vec<f64>> {
    if !(epsilon_lo < epsilon_hi) {
        return Err(Error::Domain(format!("need lo < hi, got [{epsilon_lo}, {epsilon_hi}]")));
    }
    let n = (((epsilon_hi - epsilon_lo) / 1e-4).ceil() as usize).clamp(20, 20_000);
    let mut prev: Option<(f64, SmoothEquilibrium)> = None;
    let mut out = Vec::new();
    for i in 0..=n {
        let eps = epsilon_lo + (epsilon_hi - epsilon_lo) * i as f64 / n as f64;
        let m = model(eps, a)?;
        let eq = match prev {
            Some((_, e)) => equilibrium_of(&m, Some(e.location)).or_else(|_| equilibrium_of(&m, None))?,
            None => equilibrium_of(&m, None)?,
        };
        if let Some((ep, e0)) = prev {
            if (e0.trace > 0.0) != (eq.trace > 0.0) && e0.det > 0.0 && eq.det > 0.0 {
                let guess = e0.location;
                let root = try_bisect_by(
                    |e| Ok(equilibrium_of(&model(e, a)?, Some(guess))?.trace > 0.0),
                    ep,
                    eps,
                    1e-10,
                )?;
                out.push(root);
            }
        }
        prev = Some((eps, eq));
    }
    Ok(out)
}

/// Options for smooth return maps.
pub fn smooth_options() -> IntegratorOptions {
    IntegratorOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-14,
        max_step: 0.1,
        t_max: 200.0,
        ..IntegratorOptions::default()
    }
}

/// Step cap that resolves the smoothing layer around `y = 0`.
fn layer_cap(m: &SmoothWelander, s: State, max_step: f64) -> f64 {
    let vy = m.field(s).y.abs();
    if vy == 0.0 {
        max_step
    } else {
        max_step.min(0.5 * (s.y.abs() + m.a) / vy)
    }
}

/// First return to the section `y = section_y`, `x > x_min` crossed upwards,
/// starting from `(x0, section_y)`. Returns the landing `x` and flight time.
pub fn return_to_section(
    m: &SmoothWelander,
    x0: f64,
    section_y: f64,
    x_min: f64,
    opts: &IntegratorOptions,
) -> Result<(f64, f64)> {
    section_return(m, x0, section_y, x_min, opts, false)
}

/// Inverse of [`return_to_section`], by integration in reverse time.
pub fn reverse_return_to_section(
    m: &SmoothWelander,
    x0: f64,
    section_y: f64,
    x_min: f64,
    opts: &IntegratorOptions,
) -> Result<(f64, f64)> {
    section_return(m, x0, section_y, x_min, opts, true)
}

fn section_return(
    m: &SmoothWelander,
    x0: f64,
    section_y: f64,
    x_min: f64,
    opts: &IntegratorOptions,
    reverse: bool,
) -> Result<(f64, f64)> {
    let sigma = if reverse { -1.0 } else { 1.0 };
    let f = |s: State| sigma * m.field(s);
    let mut st = Dopri5::new(Tolerances {
        rel: opts.rel_tol,
        abs: opts.abs_tol,
    });
    let mut t = 0.0;
    let mut s = State::new(x0, section_y);
    let mut fs = f(s);
    if !(sigma * fs.y > 0.0) {
        return Err(Error::Precondition(format!("flow at x0 = {x0} does not cross the section upwards")));
    }
    // in reverse time the section is crossed downwards
    let g = |s: State| sigma * (s.y - section_y);
    let mut below = false;
    while t < opts.t_max {
        let cap = layer_cap(m, s, opts.max_step).min(opts.t_max - t);
        let acc = st.step(&f, t, s, fs, cap)?;
        let g1 = g(acc.y1);
        if below && g1 >= 0.0 {
            let d = acc.dense;
            let te = brent(|t| g(d.eval(t)), d.t0, d.t1(), 1e-15, 0.0)?;
            let se = d.eval(te);
            if se.x > x_min {
                return Ok((se.x, te));
            }
            below = false;
        }
        if g1 < 0.0 {
            below = true;
        }
        t = acc.dense.t1();
        s = acc.y1;
        fs = acc.f1;
    }
    Err(Error::Timeout(opts.t_max))
}

/// Return map on the equilibrium ray, for a start at `x0 > x_e`.
pub fn smooth_return_map(epsilon: f64, a: f64, x0: f64) -> Result<f64> {
    let m = model(epsilon, a)?;
    let eq = equilibrium_of(&m, None)?.location;
    if !(x0 > eq.x) {
        return Err(Error::Precondition(format!("x0 = {x0} must exceed x_e = {}", eq.x)));
    }
    Ok(return_to_section(&m, x0, eq.y, eq.x, &smooth_options())?.0)
}

/// Upper end of the section grid.
pub const SECTION_X_MAX: f64 = 1.2;
const GRID: usize = 40;

struct SectionMap<'a> {
    m: &'a SmoothWelander,
    eq: State,
    opts: IntegratorOptions,
}

impl SectionMap<'_> {
    /// `R(x) - x` at distance `d` from the equilibrium, NaN without a return.
    fn gap(&self, d: f64) -> f64 {
        let x = self.eq.x + d;
        match return_to_section(self.m, x, self.eq.y, self.eq.x, &self.opts) {
            Ok((r, _)) => r - x,
            Err(_) => f64::NAN,
        }
    }

    fn grid(&self) -> Vec<f64> {
        let hi = SECTION_X_MAX - self.eq.x;
        let lo = 1e-6f64;
        (0..GRID)
            .map(|i| lo * (hi / lo).powf(i as f64 / (GRID - 1) as f64))
            .collect()
    }

    /// Golden-section maximisation of the gap over `[lo, hi]` in log scale.
    fn maximise(&self, lo: f64, hi: f64) -> (f64, f64) {
        let inv = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo.ln(), hi.ln());
        let mut c = b - inv * (b - a);
        let mut d = a + inv * (b - a);
        let mut fc = self.gap(c.exp());
        let mut fd = self.gap(d.exp());
        while b - a > 1e-7 {
            if fc.is_nan() || fd.is_nan() {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv * (b - a);
                fc = self.gap(c.exp());
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv * (b - a);
                fd = self.gap(d.exp());
            }
            if fc > 0.0 || fd > 0.0 {
                break;
            }
        }
        if fc >= fd {
            (c.exp(), fc)
        } else {
            (d.exp(), fd)
        }
    }

    /// Brackets of sign changes of the gap, including pairs hidden between
    /// grid points around a negative local maximum.
    fn brackets(&self) -> Vec<(f64, f64)> {
        let ds = self.grid();
        let gs: Vec<f64> = ds.iter().map(|&d| self.gap(d)).collect();
        let mut points: Vec<(f64, f64)> = Vec::new();
        for i in 0..ds.len() {
            points.push((ds[i], gs[i]));
            if i > 0 && i + 1 < ds.len() {
                let (l, c, r) = (gs[i - 1], gs[i], gs[i + 1]);
                if c < 0.0 && c >= l && c >= r {
                    let (dl, dr) = (ds[i - 1], ds[i + 1]);
                    let (dm, gm) = self.maximise(dl, dr);
                    if gm > 0.0 {
                        points.push((dm, gm));
                    }
                }
            }
        }
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        points.dedup_by(|p, q| p.0 == q.0);
        points
            .windows(2)
            .filter(|w| w[0].1.is_finite() && w[1].1.is_finite() && (w[0].1 > 0.0) != (w[1].1 > 0.0))
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }

    fn reverse_gap(&self, d: f64) -> f64 {
        let x = self.eq.x + d;
        match reverse_return_to_section(self.m, x, self.eq.y, self.eq.x, &self.opts) {
            Ok((r, _)) => r - x,
            Err(_) => f64::NAN,
        }
    }

    /// Fixed point inside a bracket. Repelling orbits (gap increasing through
    /// the root) are refined on the inverse map, where they attract and the
    /// fixed point is well conditioned.
    fn refine(&self, (lo, hi): (f64, f64)) -> Option<SmoothOrbit> {
        let repelling = self.gap(lo) < 0.0;
        let (d, reverse) = if repelling {
            match brent(|d| self.reverse_gap(d), lo, hi, 1e-14, 1e-13) {
                Ok(d) => (d, true),
                Err(_) => (brent(|d| self.gap(d), lo, hi, 1e-14, 1e-13).ok()?, false),
            }
        } else {
            (brent(|d| self.gap(d), lo, hi, 1e-14, 1e-13).ok()?, false)
        };
        let x = self.eq.x + d;
        let h = (1e-3 * d).min(1e-6);
        let (r, period, mu) = if reverse {
            let (r, period) = reverse_return_to_section(self.m, x, self.eq.y, self.eq.x, &self.opts).ok()?;
            let gp = (self.reverse_gap(d + h) - self.reverse_gap(d - h)) / (2.0 * h);
            (r, period, 1.0 / (1.0 + gp))
        } else {
            let (r, period) = return_to_section(self.m, x, self.eq.y, self.eq.x, &self.opts).ok()?;
            let gp = (self.gap(d + h) - self.gap(d - h)) / (2.0 * h);
            (r, period, 1.0 + gp)
        };
        let residual = (r - x).abs();
        if !(residual <= 1e-9) {
            return None;
        }
        Some(SmoothOrbit {
            epsilon: self.m.params.epsilon,
            a: self.m.a,
            section_x: x,
            section_y: self.eq.y,
            period,
            residual,
            floquet_multiplier: mu,
            stable: mu.abs() < 1.0,
        })
    }
}

/// Periodic orbits as fixed points of the return map on the equilibrium
/// ray, ordered by distance from the equilibrium.
pub fn find_smooth_orbits(epsilon: f64, a: f64) -> Result<Vec<SmoothOrbit>> {
    let m = model(epsilon, a)?;
    let eq = equilibrium_of(&m, None)?.location;
    let map = SectionMap {
        m: &m,
        eq,
        opts: smooth_options(),
    };
    Ok(map.brackets().into_iter().filter_map(|b| map.refine(b)).collect())
}

/// Periodic-orbit saddle-node by bisection on orbit existence. Orbits must
/// exist at `eps_hi` and not at `eps_lo`.
pub fn snpo_locate(a: f64, eps_lo: f64, eps_hi: f64) -> Result<f64> {
    let exists = |e: f64| -> Result<bool> { Ok(!find_smooth_orbits(e, a)?.is_empty()) };
    if exists(eps_lo)? || !exists(eps_hi)? {
        return Err(Error::InvalidBracket(format!(
            "need orbits at {eps_hi} and none at {eps_lo}"
        )));
    }
    try_bisect_by(exists, eps_lo, eps_hi, 1e-8)
}

/// Sub- or supercritical, from orbit existence on the side where the
/// equilibrium is stable.
pub fn hopf_criticality(a: f64, eps_hopf: f64) -> Result<Criticality> {
    let delta = 1e-5;
    let below = smooth_equilibrium(eps_hopf - delta, a, None)?;
    let eps_stable = if below.stable { eps_hopf - delta } else { eps_hopf + delta };
    Ok(if find_smooth_orbits(eps_stable, a)?.is_empty() {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    })
}

/// Hopf point near the upper border collision and the saddle-node of the
/// orbits it sheds, for one smoothing width.
pub fn limit_row(a: f64) -> Result<LimitStudyRow> {
    let e0 = -1.0 / 15.0;
    let hopfs = hopf_scan(a, e0 - 0.01, -0.03)?;
    let eps_hopf = *hopfs
        .iter()
        .min_by(|p, q| (*p - e0).abs().total_cmp(&(*q - e0).abs()))
        .ok_or(Error::NoSignChange { lo: e0 - 0.01, hi: -0.03 })?;
    let has = |e: f64| -> Result<bool> { Ok(!find_smooth_orbits(e, a)?.is_empty()) };
    let hi = eps_hopf - 1e-6;
    let mut step = 2e-4;
    let mut lo = hi - step;
    while has(lo)? {
        step *= 2.0;
        lo = hi - step;
        if step > 0.05 {
            return Err(Error::InvalidBracket(format!("orbits persist down to {lo}")));
        }
    }
    let eps_snpo = snpo_locate(a, lo, hi)?;
    Ok(LimitStudyRow {
        a,
        eps_hopf,
        eps_snpo,
        gap: eps_hopf - eps_snpo,
    })
}

/// One row per smoothing width, in the given (decreasing) order.
pub fn limit_study(a_values: &[f64]) -> Result<Vec<LimitStudyRow>> {
    if a_values.is_empty() {
        return Err(Error::Domain("no smoothing widths given".into()));
    }
    if a_values.iter().any(|&a| !(a > 0.0)) || a_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("smoothing widths must be positive and decreasing".into()));
    }
    a_values.par_iter().map(|&a| limit_row(a)).collect()
}

/// Trajectory of the smooth system with samples labelled by the sign of `y`.
pub fn integrate_smooth(m: &SmoothWelander, s0: State, opts: &IntegratorOptions) -> Result<Trajectory> {
    s0.check_finite()?;
    opts.validate()?;
    let label = |s: State| {
        if s.y > opts.tol_h {
            RegionLabel::Upper
        } else if s.y < -opts.tol_h {
            RegionLabel::Lower
        } else {
            RegionLabel::Manifold
        }
    };
    let f = |s: State| m.field(s);
    let mut st = Dopri5::new(Tolerances {
        rel: opts.rel_tol,
        abs: opts.abs_tol,
    });
    let mut traj = Trajectory::default();
    let (mut t, mut s) = (0.0, s0);
    let mut fs = f(s);
    traj.push_sample(t, s, label(s));
    while t < opts.t_max {
        let cap = layer_cap(m, s, opts.max_step).min(opts.t_max - t);
        let acc = st.step(&f, t, s, fs, cap)?;
        t = acc.dense.t1();
        s = acc.y1;
        fs = acc.f1;
        traj.push_sample(t, s, label(s));
        if fs.norm() <= opts.equilibrium_radius * 1e-3 {
            traj.push_event(t, s, EventKind::EquilibriumReached);
            return Ok(traj);
        }
    }
    traj.push_event(t, s, EventKind::Timeout);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibria_near_the_heaviside_limit() {
        let e = smooth_equilibrium(-0.1, 1e-4, None).unwrap();
        assert!(e.location.distance(State::new(0.5, 1.0 / 30.0)) < 1e-3);
        assert!(e.stable);
        // the lower branch point (1, 0.1) is virtual; the smooth equilibrium
        // sits at the stable pseudo-equilibrium instead
        let e = smooth_equilibrium(0.1, 1e-4, None).unwrap();
        let x = (2.5 + (2.5f64 * 2.5 + 16.0).sqrt()) / 8.0;
        assert!(e.location.distance(State::new(x, 0.0)) < 1e-3);
        assert!(e.stable);
        let m = model(0.1, 1e-4).unwrap();
        assert!(residual(&m, e.location) < 1e-12);
    }

    #[test]
    fn newton_reports_last_iterate() {
        let m = model(-0.05, 1e-3).unwrap();
        assert!(newton(&m, State::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn layer_cap_shrinks_near_threshold() {
        let m = model(-0.05, 1e-4).unwrap();
        let near = layer_cap(&m, State::new(0.9, 0.0), 0.1);
        let far = layer_cap(&m, State::new(0.9, 0.5), 0.1);
        assert!(near < 1e-3 && far == 0.1);
    }

    #[test]
    fn return_map_preconditions() {
        assert!(smooth_return_map(-0.05, 1e-3, 0.0).is_err());
        assert!(limit_study(&[1e-4, 1e-3]).is_err());
        assert!(hopf_scan(1e-3, 0.0, -0.1).is_err());
    }
}
