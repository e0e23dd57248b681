//! Dormand-Prince 5(4) stepper with the standard fourth-order continuous
//! extension, specialised to planar states.

use crate::error::{Error, Result};
use crate::pws::{State, Velocity};

// Autonomous fields only, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rc: [State; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> State {
        self.rc[0]
    }

    pub fn end(&self) -> State {
        self.rc[0] + self.rc[1]
    }

    /// State at time `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> State {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r0, r1, r2, r3, r4] = self.rc;
        r0 + theta * (r1 + theta1 * (r2 + theta * (r3 + theta1 * r4)))
    }
}

/// Result of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Accepted {
    pub dense: DenseStep,
    pub y1: State,
    /// Derivative at the end of the step (first stage of the next step).
    pub f1: Velocity,
    /// Proposed size of the next step.
    pub h_next: f64,
}

/// Adaptive driver state: derivative at the current point and the step size
/// to try next.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub h: f64,
    pub h_min: f64,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            h: 0.0,
            h_min: 1e-14,
        }
    }

    /// Initial step guess (Hairer, Norsett and Wanner, II.4).
    pub fn initial_step(&self, f: &impl Fn(State) -> Velocity, y0: State, f0: Velocity, h_max: f64) -> f64 {
        let sc = |y: State| State::new(self.tol.abs + self.tol.rel * y.x.abs(), self.tol.abs + self.tol.rel * y.y.abs());
        let s = sc(y0);
        let rms = |v: State| ((v.x / s.x).powi(2) + (v.y / s.y).powi(2)).sqrt() / std::f64::consts::SQRT_2;
        let d0 = rms(y0);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(h_max);
        let y1 = y0 + h0 * f0;
        let f1 = f(y1);
        let d2 = rms(f1 - f0) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(h_max)
    }

    /// Takes one accepted step of size at most `h_max` from `(t, y)` with
    /// `f0 = f(y)`, shrinking the step until the error test passes.
    pub fn step(
        &mut self,
        f: &impl Fn(State) -> Velocity,
        t: f64,
        y: State,
        f0: Velocity,
        h_max: f64,
    ) -> Result<Accepted> {
        if self.h <= 0.0 {
            self.h = self.initial_step(f, y, f0, h_max);
        }
        let mut h = self.h.min(h_max);
        let mut rejected = false;
        loop {
            if h < self.h_min * (1.0 + t.abs()) {
                return Err(Error::Tangency { time: t, state: y });
            }
            let k1 = f0;
            let k2 = f(y + h * (A21 * k1));
            let k3 = f(y + h * (A31 * k1 + A32 * k2));
            let k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            let k6 = f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
            let y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
            let k7 = f(y1);
            let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let sx = self.tol.abs + self.tol.rel * y.x.abs().max(y1.x.abs());
            let sy = self.tol.abs + self.tol.rel * y.y.abs().max(y1.y.abs());
            let en = (((err.x / sx).powi(2) + (err.y / sy).powi(2)) / 2.0).sqrt();
            if !en.is_finite() || !y1.is_finite() {
                h *= 0.1;
                rejected = true;
                continue;
            }
            if en <= 1.0 {
                let mut fac = 0.9 * en.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 10.0);
                if rejected {
                    fac = fac.min(1.0);
                }
                let h_next = h * fac;
                self.h = h_next;
                let ydiff = y1 - y;
                let bspl = h * k1 - ydiff;
                let dense = DenseStep {
                    t0: t,
                    h,
                    rc: [
                        y,
                        ydiff,
                        bspl,
                        ydiff - h * k7 - bspl,
                        h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
                    ],
                };
                return Ok(Accepted {
                    dense,
                    y1,
                    f1: k7,
                    h_next,
                });
            }
            rejected = true;
            h *= (0.9 * en.powf(-0.2)).max(0.2);
        }
    }
}

/// Integrates a smooth field from `t0` to `t1` without events. Used by tests
/// and for short hops.
pub fn integrate_to(
    f: &impl Fn(State) -> Velocity,
    y0: State,
    t0: f64,
    t1: f64,
    tol: Tolerances,
    max_step: f64,
) -> Result<State> {
    let mut stepper = Dopri5::new(tol);
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(y);
    while t < t1 {
        let acc = stepper.step(f, t, y, fy, (t1 - t).min(max_step))?;
        t = acc.dense.t1();
        if (t1 - t).abs() <= 1e-14 * t1.abs().max(1.0) {
            t = t1;
        }
        y = acc.y1;
        fy = acc.f1;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances { rel: 1e-11, abs: 1e-13 };

    #[test]
    fn rotation_is_periodic() {
        let f = |s: State| State::new(-s.y, s.x);
        let y = integrate_to(&f, State::new(1.0, 0.0), 0.0, 2.0 * std::f64::consts::PI, TOL, 1.0).unwrap();
        assert!((y.x - 1.0).abs() < 1e-9);
        assert!(y.y.abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let f = |s: State| State::new(-s.x, -2.0 * s.y);
        let mut st = Dopri5::new(Tolerances { rel: 1e-10, abs: 1e-12 });
        let y0 = State::new(1.0, 1.0);
        let acc = st.step(&f, 0.0, y0, f(y0), 0.2).unwrap();
        let d = acc.dense;
        for i in 0..=10 {
            let t = d.t0 + d.h * i as f64 / 10.0;
            let y = d.eval(t);
            assert!((y.x - (-t).exp()).abs() < 1e-8, "{t}");
            assert!((y.y - (-2.0 * t).exp()).abs() < 1e-8, "{t}");
        }
        assert!(d.eval(d.t1()).distance(acc.y1) < 1e-15);
    }
}
