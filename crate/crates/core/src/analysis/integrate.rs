//! Trajectory integration with conservation and dissipation monitoring.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{diagnose, rest_state, DiagnosticSample, MetriplecticSystem, DIAG_TOL};
use crate::linalg3::Vec3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    #[default]
    Rk4Fixed,
    /// Dormand–Prince 5(4) with embedded error control.
    Rk45Adaptive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4_fixed",
            Method::Rk45Adaptive => "rk45_adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "rk4_fixed" => Some(Method::Rk4Fixed),
            "rk45_adaptive" => Some(Method::Rk45Adaptive),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step, or the initial step for the adaptive method.
    pub h: f64,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Steps between diagnostic samples.
    pub monitor_every: usize,
    /// Stop once the state is at rest with `‖ξ‖ < rest_tol` for
    /// `rest_window` consecutive samples.
    pub stop_at_rest: bool,
    pub rest_tol: f64,
    pub rest_window: usize,
    /// Tolerance handed to [`diagnose`] and [`rest_state`].
    pub diag_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            h: 1e-3,
            t_end: 100.0,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            monitor_every: 10,
            stop_at_rest: true,
            rest_tol: 1e-12,
            rest_window: 100,
            diag_tol: DIAG_TOL,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(h: f64, t_end: f64) -> Self {
        IntegratorConfig { h, t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        let positive = [
            ("h", self.h),
            ("t_end", self.t_end),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("rest_tol", self.rest_tol),
            ("diag_tol", self.diag_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(IntegrationError::InvalidConfig(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.monitor_every == 0 {
            return Err(IntegrationError::InvalidConfig("monitor_every must be at least 1".into()));
        }
        if self.stop_at_rest && self.rest_window == 0 {
            return Err(IntegrationError::InvalidConfig("rest_window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum IntegrationError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state {0} is not finite")]
    NonFiniteInitial(Vec3),
    #[error("state became non-finite at t = {t} (last finite state {last})")]
    NonFinite { t: f64, last: Vec3 },
    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    /// `max_t |H(x(t)) − H(x(0))|` over every step.
    pub h_drift_max: f64,
    /// Steps where S rose by more than `1e−12·(1 + |S(x0)|)`.
    pub s_monotone_violations: usize,
    /// False when S is not a verified Casimir; the count above is then 0.
    pub monotone_checked: bool,
    /// `max |ξ_P·ξ_g| / (1 + ‖ξ_P‖‖ξ_g‖)` over the diagnostic samples.
    pub ortho_max: f64,
    pub final_state: Vec3,
    pub final_time: f64,
    pub steps: usize,
    pub terminated_at_rest: bool,
}

/// A solution of `ẋ = ξ(x)` with diagnostics.
///
/// `times` and `states` hold every accepted step; `diagnostics` holds one
/// sample per `monitor_every` steps plus the first and last state, and
/// `sample_steps[i]` is the index into `states` of `diagnostics[i]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    pub diagnostics: Vec<DiagnosticSample>,
    pub sample_steps: Vec<usize>,
    pub summary: TrajectorySummary,
}

impl TrajectoryRecord {
    /// `(t, sample)` pairs for every diagnostic sample.
    pub fn samples(&self) -> impl Iterator<Item = (f64, &DiagnosticSample)> + '_ {
        self.sample_steps.iter().map(|&i| self.times[i]).zip(&self.diagnostics)
    }
}

fn rk4_step(sys: &MetriplecticSystem, x: Vec3, h: f64) -> Vec3 {
    let k1 = sys.xi(x);
    let k2 = sys.xi(x + k1 * (0.5 * h));
    let k3 = sys.xi(x + k2 * (0.5 * h));
    let k4 = sys.xi(x + k3 * h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

// Dormand–Prince 5(4) tableau
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DopriStep {
    next: Vec3,
    k7: Vec3,
    err: Vec3,
}

fn dopri_step(sys: &MetriplecticSystem, x: Vec3, k1: Vec3, h: f64) -> DopriStep {
    let k2 = sys.xi(x + k1 * (h * A21));
    let k3 = sys.xi(x + (k1 * A31 + k2 * A32) * h);
    let k4 = sys.xi(x + (k1 * A41 + k2 * A42 + k3 * A43) * h);
    let k5 = sys.xi(x + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
    let k6 = sys.xi(x + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
    let next = x + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
    let k7 = sys.xi(next);
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    DopriStep { next, k7, err }
}

/// Running bookkeeping shared by both steppers.
struct Monitor<'a> {
    sys: &'a MetriplecticSystem,
    cfg: &'a IntegratorConfig,
    h0: f64,
    s_prev: f64,
    s_slack: f64,
    check_monotone: bool,
    rest_run: usize,
    record: TrajectoryRecord,
}

impl<'a> Monitor<'a> {
    fn new(sys: &'a MetriplecticSystem, cfg: &'a IntegratorConfig, x0: Vec3) -> Self {
        let s0 = sys.entropy_value(x0);
        let mut m = Monitor {
            sys,
            cfg,
            h0: sys.energy(x0),
            s_prev: s0,
            s_slack: 1e-12 * (1.0 + s0.abs()),
            check_monotone: sys.casimir_verified,
            rest_run: 0,
            record: TrajectoryRecord {
                times: vec![0.0],
                states: vec![x0],
                diagnostics: Vec::new(),
                sample_steps: Vec::new(),
                summary: TrajectorySummary {
                    h_drift_max: 0.0,
                    s_monotone_violations: 0,
                    monotone_checked: sys.casimir_verified,
                    ortho_max: 0.0,
                    final_state: x0,
                    final_time: 0.0,
                    steps: 0,
                    terminated_at_rest: false,
                },
            },
        };
        m.sample(0);
        m
    }

    /// Records a diagnostic sample for `states[idx]`; returns true when the
    /// rest window is complete.
    fn sample(&mut self, idx: usize) -> bool {
        let d = diagnose(self.sys, self.record.states[idx], self.cfg.diag_tol);
        let scale = 1.0 + d.xi_p.norm() * d.xi_g.norm();
        let s = &mut self.record.summary;
        s.ortho_max = s.ortho_max.max(d.ortho_residual.abs() / scale);
        let resting = rest_state(&d, self.cfg.diag_tol) && d.xi.norm() < self.cfg.rest_tol;
        self.rest_run = if resting { self.rest_run + 1 } else { 0 };
        self.record.diagnostics.push(d);
        self.record.sample_steps.push(idx);
        self.cfg.stop_at_rest && self.rest_run >= self.cfg.rest_window
    }

    /// Accepts a step; returns true when integration should stop at rest.
    fn push(&mut self, t: f64, x: Vec3, last: bool) -> bool {
        let drift = (self.sys.energy(x) - self.h0).abs();
        let s_now = self.sys.entropy_value(x);
        let summary = &mut self.record.summary;
        summary.h_drift_max = summary.h_drift_max.max(drift);
        if self.check_monotone && s_now > self.s_prev + self.s_slack {
            summary.s_monotone_violations += 1;
        }
        self.s_prev = s_now;
        summary.steps += 1;
        self.record.times.push(t);
        self.record.states.push(x);
        let idx = self.record.states.len() - 1;
        if (last || summary.steps.is_multiple_of(self.cfg.monitor_every)) && self.sample(idx) {
            self.record.summary.terminated_at_rest = true;
            return true;
        }
        false
    }

    fn finish(mut self) -> TrajectoryRecord {
        let idx = self.record.states.len() - 1;
        if self.record.sample_steps.last() != Some(&idx) {
            self.sample(idx);
        }
        let s = &mut self.record.summary;
        s.final_state = self.record.states[idx];
        s.final_time = self.record.times[idx];
        self.record
    }
}

/// Integrates `ẋ = P dH + g dS` from `x0` to `cfg.t_end`.
pub fn integrate(
    sys: &MetriplecticSystem,
    x0: Vec3,
    cfg: &IntegratorConfig,
) -> Result<TrajectoryRecord, IntegrationError> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(IntegrationError::NonFiniteInitial(x0));
    }
    let mut mon = Monitor::new(sys, cfg, x0);
    match cfg.method {
        Method::Rk4Fixed => run_rk4(&mut mon, x0)?,
        Method::Rk45Adaptive => run_dopri(&mut mon, x0)?,
    }
    Ok(mon.finish())
}

fn run_rk4(mon: &mut Monitor<'_>, x0: Vec3) -> Result<(), IntegrationError> {
    let cfg = mon.cfg;
    let n = (cfg.t_end / cfg.h - 1e-9).ceil().max(1.0) as usize;
    let mut x = x0;
    let mut t = 0.0;
    for k in 1..=n {
        // times are k·h, with the final step shortened to land on t_end
        let t_next = if k == n { cfg.t_end } else { k as f64 * cfg.h };
        let next = rk4_step(mon.sys, x, t_next - t);
        if !next.is_finite() {
            return Err(IntegrationError::NonFinite { t: t_next, last: x });
        }
        x = next;
        t = t_next;
        if mon.push(t, x, k == n) {
            break;
        }
    }
    Ok(())
}

fn run_dopri(mon: &mut Monitor<'_>, x0: Vec3) -> Result<(), IntegrationError> {
    let cfg = mon.cfg;
    let mut x = x0;
    let mut t = 0.0;
    let mut h = cfg.h.min(cfg.t_end);
    let mut k1 = mon.sys.xi(x);
    while t < cfg.t_end {
        let last = t + h >= cfg.t_end;
        if last {
            h = cfg.t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(IntegrationError::StepUnderflow { t, h });
        }
        let step = dopri_step(mon.sys, x, k1, h);
        let err = {
            let sc = |a: f64, b: f64| cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            let e = step.err;
            let n = step.next;
            (e.x / sc(x.x, n.x))
                .abs()
                .max((e.y / sc(x.y, n.y)).abs())
                .max((e.z / sc(x.z, n.z)).abs())
        };
        if !err.is_finite() || !step.next.is_finite() {
            // shrink hard; a genuinely diverging solution ends in underflow
            h *= 0.1;
            if !x.is_finite() {
                return Err(IntegrationError::NonFinite { t, last: x });
            }
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if last { cfg.t_end } else { t + h };
            x = step.next;
            k1 = step.k7;
            if mon.push(t, x, last) || last {
                break;
            }
        }
        h *= factor;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{default_system, OSCILLATOR, RIGID_BODY};

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let bad = IntegratorConfig { h: 0.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(IntegrationError::InvalidConfig(_))));
        let bad = IntegratorConfig { t_end: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { monitor_every: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rejects_non_finite_start() {
        let sys = default_system(RIGID_BODY).unwrap();
        let err = integrate(&sys, Vec3::new(f64::NAN, 0.0, 0.0), &IntegratorConfig::default()).unwrap_err();
        assert!(matches!(err, IntegrationError::NonFiniteInitial(_)));
    }

    #[test]
    fn blow_up_is_reported() {
        // stiff dissipative term (degree 5 in m) far outside the RK4
        // stability region at h = 0.5
        let p = crate::fields::PoissonField::new(
            crate::fields::ScalarField::constant(1.0),
            crate::fields::ScalarField::zero(),
            crate::fields::ScalarField::zero(),
        );
        let h = "0.5x^2 + 0.5y^2 + 0.5z^2".parse().unwrap();
        let s = "-1x^4 - 1z^6".parse().unwrap();
        let sys = MetriplecticSystem::new("blowup", p, h, s).unwrap();
        let cfg = IntegratorConfig { h: 0.5, t_end: 50.0, ..Default::default() };
        let err = integrate(&sys, Vec3::new(3.0, 0.0, 3.0), &cfg).unwrap_err();
        assert!(matches!(err, IntegrationError::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn fixed_point_stays_put() {
        let sys = default_system(RIGID_BODY).unwrap();
        let pole = Vec3::new(0.0, 0.0, 2f64.sqrt());
        let rec = integrate(&sys, pole, &IntegratorConfig::rk4(1e-2, 20.0)).unwrap();
        assert!(rec.states.iter().all(|&s| s == pole));
        assert!(rec.summary.terminated_at_rest);
    }

    #[test]
    fn times_are_increasing_and_sampled() {
        let sys = default_system(OSCILLATOR).unwrap();
        let cfg = IntegratorConfig { t_end: 1.05, h: 0.1, monitor_every: 3, ..Default::default() };
        let rec = integrate(&sys, Vec3::new(1.0, 0.0, 0.5), &cfg).unwrap();
        assert_eq!(rec.times.len(), 12);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*rec.times.last().unwrap(), 1.05);
        assert_eq!(rec.sample_steps, [0, 3, 6, 9, 11]);
        assert_eq!(rec.summary.final_time, 1.05);
    }

    #[test]
    fn rk4_and_dopri_agree() {
        let sys = default_system(RIGID_BODY).unwrap();
        let x0 = Vec3::new(1.0, 1.0, 1.0);
        let mut cfg = IntegratorConfig { t_end: 2.0, stop_at_rest: false, ..Default::default() };
        let a = integrate(&sys, x0, &cfg).unwrap();
        cfg.method = Method::Rk45Adaptive;
        cfg.abs_tol = 1e-12;
        cfg.rel_tol = 1e-12;
        let b = integrate(&sys, x0, &cfg).unwrap();
        assert!(a.summary.final_state.distance(b.summary.final_state) < 1e-9);
        assert!(b.summary.steps < a.summary.steps);
    }

    #[test]
    fn adaptive_underflow_is_reported() {
        let sys = default_system(RIGID_BODY).unwrap();
        let cfg = IntegratorConfig {
            method: Method::Rk45Adaptive,
            abs_tol: 1e-300,
            rel_tol: 1e-300,
            ..Default::default()
        };
        let err = integrate(&sys, Vec3::new(1.0, 1.0, 1.0), &cfg).unwrap_err();
        assert!(matches!(err, IntegrationError::StepUnderflow { .. }));
    }
}
