//! Order reduction by the scaling symmetry `(ξ, η) = (r, -2ψ/(n-1))`.
//!
//! Canonical variables are `s = ln r` and `t = ψ·r^(2/(n-1))`; along a
//! solution `u = ds/dt` obeys
//!
//! ```text
//! u' = a u² + (b t + tⁿ) u³,   a = (n-5)/(n-1),   b = 2(3-n)/(n-1)²
//! ```
//!
//! and `y = -1/u` obeys the Abel form `y' = a - (b t + tⁿ)/y`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fd;
use crate::ode::{integrate, Index, PhaseState, SolverConfig};
use crate::rk::{Advance, Driver};

/// Magnitude at which a reduced trajectory is declared to have blown up.
pub const BLOW_UP: f64 = 1e12;

/// Sample spacing used by [`roundtrip_residual`] when the configuration does
/// not fix one.
pub const ROUNDTRIP_SAMPLE_STEP: f64 = 1e-3;

/// Fraction of the monotone window trimmed at each end before differencing;
/// `u` is singular where `dt/dr` vanishes.
pub const ROUNDTRIP_EDGE_FRACTION: f64 = 0.05;

const MIN_WINDOW_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelConstants {
    pub a: f64,
    pub b: f64,
}

pub fn abel_constants(n: Index) -> Result<AbelConstants> {
    let n = n.require_not_one()?.value();
    let m = n - 1.0;
    Ok(AbelConstants { a: (n - 5.0) / m, b: 2.0 * (3.0 - n) / (m * m) })
}

/// Slope `u = ds/dt` at a canonical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Slope {
    Finite(f64),
    /// `dt/dr = 0`: the point lies on the scale-invariant solution locus.
    Degenerate,
}

impl Slope {
    pub fn finite(self) -> Option<f64> {
        match self {
            Slope::Finite(u) => Some(u),
            Slope::Degenerate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalPoint {
    pub s: f64,
    pub t: f64,
    pub u: Slope,
}

fn scaling_exponent(n: Index) -> Result<f64> {
    Ok(2.0 / (n.require_not_one()?.value() - 1.0))
}

/// `ln r`, nudged by at most one ulp so that `exp` maps it back as close to
/// `r` as the grid of representable logarithms allows.
fn log_radius(r: f64) -> f64 {
    let s = r.ln();
    let miss = |x: f64| (x.exp() - r).abs();
    [s.next_down(), s.next_up()].into_iter().fold(s, |best, cand| if miss(cand) < miss(best) { cand } else { best })
}

/// `dt/dr` along a curve through `state`.
fn dt_dr(q: f64, s: f64, state: &PhaseState) -> (f64, f64) {
    let lin = state.dpsi * state.r + q * state.psi;
    let scale = (state.dpsi * state.r).abs() + (q * state.psi).abs();
    (((q - 1.0) * s).exp() * lin, 64.0 * f64::EPSILON * scale)
}

pub fn to_canonical(n: Index, state: &PhaseState) -> Result<CanonicalPoint> {
    let q = scaling_exponent(n)?;
    if !(state.r > 0.0) {
        return domain(format!("canonical variables need r > 0, got {}", state.r));
    }
    let s = log_radius(state.r);
    let t = state.psi * (q * s).exp();
    let (tr, noise) = dt_dr(q, s, state);
    let u = if (state.dpsi * state.r + q * state.psi).abs() <= noise {
        Slope::Degenerate
    } else {
        Slope::Finite(1.0 / (state.r * tr))
    };
    Ok(CanonicalPoint { s, t, u })
}

/// Inverse point transform: `r = e^s`, `ψ = t·e^(2s/(1-n))`.
pub fn from_canonical(n: Index, s: f64, t: f64) -> Result<(f64, f64)> {
    let q = scaling_exponent(n)?;
    Ok((s.exp(), t * (-(q * s)).exp()))
}

pub fn reduced_rhs(n: Index, t: f64, u: f64) -> Result<f64> {
    let c = abel_constants(n)?;
    let tn = n.pow(t)?;
    Ok(c.a * u * u + (c.b * t + tn) * u * u * u)
}

pub fn abel_rhs(n: Index, t: f64, y: f64) -> Result<f64> {
    let c = abel_constants(n)?;
    if y == 0.0 {
        return domain("Abel form is singular at y = 0");
    }
    let tn = n.pow(t)?;
    Ok(c.a - (c.b * t + tn) / y)
}

/// `y²/2 - t²/8 + t⁶/6`, constant along solutions of the n = 5 Abel form.
pub fn conserved_n5(t: f64, y: f64) -> f64 {
    0.5 * y * y - t * t / 8.0 + t.powi(6) / 6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `u = ds/dt`
    U,
    /// `y = -1/u`
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedTermination {
    Completed,
    BlowUp,
    StepBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedTrajectory {
    pub n: Index,
    pub form: Form,
    /// `(t, value)` pairs, strictly monotone in `t`.
    pub samples: Vec<(f64, f64)>,
    pub termination: ReducedTermination,
}

/// Integrates the reduced equation (`Form::U`) or its Abel form (`Form::Y`)
/// from `(t0, value0)` to `t1`; `t1 < t0` integrates backwards.
pub fn integrate_reduced(
    n: Index,
    start: (f64, f64),
    t1: f64,
    form: Form,
    config: &SolverConfig,
) -> Result<ReducedTrajectory> {
    config.validate()?;
    let c = abel_constants(n)?;
    let (t0, v0) = start;
    if !(t0.is_finite() && t1.is_finite() && v0.is_finite()) {
        return domain("reduced integration needs finite endpoints and start value");
    }
    if !n.is_integer() && t0.min(t1) < 0.0 {
        return domain(format!("tⁿ is not real for t < 0 with n = {n}"));
    }
    if form == Form::Y && v0 == 0.0 {
        return domain("Abel form is singular at y = 0");
    }
    let mut samples = vec![(t0, v0)];
    if t0 == t1 {
        return Ok(ReducedTrajectory { n, form, samples, termination: ReducedTermination::Completed });
    }

    let forcing = move |t: f64| c.b * t + n.stepping_pow(t);
    let rhs_u = move |t: f64, v: &[f64; 1]| [c.a * v[0] * v[0] + forcing(t) * v[0].powi(3)];
    let rhs_y = move |t: f64, v: &[f64; 1]| [c.a - forcing(t) / v[0]];

    let termination = match form {
        Form::U => drive(&rhs_u, t0, v0, t1, config, &mut samples, form)?,
        Form::Y => drive(&rhs_y, t0, v0, t1, config, &mut samples, form)?,
    };
    Ok(ReducedTrajectory { n, form, samples, termination })
}

fn drive<F>(
    rhs: &F,
    t0: f64,
    v0: f64,
    t1: f64,
    config: &SolverConfig,
    samples: &mut Vec<(f64, f64)>,
    form: Form,
) -> Result<ReducedTermination>
where
    F: Fn(f64, &[f64; 1]) -> [f64; 1],
{
    let mut driver = Driver::new(rhs, t0, [v0], t1, config.tolerances(), None);
    loop {
        match driver.advance()? {
            Advance::Step(step) => {
                let v = step.y1[0];
                if form == Form::Y && v.signum() != step.y0[0].signum() {
                    return domain(format!("Abel solution crossed y = 0 near t = {}", step.x1));
                }
                samples.push((step.x1, v));
                if v.abs() > BLOW_UP {
                    return Ok(ReducedTermination::BlowUp);
                }
            }
            Advance::Finished => return Ok(ReducedTermination::Completed),
            Advance::BudgetExhausted => return Ok(ReducedTermination::StepBudgetExhausted),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundtripReport {
    /// `sup |du/dt - u'(t, u)| / max(1, |u'|)` over the trimmed window.
    pub residual: f64,
    /// Radial extent of the evaluated window.
    pub r_lo: f64,
    pub r_hi: f64,
    pub samples_used: usize,
}

pub fn roundtrip_residual(n: Index, config: &SolverConfig) -> Result<f64> {
    Ok(roundtrip_report(n, config)?.residual)
}

/// Integrates the Lane-Emden equation, maps the samples to `(t, u)` on the
/// longest stretch where `dt/dr` keeps one sign, differences `u` and compares
/// with the reduced right-hand side.
pub fn roundtrip_report(n: Index, config: &SolverConfig) -> Result<RoundtripReport> {
    let q = scaling_exponent(n)?;
    let cfg = SolverConfig {
        sample_step: config.sample_step.or(Some(ROUNDTRIP_SAMPLE_STEP)),
        continue_past_zero: false,
        ..*config
    };
    let traj = integrate(n, &cfg)?;

    struct Mapped {
        r: f64,
        t: f64,
        u: f64,
        tr: f64,
    }
    // Split into runs of one sign of dt/dr.
    let mut runs: Vec<Vec<Mapped>> = Vec::new();
    let mut current: Vec<Mapped> = Vec::new();
    let mut sign = 0.0;
    for state in traj.samples.iter().filter(|s| s.psi > 0.0) {
        let cp = to_canonical(n, state)?;
        let Slope::Finite(u) = cp.u else {
            runs.push(std::mem::take(&mut current));
            sign = 0.0;
            continue;
        };
        let (tr, _) = dt_dr(q, cp.s, state);
        if tr.signum() != sign && !current.is_empty() {
            runs.push(std::mem::take(&mut current));
        }
        sign = tr.signum();
        current.push(Mapped { r: state.r, t: cp.t, u, tr });
    }
    runs.push(current);
    let window = runs.into_iter().max_by_key(|w| w.len()).unwrap_or_default();
    let unusable = |why: String| Error::UnusableInterval(why);
    let (Some(first), Some(last)) = (window.first(), window.last()) else {
        return Err(unusable("no samples with ψ > 0".into()));
    };
    let margin = ROUNDTRIP_EDGE_FRACTION * (last.r - first.r);
    let (lo, hi) = (first.r + margin, last.r - margin);
    let kept: Vec<&Mapped> = window.iter().filter(|m| m.r >= lo && m.r <= hi).collect();
    if kept.len() < MIN_WINDOW_SAMPLES {
        return Err(unusable(format!(
            "longest monotone-t window has {} samples after trimming, need {MIN_WINDOW_SAMPLES}",
            kept.len()
        )));
    }

    let rs: Vec<f64> = kept.iter().map(|m| m.r).collect();
    let us: Vec<f64> = kept.iter().map(|m| m.u).collect();
    let mut worst: f64 = 0.0;
    for (i, du_dr) in fd::centered_first_derivative(&rs, &us) {
        let m = kept[i];
        let du_dt = du_dr / m.tr;
        let rhs = reduced_rhs(n, m.t, m.u)?;
        worst = worst.max((du_dt - rhs).abs() / rhs.abs().max(1.0));
    }
    Ok(RoundtripReport { residual: worst, r_lo: rs[0], r_hi: rs[rs.len() - 1], samples_used: rs.len() })
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // tabulated values, not the constants
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn idx(n: f64) -> Index {
        Index::new(n).unwrap()
    }

    #[test]
    fn abel_constant_examples() {
        assert_eq!(abel_constants(idx(5.0)).unwrap(), AbelConstants { a: 0.0, b: -0.25 });
        assert_eq!(abel_constants(idx(3.0)).unwrap(), AbelConstants { a: -1.0, b: 0.0 });
        assert_eq!(abel_constants(idx(0.0)).unwrap(), AbelConstants { a: 5.0, b: 6.0 });
        assert!(matches!(abel_constants(idx(1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_examples() {
        let p = to_canonical(idx(2.5), &PhaseState::new(1.0, 0.37, -0.2)).unwrap();
        assert_eq!(p.s, 0.0);
        assert_eq!(p.t, 0.37);

        // n = 5 closed form at r = 1.
        let psi = (4.0f64 / 3.0).powf(-0.5);
        let dpsi = -(1.0 / 3.0) * (4.0f64 / 3.0).powf(-1.5);
        let p = to_canonical(idx(5.0), &PhaseState::new(1.0, psi, dpsi)).unwrap();
        assert_abs_diff_eq!(p.t, 0.8660254, epsilon = 1e-7);
        assert_abs_diff_eq!(p.u.finite().unwrap(), 4.618802, epsilon = 1e-6);

        // On ψ_s = (4r²)^(-1/4) the direction degenerates.
        let r: f64 = 2.7;
        let psi = (4.0 * r * r).powf(-0.25);
        let p = to_canonical(idx(5.0), &PhaseState::new(r, psi, -psi / (2.0 * r))).unwrap();
        assert_eq!(p.u, Slope::Degenerate);
        assert_abs_diff_eq!(p.t, 0.25f64.powf(0.25), epsilon = 1e-15);

        assert!(to_canonical(idx(1.0), &PhaseState::new(1.0, 1.0, 0.0)).is_err());
        assert!(to_canonical(idx(3.0), &PhaseState::new(0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(from_canonical(idx(3.0), 0.0, 0.5).unwrap(), (1.0, 0.5));
        let (r, psi) = from_canonical(idx(3.0), 1.0, 1.0).unwrap();
        assert_relative_eq!(r, std::f64::consts::E, max_relative = 1e-15);
        assert_abs_diff_eq!(psi, 0.3678794, epsilon = 1e-7);
        let (r, psi) = from_canonical(idx(5.0), 4f64.ln(), 0.7071068).unwrap();
        assert_relative_eq!(r, 4.0, max_relative = 1e-15);
        assert_abs_diff_eq!(psi, 0.3535534, epsilon = 1e-7);
    }

    #[test]
    fn rhs_examples() {
        assert_abs_diff_eq!(reduced_rhs(idx(5.0), 1.0, 1.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(reduced_rhs(idx(3.0), 1.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(reduced_rhs(idx(0.0), 0.0, 1.0).unwrap(), 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(abel_rhs(idx(5.0), 1.0, -1.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(abel_rhs(idx(3.0), 0.0, 7.0).unwrap(), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(abel_rhs(idx(0.0), 1.0, 1.0).unwrap(), -2.0, epsilon = 1e-15);
        assert!(matches!(abel_rhs(idx(3.0), 1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(reduced_rhs(idx(2.5), -1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn conserved_examples() {
        assert_eq!(conserved_n5(0.0, 1.0), 0.5);
        assert_abs_diff_eq!(conserved_n5(1.0, 1.0), 0.5416667, epsilon = 1e-7);
    }

    #[test]
    fn abel_n5_conserves_q() {
        let traj = integrate_reduced(idx(5.0), (0.0, 1.0), 1.0, Form::Y, &SolverConfig::default()).unwrap();
        assert_eq!(traj.termination, ReducedTermination::Completed);
        let (t_end, y_end) = *traj.samples.last().unwrap();
        assert_eq!(t_end, 1.0);
        assert_abs_diff_eq!(conserved_n5(t_end, y_end), 0.5, epsilon = 1e-8);
        for &(t, y) in &traj.samples {
            assert!((conserved_n5(t, y) - 0.5).abs() <= 1e-8);
        }
    }

    #[test]
    fn u_form_tracks_transformed_closed_form() {
        // On the r < √3 branch of ψ = (1+r²/3)^(-1/2): t² = r/(1+r²/3).
        let r_of_t = |t: f64| {
            let a = t * t / 3.0;
            (1.0 - (1.0 - 4.0 * a * t * t).sqrt()) / (2.0 * a)
        };
        let u_of_r = |r: f64| {
            let base = 1.0 + r * r / 3.0;
            let t_r = 0.5 * r.powf(-0.5) * base.powf(-0.5) - r.sqrt() * (r / 3.0) * base.powf(-1.5);
            1.0 / (r * t_r)
        };
        let t_of_r = |r: f64| r.sqrt() * (1.0 + r * r / 3.0).powf(-0.5);
        let (t0, t1) = (t_of_r(0.5), t_of_r(1.4));
        let traj = integrate_reduced(idx(5.0), (t0, u_of_r(0.5)), t1, Form::U, &SolverConfig::default()).unwrap();
        assert_eq!(traj.termination, ReducedTermination::Completed);
        for &(t, u) in &traj.samples {
            assert_abs_diff_eq!(u, u_of_r(r_of_t(t)), epsilon = 1e-6);
        }
    }

    #[test]
    fn empty_interval_and_blow_up() {
        let cfg = SolverConfig::default();
        let traj = integrate_reduced(idx(3.0), (0.4, 2.0), 0.4, Form::U, &cfg).unwrap();
        assert_eq!(traj.samples, vec![(0.4, 2.0)]);
        assert_eq!(traj.termination, ReducedTermination::Completed);

        // n = 5 at t = 1: u' = 0.75 u³ escapes in finite t.
        let traj = integrate_reduced(idx(5.0), (1.0, 1.0), 3.0, Form::U, &cfg).unwrap();
        assert_eq!(traj.termination, ReducedTermination::BlowUp);
        assert!(traj.samples.last().unwrap().1.abs() > BLOW_UP);

        assert!(integrate_reduced(idx(2.5), (-1.0, 1.0), 0.0, Form::U, &cfg).is_err());
        assert!(integrate_reduced(idx(3.0), (0.0, 0.0), 1.0, Form::Y, &cfg).is_err());
    }

    #[test]
    fn backwards_integration_is_monotone() {
        let traj = integrate_reduced(idx(5.0), (1.0, 1.2), 0.0, Form::Y, &SolverConfig::default()).unwrap();
        assert!(traj.samples.windows(2).all(|w| w[1].0 < w[0].0));
        let q0 = conserved_n5(1.0, 1.2);
        let (t, y) = *traj.samples.last().unwrap();
        assert_eq!(t, 0.0);
        assert_abs_diff_eq!(conserved_n5(t, y), q0, epsilon = 1e-8);
    }

    #[test]
    fn roundtrip_small_for_regular_indices() {
        for &n in &[0.0, 2.0, 3.0, 5.0] {
            let cfg = SolverConfig { r_max: if n == 5.0 { 3.0 } else { 20.0 }, ..Default::default() };
            let rep = roundtrip_report(idx(n), &cfg).unwrap();
            assert!(rep.residual <= 1e-5, "n={n}: {rep:?}");
            assert!(rep.samples_used >= 16);
        }
    }

    #[test]
    fn roundtrip_needs_a_window() {
        let cfg = SolverConfig { r_max: 0.01, ..Default::default() };
        assert!(matches!(roundtrip_residual(idx(3.0), &cfg), Err(Error::UnusableInterval(_))));
        assert!(matches!(roundtrip_residual(idx(1.0), &SolverConfig::default()), Err(Error::Domain(_))));
    }
}
