//! The Lane-Emden equation `ψ'' + (2/r)ψ' + ψⁿ = 0` with the regular centre
//! conditions `ψ(0) = 1`, `ψ'(0) = 0`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::fd;
use crate::rk::{dp_step, Advance, Driver, Tolerances};

/// Largest radius at which the centre series is trusted.
pub const SERIES_MAX_RADIUS: f64 = 1.0;

/// Largest index accepted for numerical work.
pub const MAX_INDEX: f64 = 10.0;

/// Polytropic index `n`, restricted to `[0, 10]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Index(f64);

impl Index {
    pub fn new(n: f64) -> Result<Self> {
        if !n.is_finite() || !(0.0..=MAX_INDEX).contains(&n) {
            return domain(format!("polytropic index must lie in [0, {MAX_INDEX}], got {n}"));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0.fract() == 0.0
    }

    /// Rejects `n = 1`, where the scaling generator degenerates.
    pub fn require_not_one(self) -> Result<Self> {
        if self.0 == 1.0 {
            return domain("n = 1 is excluded: the reduction divides by n - 1");
        }
        Ok(self)
    }

    /// `x^n` over the reals; negative bases are only allowed for integer `n`.
    pub fn pow(self, x: f64) -> Result<f64> {
        if self.is_integer() {
            Ok(x.powi(self.0 as i32))
        } else if x < 0.0 {
            domain(format!("{x}^{} is not real", self.0))
        } else {
            Ok(x.powf(self.0))
        }
    }

    /// Odd extension `sign(x)|x|^n` used inside trial steps that overshoot a
    /// zero; coincides with `pow` on `x ≥ 0` and for odd integers.
    pub(crate) fn stepping_pow(self, x: f64) -> f64 {
        if self.is_integer() {
            x.powi(self.0 as i32)
        } else {
            x.signum() * x.abs().powf(self.0)
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point `(r, ψ, ψ')` of a solution curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub r: f64,
    pub psi: f64,
    pub dpsi: f64,
}

impl PhaseState {
    pub fn new(r: f64, psi: f64, dpsi: f64) -> Self {
        Self { r, psi, dpsi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Radius where the centre series hands over to the integrator.
    pub r_switch: f64,
    pub r_max: f64,
    /// Attempted-step budget (accepted plus rejected).
    pub max_steps: usize,
    /// When set, samples are recorded only on multiples of this spacing
    /// (plus the terminal point); otherwise every accepted step is kept.
    pub sample_step: Option<f64>,
    /// Integrate through the first zero. Integer indices only.
    pub continue_past_zero: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            r_switch: 1e-3,
            r_max: 20.0,
            max_steps: 1_000_000,
            sample_step: None,
            continue_past_zero: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return bad(format!("rtol must be positive, got {}", self.rtol));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad(format!("atol must be positive, got {}", self.atol));
        }
        if !(self.r_switch > 0.0 && self.r_switch <= SERIES_MAX_RADIUS) {
            return bad(format!("r_switch must lie in (0, {SERIES_MAX_RADIUS}], got {}", self.r_switch));
        }
        if !(self.r_max > self.r_switch && self.r_max.is_finite()) {
            return bad(format!("r_max ({}) must exceed r_switch ({})", self.r_max, self.r_switch));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if let Some(h) = self.sample_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("sample_step must be positive, got {h}"));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    FirstZeroFound { xi1: f64 },
    ReachedRMax,
    StepBudgetExhausted,
}

impl Termination {
    pub fn tag(&self) -> &'static str {
        match self {
            Termination::FirstZeroFound { .. } => "first_zero",
            Termination::ReachedRMax => "reached_r_max",
            Termination::StepBudgetExhausted => "step_budget_exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n: Index,
    /// Strictly increasing in `r`, starting at the series hand-over radius.
    pub samples: Vec<PhaseState>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.samples.last().expect("trajectories are never empty")
    }
}

/// `(ψ', ψ'')` with `ψ'' = -ψⁿ - 2ψ'/r`.
pub fn le_rhs(n: Index, state: &PhaseState) -> Result<(f64, f64)> {
    if state.r <= 0.0 {
        return domain("the equation is singular at r = 0; start from series_start");
    }
    let omega = -n.pow(state.psi)? - 2.0 * state.dpsi / state.r;
    Ok((state.dpsi, omega))
}

/// Centre expansion `ψ = 1 - r²/6 + n r⁴/120 - n(8n-5) r⁶/15120`.
pub fn series_start(n: Index, r0: f64) -> Result<PhaseState> {
    if !(r0 > 0.0 && r0 <= SERIES_MAX_RADIUS) {
        return domain(format!("series radius must lie in (0, {SERIES_MAX_RADIUS}], got {r0}"));
    }
    let n = n.value();
    let c2 = -1.0 / 6.0;
    let c4 = n / 120.0;
    let c6 = -n * (8.0 * n - 5.0) / 15120.0;
    let x = r0 * r0;
    let psi = 1.0 + x * (c2 + x * (c4 + x * c6));
    let dpsi = r0 * (2.0 * c2 + x * (4.0 * c4 + x * 6.0 * c6));
    Ok(PhaseState::new(r0, psi, dpsi))
}

/// Integrates outward from the centre until the first zero of `ψ`, `r_max`,
/// or the step budget, whichever comes first.
pub fn integrate(n: Index, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    if config.continue_past_zero && !n.is_integer() {
        return domain(format!("ψⁿ is not real past the first zero for non-integer n = {n}"));
    }
    let start = series_start(n, config.r_switch)?;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], -n.stepping_pow(y[0]) - 2.0 * y[1] / r];

    let mut samples = vec![start];
    let mut driver =
        Driver::new(&rhs, start.r, [start.psi, start.dpsi], config.r_max, config.tolerances(), config.sample_step);
    let termination = loop {
        match driver.advance()? {
            Advance::Step(step) => {
                if !config.continue_past_zero && step.y0[0] > 0.0 && step.y1[0] <= 0.0 {
                    let zero = refine_zero(&rhs, &step.y0, &step.k0, step.x0, step.x1 - step.x0, step.y1, config.atol);
                    samples.push(zero);
                    break Termination::FirstZeroFound { xi1: zero.r };
                }
                if config.sample_step.is_none() || step.on_grid || step.x1 == config.r_max {
                    samples.push(PhaseState::new(step.x1, step.y1[0], step.y1[1]));
                }
            }
            Advance::Finished => break Termination::ReachedRMax,
            Advance::BudgetExhausted => break Termination::StepBudgetExhausted,
        }
    };
    Ok(Trajectory { n, samples, termination })
}

/// Locates `ψ = 0` inside an accepted step by re-taking the step with a
/// shorter length (Illinois-modified regula falsi, bisection safeguard).
fn refine_zero<F>(f: &F, y0: &[f64; 2], k0: &[f64; 2], r0: f64, h: f64, y1: [f64; 2], atol: f64) -> PhaseState
where
    F: Fn(f64, &[f64; 2]) -> [f64; 2],
{
    if y1[0] == 0.0 {
        return PhaseState::new(r0 + h, 0.0, y1[1]);
    }
    let eval = |dh: f64| dp_step(f, r0, y0, k0, dh).y;
    let (mut a, mut fa) = (0.0, y0[0]);
    let (mut b, mut fb) = (h, y1[0]);
    let mut best = (b, y1);
    for iter in 0..200 {
        let width = (b - a).abs();
        let mut c = b - fb * (b - a) / (fb - fa);
        let (lo, hi) = (a.min(b), a.max(b));
        if !(c > lo && c < hi) || iter % 4 == 3 {
            c = 0.5 * (a + b);
        }
        let yc = eval(c);
        best = (c, yc);
        if yc[0].abs() <= atol || width <= 4.0 * f64::EPSILON * (r0 + h) {
            break;
        }
        if yc[0] * fb < 0.0 {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = c;
        fb = yc[0];
    }
    PhaseState::new(r0 + best.0, best.1[0], best.1[1])
}

/// The first zero `ξ₁` of `ψ`, or `None` when `ψ > 0` up to `r_max`.
pub fn first_zero(n: Index, config: &SolverConfig) -> Result<Option<f64>> {
    Ok(first_zero_state(n, config)?.map(|s| s.r))
}

/// Like [`first_zero`] but also returns `ψ'(ξ₁)`.
pub fn first_zero_state(n: Index, config: &SolverConfig) -> Result<Option<PhaseState>> {
    let cfg = SolverConfig { continue_past_zero: false, sample_step: None, ..*config };
    let traj = integrate(n, &cfg)?;
    match traj.termination {
        Termination::FirstZeroFound { .. } => Ok(Some(*traj.last())),
        Termination::ReachedRMax => Ok(None),
        Termination::StepBudgetExhausted => {
            Err(Error::Convergence(format!("step budget of {} exhausted before r_max for n = {n}", config.max_steps)))
        }
    }
}

/// Known regular solutions for `n ∈ {0, 1, 5}`.
pub fn closed_form(n: Index, r: f64) -> Result<f64> {
    Ok(closed_form_state(n, r)?.psi)
}

/// Closed-form `(r, ψ, ψ')` for `n ∈ {0, 1, 5}`.
pub fn closed_form_state(n: Index, r: f64) -> Result<PhaseState> {
    if !(r >= 0.0) {
        return domain(format!("radius must be nonnegative, got {r}"));
    }
    let (psi, dpsi) = match n.value() {
        0.0 => (1.0 - r * r / 6.0, -r / 3.0),
        1.0 => {
            if r < 1e-4 {
                let x = r * r;
                (1.0 - x / 6.0 + x * x / 120.0, -r / 3.0 + r * x / 30.0)
            } else {
                let (s, c) = r.sin_cos();
                (s / r, (r * c - s) / (r * r))
            }
        }
        5.0 => {
            let base = 1.0 + r * r / 3.0;
            (base.powf(-0.5), -r / 3.0 * base.powf(-1.5))
        }
        v => return Err(Error::UnsupportedIndex(v)),
    };
    Ok(PhaseState::new(r, psi, dpsi))
}

/// `sup |ψ'' + 2ψ'/r + ψⁿ|` over interior samples, with `ψ''` from centred
/// finite differences of the sampled `ψ'`.
pub fn residual_check(n: Index, samples: &[PhaseState]) -> Result<f64> {
    if samples.len() < 3 {
        return domain(format!("residual needs at least 3 samples, got {}", samples.len()));
    }
    if samples[0].r <= 0.0 || samples.windows(2).any(|w| w[1].r <= w[0].r) {
        return domain("samples must have strictly increasing r > 0");
    }
    let rs: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let ds: Vec<f64> = samples.iter().map(|s| s.dpsi).collect();
    let mut worst: f64 = 0.0;
    for (i, ddpsi) in fd::centered_first_derivative(&rs, &ds) {
        let s = &samples[i];
        let res = ddpsi + 2.0 * s.dpsi / s.r + n.pow(s.psi)?;
        worst = worst.max(res.abs());
    }
    Ok(worst)
}
