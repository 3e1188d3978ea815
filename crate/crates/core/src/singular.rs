//! The scale-invariant solution and the scaling group acting on solutions.
//!
//! For `n > 3` the equation admits `ψ_s = K r^(-2/(n-1))` with
//! `K = [2(n-3)/(n-1)²]^(1/(n-1))`, singular at the origin. The scaling
//! `ψ ↦ λ^(2/(n-1)) ψ(λ r)` maps solutions to solutions and fixes `ψ_s`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::ode::{closed_form_state, Index, PhaseState, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularSolution {
    n: Index,
    k: f64,
}

impl SingularSolution {
    pub fn new(n: Index) -> Result<Self> {
        let v = n.value();
        if v <= 3.0 {
            return domain(format!("no real positive invariant solution for n = {n}: 2(n-3)/(n-1)² must be positive"));
        }
        let k = (2.0 * (v - 3.0) / ((v - 1.0) * (v - 1.0))).powf(1.0 / (v - 1.0));
        Ok(Self { n, k })
    }

    pub fn amplitude(&self) -> f64 {
        self.k
    }

    pub fn index(&self) -> Index {
        self.n
    }

    /// The coefficient `2(n-3)/(n-1)²` of the implicit relation
    /// `ψⁿ = c ψ / r²`.
    pub fn coefficient(&self) -> f64 {
        let v = self.n.value();
        2.0 * (v - 3.0) / ((v - 1.0) * (v - 1.0))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("the invariant solution is singular at r = 0 (got r = {r})"));
        }
        Ok(self.k * r.powf(-2.0 / (self.n.value() - 1.0)))
    }

    /// `(r, ψ_s, ψ_s')` with `ψ' = -2ψ/((n-1)r) = -pK r^(-p-1)`.
    pub fn state(&self, r: f64) -> Result<PhaseState> {
        let psi = self.value(r)?;
        let p = 2.0 / (self.n.value() - 1.0);
        Ok(PhaseState::new(r, psi, -p * self.k * r.powf(-p - 1.0)))
    }

    /// `ψ'' = 2(n+1)ψ/((n-1)² r²)` along the solution.
    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        let psi = self.value(r)?;
        let v = self.n.value();
        Ok(2.0 * (v + 1.0) * psi / ((v - 1.0) * (v - 1.0) * r * r))
    }
}

pub fn singular_value(n: Index, r: f64) -> Result<f64> {
    SingularSolution::new(n)?.value(r)
}

pub fn singular_state(n: Index, r: f64) -> Result<PhaseState> {
    SingularSolution::new(n)?.state(r)
}

/// An element `λ > 0` of the one-parameter scaling group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupElement {
    lam: f64,
}

impl GroupElement {
    pub fn new(lam: f64) -> Result<Self> {
        if !(lam > 0.0 && lam.is_finite()) {
            return domain(format!("group parameter must be positive, got {lam}"));
        }
        Ok(Self { lam })
    }

    pub fn lambda(self) -> f64 {
        self.lam
    }

    pub fn compose(self, other: Self) -> Self {
        Self { lam: self.lam * other.lam }
    }

    /// Image of one sample: `(r/λ, λ^p ψ, λ^(p+1) ψ')` with `p = 2/(n-1)`.
    pub fn apply(self, n: Index, state: &PhaseState) -> Result<PhaseState> {
        let p = 2.0 / (n.require_not_one()?.value() - 1.0);
        let amp = self.lam.powf(p);
        let slope_amp = self.lam.powf(p + 1.0);
        Ok(PhaseState::new(state.r / self.lam, amp * state.psi, slope_amp * state.dpsi))
    }
}

/// Any solution that can be evaluated pointwise.
pub trait Solution {
    fn state(&self, r: f64) -> Result<PhaseState>;
}

/// The closed forms for n ∈ {0, 1, 5}.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm(pub Index);

impl Solution for ClosedForm {
    fn state(&self, r: f64) -> Result<PhaseState> {
        closed_form_state(self.0, r)
    }
}

impl Solution for SingularSolution {
    fn state(&self, r: f64) -> Result<PhaseState> {
        SingularSolution::state(self, r)
    }
}

/// `ψ̃(r) = λ^p ψ(λ r)` for an inner solution `ψ`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<S> {
    pub inner: S,
    pub n: Index,
    pub element: GroupElement,
}

impl<S: Solution> Solution for Scaled<S> {
    fn state(&self, r: f64) -> Result<PhaseState> {
        let src = self.inner.state(r * self.element.lam)?;
        let mut out = self.element.apply(self.n, &src)?;
        out.r = r;
        Ok(out)
    }
}

pub enum ScaleSource<'a> {
    Trajectory(&'a Trajectory),
    /// An analytic solution sampled at the given radii.
    Analytic {
        solution: &'a dyn Solution,
        grid: &'a [f64],
    },
}

/// Transforms a solution by the group element `lam`; samples at `r` move to
/// `r/λ`.
pub fn scale_solution(n: Index, lam: f64, source: ScaleSource<'_>) -> Result<Trajectory> {
    let g = GroupElement::new(lam)?;
    n.require_not_one()?;
    match source {
        ScaleSource::Trajectory(traj) => {
            if traj.samples.is_empty() {
                return Err(Error::EmptySource("trajectory has no samples".into()));
            }
            let samples = scale_states(n, g, &traj.samples)?;
            let termination = match traj.termination {
                Termination::FirstZeroFound { xi1 } => Termination::FirstZeroFound { xi1: xi1 / lam },
                other => other,
            };
            Ok(Trajectory { n, samples, termination })
        }
        ScaleSource::Analytic { solution, grid } => {
            if grid.is_empty() {
                return Err(Error::EmptySource("sample grid is empty".into()));
            }
            let source: Vec<PhaseState> = grid.iter().map(|&r| solution.state(r)).collect::<Result<_>>()?;
            let samples = scale_states(n, g, &source)?;
            Ok(Trajectory { n, samples, termination: Termination::ReachedRMax })
        }
    }
}

pub fn scale_states(n: Index, g: GroupElement, states: &[PhaseState]) -> Result<Vec<PhaseState>> {
    if states.is_empty() {
        return Err(Error::EmptySource("no samples to scale".into()));
    }
    states.iter().map(|s| g.apply(n, s)).collect()
}
