//! Dormand–Prince 5(4) stepper with PI step-size control.
//!
//! The driver hands back one accepted step at a time so callers can run their
//! own event logic (zero crossings, blow-up guards) between steps. The raw
//! [`dp_step`] is exposed to the crate so an accepted step can be re-taken with
//! a shorter length when refining an event location.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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

// 5th-order weights minus embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Hairer's DOPRI5 controller constants.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub(crate) struct StepOutcome<const N: usize> {
    pub y: [f64; N],
    pub err: [f64; N],
    /// Derivative at the new point (first-same-as-last).
    pub k_end: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let s: f64 = terms.iter().map(|(c, k)| c * k[i]).sum();
        *o += h * s;
    }
    out
}

/// One Dormand–Prince step of length `h` from `(x, y)` given `k1 = f(x, y)`.
pub(crate) fn dp_step<const N: usize, F>(f: &F, x: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> StepOutcome<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(x + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(x + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(x + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    StepOutcome { y: y_new, err, k_end: k7 }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Tolerances {
    /// Max-norm of the error scaled by `atol + rtol·max(|y_old|, |y_new|)`.
    fn error_norm<const N: usize>(&self, y0: &[f64; N], y1: &[f64; N], err: &[f64; N]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..N {
            let sk = self.atol + self.rtol * y0[i].abs().max(y1[i].abs());
            let e = (err[i] / sk).abs();
            if e.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(e);
        }
        worst
    }
}

/// An accepted step from `(x0, y0)` to `(x1, y1)`.
pub(crate) struct Accepted<const N: usize> {
    pub x0: f64,
    pub y0: [f64; N],
    pub k0: [f64; N],
    pub x1: f64,
    pub y1: [f64; N],
    pub on_grid: bool,
}

pub(crate) enum Advance<const N: usize> {
    Step(Accepted<N>),
    Finished,
    BudgetExhausted,
}

pub(crate) struct Driver<'f, const N: usize, F> {
    f: &'f F,
    x: f64,
    y: [f64; N],
    k: [f64; N],
    h: f64,
    x_end: f64,
    dir: f64,
    tol: Tolerances,
    grid: Option<f64>,
    facold: f64,
    attempts: usize,
}

impl<'f, const N: usize, F> Driver<'f, N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    /// `grid`, when set, forces steps to land on every multiple of the given
    /// spacing (forward integration only).
    pub fn new(f: &'f F, x0: f64, y0: [f64; N], x_end: f64, tol: Tolerances, grid: Option<f64>) -> Self {
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        debug_assert!(grid.is_none() || dir > 0.0);
        let k = f(x0, &y0);
        let h = dir * initial_step(f, x0, &y0, &k, dir, (x_end - x0).abs(), &tol);
        Self { f, x: x0, y: y0, k, h, x_end, dir, tol, grid, facold: 1e-4, attempts: 0 }
    }

    fn next_grid_point(&self, spacing: f64) -> f64 {
        let mut k = (self.x / spacing).floor() + 1.0;
        if k * spacing <= self.x + 1e-9 * spacing {
            k += 1.0;
        }
        k * spacing
    }

    pub fn advance(&mut self) -> Result<Advance<N>> {
        loop {
            let remaining = self.x_end - self.x;
            if remaining * self.dir <= 0.0 {
                return Ok(Advance::Finished);
            }
            if self.attempts >= self.tol.max_steps {
                return Ok(Advance::BudgetExhausted);
            }
            self.attempts += 1;

            let mut h = self.h;
            let mut target = None;
            if h.abs() >= remaining.abs() {
                h = remaining;
                target = Some(self.x_end);
            }
            let mut on_grid = false;
            if let Some(spacing) = self.grid {
                let g = self.next_grid_point(spacing);
                if g <= self.x + h && g < self.x_end - 1e-9 * spacing {
                    h = g - self.x;
                    target = Some(g);
                    on_grid = true;
                } else if target.is_some() {
                    on_grid = (self.x_end / spacing - (self.x_end / spacing).round()).abs() < 1e-9;
                }
            }

            let out = dp_step(self.f, self.x, &self.y, &self.k, h);
            let err = self.tol.error_norm(&self.y, &out.y, &out.err);

            if err <= 1.0 {
                let fac11 = err.powf(EXPO);
                let fac = (fac11 / self.facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.facold = err.max(1e-4);
                let h_next = h / fac;
                // A clipped step says little about the natural step length.
                if target.is_none() || h_next.abs() > self.h.abs() {
                    self.h = h_next;
                }
                let x1 = target.unwrap_or(self.x + h);
                let acc = Accepted { x0: self.x, y0: self.y, k0: self.k, x1, y1: out.y, on_grid };
                self.x = x1;
                self.y = out.y;
                self.k = out.k_end;
                return Ok(Advance::Step(acc));
            }

            let shrink = if err.is_finite() { (err.powf(EXPO) / SAFETY).min(1.0 / FAC_MIN) } else { FAC_MAX };
            self.h = h / shrink;
            if self.h.abs() <= 10.0 * f64::EPSILON * self.x.abs().max(1e-300) {
                return Err(Error::Convergence(format!("step size underflow at x = {:e} (h = {:e})", self.x, self.h)));
            }
        }
    }
}

/// Hairer's starting-step heuristic.
fn initial_step<const N: usize, F>(
    f: &F,
    x0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    span: f64,
    tol: &Tolerances,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sk: Vec<f64> = y0.iter().map(|v| tol.atol + tol.rtol * v.abs()).collect();
    let norm =
        |v: &[f64; N]| -> f64 { (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt() };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = f(x0 + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    let h = (100.0 * h0).min(h1).min(span);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        span.min(1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
        f: &F,
        x0: f64,
        y0: [f64; N],
        x1: f64,
        tol: f64,
    ) -> [f64; N] {
        let tol = Tolerances { rtol: tol, atol: tol * 1e-2, max_steps: 100_000 };
        let mut d = Driver::new(f, x0, y0, x1, tol, None);
        let mut last = y0;
        while let Advance::Step(s) = d.advance().unwrap() {
            last = s.y1;
        }
        last
    }

    #[test]
    fn exponential_decay() {
        let f = |_x: f64, y: &[f64; 1]| [-y[0]];
        let y = run(&f, 0.0, [1.0], 5.0, 1e-10);
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let y = run(&f, 3.0, [3.0f64.sin(), 3.0f64.cos()], 0.0, 1e-11);
        assert!(y[0].abs() < 1e-9);
        assert!((y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quintic_is_integrated_exactly_in_one_step() {
        // y' = x^4 has a degree-5 solution, inside the order of the method.
        let f = |x: f64, _y: &[f64; 1]| [x.powi(4)];
        let k1 = f(0.0, &[0.0]);
        let out = dp_step(&f, 0.0, &[0.0], &k1, 2.0);
        assert!((out.y[0] - 32.0 / 5.0).abs() < 1e-13);
    }

    #[test]
    fn grid_landing_hits_multiples() {
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let tol = Tolerances { rtol: 1e-8, atol: 1e-10, max_steps: 10_000 };
        let mut d = Driver::new(&f, 0.0, [1.0], 1.0, tol, Some(0.25));
        let mut xs = Vec::new();
        while let Advance::Step(s) = d.advance().unwrap() {
            if s.on_grid {
                xs.push(s.x1);
            }
        }
        assert_eq!(xs, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn budget_is_reported() {
        let f = |_x: f64, y: &[f64; 1]| [y[0]];
        let tol = Tolerances { rtol: 1e-12, atol: 1e-14, max_steps: 3 };
        let mut d = Driver::new(&f, 0.0, [1.0], 10.0, tol, None);
        let mut n = 0;
        loop {
            match d.advance().unwrap() {
                Advance::Step(_) => n += 1,
                Advance::BudgetExhausted => break,
                Advance::Finished => panic!("should not finish"),
            }
        }
        assert!(n <= 3);
    }
}
