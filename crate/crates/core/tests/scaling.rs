use polytrope::ode::{integrate, residual_check};
use polytrope::singular::{scale_solution, scale_states, ClosedForm, GroupElement, ScaleSource, SingularSolution};
use polytrope::{Index, PhaseState, SolverConfig, Termination};
use proptest::prelude::*;

fn idx(n: f64) -> Index {
    Index::new(n).unwrap()
}

fn ulps(a: f64, b: f64) -> u64 {
    assert_eq!(a.is_sign_negative(), b.is_sign_negative(), "{a} vs {b}");
    (a.abs().to_bits() as i64 - b.abs().to_bits() as i64).unsigned_abs()
}

fn grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let m = ((hi - lo) / h).round() as usize;
    (0..=m).map(|i| lo + i as f64 * h).collect()
}

#[test]
fn singular_solution_is_a_fixed_point() {
    for n in [4.0, 5.0, 6.0, 7.5] {
        let sing = SingularSolution::new(idx(n)).unwrap();
        let rs = grid(0.1, 10.0, 0.01);
        for lam in [0.5, 2.0, 10.0] {
            let image = scale_solution(idx(n), lam, ScaleSource::Analytic { solution: &sing, grid: &rs }).unwrap();
            for s in &image.samples {
                let direct = sing.state(s.r).unwrap();
                assert!(ulps(s.psi, direct.psi) <= 4, "n = {n}, λ = {lam}, r = {}", s.r);
                assert!(ulps(s.dpsi, direct.dpsi) <= 4, "n = {n}, λ = {lam}, r = {}", s.r);
            }
        }
    }
}

#[test]
fn singular_solution_solves_the_equation() {
    for n in [4.0, 5.0, 6.0] {
        let sing = SingularSolution::new(idx(n)).unwrap();
        let samples: Vec<PhaseState> = grid(0.1, 10.0, 1e-3).iter().map(|&r| sing.state(r).unwrap()).collect();
        let res = residual_check(idx(n), &samples).unwrap();
        assert!(res <= 1e-5, "n = {n}: {res:e}");
    }
}

#[test]
fn scaled_solutions_still_solve_the_equation() {
    for n in [3.0, 5.0] {
        let cfg = SolverConfig { r_max: 6.0, sample_step: Some(1e-3), ..SolverConfig::default() };
        let source = integrate(idx(n), &cfg).unwrap();
        let body = &source.samples[1..];
        let base = residual_check(idx(n), body).unwrap();
        for lam in [0.5, 2.0] {
            let image = scale_states(idx(n), GroupElement::new(lam).unwrap(), body).unwrap();
            let res = residual_check(idx(n), &image).unwrap();
            assert!(res <= 1e-5 + 10.0 * base, "n = {n}, λ = {lam}: {res:e} vs source {base:e}");
        }
    }
    let rs = grid(0.0, 10.0, 1e-3);
    let cf = ClosedForm(idx(5.0));
    let image = scale_solution(idx(5.0), 2.0, ScaleSource::Analytic { solution: &cf, grid: &rs[1..] }).unwrap();
    assert!(residual_check(idx(5.0), &image.samples).unwrap() <= 1e-5);
}

#[test]
fn first_zero_moves_with_the_group() {
    let traj = integrate(idx(3.0), &SolverConfig::default()).unwrap();
    let Termination::FirstZeroFound { xi1 } = traj.termination else { panic!("no zero") };
    let image = scale_solution(idx(3.0), 2.0, ScaleSource::Trajectory(&traj)).unwrap();
    assert_eq!(image.termination, Termination::FirstZeroFound { xi1: xi1 / 2.0 });
    assert_eq!(image.last().psi, 2.0 * traj.last().psi);
}

proptest! {
    #[test]
    fn group_law(
        n in prop::sample::select(vec![0.0, 0.5, 2.0, 3.0, 5.0, 7.0]),
        l1 in 0.1f64..10.0,
        l2 in 0.1f64..10.0,
        r in 1e-2f64..50.0,
        psi in 1e-3f64..2.0,
        dpsi in -2.0f64..-1e-3,
    ) {
        let (g1, g2) = (GroupElement::new(l1).unwrap(), GroupElement::new(l2).unwrap());
        let s = PhaseState::new(r, psi, dpsi);
        let two_step = g1.apply(idx(n), &g2.apply(idx(n), &s).unwrap()).unwrap();
        let one_step = g1.compose(g2).apply(idx(n), &s).unwrap();
        prop_assert!(ulps(two_step.r, one_step.r) <= 4);
        prop_assert!(ulps(two_step.psi, one_step.psi) <= 4);
        prop_assert!(ulps(two_step.dpsi, one_step.dpsi) <= 4);
    }
}
