//! Linearised symmetry conditions and kernel scans over polynomial ansätze.
//!
//! For `ψ'' = ω = -ψⁿ - 2ψ'/r` the point symmetry `(ξ, η)` must satisfy
//!
//! ```text
//! (ψⁿ + 2ψ'/r)[η_ψ - 2ξ_r - 3ψ'ξ_ψ] + (2/r²)ψ'ξ - nψⁿ⁻¹η
//!     - (2/r)[η_r + ψ'(η_ψ - ξ_r) - ψ'²ξ_ψ]
//!   = η_rr + ψ'[2η_rψ - ξ_rr] + ψ'²[η_ψψ - 2ξ_rψ] - ψ'³ξ_ψψ
//! ```
//!
//! identically in `(r, ψ, ψ')`. For the first-order Abel form
//! `y' = F(t, y) = a - (bt + tⁿ)/y` the condition on `(ζ, φ)` is
//! `φ_t + (φ_y - ζ_t)F - ζ_y F² = ζ F_t + φ F_y`.
//!
//! Both conditions are linear in the infinitesimals, so they are written once
//! over a generic coefficient type: with rational coefficients they check a
//! given pair, with linear-form coefficients they produce the determining
//! system of an ansatz.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::linalg::{self, nullspace};
use super::poly::{monomial_string, Coeff, Expr, ParamExpr, Poly, VarSet, DPSI, PSI, R, T, Y};
use super::Rat;
use crate::error::{domain, Result};

pub const MAX_DETERMINING_DEGREE: u32 = 6;
pub const MAX_REDUCED_DEGREE: u32 = 4;

fn rat(p: i64) -> Rat {
    Rat::from_integer(p.into())
}

fn require_not_one(n: &Rat) -> Result<()> {
    if n.is_one() {
        return domain("n = 1 is excluded");
    }
    Ok(())
}

/// Left minus right side of the second-order condition, index-tagged.
fn phase_condition<C: Coeff>(n: &Rat, xi: &Poly<C>, eta: &Poly<C>) -> Poly<C> {
    let set = VarSet::Phase;
    let one = Rat::one();
    let psi_n = Expr::index_monomial(one.clone(), &[(PSI, n.clone())]);
    let n_psi_nm1 = Expr::index_monomial(n.clone(), &[(PSI, n - &one)]);
    let dpsi = Expr::var(DPSI);
    let dpsi2 = Expr::monomial(one.clone(), &[(DPSI, rat(2))]);
    let dpsi3 = Expr::monomial(one.clone(), &[(DPSI, rat(3))]);
    let two_over_r = Expr::monomial(rat(2), &[(R, rat(-1))]);
    let two_dpsi_over_r2 = Expr::monomial(rat(2), &[(R, rat(-2)), (DPSI, one.clone())]);
    let friction = &psi_n + &(&two_over_r * &dpsi);

    let (xi_r, xi_p) = (xi.diff(R), xi.diff(PSI));
    let (eta_r, eta_p) = (eta.diff(R), eta.diff(PSI));
    let two = rat(2);

    let bracket = &(&eta_p - &xi_r.scale(&two)) - &(&xi_p * &dpsi).scale(&rat(3));
    let eta1 = &(&eta_r + &(&(&eta_p - &xi_r) * &dpsi)) - &(&xi_p * &dpsi2);
    let lhs = &(&(&(&bracket * &friction) + &(xi * &two_dpsi_over_r2)) - &(eta * &n_psi_nm1)) - &(&eta1 * &two_over_r);

    let rhs = &(&(&eta_r.diff(R) + &(&(&eta_r.diff(PSI).scale(&two) - &xi_r.diff(R)) * &dpsi))
        + &(&(&eta_p.diff(PSI) - &xi_r.diff(PSI).scale(&two)) * &dpsi2))
        - &(&xi_p.diff(PSI) * &dpsi3);
    debug_assert_eq!(lhs.vars(), set);
    &lhs - &rhs
}

/// `(a, b) = ((n-5)/(n-1), 2(3-n)/(n-1)²)` in exact arithmetic.
pub fn abel_constants_exact(n: &Rat) -> Result<(Rat, Rat)> {
    require_not_one(n)?;
    let m = n - Rat::one();
    Ok(((n - rat(5)) / &m, rat(2) * (rat(3) - n) / (&m * &m)))
}

/// Condition for the Abel form multiplied through by `y³`, index-tagged.
fn abel_condition<C: Coeff>(n: &Rat, zeta: &Poly<C>, phi: &Poly<C>) -> Result<Poly<C>> {
    let (a, b) = abel_constants_exact(n)?;
    let one = Rat::one();
    let forcing =
        &Expr::monomial(b.clone(), &[(T, one.clone())]) + &Expr::index_monomial(one.clone(), &[(T, n.clone())]);
    let y_inv = Expr::monomial(one.clone(), &[(Y, rat(-1))]);
    let y_inv2 = Expr::monomial(one.clone(), &[(Y, rat(-2))]);
    let f = &Expr::constant(VarSet::Reduced, a) - &(&forcing * &y_inv);
    let f2 = &f * &f;
    let d_forcing = &Expr::constant(VarSet::Reduced, b) + &Expr::index_monomial(n.clone(), &[(T, n - &one)]);
    let f_t = -(&d_forcing * &y_inv);
    let f_y = &forcing * &y_inv2;

    let lhs = &(&phi.diff(T) + &(&(&phi.diff(Y) - &zeta.diff(T)) * &f)) - &(&zeta.diff(Y) * &f2);
    let rhs = &(zeta * &f_t) + &(phi * &f_y);
    let y3 = Expr::monomial(one, &[(Y, rat(3))]);
    Ok(&(&lhs - &rhs) * &y3)
}

/// Residual of the second-order symmetry condition for a concrete pair
/// `(ξ, η)` over `(r, ψ)`. The empty expression certifies a symmetry.
pub fn symmetry_residual(n: &Rat, xi: &Expr, eta: &Expr) -> Result<Expr> {
    require_not_one(n)?;
    for e in [xi, eta] {
        if e.vars() != VarSet::Phase || e.terms().any(|(x, _)| !Zero::is_zero(x.get(DPSI))) {
            return domain("infinitesimals must be expressions in (r, psi)");
        }
    }
    Ok(phase_condition(n, xi, eta).merge_tag().0)
}

/// One kernel vector of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    /// Ansatz functions, e.g. `alpha, beta, gamma` or `zeta, phi`.
    pub ansatz: Vec<(String, Expr)>,
    /// The resulting infinitesimals, e.g. `xi, eta`.
    pub infinitesimals: Vec<(String, Expr)>,
    /// Raw parameter values in ansatz order.
    pub coefficients: Vec<Rat>,
}

impl BasisVector {
    pub fn ansatz_fn(&self, name: &str) -> Option<&Expr> {
        self.ansatz.iter().find(|(k, _)| k == name).map(|(_, e)| e)
    }

    pub fn infinitesimal(&self, name: &str) -> Option<&Expr> {
        self.infinitesimals.iter().find(|(k, _)| k == name).map(|(_, e)| e)
    }
}

struct NamedExprs<'a>(&'a [(String, Expr)]);

impl Serialize for NamedExprs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, &v.to_string())?;
        }
        m.end()
    }
}

impl Serialize for BasisVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BasisVector", 3)?;
        st.serialize_field("ansatz", &NamedExprs(&self.ansatz))?;
        st.serialize_field("infinitesimals", &NamedExprs(&self.infinitesimals))?;
        let coeffs: Vec<String> = self.coefficients.iter().map(ToString::to_string).collect();
        st.serialize_field("coefficients", &coeffs)?;
        st.end()
    }
}

/// Kernel of a determining system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// Dimension of the solution space modulo trivial symmetries.
    pub kernel_dim: usize,
    /// Dimension of the trivial part `(ζ, ζF)` found inside the ansatz
    /// (always 0 for the second-order scan).
    pub trivial_dim: usize,
    pub basis: Vec<BasisVector>,
    /// Monomials where index-dependent and ordinary terms coincided at this
    /// `n` and were merged before solving.
    pub collisions: Vec<String>,
}

/// A polynomial ansatz: named functions, each a sum over fixed monomials with
/// one unknown parameter per monomial.
struct Ansatz {
    functions: Vec<(String, Vec<Expr>)>,
}

impl Ansatz {
    fn nparams(&self) -> usize {
        self.functions.iter().map(|(_, m)| m.len()).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        self.functions
            .iter()
            .scan(0, |acc, (_, m)| {
                let o = *acc;
                *acc += m.len();
                Some(o)
            })
            .collect()
    }

    fn symbolic(&self, which: usize) -> ParamExpr {
        let off = self.offsets()[which];
        let (_, monos) = &self.functions[which];
        let vars = monos[0].vars();
        monos.iter().enumerate().fold(ParamExpr::zero(vars), |acc, (i, m)| &acc + &m.times_param(off + i))
    }

    fn concrete(&self, which: usize, values: &[Rat]) -> Expr {
        let off = self.offsets()[which];
        let (_, monos) = &self.functions[which];
        monos.iter().enumerate().fold(Expr::zero(monos[0].vars()), |acc, (i, m)| &acc + &m.scale(&values[off + i]))
    }

    fn name(&self, which: usize) -> String {
        self.functions[which].0.clone()
    }
}

fn r_powers(degree: u32) -> Vec<Expr> {
    (0..=degree).map(|i| Expr::monomial(Rat::one(), &[(R, rat(i as i64))])).collect()
}

fn ty_monomials(degree: u32) -> Vec<Expr> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for i in (0..=total).rev() {
            let j = total - i;
            out.push(Expr::monomial(Rat::one(), &[(T, rat(i as i64)), (Y, rat(j as i64))]));
        }
    }
    out
}

fn collision_strings(set: VarSet, raw: &[super::poly::Exponents]) -> Vec<String> {
    raw.iter().map(|e| monomial_string(set, e)).collect()
}

/// Recomputes the point symmetries of the Lane-Emden equation within the
/// ansatz `ξ = α(r)`, `η = β(r)ψ + γ(r)`, with `α, β, γ` polynomials of
/// degree ≤ `degree`.
pub fn determining_scan(n: &Rat, degree: u32) -> Result<ScanResult> {
    require_not_one(n)?;
    if degree > MAX_DETERMINING_DEGREE {
        return domain(format!("degree must be at most {MAX_DETERMINING_DEGREE}, got {degree}"));
    }
    let ansatz = Ansatz {
        functions: vec![
            ("alpha".into(), r_powers(degree)),
            ("beta".into(), r_powers(degree)),
            ("gamma".into(), r_powers(degree)),
        ],
    };
    let np = ansatz.nparams();
    let psi = Expr::var(PSI);
    let xi = ansatz.symbolic(0);
    let eta = &(&ansatz.symbolic(1) * &psi) + &ansatz.symbolic(2);
    let (system, raw_collisions) = phase_condition(n, &xi, &eta).merge_tag();

    let basis = nullspace(&system.coefficient_rows(np), np)
        .into_iter()
        .map(|v| {
            let alpha = ansatz.concrete(0, &v);
            let beta = ansatz.concrete(1, &v);
            let gamma = ansatz.concrete(2, &v);
            let eta = &(&beta * &psi) + &gamma;
            BasisVector {
                ansatz: vec![(ansatz.name(0), alpha.clone()), (ansatz.name(1), beta), (ansatz.name(2), gamma)],
                infinitesimals: vec![("xi".into(), alpha), ("eta".into(), eta)],
                coefficients: v,
            }
        })
        .collect::<Vec<_>>();
    Ok(ScanResult {
        kernel_dim: basis.len(),
        trivial_dim: 0,
        basis,
        collisions: collision_strings(VarSet::Phase, &raw_collisions),
    })
}

/// Looks for point symmetries of the Abel form with `ζ, φ` polynomials in
/// `(t, y)` of total degree ≤ `degree`.
///
/// Every first-order equation admits the trivial symmetries `(ζ, ζF)`; when
/// the ansatz contains some of them (e.g. `n = 2`, where `y·F` is a
/// quadratic polynomial) they are split off and reported in `trivial_dim`.
pub fn reduced_scan(n: &Rat, degree: u32) -> Result<ScanResult> {
    require_not_one(n)?;
    if degree > MAX_REDUCED_DEGREE {
        return domain(format!("degree must be at most {MAX_REDUCED_DEGREE}, got {degree}"));
    }
    let ansatz =
        Ansatz { functions: vec![("zeta".into(), ty_monomials(degree)), ("phi".into(), ty_monomials(degree))] };
    let np = ansatz.nparams();
    let (system, raw_collisions) = abel_condition(n, &ansatz.symbolic(0), &ansatz.symbolic(1))?.merge_tag();
    let kernel = nullspace(&system.coefficient_rows(np), np);

    // Characteristic y(φ - ζF) = yφ - ζ(ay - bt - tⁿ); trivial iff it vanishes.
    let (a, b) = abel_constants_exact(n)?;
    let one = Rat::one();
    let y = Expr::var(Y);
    let y_f = &(&Expr::monomial(a, &[(Y, one.clone())]) - &Expr::monomial(b, &[(T, one.clone())]))
        - &Expr::monomial(one, &[(T, n.clone())]);
    let characteristics: Vec<Expr> =
        kernel.iter().map(|v| &(&ansatz.concrete(1, v) * &y) - &(&ansatz.concrete(0, v) * &y_f)).collect();
    // Columns = kernel vectors, rows = characteristic monomials.
    let mut index = BTreeMap::new();
    for ch in &characteristics {
        for (e, _) in ch.terms() {
            let next = index.len();
            index.entry(e.clone()).or_insert(next);
        }
    }
    let mut rows = vec![vec![Rat::zero(); kernel.len()]; index.len()];
    for (j, ch) in characteristics.iter().enumerate() {
        for (e, c) in ch.terms() {
            rows[index[e]][j] = c.clone();
        }
    }
    let mut reduced = rows;
    let pivots = linalg::rref(&mut reduced, kernel.len());

    let basis = pivots
        .iter()
        .map(|&j| {
            let v = kernel[j].clone();
            let zeta = ansatz.concrete(0, &v);
            let phi = ansatz.concrete(1, &v);
            BasisVector {
                ansatz: vec![(ansatz.name(0), zeta.clone()), (ansatz.name(1), phi.clone())],
                infinitesimals: vec![("zeta".into(), zeta), ("phi".into(), phi)],
                coefficients: v,
            }
        })
        .collect::<Vec<_>>();
    Ok(ScanResult {
        kernel_dim: basis.len(),
        trivial_dim: kernel.len() - pivots.len(),
        basis,
        collisions: collision_strings(VarSet::Reduced, &raw_collisions),
    })
}

/// The full kernel of the Abel-form system, trivial symmetries included.
#[cfg(test)]
fn reduced_kernel(n: &Rat, degree: u32) -> Vec<(Expr, Expr)> {
    let ansatz =
        Ansatz { functions: vec![("zeta".into(), ty_monomials(degree)), ("phi".into(), ty_monomials(degree))] };
    let np = ansatz.nparams();
    let (system, _) = abel_condition(n, &ansatz.symbolic(0), &ansatz.symbolic(1)).unwrap().merge_tag();
    nullspace(&system.coefficient_rows(np), np)
        .into_iter()
        .map(|v| (ansatz.concrete(0, &v), ansatz.concrete(1, &v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;

    fn q(s: &str) -> Rat {
        parse_rational(s).unwrap()
    }

    fn scaling_pair(n: &Rat) -> (Expr, Expr) {
        let c = -rat(2) / (n - Rat::one());
        (Expr::var(R), Expr::monomial(c, &[(PSI, Rat::one())]))
    }

    #[test]
    fn scaling_generator_is_a_symmetry() {
        for n in ["2", "3", "4", "5", "3/2", "7/2", "0", "1/3"] {
            let n = q(n);
            let (xi, eta) = scaling_pair(&n);
            assert!(symmetry_residual(&n, &xi, &eta).unwrap().is_zero(), "n = {n}");
        }
    }

    #[test]
    fn symbolic_multiplier_also_vanishes() {
        // ξ = k r, η = -2kψ/(n-1) with k an unknown parameter.
        let n = q("2");
        let xi = Expr::var(R).times_param(0);
        let eta = Expr::monomial(rat(-2), &[(PSI, Rat::one())]).times_param(0);
        assert!(phase_condition(&n, &xi, &eta).is_zero());
    }

    #[test]
    fn residual_examples() {
        let n = q("2");
        let zero = Expr::zero(VarSet::Phase);
        assert!(symmetry_residual(&n, &zero, &zero).unwrap().is_zero());

        let res = symmetry_residual(&n, &Expr::var(R), &Expr::var(PSI)).unwrap();
        assert!(!res.is_zero());
        // ψ² coefficient: β - 2α' - nβ = 1 - 2 - 2.
        let psi2 = Expr::monomial(rat(-3), &[(PSI, rat(2))]);
        let (e, c) = psi2.terms().next().unwrap();
        assert_eq!(res.terms().find(|(x, _)| *x == e).map(|(_, c)| c.clone()), Some(c.clone()));

        assert!(symmetry_residual(&q("1"), &zero, &zero).is_err());
        assert!(symmetry_residual(&n, &Expr::var(DPSI), &zero).is_err());
    }

    #[test]
    fn residual_is_linear() {
        let n = q("5/2");
        let x1 = &Expr::var(R) + &Expr::monomial(rat(3), &[(R, rat(2)), (PSI, Rat::one())]);
        let e1 = Expr::monomial(q("1/2"), &[(PSI, rat(2))]);
        let x2 = Expr::monomial(rat(-1), &[(PSI, q("1/2"))]);
        let e2 = &Expr::var(R) + &Expr::int(VarSet::Phase, 7);
        let lhs = symmetry_residual(&n, &(&x1 + &x2), &(&e1 + &e2)).unwrap();
        let rhs = &symmetry_residual(&n, &x1, &e1).unwrap() + &symmetry_residual(&n, &x2, &e2).unwrap();
        assert_eq!(lhs, rhs);
    }

    /// Substituting the basis back must annihilate the determining system.
    fn assert_sound(n: &Rat, res: &ScanResult) {
        for v in &res.basis {
            let xi = v.infinitesimal("xi").unwrap();
            let eta = v.infinitesimal("eta").unwrap();
            assert!(symmetry_residual(n, xi, eta).unwrap().is_zero());
        }
    }

    #[test]
    fn determining_scan_recovers_scaling() {
        for (n, beta) in [("3", "-1"), ("5", "-1/2"), ("2", "-2"), ("3/2", "-4"), ("4", "-2/3")] {
            let n = q(n);
            let res = determining_scan(&n, 3).unwrap();
            assert_eq!(res.kernel_dim, 1, "n = {n}");
            let v = &res.basis[0];
            assert_eq!(v.ansatz_fn("alpha").unwrap(), &Expr::var(R));
            assert_eq!(v.ansatz_fn("beta").unwrap(), &Expr::constant(VarSet::Phase, q(beta)));
            assert!(v.ansatz_fn("gamma").unwrap().is_zero());
            assert_sound(&n, &res);
        }
    }

    #[test]
    fn determining_scan_flags_collisions() {
        let res = determining_scan(&q("2"), 3).unwrap();
        assert!(res.collisions.iter().any(|c| c.contains("psi")), "{:?}", res.collisions);
        assert!(determining_scan(&q("7/3"), 3).unwrap().collisions.is_empty());
        assert!(determining_scan(&q("1"), 3).is_err());
        assert!(determining_scan(&q("3"), 7).is_err());
    }

    #[test]
    fn determining_scan_degree_sweep_is_stable() {
        for d in 1..=MAX_DETERMINING_DEGREE {
            let res = determining_scan(&q("3"), d).unwrap();
            assert_eq!(res.kernel_dim, 1, "degree {d}");
            assert_sound(&q("3"), &res);
        }
        assert_eq!(determining_scan(&q("3"), 0).unwrap().kernel_dim, 0);
    }

    #[test]
    fn reduced_scan_finds_nothing_nontrivial() {
        for n in ["2", "3", "5/2", "4", "7/2"] {
            for d in 0..=MAX_REDUCED_DEGREE {
                let res = reduced_scan(&q(n), d).unwrap();
                assert_eq!(res.kernel_dim, 0, "n = {n}, degree {d}: {:?}", res.basis);
            }
        }
    }

    #[test]
    fn trivial_symmetry_appears_at_n_two() {
        // (ζ, φ) = (y, yF) = (y, -3y - 2t - t²) lies in the quadratic ansatz.
        let n = q("2");
        let res = reduced_scan(&n, 2).unwrap();
        assert_eq!(res.trivial_dim, 1);
        assert!(!res.collisions.is_empty());
        let kernel = reduced_kernel(&n, 2);
        assert_eq!(kernel.len(), 1);
        let (zeta, phi) = &kernel[0];
        let t = Expr::var(T);
        let expect_phi = &(&Expr::monomial(rat(-3), &[(Y, Rat::one())]) - &t.scale(&rat(2))) - &t.powi(2).unwrap();
        assert_eq!(zeta, &Expr::var(Y));
        assert_eq!(phi, &expect_phi);
        // n = 3 keeps y·F = -y - t³ outside the quadratic ansatz.
        assert_eq!(reduced_scan(&q("3"), 2).unwrap().trivial_dim, 0);
    }

    #[test]
    fn linear_case_has_extra_symmetries() {
        // n = 0 makes the original equation linear; its reduction keeps some
        // of the extra symmetries, so the scan must report them.
        let n = q("0");
        let res = reduced_scan(&n, 1).unwrap();
        assert!(res.kernel_dim >= 1);
        for v in &res.basis {
            let zeta = v.infinitesimal("zeta").unwrap();
            let phi = v.infinitesimal("phi").unwrap();
            assert!(abel_condition(&n, zeta, phi).unwrap().merge_tag().0.is_zero());
        }
    }

    #[test]
    fn abel_constant_identities() {
        for n in ["0", "1/2", "2", "3", "5", "7/3", "10"] {
            let n = q(n);
            let (a, b) = abel_constants_exact(&n).unwrap();
            let m = &n - Rat::one();
            assert_eq!(&a * &m, &n - rat(5));
            assert_eq!(&b * &m * &m, rat(2) * (rat(3) - &n));
        }
        assert!(abel_constants_exact(&q("1")).is_err());
    }

    #[test]
    fn basis_renders_readably() {
        let res = determining_scan(&q("5"), 3).unwrap();
        let v = &res.basis[0];
        assert_eq!(v.infinitesimal("xi").unwrap().to_string(), "r");
        assert_eq!(v.infinitesimal("eta").unwrap().to_string(), "-1/2*psi");
    }
}
