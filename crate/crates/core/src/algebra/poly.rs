//! Sparse sums of monomials with rational exponents.
//!
//! A [`Poly`] lives over a fixed ordered [`VarSet`]. Every set carries one
//! extra hidden slot, the *index tag*, whose exponent counts how many
//! index-dependent factors (`ψⁿ`, `ψⁿ⁻¹`, `tⁿ`, ...) went into a monomial.
//! At a fixed numeric `n` such a monomial may coincide with an ordinary one
//! (`ψⁿ⁻¹ = ψ` at `n = 2`); keeping the tag until [`Poly::merge_tag`] makes
//! those coincidences observable.
//!
//! Coefficients are generic: [`Expr`] uses exact rationals and
//! [`ParamExpr`] uses linear forms over unknown ansatz parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::Rat;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarSet {
    /// `(r, ψ, ψ')`
    Phase,
    /// `(t, y)`
    Reduced,
}

impl VarSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            VarSet::Phase => &["r", "psi", "dpsi"],
            VarSet::Reduced => &["t", "y"],
        }
    }

    fn slots(self) -> usize {
        self.names().len() + 1
    }

    fn tag_slot(self) -> usize {
        self.names().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    set: VarSet,
    slot: usize,
}

pub const R: Var = Var { set: VarSet::Phase, slot: 0 };
pub const PSI: Var = Var { set: VarSet::Phase, slot: 1 };
pub const DPSI: Var = Var { set: VarSet::Phase, slot: 2 };
pub const T: Var = Var { set: VarSet::Reduced, slot: 0 };
pub const Y: Var = Var { set: VarSet::Reduced, slot: 1 };

impl Var {
    pub fn set(self) -> VarSet {
        self.set
    }

    pub fn name(self) -> &'static str {
        self.set.names()[self.slot]
    }
}

/// Exponent vector, one entry per slot (including the index tag).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponents(Vec<Rat>);

impl Exponents {
    fn zero(set: VarSet) -> Self {
        Exponents(vec![Rat::zero(); set.slots()])
    }

    pub fn get(&self, v: Var) -> &Rat {
        &self.0[v.slot]
    }

    fn add(&self, other: &Self) -> Self {
        Exponents(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn untagged(&self) -> Self {
        let mut e = self.0.clone();
        if let Some(last) = e.last_mut() {
            *last = Rat::zero();
        }
        Exponents(e)
    }

    fn fmt_with(&self, set: VarSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, e) in self.0.iter().enumerate() {
            if Zero::is_zero(e) {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            let name = if i == set.tag_slot() { "{n}" } else { set.names()[i] };
            if e.is_one() {
                f.write_str(name)?;
            } else if e.is_integer() {
                write!(f, "{name}^{e}")?;
            } else {
                write!(f, "{name}^({e})")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Coefficient ring for [`Poly`]: a module over the rationals.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn vanishes(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn scale(&self, k: &Rat) -> Self;
}

impl Coeff for Rat {
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn scale(&self, k: &Rat) -> Self {
        self * k
    }
}

/// Linear form `Σ cᵢ pᵢ` over parameters indexed by `usize`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinForm(BTreeMap<usize, Rat>);

impl LinForm {
    pub fn param(index: usize) -> Self {
        LinForm(BTreeMap::from([(index, Rat::one())]))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn evaluate(&self, values: &[Rat]) -> Rat {
        self.0.iter().fold(Rat::zero(), |acc, (i, c)| acc + c * &values[*i])
    }
}

impl Coeff for LinForm {
    fn vanishes(&self) -> bool {
        self.0.is_empty()
    }

    fn add_assign(&mut self, other: &Self) {
        for (k, v) in &other.0 {
            let entry = self.0.entry(*k).or_insert_with(Rat::zero);
            *entry += v;
            if Zero::is_zero(entry) {
                self.0.remove(k);
            }
        }
    }

    fn scale(&self, k: &Rat) -> Self {
        if Zero::is_zero(k) {
            return LinForm::default();
        }
        LinForm(self.0.iter().map(|(i, c)| (*i, c * k)).collect())
    }
}

/// Canonical sum of monomials: merged by exponent vector, sorted, no zero
/// coefficients. Structural equality is mathematical equality.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<C> {
    vars: VarSet,
    terms: BTreeMap<Exponents, C>,
}

pub type Expr = Poly<Rat>;
pub type ParamExpr = Poly<LinForm>;

impl<C: Coeff> Poly<C> {
    pub fn zero(vars: VarSet) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    fn add_term(&mut self, exps: Exponents, c: C) {
        if c.vanishes() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().vanishes() {
                    o.remove();
                }
            }
        }
    }

    fn check_set(&self, other: VarSet) {
        assert_eq!(self.vars, other, "mixing expressions over different variable sets");
    }

    pub fn scale(&self, k: &Rat) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.scale(k));
        }
        out
    }

    /// Formal partial derivative `c·x^e ↦ c·e·x^(e-1)`.
    pub fn diff(&self, v: Var) -> Self {
        self.check_set(v.set);
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            let k = e.get(v).clone();
            if Zero::is_zero(&k) {
                continue;
            }
            let mut ne = e.clone();
            ne.0[v.slot] -= Rat::one();
            out.add_term(ne, c.scale(&k));
        }
        out
    }

    /// Drops the index tag, merging monomials that coincide at the fixed
    /// index. Returns the merged polynomial and the exponent vectors where
    /// differently tagged nonzero terms met.
    pub fn merge_tag(&self) -> (Self, Vec<Exponents>) {
        let mut groups: BTreeMap<Exponents, Vec<&Rat>> = BTreeMap::new();
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            let plain = e.untagged();
            groups.entry(plain.clone()).or_default().push(&e.0[self.vars.tag_slot()]);
            out.add_term(plain, c.clone());
        }
        let collisions = groups.into_iter().filter(|(_, tags)| tags.len() > 1).map(|(e, _)| e).collect();
        (out, collisions)
    }

    /// `true` when some monomial carries the index tag.
    pub fn is_tagged(&self) -> bool {
        let slot = self.vars.tag_slot();
        self.terms.keys().any(|e| !Zero::is_zero(&e.0[slot]))
    }
}

impl Expr {
    pub fn constant(vars: VarSet, c: Rat) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Exponents::zero(vars), c);
        p
    }

    pub fn int(vars: VarSet, c: i64) -> Self {
        Self::constant(vars, Rat::from_integer(c.into()))
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(Rat::one(), &[(v, Rat::one())])
    }

    /// `coeff · Π vᵢ^eᵢ`; all variables must share one set (panics
    /// otherwise, and on an empty factor list use [`Expr::constant`]).
    pub fn monomial(coeff: Rat, factors: &[(Var, Rat)]) -> Self {
        let set = factors.first().expect("monomial needs at least one factor").0.set;
        let mut e = Exponents::zero(set);
        for (v, k) in factors {
            assert_eq!(v.set, set, "mixing variable sets");
            e.0[v.slot] += k;
        }
        let mut p = Self::zero(set);
        p.add_term(e, coeff);
        p
    }

    /// Like [`Expr::monomial`] but marked as depending on the index.
    pub fn index_monomial(coeff: Rat, factors: &[(Var, Rat)]) -> Self {
        let mut p = Self::monomial(coeff, factors);
        let slot = p.vars.tag_slot();
        let terms = std::mem::take(&mut p.terms);
        for (mut e, c) in terms {
            e.0[slot] += Rat::one();
            p.terms.insert(e, c);
        }
        p
    }

    /// Integer power; negative exponents only for single monomials.
    pub fn powi(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.pow(&Rat::from_integer(k.into()));
        }
        let mut acc = Self::int(self.vars, 1);
        for _ in 0..k {
            acc = &acc * self;
        }
        Ok(acc)
    }

    /// Rational power of a single monomial with coefficient ±1 (or any
    /// coefficient when the exponent is an integer).
    pub fn pow(&self, k: &Rat) -> Result<Self> {
        if self.terms.len() != 1 {
            return Err(Error::NonMonomialPower);
        }
        let (e, c) = self.terms.iter().next().expect("one term");
        let coeff = if k.is_integer() {
            let k = k.to_integer();
            let kk: i32 = k.try_into().map_err(|_| Error::NonMonomialPower)?;
            if kk >= 0 {
                num_traits::pow::pow(c.clone(), kk as usize)
            } else {
                num_traits::pow::pow(c.recip(), (-kk) as usize)
            }
        } else if c.is_one() {
            Rat::one()
        } else {
            return Err(Error::NonMonomialPower);
        };
        let exps = Exponents(e.0.iter().map(|x| x * k).collect());
        let mut p = Self::zero(self.vars);
        p.add_term(exps, coeff);
        Ok(p)
    }

    /// `Σ cₘ m ↦ Σ (cₘ·p) m` for the parameter `p` numbered `index`.
    pub fn times_param(&self, index: usize) -> ParamExpr {
        let mut out = ParamExpr::zero(self.vars);
        let unit = LinForm::param(index);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), unit.scale(c));
        }
        out
    }
}

impl ParamExpr {
    /// Substitutes numeric parameter values.
    pub fn evaluate(&self, values: &[Rat]) -> Expr {
        let mut out = Expr::zero(self.vars);
        for (e, lf) in &self.terms {
            out.add_term(e.clone(), lf.evaluate(values));
        }
        out
    }

    /// Dense coefficient rows, one per monomial, over `nparams` unknowns.
    pub fn coefficient_rows(&self, nparams: usize) -> Vec<Vec<Rat>> {
        self.terms
            .values()
            .map(|lf| {
                let mut row = vec![Rat::zero(); nparams];
                for (i, c) in lf.entries() {
                    row[i] = c.clone();
                }
                row
            })
            .collect()
    }
}

impl<C: Coeff> Add for &Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: &Poly<C>) -> Poly<C> {
        self.check_set(rhs.vars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Add for Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Poly<C>) -> Poly<C> {
        &self + &rhs
    }
}

impl<C: Coeff> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        self.scale(&-Rat::one())
    }
}

impl<C: Coeff> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        -&self
    }
}

impl<C: Coeff> Sub for &Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: &Poly<C>) -> Poly<C> {
        self + &(-rhs)
    }
}

impl<C: Coeff> Sub for Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Poly<C>) -> Poly<C> {
        &self - &rhs
    }
}

impl<C: Coeff> Mul<&Expr> for &Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: &Expr) -> Poly<C> {
        self.check_set(rhs.vars);
        let mut out = Poly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.add(eb), ca.scale(cb));
            }
        }
        out
    }
}

impl<C: Coeff> Mul<Expr> for Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Expr) -> Poly<C> {
        &self * &rhs
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let constant = e.0.iter().all(Zero::is_zero);
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            if constant {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                e.fmt_with(self.vars, f)?;
            }
        }
        Ok(())
    }
}

/// Renders an exponent vector as a monomial such as `r^-1*psi`.
pub fn monomial_string(set: VarSet, e: &Exponents) -> String {
    struct Show<'a>(VarSet, &'a Exponents);
    impl fmt::Display for Show<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            self.1.fmt_with(self.0, f)
        }
    }
    Show(set, e).to_string()
}
