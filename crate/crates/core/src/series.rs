//! Multivariate formal power series truncated at a total-degree cap.
//!
//! A [`TruncatedSeries`] stores the exact coefficients of every monomial of
//! total degree `≤ cap`; everything above the cap is unknown. Operations keep
//! that contract honest: products discard terms above the cap, derivatives
//! lower the cap by one, and composition certifies only up to the smaller of
//! the outer cap and the argument caps.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::coeff::GaussRational;
use crate::error::{Error, Result};
use crate::monomial::Monomial;

/// Shared, ordered list of variable names.
pub type Vars = Arc<[String]>;

/// Cap used for exact polynomials: larger than any degree that can arise.
pub const POLY_CAP: u32 = u32::MAX / 4;

pub fn vars<I, S>(names: I) -> Vars
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect::<Vec<String>>().into()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: Vars,
    cap: u32,
    terms: BTreeMap<Monomial, GaussRational>,
}

impl TruncatedSeries {
    pub fn zero(vars: &Vars, cap: u32) -> Self {
        TruncatedSeries {
            vars: vars.clone(),
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, cap: u32, c: GaussRational) -> Self {
        let mut s = TruncatedSeries::zero(vars, cap);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(vars.len()), c);
        }
        s
    }

    pub fn one(vars: &Vars, cap: u32) -> Self {
        TruncatedSeries::constant(vars, cap, GaussRational::one())
    }

    /// The coordinate function of variable `idx`. Zero when `cap == 0`.
    pub fn var(vars: &Vars, cap: u32, idx: usize) -> Self {
        assert!(idx < vars.len(), "variable index out of range");
        TruncatedSeries::from_terms(
            vars,
            cap,
            [(Monomial::var(vars.len(), idx).exps().to_vec(), GaussRational::one())],
        )
    }

    pub fn var_named(vars: &Vars, cap: u32, name: &str) -> Result<Self> {
        let idx = index_of(vars, name)?;
        Ok(TruncatedSeries::var(vars, cap, idx))
    }

    /// Builds a series from `(exponents, coefficient)` pairs. Duplicates are
    /// summed; zero coefficients and monomials above `cap` are dropped.
    pub fn from_terms<I>(vars: &Vars, cap: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, GaussRational)>,
    {
        let mut s = TruncatedSeries::zero(vars, cap);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length must match variables");
            let m = Monomial::new(e);
            if m.degree() <= cap {
                s.add_term(m, &c);
            }
        }
        s
    }

    fn add_term(&mut self, m: Monomial, c: &GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_polynomial(&self) -> bool {
        self.cap >= POLY_CAP / 2
    }

    /// Terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> GaussRational {
        self.terms
            .get(&Monomial::new(exps.to_vec()))
            .cloned()
            .unwrap_or_else(GaussRational::zero)
    }

    pub fn constant_term(&self) -> GaussRational {
        self.coeff(&vec![0; self.nvars()])
    }

    /// Lowest degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    /// Highest degree of a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// First term in graded order, used for residual reporting.
    pub fn first_term(&self) -> Option<(&Monomial, &GaussRational)> {
        self.terms.iter().next()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        index_of(&self.vars, name)
    }

    pub fn same_vars(&self, other: &TruncatedSeries) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    fn check_vars(&self, other: &TruncatedSeries) -> Result<()> {
        if !self.same_vars(other) {
            return Err(Error::structural(format!(
                "variables {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        Ok(())
    }

    fn check_compatible(&self, other: &TruncatedSeries) -> Result<()> {
        self.check_vars(other)?;
        if self.cap != other.cap {
            return Err(Error::structural(format!(
                "cap {} vs {}",
                self.cap, other.cap
            )));
        }
        Ok(())
    }

    /// Drops every term above `cap`. Raising the cap is refused: the missing
    /// terms are unknown.
    pub fn with_cap(&self, cap: u32) -> Result<Self> {
        if cap > self.cap {
            return Err(Error::cap(format!(
                "cannot raise certified degree {} to {}",
                self.cap, cap
            )));
        }
        Ok(self.lowered(cap))
    }

    fn lowered(&self, cap: u32) -> Self {
        let cap = cap.min(self.cap);
        TruncatedSeries {
            vars: self.vars.clone(),
            cap,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= cap)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Reinterprets the stored terms as an exact polynomial.
    pub fn as_polynomial(&self) -> Self {
        TruncatedSeries {
            vars: self.vars.clone(),
            cap: POLY_CAP,
            terms: self.terms.clone(),
        }
    }

    /// Coefficientwise sum; operands must share variables and cap.
    pub fn add(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(&other.neg_ref()))
    }

    /// Cauchy product truncated at the shared cap.
    pub fn mul(&self, other: &TruncatedSeries) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &TruncatedSeries) -> Self {
        let cap = self.cap.min(other.cap);
        let mut out = self.lowered(cap);
        for (m, c) in &other.terms {
            if m.degree() <= cap {
                out.add_term(m.clone(), c);
            }
        }
        out
    }

    fn neg_ref(&self) -> Self {
        TruncatedSeries {
            vars: self.vars.clone(),
            cap: self.cap,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    fn mul_unchecked(&self, other: &TruncatedSeries) -> Self {
        let cap = self.cap.min(other.cap);
        let mut out = TruncatedSeries::zero(&self.vars, cap);
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > cap {
                break;
            }
            for (mb, cb) in &other.terms {
                if da + mb.degree() > cap {
                    break;
                }
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        if c.is_zero() {
            return TruncatedSeries::zero(&self.vars, self.cap);
        }
        TruncatedSeries {
            vars: self.vars.clone(),
            cap: self.cap,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = TruncatedSeries::one(&self.vars, self.cap);
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Substitutes `args[i]` for the `i`-th variable. The arguments live in a
    /// common space which becomes the space of the result; each must have a
    /// zero constant term so that the truncated result is exact. The result
    /// is certified up to `min(self.cap, args caps)`.
    pub fn compose(&self, args: &[TruncatedSeries]) -> Result<Self> {
        if args.len() != self.nvars() {
            return Err(Error::structural(format!(
                "compose: {} arguments for {} variables",
                args.len(),
                self.nvars()
            )));
        }
        let Some(first) = args.first() else {
            // No variables: a constant.
            return Err(Error::structural(
                "compose: cannot infer the target space of a zero-variable series; use compose_into",
            ));
        };
        let target = first.vars.clone();
        self.compose_into(&target, args)
    }

    /// Like [`compose`](Self::compose) but with the target space given
    /// explicitly, which also covers series in zero variables.
    pub fn compose_into(&self, target: &Vars, args: &[TruncatedSeries]) -> Result<Self> {
        if args.len() != self.nvars() {
            return Err(Error::structural(format!(
                "compose: {} arguments for {} variables",
                args.len(),
                self.nvars()
            )));
        }
        let mut cap = self.cap;
        for (i, a) in args.iter().enumerate() {
            if !(Arc::ptr_eq(&a.vars, target) || a.vars == *target) {
                return Err(Error::structural(format!(
                    "compose: argument {i} lives in {:?}, expected {:?}",
                    a.vars, target
                )));
            }
            if !a.constant_term().is_zero() {
                return Err(Error::Precondition(format!(
                    "compose: argument {i} has a nonzero constant term"
                )));
            }
            cap = cap.min(a.cap);
        }
        let mut powers: Vec<Vec<TruncatedSeries>> = args
            .iter()
            .map(|_| vec![TruncatedSeries::one(target, cap)])
            .collect();
        let mut out = TruncatedSeries::zero(target, cap);
        for (m, c) in &self.terms {
            if m.degree() > cap {
                break;
            }
            let mut prod = TruncatedSeries::constant(target, cap, c.clone());
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_unchecked(&args[i].lowered(cap));
                    powers[i].push(next);
                }
                prod = prod.mul_unchecked(&powers[i][e as usize]);
                if prod.is_zero() {
                    break;
                }
            }
            for (pm, pc) in prod.terms {
                out.add_term(pm, &pc);
            }
        }
        Ok(out)
    }

    /// Partial derivative in the named variable; the certified cap drops by one.
    pub fn derive(&self, name: &str) -> Result<Self> {
        let idx = self.var_index(name)?;
        self.derive_index(idx)
    }

    pub fn derive_index(&self, idx: usize) -> Result<Self> {
        if idx >= self.nvars() {
            return Err(Error::UnknownVariable(format!("#{idx}")));
        }
        if self.cap == 0 {
            return Err(Error::cap("derivative of a series certified only to degree 0"));
        }
        let cap = self.cap - 1;
        let mut out = TruncatedSeries::zero(&self.vars, cap);
        for (m, c) in &self.terms {
            let e = m.exps()[idx];
            if e == 0 || m.degree() - 1 > cap {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[idx] -= 1;
            out.add_term(Monomial::new(exps), &(c * &GaussRational::int(e as i64)));
        }
        Ok(out)
    }

    /// Conjugates every coefficient.
    pub fn bar(&self) -> Self {
        TruncatedSeries {
            vars: self.vars.clone(),
            cap: self.cap,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Multiplicative inverse up to the cap of a series with nonzero
    /// constant term.
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let inv0 = c0.inv().ok_or(Error::NotAUnit)?;
        if self.is_polynomial() {
            return Err(Error::Precondition(
                "invert_unit needs a finite cap".to_string(),
            ));
        }
        // f = c0 (1 + u) with u(0) = 0, so 1/f = c0⁻¹ Σ (-u)^k, k ≤ cap.
        let mut u = self.scale(&inv0);
        u.add_term(Monomial::one(self.nvars()), &-GaussRational::one());
        let neg_u = u.neg_ref();
        let one = TruncatedSeries::one(&self.vars, self.cap);
        let mut acc = one.clone();
        let mut p = one;
        for _ in 0..self.cap {
            p = p.mul_unchecked(&neg_u);
            if p.is_zero() {
                break;
            }
            acc = acc.add_unchecked(&p);
        }
        Ok(acc.scale(&inv0))
    }

    /// Exact evaluation of the stored truncation at `point`.
    pub fn eval(&self, point: &[GaussRational]) -> Result<GaussRational> {
        if point.len() != self.nvars() {
            return Err(Error::structural(format!(
                "eval: point of length {} for {} variables",
                point.len(),
                self.nvars()
            )));
        }
        let mut powers: Vec<Vec<GaussRational>> = point
            .iter()
            .map(|_| vec![GaussRational::one()])
            .collect();
        let mut acc = GaussRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &point[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Re-labels the variables (same count, same order).
    pub fn rename(&self, new_vars: &Vars) -> Result<Self> {
        if new_vars.len() != self.nvars() {
            return Err(Error::structural("rename: variable count differs"));
        }
        Ok(TruncatedSeries {
            vars: new_vars.clone(),
            cap: self.cap,
            terms: self.terms.clone(),
        })
    }

    /// Moves the series into a larger space: variable `i` becomes
    /// `target[positions[i]]`.
    pub fn embed(&self, target: &Vars, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.nvars() || positions.iter().any(|&p| p >= target.len()) {
            return Err(Error::structural("embed: bad position map"));
        }
        let mut out = TruncatedSeries::zero(target, self.cap);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &x) in m.exps().iter().enumerate() {
                e[positions[i]] += x;
            }
            out.add_term(Monomial::new(e), c);
        }
        Ok(out)
    }

    /// Coefficient of `x_S^beta` where `S = selected`, as a series in the
    /// remaining variables `rest` (which must list exactly the unselected
    /// variables in order). Certified to `cap − |beta|`.
    pub fn coefficient_in(&self, selected: &[usize], beta: &[u32], rest: &Vars) -> Result<Self> {
        if selected.len() != beta.len() || rest.len() + selected.len() != self.nvars() {
            return Err(Error::structural("coefficient_in: bad variable split"));
        }
        let bdeg: u32 = beta.iter().sum();
        if bdeg > self.cap {
            return Err(Error::cap(format!(
                "coefficient of degree {bdeg} requested from a series certified to {}",
                self.cap
            )));
        }
        let keep: Vec<usize> = (0..self.nvars()).filter(|i| !selected.contains(i)).collect();
        let mut out = TruncatedSeries::zero(rest, self.cap - bdeg);
        for (m, c) in &self.terms {
            if selected.iter().zip(beta).all(|(&s, &b)| m.exps()[s] == b) {
                let e: Vec<u32> = keep.iter().map(|&k| m.exps()[k]).collect();
                let mm = Monomial::new(e);
                if mm.degree() <= out.cap {
                    out.add_term(mm, c);
                }
            }
        }
        Ok(out)
    }

    /// Exact division of polynomials; `None` if `divisor` does not divide
    /// `self` or is zero. Only meaningful for exact polynomials.
    pub(crate) fn div_exact(&self, divisor: &TruncatedSeries) -> Option<Self> {
        let (lm, lc) = divisor.terms.iter().next_back()?;
        let lc_inv = lc.inv()?;
        let mut rem = self.as_polynomial();
        let divisor = divisor.as_polynomial();
        let mut quot = TruncatedSeries::zero(&self.vars, POLY_CAP);
        while let Some((rm, rc)) = rem.terms.iter().next_back() {
            if !lm.divides(rm) {
                return None;
            }
            let qm = lm.quotient_of(rm);
            let qc = rc * &lc_inv;
            let mut t = TruncatedSeries::zero(&self.vars, POLY_CAP);
            t.add_term(qm, &qc);
            rem = rem.add_unchecked(&t.mul_unchecked(&divisor).neg_ref());
            quot.add_term(t.terms.into_iter().next()?.0, &qc);
        }
        Some(quot.lowered(self.cap))
    }
}

pub(crate) fn index_of(vars: &Vars, name: &str) -> Result<usize> {
    vars.iter()
        .position(|v| v == name)
        .ok_or_else(|| Error::UnknownVariable(name.to_string()))
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    /// Sum certified to the smaller cap. Panics if the variables differ.
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_vars(rhs).expect("series in different variables");
        self.add_unchecked(rhs)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_vars(rhs).expect("series in different variables");
        self.add_unchecked(&rhs.neg_ref())
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_vars(rhs).expect("series in different variables");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.neg_ref()
    }
}

impl fmt::Display for TruncatedSeries {
    /// Input syntax, lowest degree first: `z2 - 2*i*z1*w1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], e)
                    }
                })
                .collect();
            let negate = c.is_real() && c.re() < &num_rational::BigRational::zero()
                || c.re().is_zero() && c.im() < &num_rational::BigRational::zero();
            let shown = if negate { -c } else { c.clone() };
            let sign = match (k, negate) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            write!(f, "{sign}")?;
            if mono.is_empty() {
                write!(f, "{shown}")?;
            } else if shown.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{shown}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}
