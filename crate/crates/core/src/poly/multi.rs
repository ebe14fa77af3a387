use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Var, VarSet, NVARS};
use crate::error::{Error, Result};
use crate::padic::{PAdicContext, PAdicScalar};

/// Exponent vector over the fixed variable order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u16; NVARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; NVARS]);

    pub fn var(v: Var, e: u16) -> Self {
        let mut m = [0; NVARS];
        m[v.index()] = e;
        Monomial(m)
    }

    pub fn from_pairs(pairs: &[(Var, u16)]) -> Self {
        let mut m = [0; NVARS];
        for &(v, e) in pairs {
            m[v.index()] += e;
        }
        Monomial(m)
    }

    pub fn exp(&self, v: Var) -> u16 {
        self.0[v.index()]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(m)
    }

    fn with_exp(&self, v: Var, e: u16) -> Monomial {
        let mut m = self.0;
        m[v.index()] = e;
        Monomial(m)
    }

    fn vars(&self) -> VarSet {
        VarSet::of(&Var::ALL.into_iter().filter(|v| self.exp(*v) > 0).collect::<Vec<_>>())
    }
}

/// Positive integer weight per variable; unlisted variables weigh 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentWeights([u32; NVARS]);

impl ExponentWeights {
    pub fn new(pairs: &[(Var, u32)]) -> Self {
        let mut w = [1; NVARS];
        for &(v, weight) in pairs {
            assert!(weight >= 1, "weights must be positive");
            w[v.index()] = weight;
        }
        ExponentWeights(w)
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        m.0.iter().zip(self.0).map(|(&e, w)| e as u32 * w).sum()
    }
}

/// A sparse polynomial over `Z/p^N` in a subset of the six variables.
///
/// No stored coefficient is zero, so equal polynomials have equal term maps.
/// The declared variable set only affects serialization; arithmetic takes the
/// union.
#[derive(Debug, Clone)]
pub struct MultiPoly {
    ctx: PAdicContext,
    vars: VarSet,
    terms: BTreeMap<Monomial, u64>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(ctx: PAdicContext, vars: VarSet) -> Self {
        MultiPoly {
            ctx,
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: PAdicContext, vars: VarSet) -> Self {
        Self::constant(PAdicScalar::one(ctx), vars)
    }

    pub fn constant(c: PAdicScalar, vars: VarSet) -> Self {
        let mut p = Self::zero(c.context(), vars);
        p.insert(Monomial::ONE, c.residue());
        p
    }

    pub fn constant_i64(ctx: PAdicContext, vars: VarSet, c: i64) -> Self {
        Self::constant(PAdicScalar::from_i64(ctx, c), vars)
    }

    pub fn var(ctx: PAdicContext, v: Var) -> Self {
        Self::monomial(ctx, Monomial::var(v, 1), 1)
    }

    pub fn monomial(ctx: PAdicContext, m: Monomial, c: i64) -> Self {
        let mut p = Self::zero(ctx, m.vars());
        p.insert(m, ctx.reduce_i128(c as i128));
        p
    }

    /// Builds from `(monomial, integer coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(ctx: PAdicContext, vars: VarSet, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, i64)>,
    {
        let mut p = Self::zero(ctx, vars);
        for (m, c) in terms {
            p.vars = p.vars.union(m.vars());
            p.add_term(m, ctx.reduce_i128(c as i128));
        }
        p
    }

    fn insert(&mut self, m: Monomial, c: u64) {
        if c != 0 {
            self.terms.insert(m, c);
        }
    }

    fn add_term(&mut self, m: Monomial, c: u64) {
        if c == 0 {
            return;
        }
        let ctx = self.ctx;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = ctx.add(*e.get(), c);
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn context(&self) -> PAdicContext {
        self.ctx
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    /// Re-declares the variable set (used for serialization headers).
    pub fn with_vars(mut self, vars: VarSet) -> Self {
        self.vars = vars;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, PAdicScalar)> + '_ {
        self.terms.iter().map(move |(m, &c)| (m, PAdicScalar::new(self.ctx, c)))
    }

    pub fn coeff(&self, m: &Monomial) -> PAdicScalar {
        PAdicScalar::new(self.ctx, self.terms.get(m).copied().unwrap_or(0))
    }

    /// The constant coefficient, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<PAdicScalar> {
        match self.terms.len() {
            0 => Some(PAdicScalar::zero(self.ctx)),
            1 => self.terms.get(&Monomial::ONE).map(|&c| PAdicScalar::new(self.ctx, c)),
            _ => None,
        }
    }

    fn check(&self, rhs: &MultiPoly) -> Result<()> {
        if self.ctx != rhs.ctx {
            return Err(Error::ContextMismatch {
                left: self.ctx.to_string(),
                right: rhs.ctx.to_string(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &MultiPoly) -> Result<MultiPoly> {
        self.check(rhs)?;
        let mut out = self.clone();
        out.vars = out.vars.union(rhs.vars);
        for (&m, &c) in &rhs.terms {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &MultiPoly) -> Result<MultiPoly> {
        self.try_add(&-rhs)
    }

    pub fn try_mul(&self, rhs: &MultiPoly) -> Result<MultiPoly> {
        self.check(rhs)?;
        let ctx = self.ctx;
        let vars = self.vars.union(rhs.vars);
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero(ctx, vars));
        }
        let mut acc: HashMap<Monomial, u64> = HashMap::with_capacity(self.terms.len() * rhs.terms.len() / 2 + 1);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &rhs.terms {
                let e = acc.entry(ma.mul(mb)).or_insert(0);
                *e = ctx.add(*e, ctx.mul(ca, cb));
            }
        }
        let terms = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        Ok(MultiPoly { ctx, vars, terms })
    }

    pub fn scale(&self, c: &PAdicScalar) -> MultiPoly {
        assert_eq!(c.context(), self.ctx, "context mismatch");
        self.scale_raw(c.residue())
    }

    pub fn scale_i64(&self, c: i64) -> MultiPoly {
        self.scale_raw(self.ctx.reduce_i128(c as i128))
    }

    fn scale_raw(&self, c: u64) -> MultiPoly {
        let ctx = self.ctx;
        let terms = self
            .terms
            .iter()
            .map(|(&m, &a)| (m, ctx.mul(a, c)))
            .filter(|&(_, a)| a != 0)
            .collect();
        MultiPoly {
            ctx,
            vars: self.vars,
            terms,
        }
    }

    /// Multiplies by a monomial.
    pub fn shift(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            ctx: self.ctx,
            vars: self.vars.union(m.vars()),
            terms: self.terms.iter().map(|(a, &c)| (a.mul(m), c)).collect(),
        }
    }

    /// Power by repeated squaring.
    pub fn pow(&self, mut k: u32) -> MultiPoly {
        let mut acc = Self::one(self.ctx, self.vars);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Composition: every variable occurring in `self` must be bound.
    pub fn substitute(&self, bindings: &[(Var, MultiPoly)]) -> Result<MultiPoly> {
        for m in self.terms.keys() {
            for v in Var::ALL {
                if m.exp(v) > 0 && !bindings.iter().any(|(b, _)| *b == v) {
                    return Err(Error::UnboundVariable(v));
                }
            }
        }
        self.partial_substitute(bindings)
    }

    /// Composition leaving unbound variables in place.
    pub fn partial_substitute(&self, bindings: &[(Var, MultiPoly)]) -> Result<MultiPoly> {
        for (_, b) in bindings {
            self.check(b)?;
        }
        let mut vars = self.vars;
        for (v, b) in bindings {
            vars = vars.without(*v).union(b.vars);
        }
        // powers of each binding, computed once
        let mut powers: Vec<(Var, Vec<MultiPoly>)> = Vec::new();
        for (v, b) in bindings {
            let max = self.terms.keys().map(|m| m.exp(*v)).max().unwrap_or(0);
            let mut pw = vec![Self::one(self.ctx, vars)];
            for i in 1..=max as usize {
                let next = &pw[i - 1] * b;
                pw.push(next);
            }
            powers.push((*v, pw));
        }
        let mut out = Self::zero(self.ctx, vars);
        for (m, &c) in &self.terms {
            let mut rest = *m;
            let mut term = Self::zero(self.ctx, vars);
            term.insert(Monomial::ONE, c);
            for (v, pw) in &powers {
                let e = m.exp(*v) as usize;
                if e > 0 {
                    rest = rest.with_exp(*v, 0);
                    term = &term * &pw[e];
                }
            }
            let term = term.shift(&rest);
            for (&tm, &tc) in &term.terms {
                out.add_term(tm, tc);
            }
        }
        Ok(out)
    }

    /// Evaluates the bound variables at scalars.
    pub fn evaluate(&self, values: &[(Var, PAdicScalar)]) -> Result<MultiPoly> {
        let bindings: Vec<(Var, MultiPoly)> = values
            .iter()
            .map(|(v, c)| (*v, MultiPoly::constant(*c, VarSet::EMPTY)))
            .collect();
        Ok(self.partial_substitute(&bindings)?.with_vars(self.vars))
    }

    /// Formal partial derivative.
    pub fn partial(&self, v: Var) -> MultiPoly {
        let ctx = self.ctx;
        let mut out = Self::zero(ctx, self.vars);
        for (m, &c) in &self.terms {
            let e = m.exp(v);
            if e > 0 {
                let coeff = ctx.mul(c, e as u64 % ctx.modulus());
                out.add_term(m.with_exp(v, e - 1), coeff);
            }
        }
        out
    }

    /// Coefficient of `v^k`, a polynomial in the remaining variables.
    pub fn coefficient_of(&self, v: Var, k: u16) -> MultiPoly {
        let mut out = Self::zero(self.ctx, self.vars.without(v));
        for (m, &c) in &self.terms {
            if m.exp(v) == k {
                out.insert(m.with_exp(v, 0), c);
            }
        }
        out
    }

    pub fn degree_in(&self, v: Var) -> Option<u16> {
        self.terms.keys().map(|m| m.exp(v)).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// True iff every term has weighted degree `d`; the zero polynomial passes.
    pub fn weighted_degree_check(&self, w: &ExponentWeights, d: u32) -> bool {
        self.terms.keys().all(|m| w.degree(m) == d)
    }

    /// Homogeneous of degree `d` in the given variables (others ignored).
    pub fn is_homogeneous_in(&self, vars: &[Var], d: u32) -> bool {
        self.terms
            .keys()
            .all(|m| vars.iter().map(|v| m.exp(*v) as u32).sum::<u32>() == d)
    }

    /// Class mod `p`.
    pub fn reduce_mod_p(&self) -> MultiPoly {
        self.reduce_to(1)
    }

    /// Drops to precision `precision <= N`.
    pub fn reduce_to(&self, precision: u32) -> MultiPoly {
        assert!(precision <= self.ctx.precision(), "cannot raise precision");
        if precision == self.ctx.precision() {
            return self.clone();
        }
        let ctx = self
            .ctx
            .with_precision(precision)
            .expect("lower precision of a valid context");
        let m = ctx.modulus();
        MultiPoly {
            ctx,
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(&k, &c)| (k, c % m))
                .filter(|&(_, c)| c != 0)
                .collect(),
        }
    }

    /// Coefficient-wise lift to a context of at least the same precision,
    /// residues kept in `[0, p^N)`.
    pub fn lift_to(&self, ctx: PAdicContext) -> MultiPoly {
        assert_eq!(ctx.p(), self.ctx.p());
        assert!(ctx.precision() >= self.ctx.precision());
        MultiPoly {
            ctx,
            vars: self.vars,
            terms: self.terms.clone(),
        }
    }

    /// Multiplies by `p`, moving to precision `N + 1`.
    pub fn times_p_lifted(&self) -> MultiPoly {
        let ctx = self
            .ctx
            .with_precision(self.ctx.precision() + 1)
            .expect("raised precision");
        MultiPoly {
            ctx,
            vars: self.vars,
            terms: self.terms.iter().map(|(&m, &c)| (m, c * self.ctx.p())).collect(),
        }
    }

    /// Exact division by `p`, landing in precision `N - 1`.
    pub fn divide_by_p(&self) -> Result<MultiPoly> {
        let ctx = self.ctx.lower()?;
        let p = self.ctx.p();
        let mut terms = BTreeMap::new();
        for (&m, &c) in &self.terms {
            if c % p != 0 {
                return Err(Error::NotDivisibleByP);
            }
            terms.insert(m, c / p);
        }
        Ok(MultiPoly {
            ctx,
            vars: self.vars,
            terms,
        })
    }

    /// Largest `k <= N` with every coefficient divisible by `p^k`.
    pub fn p_valuation(&self) -> u32 {
        let p = self.ctx.p();
        let mut k = self.ctx.precision();
        for &c in self.terms.values() {
            let mut v = 0;
            let mut c = c;
            while c % p == 0 && v < k {
                c /= p;
                v += 1;
            }
            k = k.min(v);
        }
        k
    }

    /// Cancels the largest power of `v` dividing every term, up to `max`.
    /// Returns the reduced polynomial and the power removed.
    pub fn strip_var_power(&self, v: Var, max: u16) -> (MultiPoly, u16) {
        let k = self.terms.keys().map(|m| m.exp(v)).min().unwrap_or(0).min(max);
        if k == 0 {
            return (self.clone(), 0);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| (m.with_exp(v, m.exp(v) - k), c))
            .collect();
        (
            MultiPoly {
                ctx: self.ctx,
                vars: self.vars,
                terms,
            },
            k,
        )
    }

    pub fn to_wire(&self) -> PolyWire {
        let vars: Vec<Var> = self.vars.iter().collect();
        PolyWire {
            variables: vars.clone(),
            p: self.ctx.p(),
            precision: self.ctx.precision(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (vars.iter().map(|v| m.exp(*v)).collect(), c.to_string()))
                .collect(),
        }
    }

    pub fn from_wire(w: &PolyWire) -> Result<MultiPoly> {
        let ctx = PAdicContext::new(w.p, w.precision)?;
        let vars = VarSet::of(&w.variables);
        let mut p = MultiPoly::zero(ctx, vars);
        for (exps, c) in &w.terms {
            if exps.len() != w.variables.len() {
                return Err(Error::Malformed(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    w.variables.len()
                )));
            }
            let c: u64 = c
                .parse()
                .map_err(|_| Error::Malformed(format!("bad coefficient {c:?}")))?;
            if c >= ctx.modulus() {
                return Err(Error::Malformed(format!("coefficient {c} out of range")));
            }
            let mut m = [0u16; NVARS];
            for (v, &e) in w.variables.iter().zip(exps) {
                m[v.index()] = e;
            }
            p.add_term(Monomial(m), c);
        }
        Ok(p)
    }
}

/// JSON form: a variable header and `[exponent vector, coefficient]` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyWire {
    pub variables: Vec<Var>,
    pub p: u64,
    pub precision: u32,
    pub terms: Vec<(Vec<u16>, String)>,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = PolyWire::deserialize(d)?;
        MultiPoly::from_wire(&w).map_err(D::Error::custom)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, &c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono: Vec<String> = Var::ALL
                .into_iter()
                .filter(|v| m.exp(*v) > 0)
                .map(|v| match m.exp(v) {
                    1 => v.to_string(),
                    e => format!("{v}^{e}"),
                })
                .collect();
            match (c, mono.is_empty()) {
                (_, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{}", mono.join("*"))?,
                _ => write!(f, "{c}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$try(rhs).expect("context mismatch")
            }
        }
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$try(&rhs).expect("context mismatch")
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$try(rhs).expect("context mismatch")
            }
        }
        impl $tr<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$try(&rhs).expect("context mismatch")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        let ctx = self.ctx;
        MultiPoly {
            ctx,
            vars: self.vars,
            terms: self.terms.iter().map(|(&m, &c)| (m, ctx.neg(c))).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}
