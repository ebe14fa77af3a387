//! Fractions with denominators `A(H1,H2)^a N(H1,H2)^n x1^e1 x2^e2`, i.e.
//! functions on the open set where `Q` is invertible.
//!
//! Denominators are tracked as exponent vectors and never inverted;
//! comparisons cross-multiply.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_h, make_n, LevelSet, LevelSetElement, SystemParams};
use crate::hasse::{r_series, HasseData};
use crate::padic::{PAdicContext, PAdicScalar};
use crate::poly::{Monomial, MultiPoly, Var, VarSet};

/// Exponents of `A(H)`, `N(H)`, `x1`, `x2` in a denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Denominator {
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub x1: u32,
    pub x2: u32,
}

impl Denominator {
    pub const ONE: Denominator = Denominator {
        a: 0,
        n: 0,
        x1: 0,
        x2: 0,
    };

    pub fn new(a: u32, n: u32, x1: u32, x2: u32) -> Self {
        Denominator { a, n, x1, x2 }
    }

    pub fn max(self, o: Self) -> Self {
        Denominator::new(self.a.max(o.a), self.n.max(o.n), self.x1.max(o.x1), self.x2.max(o.x2))
    }

    pub fn plus(self, o: Self) -> Self {
        Denominator::new(self.a + o.a, self.n + o.n, self.x1 + o.x1, self.x2 + o.x2)
    }

    pub fn times(self, k: u32) -> Self {
        Denominator::new(self.a * k, self.n * k, self.x1 * k, self.x2 * k)
    }

    fn minus(self, o: Self) -> Self {
        Denominator::new(self.a - o.a, self.n - o.n, self.x1 - o.x1, self.x2 - o.x2)
    }
}

/// The system together with `A(H1, H2)` and `N(H1, H2)`.
#[derive(Debug)]
pub struct LocalRing {
    params: SystemParams,
    hasse: HasseData,
    a_h: MultiPoly,
    n_h: MultiPoly,
}

impl LocalRing {
    pub fn new(params: &SystemParams) -> Result<Arc<LocalRing>> {
        let hasse = r_series(params)?;
        let (h1, h2) = make_h(params);
        let bind = [(Var::Z1, h1), (Var::Z2, h2)];
        let a_h = hasse.a.substitute(&bind)?.with_vars(VarSet::SPACE);
        let n_h = make_n(params).substitute(&bind)?.with_vars(VarSet::SPACE);
        Ok(Arc::new(LocalRing {
            params: *params,
            hasse,
            a_h,
            n_h,
        }))
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn hasse(&self) -> &HasseData {
        &self.hasse
    }

    pub fn context(&self) -> PAdicContext {
        self.params.context()
    }

    /// `A(H1, H2)` at full precision.
    pub fn a_h(&self) -> &MultiPoly {
        &self.a_h
    }

    pub fn n_h(&self) -> &MultiPoly {
        &self.n_h
    }

    /// The denominator as a polynomial at precision `ctx`.
    pub fn den_poly(&self, d: Denominator, ctx: PAdicContext) -> MultiPoly {
        let prec = ctx.precision();
        let mut out = MultiPoly::one(ctx, VarSet::SPACE);
        if d.a > 0 {
            out = out * self.a_h.reduce_to(prec).pow(d.a);
        }
        if d.n > 0 {
            out = out * self.n_h.reduce_to(prec).pow(d.n);
        }
        out.shift(&Monomial::from_pairs(&[(Var::X1, d.x1 as u16), (Var::X2, d.x2 as u16)]))
    }

    pub fn element(self: &Arc<Self>, numerator: MultiPoly, denominator: Denominator) -> LocalizedElement {
        assert!(numerator.context().precision() <= self.context().precision());
        LocalizedElement {
            ring: Arc::clone(self),
            numerator: numerator.with_vars(VarSet::SPACE),
            denominator,
        }
        .normalized()
    }

    pub fn poly(self: &Arc<Self>, f: MultiPoly) -> LocalizedElement {
        self.element(f, Denominator::ONE)
    }

    pub fn var(self: &Arc<Self>, v: Var) -> LocalizedElement {
        self.poly(MultiPoly::var(self.context(), v))
    }

    pub fn constant(self: &Arc<Self>, c: PAdicScalar) -> LocalizedElement {
        self.poly(MultiPoly::constant(c, VarSet::SPACE))
    }

    /// Image of `f(x1, x2, x3)` under `x_i -> images[i]`.
    pub fn compose(self: &Arc<Self>, f: &MultiPoly, images: &[LocalizedElement; 3]) -> Result<LocalizedElement> {
        let ctx = images[0].context();
        if f.context() != ctx {
            return Err(Error::ContextMismatch {
                left: ctx.to_string(),
                right: f.context().to_string(),
            });
        }
        let vars = [Var::X1, Var::X2, Var::X3];
        let mut powers: Vec<Vec<LocalizedElement>> = Vec::with_capacity(3);
        for (v, img) in vars.iter().zip(images) {
            let max = f.degree_in(*v).unwrap_or(0);
            let mut pw = vec![self.constant(PAdicScalar::one(ctx))];
            for k in 1..=max as usize {
                let next = &pw[k - 1] * img;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = self.poly(MultiPoly::zero(ctx, VarSet::SPACE));
        for (m, c) in f.terms() {
            for w in [Var::Z1, Var::Z2, Var::X] {
                if m.exp(w) > 0 {
                    return Err(Error::UnboundVariable(w));
                }
            }
            let mut term = powers[0][m.exp(Var::X1) as usize].scale(&c);
            for (k, v) in vars.iter().enumerate().skip(1) {
                let e = m.exp(*v) as usize;
                if e > 0 {
                    term = &term * &powers[k][e];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }
}

/// `numerator / denominator` with `numerator` a polynomial in `x1, x2, x3`.
#[derive(Clone)]
pub struct LocalizedElement {
    ring: Arc<LocalRing>,
    numerator: MultiPoly,
    denominator: Denominator,
}

impl fmt::Debug for LocalizedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalizedElement")
            .field("numerator", &self.numerator)
            .field("denominator", &self.denominator)
            .finish()
    }
}

impl fmt::Display for LocalizedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.denominator;
        write!(
            f,
            "({}) / [A^{} N^{} x1^{} x2^{}]",
            self.numerator, d.a, d.n, d.x1, d.x2
        )
    }
}

/// Serialized numerator and denominator exponents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ElementWire {
    pub numerator: MultiPoly,
    pub denominator: Denominator,
}

impl LocalizedElement {
    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> Denominator {
        self.denominator
    }

    pub fn context(&self) -> PAdicContext {
        self.numerator.context()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn to_wire(&self) -> ElementWire {
        ElementWire {
            numerator: self.numerator.clone(),
            denominator: self.denominator,
        }
    }

    /// The denominator as a polynomial at this element's precision.
    pub fn den_poly(&self) -> MultiPoly {
        self.ring.den_poly(self.denominator, self.context())
    }

    fn with(&self, numerator: MultiPoly, denominator: Denominator) -> Self {
        self.ring.element(numerator, denominator)
    }

    /// Cancels common powers of `x1`, `x2`.
    fn normalized(mut self) -> Self {
        for v in [Var::X1, Var::X2] {
            let e = if v == Var::X1 {
                &mut self.denominator.x1
            } else {
                &mut self.denominator.x2
            };
            if *e > 0 {
                let (num, k) = self.numerator.strip_var_power(v, *e as u16);
                self.numerator = num;
                *e -= k as u32;
            }
        }
        if self.numerator.is_zero() {
            self.denominator = Denominator::ONE;
        }
        self
    }

    fn check(&self, rhs: &Self) {
        assert_eq!(self.context(), rhs.context(), "context mismatch");
        assert!(
            Arc::ptr_eq(&self.ring, &rhs.ring) || self.ring.params == rhs.ring.params,
            "elements of different rings"
        );
    }

    /// Both numerators over the common denominator.
    fn common(&self, rhs: &Self) -> (MultiPoly, MultiPoly, Denominator) {
        self.check(rhs);
        let d = self.denominator.max(rhs.denominator);
        let lift = |e: &Self| {
            let extra = d.minus(e.denominator);
            if extra == Denominator::ONE {
                e.numerator.clone()
            } else {
                &e.numerator * &self.ring.den_poly(extra, e.context())
            }
        };
        (lift(self), lift(rhs), d)
    }

    /// Numerator of `self - rhs` over the common denominator.
    pub fn cleared_difference(&self, rhs: &Self) -> MultiPoly {
        let (a, b, _) = self.common(rhs);
        a - b
    }

    pub fn scale(&self, c: &PAdicScalar) -> Self {
        self.with(self.numerator.scale(c), self.denominator)
    }

    pub fn pow(&self, k: u32) -> Self {
        self.with(self.numerator.pow(k), self.denominator.times(k))
    }

    pub fn reduce_to(&self, precision: u32) -> Self {
        self.with(self.numerator.reduce_to(precision), self.denominator)
    }

    pub fn reduce_mod_p(&self) -> Self {
        self.reduce_to(1)
    }

    /// Coefficient-wise lift with residues kept in `[0, p^n)`.
    pub fn lift_to(&self, ctx: PAdicContext) -> Self {
        self.with(self.numerator.lift_to(ctx), self.denominator)
    }

    pub fn divide_by_p(&self) -> Result<Self> {
        Ok(self.with(self.numerator.divide_by_p()?, self.denominator))
    }

    /// Multiplies by `p`, raising the precision by one.
    pub fn times_p_lifted(&self) -> Self {
        self.with(self.numerator.times_p_lifted(), self.denominator)
    }

    /// Exponent of the largest power of `p` dividing `self`, capped at the
    /// precision.
    pub fn p_valuation(&self) -> u32 {
        self.numerator.p_valuation()
    }

    /// Numerator and denominator restricted to a level curve.
    pub fn restrict(&self, level: &LevelSet) -> (LevelSetElement, LevelSetElement) {
        let prec = level.context().precision();
        let num = self.numerator.reduce_to(prec);
        let den = self.ring.den_poly(self.denominator, num.context());
        (level.reduce(&num), level.reduce(&den))
    }
}

impl PartialEq for LocalizedElement {
    fn eq(&self, rhs: &Self) -> bool {
        if self.context() != rhs.context() || self.ring.params != rhs.ring.params {
            return false;
        }
        self.cleared_difference(rhs).is_zero()
    }
}

impl std::ops::Add for &LocalizedElement {
    type Output = LocalizedElement;
    fn add(self, rhs: &LocalizedElement) -> LocalizedElement {
        let (a, b, d) = self.common(rhs);
        self.with(a + b, d)
    }
}

impl std::ops::Sub for &LocalizedElement {
    type Output = LocalizedElement;
    fn sub(self, rhs: &LocalizedElement) -> LocalizedElement {
        let (a, b, d) = self.common(rhs);
        self.with(a - b, d)
    }
}

impl std::ops::Mul for &LocalizedElement {
    type Output = LocalizedElement;
    fn mul(self, rhs: &LocalizedElement) -> LocalizedElement {
        self.check(rhs);
        self.with(&self.numerator * &rhs.numerator, self.denominator.plus(rhs.denominator))
    }
}

impl std::ops::Neg for &LocalizedElement {
    type Output = LocalizedElement;
    fn neg(self) -> LocalizedElement {
        self.with(-&self.numerator, self.denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, n: u32) -> Arc<LocalRing> {
        let ctx = PAdicContext::new(p, n).unwrap();
        LocalRing::new(&SystemParams::from_i64(ctx, [0, 1, 2]).unwrap()).unwrap()
    }

    #[test]
    fn fractions_compare_by_cross_multiplication() {
        let r = ring(5, 2);
        let x1 = r.var(Var::X1);
        let a = r.poly(r.a_h().clone());
        // x1 A / (A x1) == 1
        let e = r.element((&x1 * &a).numerator().clone(), Denominator::new(1, 0, 1, 0));
        assert_eq!(e.denominator(), Denominator::new(1, 0, 0, 0));
        assert_eq!(e, r.constant(PAdicScalar::one(r.context())));
        // 1/x1 + 1/x2 == (x1 + x2)/(x1 x2)
        let ctx = r.context();
        let one = MultiPoly::one(ctx, VarSet::SPACE);
        let lhs = &r.element(one.clone(), Denominator::new(0, 0, 1, 0)) + &r.element(one, Denominator::new(0, 0, 0, 1));
        let rhs = r.element(
            MultiPoly::var(ctx, Var::X1) + MultiPoly::var(ctx, Var::X2),
            Denominator::new(0, 0, 1, 1),
        );
        assert_eq!(lhs, rhs);
        assert_ne!(lhs, r.constant(PAdicScalar::one(ctx)));
    }

    #[test]
    fn compose_is_identity_on_variables() {
        let r = ring(3, 2);
        let ids = [Var::X1, Var::X2, Var::X3].map(|v| r.var(v));
        let ctx = r.context();
        let (h1, _) = make_h(r.params());
        assert_eq!(r.compose(&h1, &ids).unwrap(), r.poly(h1));
        let z = MultiPoly::var(ctx, Var::Z1);
        assert_eq!(r.compose(&z, &ids).unwrap_err(), Error::UnboundVariable(Var::Z1));
    }

    proptest! {
        #[test]
        fn field_of_fractions_laws(
            ka in prop::collection::vec(-20i64..20, 3),
            kb in prop::collection::vec(-20i64..20, 3),
            da in (0u32..2, 0u32..2, 0u32..3, 0u32..3),
            db in (0u32..2, 0u32..2, 0u32..3, 0u32..3),
        ) {
            let r = ring(5, 2);
            let ctx = r.context();
            let lin = |k: &[i64]| {
                MultiPoly::var(ctx, Var::X1).scale_i64(k[0])
                    + MultiPoly::var(ctx, Var::X2).scale_i64(k[1])
                    + MultiPoly::var(ctx, Var::X3).scale_i64(k[2])
            };
            let a = r.element(lin(&ka), Denominator::new(da.0, da.1, da.2, da.3));
            let b = r.element(lin(&kb), Denominator::new(db.0, db.1, db.2, db.3));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(&a * &b, &b * &a);
            let sq = &(&a + &b) * &(&a + &b);
            let expanded = &(&(&a * &a) + &(&(&a * &b) + &(&a * &b))) + &(&b * &b);
            prop_assert_eq!(sq, expanded);
        }
    }
}
