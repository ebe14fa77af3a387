use std::fmt;

use serde::Serialize;

use super::{Monomial, MultiPoly, Var, VarSet};
use crate::error::{Error, Result};
use crate::padic::{PAdicContext, PAdicScalar};

/// Dense univariate polynomial over `Z/p^N`; `coeffs[i]` multiplies `t^i`.
///
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    ctx: PAdicContext,
    coeffs: Vec<u64>,
}

impl UniPoly {
    pub fn zero(ctx: PAdicContext) -> Self {
        UniPoly {
            ctx,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: PAdicScalar) -> Self {
        Self::from_raw(c.context(), vec![c.residue()])
    }

    pub fn from_i64(ctx: PAdicContext, coeffs: &[i64]) -> Self {
        Self::from_raw(ctx, coeffs.iter().map(|&c| ctx.reduce_i128(c as i128)).collect())
    }

    pub(crate) fn from_raw(ctx: PAdicContext, coeffs: Vec<u64>) -> Self {
        let mut p = UniPoly { ctx, coeffs };
        p.trim();
        p
    }

    /// `t^k`
    pub fn monomial(ctx: PAdicContext, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1 % ctx.modulus();
        Self::from_raw(ctx, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn context(&self) -> PAdicContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> PAdicScalar {
        PAdicScalar::new(self.ctx, self.coeffs.get(i).copied().unwrap_or(0))
    }

    pub fn leading(&self) -> Option<PAdicScalar> {
        self.coeffs.last().map(|&c| PAdicScalar::new(self.ctx, c))
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn add(&self, rhs: &UniPoly) -> UniPoly {
        assert_eq!(self.ctx, rhs.ctx, "context mismatch");
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.ctx.add(
                    self.coeffs.get(i).copied().unwrap_or(0),
                    rhs.coeffs.get(i).copied().unwrap_or(0),
                )
            })
            .collect();
        Self::from_raw(self.ctx, coeffs)
    }

    pub fn neg(&self) -> UniPoly {
        Self::from_raw(self.ctx, self.coeffs.iter().map(|&c| self.ctx.neg(c)).collect())
    }

    pub fn sub(&self, rhs: &UniPoly) -> UniPoly {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &UniPoly) -> UniPoly {
        assert_eq!(self.ctx, rhs.ctx, "context mismatch");
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(self.ctx);
        }
        let mut out = vec![0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = self.ctx.add(out[i + j], self.ctx.mul(a, b));
            }
        }
        Self::from_raw(self.ctx, out)
    }

    pub fn scale(&self, c: &PAdicScalar) -> UniPoly {
        assert_eq!(self.ctx, c.context(), "context mismatch");
        Self::from_raw(
            self.ctx,
            self.coeffs.iter().map(|&a| self.ctx.mul(a, c.residue())).collect(),
        )
    }

    pub fn pow(&self, mut k: u32) -> UniPoly {
        let mut acc = Self::constant(PAdicScalar::one(self.ctx));
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplies by `t^k`.
    pub fn shift(&self, k: usize) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::from_raw(self.ctx, coeffs)
    }

    pub fn derivative(&self) -> UniPoly {
        let m = self.ctx.modulus();
        Self::from_raw(
            self.ctx,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| self.ctx.mul(c, i as u64 % m))
                .collect(),
        )
    }

    pub fn eval(&self, t: &PAdicScalar) -> PAdicScalar {
        assert_eq!(self.ctx, t.context(), "context mismatch");
        let r = self
            .coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.ctx.add(self.ctx.mul(acc, t.residue()), c));
        PAdicScalar::new(self.ctx, r)
    }

    pub fn reduce_to(&self, precision: u32) -> UniPoly {
        assert!(precision <= self.ctx.precision());
        let ctx = self.ctx.with_precision(precision).expect("valid precision");
        Self::from_raw(ctx, self.coeffs.iter().map(|&c| c % ctx.modulus()).collect())
    }

    pub fn reduce_mod_p(&self) -> UniPoly {
        self.reduce_to(1)
    }

    pub fn divide_by_p(&self) -> Result<UniPoly> {
        let ctx = self.ctx.lower()?;
        let p = self.ctx.p();
        if self.coeffs.iter().any(|c| c % p != 0) {
            return Err(Error::NotDivisibleByP);
        }
        Ok(Self::from_raw(ctx, self.coeffs.iter().map(|c| c / p).collect()))
    }

    /// Monic gcd over the residue field (requires precision 1).
    pub fn gcd_mod_p(&self, rhs: &UniPoly) -> UniPoly {
        assert_eq!(self.ctx.precision(), 1, "gcd needs a field");
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let r = a.rem_mod_p(&b);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) => a.scale(&l.inv().expect("nonzero in a field")),
            None => a,
        }
    }

    fn rem_mod_p(&self, d: &UniPoly) -> UniPoly {
        let ctx = self.ctx;
        let dl = d.coeffs.len();
        let inv_lead = ctx.inv(*d.coeffs.last().expect("nonzero divisor")).expect("field");
        let mut r = self.coeffs.clone();
        while r.len() >= dl {
            let q = ctx.mul(*r.last().unwrap(), inv_lead);
            let off = r.len() - dl;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                r[off + i] = ctx.sub(r[off + i], ctx.mul(q, dc));
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Self::from_raw(ctx, r)
    }

    /// Views as a multivariate polynomial in `v`.
    pub fn to_multi(&self, v: Var) -> MultiPoly {
        MultiPoly::from_terms(
            self.ctx,
            VarSet::of(&[v]),
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| (Monomial::var(v, i as u16), c as i64)),
        )
    }

    /// Reads a polynomial that only involves `v`.
    pub fn from_multi(f: &MultiPoly, v: Var) -> Option<UniPoly> {
        let deg = f.degree_in(v).unwrap_or(0) as usize;
        let mut coeffs = vec![0; deg + 1];
        for (m, c) in f.terms() {
            if m.total_degree() != m.exp(v) as u32 {
                return None;
            }
            coeffs[m.exp(v) as usize] = c.residue();
        }
        Some(Self::from_raw(f.context(), coeffs))
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl Serialize for UniPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}
