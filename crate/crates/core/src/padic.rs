//! Truncated p-adic integers `Z/p^N`.
//!
//! Every value carries the [`PAdicContext`] it lives in. A value at precision
//! `N` is only known mod `p^N`; operations that lose a power of `p` (the Fermat
//! quotient) hand back a value in the context of precision `N - 1`.
//!
//! Residues are `u64` with `p^N < 2^62`, and products go through `u128`, so no
//! operation can overflow.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_MODULUS: u128 = 1 << 62;

/// The prime `p` and the precision `N`: all values are known mod `p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicContext {
    p: u64,
    precision: u32,
    modulus: u64,
}

impl PAdicContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenPrime(p));
        }
        if precision == 0 {
            return Err(Error::ZeroPrecision);
        }
        let mut modulus: u128 = 1;
        for _ in 0..precision {
            modulus *= p as u128;
            if modulus >= MAX_MODULUS {
                return Err(Error::ModulusTooLarge { p, precision });
            }
        }
        Ok(PAdicContext {
            p,
            precision,
            modulus: modulus as u64,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `p^N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The same prime at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        PAdicContext::new(self.p, precision)
    }

    /// Precision 1, i.e. the residue field `F_p`.
    pub fn residue_field(&self) -> Self {
        PAdicContext {
            p: self.p,
            precision: 1,
            modulus: self.p,
        }
    }

    /// The context one power of `p` coarser.
    pub fn lower(&self) -> Result<Self> {
        if self.precision == 1 {
            return Err(Error::PrecisionExhausted);
        }
        Ok(PAdicContext {
            p: self.p,
            precision: self.precision - 1,
            modulus: self.modulus / self.p,
        })
    }

    pub fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.modulus as i128) as u64
    }

    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub(crate) fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    pub(crate) fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub(crate) fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub(crate) fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse by the extended Euclidean algorithm.
    pub(crate) fn inv(&self, a: u64) -> Result<u64> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit(a.to_string()));
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(self.reduce_i128(old_s))
    }
}

impl fmt::Display for PAdicContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.precision)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Legendre symbol `(a/p)` via Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i8 {
    let ctx = PAdicContext {
        p,
        precision: 1,
        modulus: p,
    };
    let r = ctx.reduce_i128(a as i128);
    if r == 0 {
        return 0;
    }
    if ctx.pow(r, (p - 1) / 2) == 1 {
        1
    } else {
        -1
    }
}

/// An element of `Z/p^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    residue: u64,
    ctx: PAdicContext,
}

impl PAdicScalar {
    pub fn new(ctx: PAdicContext, residue: u64) -> Self {
        PAdicScalar {
            residue: residue % ctx.modulus,
            ctx,
        }
    }

    pub fn from_i64(ctx: PAdicContext, v: i64) -> Self {
        PAdicScalar {
            residue: ctx.reduce_i128(v as i128),
            ctx,
        }
    }

    pub fn zero(ctx: PAdicContext) -> Self {
        PAdicScalar { residue: 0, ctx }
    }

    pub fn one(ctx: PAdicContext) -> Self {
        PAdicScalar::new(ctx, 1)
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn context(&self) -> PAdicContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ctx.is_unit(self.residue)
    }

    /// Residue class mod `p`.
    pub fn residue_mod_p(&self) -> u64 {
        self.residue % self.ctx.p
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        Ok(Self::new(self.ctx, self.ctx.add(self.residue, rhs.residue)))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        Ok(Self::new(self.ctx, self.ctx.sub(self.residue, rhs.residue)))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        Ok(Self::new(self.ctx, self.ctx.mul(self.residue, rhs.residue)))
    }

    fn check(&self, rhs: &Self) -> Result<()> {
        if self.ctx != rhs.ctx {
            return Err(Error::ContextMismatch {
                left: self.ctx.to_string(),
                right: rhs.ctx.to_string(),
            });
        }
        Ok(())
    }

    pub fn pow(&self, exp: u64) -> Self {
        Self::new(self.ctx, self.ctx.pow(self.residue, exp))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self::new(self.ctx, self.ctx.inv(self.residue)?))
    }

    /// The unique lift of `r mod p` fixed by `x -> x^p`.
    ///
    /// Iterates `r -> r^p`; the iterate after `N - 1` steps is already the
    /// fixed point mod `p^N`.
    pub fn teichmuller(ctx: PAdicContext, r: u64) -> Self {
        let mut t = r % ctx.p;
        for _ in 0..ctx.precision {
            let next = ctx.pow(t, ctx.p);
            if next == t {
                break;
            }
            t = next;
        }
        debug_assert_eq!(ctx.pow(t, ctx.p), t);
        Self::new(ctx, t)
    }

    /// `(a - a^p) / p`, the p-derivation of `Z_p`, known mod `p^(N-1)`.
    pub fn fermat_quotient(&self) -> Result<Self> {
        let lower = self.ctx.lower()?;
        let diff = self.ctx.sub(self.residue, self.ctx.pow(self.residue, self.ctx.p));
        debug_assert_eq!(diff % self.ctx.p, 0);
        Ok(Self::new(lower, diff / self.ctx.p))
    }

    /// The square root congruent to 1 mod p of a principal unit.
    ///
    /// Newton iteration on the inverse root, `z <- z(3 - u z^2)/2` from
    /// `z = 1`, then `sqrt(u) = u z`.
    pub fn sqrt_principal(&self) -> Result<Self> {
        if self.residue % self.ctx.p != 1 {
            return Err(Error::NotPrincipalUnit(self.residue.to_string()));
        }
        let ctx = self.ctx;
        let half = ctx.inv(2)?;
        let mut z = 1 % ctx.modulus;
        for _ in 0..newton_steps(ctx.precision) {
            let uz2 = ctx.mul(self.residue, ctx.mul(z, z));
            z = ctx.mul(ctx.mul(z, ctx.sub(3 % ctx.modulus, uz2)), half);
        }
        Ok(Self::new(ctx, ctx.mul(self.residue, z)))
    }

    /// Drops precision to `precision <= N`.
    pub fn reduce_to(&self, precision: u32) -> Result<Self> {
        let ctx = self.ctx.with_precision(precision)?;
        assert!(precision <= self.ctx.precision, "reduce_to cannot raise precision");
        Ok(Self::new(ctx, self.residue))
    }

    pub fn reduce_mod_p(&self) -> Self {
        Self::new(self.ctx.residue_field(), self.residue)
    }

    /// Reinterprets the residue in a context of higher precision.
    ///
    /// This is the coefficient-wise lift with residues in `[0, p^N)`.
    pub fn lift_to(&self, ctx: PAdicContext) -> Self {
        assert_eq!(ctx.p, self.ctx.p);
        Self::new(ctx, self.residue)
    }

    /// Signed representative in `(-p^N/2, p^N/2]`.
    pub fn signed(&self) -> i64 {
        if self.residue > self.ctx.modulus / 2 {
            self.residue as i64 - self.ctx.modulus as i64
        } else {
            self.residue as i64
        }
    }
}

/// `ceil(log2 N) + 1` Newton steps reach precision `N`.
pub(crate) fn newton_steps(precision: u32) -> u32 {
    let mut steps = 0;
    while (1u64 << steps) < precision as u64 {
        steps += 1;
    }
    steps + 1
}

/// Coefficients `s_0, ..., s_{len-1}` of `sqrt(1 + t) mod t^len` over `Z/p^N`.
///
/// Uses the same inverse-root Newton scheme as [`PAdicScalar::sqrt_principal`],
/// run on truncated power series in `t`.
pub fn principal_sqrt_series(ctx: PAdicContext, len: usize) -> Vec<u64> {
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut out = vec![0; len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
            }
        }
        out
    };
    let half = ctx.inv(2).expect("2 is a unit for odd p");
    let mut u = vec![0; len];
    u[0] = 1 % ctx.modulus;
    if len > 1 {
        u[1] = 1 % ctx.modulus;
    }
    let mut z = vec![0; len];
    z[0] = 1 % ctx.modulus;
    let mut steps = 0;
    while (1usize << steps) < len {
        steps += 1;
    }
    for _ in 0..=steps {
        let uz2 = mul(&u, &mul(&z, &z));
        let mut three_minus: Vec<u64> = uz2.iter().map(|&c| ctx.neg(c)).collect();
        three_minus[0] = ctx.add(three_minus[0], 3 % ctx.modulus);
        z = mul(&z, &three_minus).into_iter().map(|c| ctx.mul(c, half)).collect();
    }
    mul(&u, &z)
}

impl Add for PAdicScalar {
    type Output = PAdicScalar;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("context mismatch")
    }
}

impl Sub for PAdicScalar {
    type Output = PAdicScalar;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("context mismatch")
    }
}

impl Mul for PAdicScalar {
    type Output = PAdicScalar;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("context mismatch")
    }
}

impl Neg for PAdicScalar {
    type Output = PAdicScalar;
    fn neg(self) -> Self {
        Self::new(self.ctx, self.ctx.neg(self.residue))
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarWire {
    residue: String,
    p: u64,
    precision: u32,
}

impl Serialize for PAdicScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarWire {
            residue: self.residue.to_string(),
            p: self.ctx.p,
            precision: self.ctx.precision,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdicScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = ScalarWire::deserialize(d)?;
        let ctx = PAdicContext::new(w.p, w.precision).map_err(D::Error::custom)?;
        let residue: u64 = w.residue.parse().map_err(D::Error::custom)?;
        if residue >= ctx.modulus {
            return Err(D::Error::custom("residue out of range"));
        }
        Ok(PAdicScalar::new(ctx, residue))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, n: u32) -> PAdicContext {
        PAdicContext::new(p, n).unwrap()
    }

    /// Exhaustive search for a modular inverse, independent of Euclid.
    fn brute_inverse(a: u64, m: u64) -> Option<u64> {
        (0..m).find(|&b| (a * b) % m == 1)
    }

    #[test]
    fn context_validation() {
        assert_eq!(PAdicContext::new(4, 2), Err(Error::NotPrime(4)));
        assert_eq!(PAdicContext::new(2, 2), Err(Error::EvenPrime(2)));
        assert_eq!(PAdicContext::new(5, 0), Err(Error::ZeroPrecision));
        assert!(matches!(PAdicContext::new(5, 40), Err(Error::ModulusTooLarge { .. })));
        assert_eq!(ctx(5, 3).modulus(), 125);
    }

    #[test]
    fn inverse_examples() {
        let c = ctx(5, 2);
        assert_eq!(PAdicScalar::new(c, 1).inv().unwrap().residue(), 1);
        assert_eq!(brute_inverse(7, 25), Some(18));
        assert_eq!(PAdicScalar::new(c, 7).inv().unwrap().residue(), 18);
        assert!(matches!(PAdicScalar::new(c, 5).inv(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn teichmuller_examples() {
        let c = ctx(5, 2);
        assert_eq!(PAdicScalar::teichmuller(c, 0).residue(), 0);
        assert_eq!(PAdicScalar::teichmuller(c, 1).residue(), 1);
        // fixpoint of r -> r^5 mod 25 starting from 2
        let mut r = 2u64;
        loop {
            let n = (0..5).fold(1u64, |acc, _| acc * r % 25);
            if n == r {
                break;
            }
            r = n;
        }
        assert_eq!(r, 7);
        assert_eq!(PAdicScalar::teichmuller(c, 2).residue(), 7);
    }

    #[test]
    fn fermat_quotient_examples() {
        let c = ctx(5, 3);
        let q = PAdicScalar::new(c, 2).fermat_quotient().unwrap();
        // (2 - 32) / 5 = -6
        assert_eq!(q.residue(), 19);
        assert_eq!(q.context().precision(), 2);
        assert!(PAdicScalar::zero(c).fermat_quotient().unwrap().is_zero());
        assert_eq!(
            PAdicScalar::new(ctx(5, 1), 2).fermat_quotient(),
            Err(Error::PrecisionExhausted)
        );
    }

    #[test]
    fn legendre_examples() {
        for p in [3u64, 5, 7, 11] {
            assert_eq!(legendre(1, p), 1);
            assert_eq!(legendre(0, p), 0);
            assert_eq!(legendre(p as i64, p), 0);
        }
        let squares: Vec<u64> = (1..5u64).map(|x| x * x % 5).collect();
        assert!(!squares.contains(&2));
        assert_eq!(legendre(2, 5), -1);
        assert_eq!(legendre(-1, 5), 1);
        assert_eq!(legendre(-1, 7), -1);
    }

    #[test]
    fn sqrt_examples() {
        let c = ctx(5, 2);
        assert_eq!(PAdicScalar::one(c).sqrt_principal().unwrap().residue(), 1);
        let brute: Vec<u64> = (0..25).filter(|&r| r * r % 25 == 6 && r % 5 == 1).collect();
        assert_eq!(brute, vec![16]);
        assert_eq!(PAdicScalar::new(c, 6).sqrt_principal().unwrap().residue(), 16);
        assert!(matches!(
            PAdicScalar::new(c, 2).sqrt_principal(),
            Err(Error::NotPrincipalUnit(_))
        ));
    }

    #[test]
    fn newton_step_count() {
        assert_eq!(newton_steps(1), 1);
        assert_eq!(newton_steps(2), 2);
        assert_eq!(newton_steps(3), 3);
        assert_eq!(newton_steps(4), 3);
        assert_eq!(newton_steps(5), 4);
    }

    #[test]
    fn sqrt_series_matches_binomial() {
        // sqrt(1+t) = 1 + t/2 - t^2/8 + t^3/16 - 5 t^4/128
        let c = ctx(7, 3);
        let s = principal_sqrt_series(c, 5);
        let frac = |n: i64, d: u64| {
            let n = PAdicScalar::from_i64(c, n);
            (n * PAdicScalar::new(c, d).inv().unwrap()).residue()
        };
        assert_eq!(s, vec![1, frac(1, 2), frac(-1, 8), frac(1, 16), frac(-5, 128)]);
    }

    #[test]
    fn sqrt_unique_exhaustive() {
        // all principal units mod p^N with p^N <= 10^6 in a few contexts
        for (p, n) in [(3u64, 3u32), (5, 3), (7, 2), (11, 2)] {
            let c = ctx(p, n);
            let m = c.modulus();
            for u in (1..m).step_by(p as usize) {
                let r = PAdicScalar::new(c, u).sqrt_principal().unwrap();
                assert_eq!(r.pow(2).residue(), u);
                assert_eq!(r.residue() % p, 1);
                let roots = (0..m)
                    .filter(|&x| x % p == 1 && (x as u128 * x as u128 % m as u128) as u64 == u)
                    .count();
                assert_eq!(roots, 1);
            }
        }
    }

    #[test]
    fn serde_roundtrip() {
        let v = PAdicScalar::new(ctx(5, 3), 77);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"residue":"77","p":5,"precision":3}"#);
        let back: PAdicScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<PAdicScalar>(r#"{"residue":"125","p":5,"precision":3}"#).is_err());
    }

    #[test]
    fn mismatched_contexts() {
        let a = PAdicScalar::new(ctx(5, 3), 1);
        let b = PAdicScalar::new(ctx(5, 2), 1);
        assert!(matches!(a.try_add(&b), Err(Error::ContextMismatch { .. })));
    }

    fn prime_and_precision() -> impl Strategy<Value = (u64, u32)> {
        (prop::sample::select(vec![3u64, 5, 7, 11, 13]), 1u32..5)
    }

    proptest! {
        #[test]
        fn unit_inverse((p, n) in prime_and_precision(), a in any::<u64>()) {
            let c = ctx(p, n);
            let x = PAdicScalar::new(c, a);
            prop_assume!(x.is_unit());
            prop_assert_eq!((x * x.inv().unwrap()).residue(), 1 % c.modulus());
        }

        #[test]
        fn teichmuller_fixed((p, n) in prime_and_precision(), r in 0u64..13) {
            let c = ctx(p, n);
            let t = PAdicScalar::teichmuller(c, r % p);
            prop_assert_eq!(t.pow(p), t);
            prop_assert_eq!(t.residue_mod_p(), r % p);
            if n > 1 {
                prop_assert!(t.fermat_quotient().unwrap().is_zero());
            }
        }

        #[test]
        fn fermat_quotient_sum_rule((p, n) in prime_and_precision(), a in any::<u64>(), b in any::<u64>()) {
            // phi(a+b) = phi(a) + phi(b) with phi(x) = x^p + p*delta(x)
            // gives delta(a+b) = delta(a) + delta(b) - sum_{0<k<p} C(p,k)/p a^k b^(p-k)
            prop_assume!(n > 1);
            let c = ctx(p, n);
            let (x, y) = (PAdicScalar::new(c, a), PAdicScalar::new(c, b));
            let lower = c.lower().unwrap();
            let lhs = (x + y).fermat_quotient().unwrap();
            let mut rhs = x.fermat_quotient().unwrap() + y.fermat_quotient().unwrap();
            let mut binom: u128 = 1;
            for k in 1..p {
                binom = binom * (p - k + 1) as u128 / k as u128;
                let coeff = PAdicScalar::new(lower, (binom / p as u128) as u64);
                let term = coeff
                    * PAdicScalar::new(lower, x.residue()).pow(k)
                    * PAdicScalar::new(lower, y.residue()).pow(p - k);
                rhs = rhs - term;
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn sqrt_roundtrip((p, n) in prime_and_precision(), k in any::<u64>()) {
            let c = ctx(p, n);
            let u = PAdicScalar::new(c, 1 + p * (k % c.modulus()));
            let r = u.sqrt_principal().unwrap();
            prop_assert_eq!(r * r, u);
            prop_assert_eq!(r.residue_mod_p(), 1);
        }
    }
}
