//! The quadrics `H1, H2`, the cubic `N`, the quartic `F`, and arithmetic on
//! the level curves `E_c = {H1 = c1, H2 = c2}`.
//!
//! On `E_c` the two relations are diagonal in `x1^2, x2^2`:
//!
//! ```text
//! (a1-a2) x1^2 = (a2-a3) x3^2 + c1 - a2 c2
//! (a1-a2) x2^2 = (a3-a1) x3^2 - c1 + a1 c2
//! ```
//!
//! so the coordinate ring is free of rank 4 over polynomials in `x3`, with
//! basis `1, x1, x2, x1 x2`. [`LevelSet::reduce`] rewrites into that basis.
//! One-forms are written as multiples of the canonical form
//! `omega = dx3 / ((a1-a2) x1 x2)`; [`LevelSet::d_over_omega`] returns `g`
//! with `df = g * omega`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hasse;
use crate::padic::{PAdicContext, PAdicScalar};
use crate::poly::{Monomial, MultiPoly, UniPoly, Var, VarSet};

/// The coefficients `a1, a2, a3` with `(a1-a2)(a2-a3)(a3-a1)` a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ParamsWire", into = "ParamsWire")]
pub struct SystemParams {
    a: [PAdicScalar; 3],
}

#[derive(Serialize, Deserialize)]
struct ParamsWire {
    p: u64,
    precision: u32,
    a: [String; 3],
}

impl TryFrom<ParamsWire> for SystemParams {
    type Error = Error;
    fn try_from(w: ParamsWire) -> Result<Self> {
        let ctx = PAdicContext::new(w.p, w.precision)?;
        let mut a = [PAdicScalar::zero(ctx); 3];
        for (slot, s) in a.iter_mut().zip(&w.a) {
            let r: u64 = s
                .parse()
                .map_err(|_| Error::Malformed(format!("bad coefficient {s:?}")))?;
            if r >= ctx.modulus() {
                return Err(Error::Malformed(format!("coefficient {r} out of range")));
            }
            *slot = PAdicScalar::new(ctx, r);
        }
        SystemParams::new(a)
    }
}

impl From<SystemParams> for ParamsWire {
    fn from(p: SystemParams) -> Self {
        let ctx = p.context();
        ParamsWire {
            p: ctx.p(),
            precision: ctx.precision(),
            a: p.a.map(|x| x.residue().to_string()),
        }
    }
}

impl SystemParams {
    pub fn new(a: [PAdicScalar; 3]) -> Result<Self> {
        let ctx = a[0].context();
        if a.iter().any(|x| x.context() != ctx) {
            return Err(Error::ContextMismatch {
                left: ctx.to_string(),
                right: a.iter().map(|x| x.context().to_string()).collect::<Vec<_>>().join(","),
            });
        }
        let disc = (a[0] - a[1]) * (a[1] - a[2]) * (a[2] - a[0]);
        if !disc.is_unit() {
            return Err(Error::CoefficientsNotDistinct);
        }
        Ok(SystemParams { a })
    }

    pub fn from_i64(ctx: PAdicContext, a: [i64; 3]) -> Result<Self> {
        Self::new(a.map(|x| PAdicScalar::from_i64(ctx, x)))
    }

    /// Teichmueller lifts of three residues.
    pub fn teichmuller(ctx: PAdicContext, residues: [u64; 3]) -> Result<Self> {
        Self::new(residues.map(|r| PAdicScalar::teichmuller(ctx, r)))
    }

    pub fn context(&self) -> PAdicContext {
        self.a[0].context()
    }

    /// `a_i` for `i` in `1..=3`.
    pub fn a(&self, i: usize) -> PAdicScalar {
        self.a[i - 1]
    }

    pub fn coefficients(&self) -> [PAdicScalar; 3] {
        self.a
    }

    pub fn reduce_to(&self, precision: u32) -> SystemParams {
        SystemParams {
            a: self.a.map(|x| x.reduce_to(precision).expect("valid precision")),
        }
    }

    pub fn reduce_mod_p(&self) -> SystemParams {
        self.reduce_to(1)
    }
}

fn var(ctx: PAdicContext, v: Var) -> MultiPoly {
    MultiPoly::var(ctx, v)
}

fn cst(c: PAdicScalar) -> MultiPoly {
    MultiPoly::constant(c, VarSet::EMPTY)
}

/// `H1 = a1 x1^2 + a2 x2^2 + a3 x3^2` and `H2 = x1^2 + x2^2 + x3^2`.
pub fn make_h(params: &SystemParams) -> (MultiPoly, MultiPoly) {
    let ctx = params.context();
    let mut h1 = MultiPoly::zero(ctx, VarSet::SPACE);
    let mut h2 = MultiPoly::zero(ctx, VarSet::SPACE);
    for (i, v) in [Var::X1, Var::X2, Var::X3].into_iter().enumerate() {
        let sq = var(ctx, v).pow(2);
        h1 = h1 + sq.scale(&params.a[i]);
        h2 = h2 + sq;
    }
    (h1, h2)
}

/// `N(z1, z2) = (z1 - a1 z2)(z1 - a2 z2)(z1 - a3 z2)`.
pub fn make_n(params: &SystemParams) -> MultiPoly {
    let ctx = params.context();
    let (z1, z2) = (var(ctx, Var::Z1), var(ctx, Var::Z2));
    params
        .a
        .iter()
        .fold(MultiPoly::one(ctx, VarSet::BASE), |acc, ai| acc * (&z1 - &z2.scale(ai)))
        .with_vars(VarSet::BASE)
}

/// `F = ((a2-a3) x^2 + z1 - a2 z2)((a3-a1) x^2 - z1 + a1 z2)`, weighted
/// homogeneous of degree 4 for weights `(2, 2, 1)`.
pub fn make_f(params: &SystemParams) -> MultiPoly {
    let ctx = params.context();
    let (z1, z2, x2) = (var(ctx, Var::Z1), var(ctx, Var::Z2), var(ctx, Var::X).pow(2));
    let [a1, a2, a3] = params.a;
    let first = x2.scale(&(a2 - a3)) + &z1 - z2.scale(&a2);
    let second = x2.scale(&(a3 - a1)) - &z1 + z2.scale(&a1);
    (first * second).with_vars(VarSet::QUARTIC)
}

/// `Q = x1 x2 N(H1, H2) A_{p-1}(H1, H2)`.
pub fn make_q(params: &SystemParams) -> MultiPoly {
    let ctx = params.context();
    let (h1, h2) = make_h(params);
    let bind = [(Var::Z1, h1), (Var::Z2, h2)];
    let n_h = make_n(params).substitute(&bind).expect("N is in z1, z2");
    let a = hasse::hasse_invariant(&make_f(params), Var::X);
    let a_h = a.substitute(&bind).expect("A is in z1, z2");
    (var(ctx, Var::X1) * var(ctx, Var::X2) * n_h * a_h).with_vars(VarSet::SPACE)
}

/// A level `c = (c1, c2)` whose fiber is smooth: `N(c)` is a unit and each
/// `c_i` is a Teichmueller point (`delta c_i = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    c1: PAdicScalar,
    c2: PAdicScalar,
}

impl LevelSpec {
    pub fn new(params: &SystemParams, c1: PAdicScalar, c2: PAdicScalar) -> Result<Self> {
        let ctx = params.context();
        if c1.context() != ctx || c2.context() != ctx {
            return Err(Error::ContextMismatch {
                left: ctx.to_string(),
                right: c1.context().to_string(),
            });
        }
        if ctx.precision() > 1 {
            let fixed = |c: PAdicScalar| c.pow(ctx.p()) == c;
            if !fixed(c1) || !fixed(c2) {
                return Err(Error::NotTeichmueller {
                    c1: c1.to_string(),
                    c2: c2.to_string(),
                });
            }
        }
        let spec = LevelSpec { c1, c2 };
        if !spec.n_value(params).is_unit() {
            return Err(Error::DegenerateFiber(format!("N({c1}, {c2}) is not a unit")));
        }
        Ok(spec)
    }

    /// Teichmueller lift of a residue pair.
    pub fn teichmuller(params: &SystemParams, r1: u64, r2: u64) -> Result<Self> {
        let ctx = params.context();
        Self::new(
            params,
            PAdicScalar::teichmuller(ctx, r1),
            PAdicScalar::teichmuller(ctx, r2),
        )
    }

    /// Like [`LevelSpec::new`] but also requires `A_{p-1}(c)` to be a unit.
    pub fn admissible(params: &SystemParams, c1: PAdicScalar, c2: PAdicScalar) -> Result<Self> {
        let spec = Self::new(params, c1, c2)?;
        if !spec.hasse_value(params).is_unit() {
            return Err(Error::DegenerateFiber(format!("A_(p-1)({c1}, {c2}) vanishes mod p")));
        }
        Ok(spec)
    }

    pub fn c1(&self) -> PAdicScalar {
        self.c1
    }

    pub fn c2(&self) -> PAdicScalar {
        self.c2
    }

    pub fn residues(&self) -> (u64, u64) {
        (self.c1.residue_mod_p(), self.c2.residue_mod_p())
    }

    pub fn reduce_to(&self, precision: u32) -> LevelSpec {
        LevelSpec {
            c1: self.c1.reduce_to(precision).expect("valid precision"),
            c2: self.c2.reduce_to(precision).expect("valid precision"),
        }
    }

    pub fn n_value(&self, params: &SystemParams) -> PAdicScalar {
        let params = params.reduce_to(self.c1.context().precision());
        params.a.iter().fold(PAdicScalar::one(self.c1.context()), |acc, ai| {
            acc * (self.c1 - *ai * self.c2)
        })
    }

    /// `A_{p-1}(c1, c2)`.
    pub fn hasse_value(&self, params: &SystemParams) -> PAdicScalar {
        let params = params.reduce_to(self.c1.context().precision());
        let a = hasse::hasse_invariant(&make_f(&params), Var::X);
        let v = a
            .evaluate(&[(Var::Z1, self.c1), (Var::Z2, self.c2)])
            .expect("same context");
        v.as_constant().expect("A is in z1, z2")
    }

    pub fn is_admissible(&self, params: &SystemParams) -> bool {
        self.hasse_value(params).is_unit()
    }
}

/// `b0 + b1 x1 + b2 x2 + b12 x1 x2` with `b_i` polynomials in `x3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSetElement {
    /// Components on the basis `1, x1, x2, x1 x2`.
    b: [UniPoly; 4],
}

impl std::fmt::Display for LevelSetElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_multi())
    }
}

impl Serialize for LevelSetElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LevelSetElement", 4)?;
        for (name, b) in ["b0", "b1", "b2", "b12"].into_iter().zip(&self.b) {
            st.serialize_field(name, b)?;
        }
        st.end()
    }
}

impl LevelSetElement {
    pub fn zero(ctx: PAdicContext) -> Self {
        LevelSetElement {
            b: std::array::from_fn(|_| UniPoly::zero(ctx)),
        }
    }

    pub fn from_components(b: [UniPoly; 4]) -> Self {
        LevelSetElement { b }
    }

    /// A polynomial in `x3` alone.
    pub fn from_x3(f: UniPoly) -> Self {
        let mut e = Self::zero(f.context());
        e.b[0] = f;
        e
    }

    pub fn context(&self) -> PAdicContext {
        self.b[0].context()
    }

    /// Component `0..4` on `1, x1, x2, x1 x2`.
    pub fn component(&self, i: usize) -> &UniPoly {
        &self.b[i]
    }

    pub fn is_zero(&self) -> bool {
        self.b.iter().all(UniPoly::is_zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        LevelSetElement {
            b: std::array::from_fn(|i| self.b[i].add(&rhs.b[i])),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        LevelSetElement {
            b: std::array::from_fn(|i| self.b[i].sub(&rhs.b[i])),
        }
    }

    pub fn scale(&self, c: &PAdicScalar) -> Self {
        LevelSetElement {
            b: std::array::from_fn(|i| self.b[i].scale(c)),
        }
    }

    pub fn reduce_to(&self, precision: u32) -> Self {
        LevelSetElement {
            b: std::array::from_fn(|i| self.b[i].reduce_to(precision)),
        }
    }

    pub fn reduce_mod_p(&self) -> Self {
        self.reduce_to(1)
    }

    pub fn divide_by_p(&self) -> Result<Self> {
        let [b0, b1, b2, b3] = &self.b;
        Ok(LevelSetElement {
            b: [
                b0.divide_by_p()?,
                b1.divide_by_p()?,
                b2.divide_by_p()?,
                b3.divide_by_p()?,
            ],
        })
    }

    /// The representative as a polynomial in `x1, x2, x3`.
    pub fn to_multi(&self) -> MultiPoly {
        let ctx = self.context();
        let basis = [
            Monomial::ONE,
            Monomial::var(Var::X1, 1),
            Monomial::var(Var::X2, 1),
            Monomial::from_pairs(&[(Var::X1, 1), (Var::X2, 1)]),
        ];
        let mut out = MultiPoly::zero(ctx, VarSet::SPACE);
        for (bi, m) in self.b.iter().zip(basis) {
            out = out + bi.to_multi(Var::X3).shift(&m);
        }
        out.with_vars(VarSet::SPACE)
    }
}

/// A one-form `coefficient * omega` on `E_c`, where
/// `omega = dx3 / ((a1-a2) x1 x2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSetForm {
    pub coefficient: LevelSetElement,
}

/// JSON view of a normal form together with its level.
#[derive(Debug, Serialize)]
pub struct LevelSetRecord<'a> {
    pub spec: &'a LevelSpec,
    pub b0: &'a UniPoly,
    pub b1: &'a UniPoly,
    pub b2: &'a UniPoly,
    pub b12: &'a UniPoly,
}

/// Arithmetic on one level curve `E_c` at a fixed precision.
#[derive(Debug, Clone)]
pub struct LevelSet {
    params: SystemParams,
    spec: LevelSpec,
    /// `x1^2` and `x2^2` as polynomials in `x3`.
    r1: UniPoly,
    r2: UniPoly,
}

impl LevelSet {
    pub fn new(params: &SystemParams, spec: &LevelSpec) -> Self {
        Self::at_precision(params, spec, params.context().precision())
    }

    pub fn at_precision(params: &SystemParams, spec: &LevelSpec, precision: u32) -> Self {
        let params = params.reduce_to(precision);
        let spec = spec.reduce_to(precision);
        let ctx = params.context();
        let [a1, a2, a3] = params.a;
        let inv = (a1 - a2).inv().expect("a1 - a2 is a unit");
        let r1 = UniPoly::from_raw(ctx, vec![(spec.c1 - a2 * spec.c2).residue(), 0, (a2 - a3).residue()]).scale(&inv);
        let r2 = UniPoly::from_raw(ctx, vec![(a1 * spec.c2 - spec.c1).residue(), 0, (a3 - a1).residue()]).scale(&inv);
        LevelSet { params, spec, r1, r2 }
    }

    pub fn context(&self) -> PAdicContext {
        self.params.context()
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn spec(&self) -> &LevelSpec {
        &self.spec
    }

    pub fn record<'a>(&'a self, e: &'a LevelSetElement) -> LevelSetRecord<'a> {
        LevelSetRecord {
            spec: &self.spec,
            b0: &e.b[0],
            b1: &e.b[1],
            b2: &e.b[2],
            b12: &e.b[3],
        }
    }

    pub fn constant(&self, c: PAdicScalar) -> LevelSetElement {
        LevelSetElement::from_x3(UniPoly::constant(c))
    }

    fn basis(&self, i: usize) -> LevelSetElement {
        let mut e = LevelSetElement::zero(self.context());
        e.b[i] = UniPoly::constant(PAdicScalar::one(self.context()));
        e
    }

    /// Normal form of a polynomial in `x1, x2, x3`.
    pub fn reduce(&self, f: &MultiPoly) -> LevelSetElement {
        let ctx = self.context();
        let f = if f.context() == ctx {
            f.clone()
        } else {
            f.reduce_to(ctx.precision())
        };
        let mut r1_pows = vec![UniPoly::constant(PAdicScalar::one(ctx))];
        let mut r2_pows = r1_pows.clone();
        let mut out: [Vec<u64>; 4] = Default::default();
        for (m, c) in f.terms() {
            assert!(
                m.exp(Var::Z1) == 0 && m.exp(Var::Z2) == 0 && m.exp(Var::X) == 0,
                "level_reduce takes polynomials in x1, x2, x3"
            );
            let (e1, e2, e3) = (
                m.exp(Var::X1) as usize,
                m.exp(Var::X2) as usize,
                m.exp(Var::X3) as usize,
            );
            while r1_pows.len() <= e1 / 2 {
                let next = r1_pows.last().unwrap().mul(&self.r1);
                r1_pows.push(next);
            }
            while r2_pows.len() <= e2 / 2 {
                let next = r2_pows.last().unwrap().mul(&self.r2);
                r2_pows.push(next);
            }
            let slot = (e1 & 1) | ((e2 & 1) << 1);
            let poly = r1_pows[e1 / 2].mul(&r2_pows[e2 / 2]);
            let acc = &mut out[slot];
            if acc.len() < poly.coeffs().len() + e3 {
                acc.resize(poly.coeffs().len() + e3, 0);
            }
            for (i, &pc) in poly.coeffs().iter().enumerate() {
                acc[i + e3] = ctx.add(acc[i + e3], ctx.mul(pc, c.residue()));
            }
        }
        LevelSetElement {
            b: out.map(|v| UniPoly::from_raw(ctx, v)),
        }
    }

    /// Product in the basis `1, x1, x2, x1 x2`, using `x1^2 = r1`, `x2^2 = r2`.
    pub fn mul(&self, a: &LevelSetElement, b: &LevelSetElement) -> LevelSetElement {
        let mut out = LevelSetElement::zero(self.context());
        for i in 0..4 {
            if a.b[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if b.b[j].is_zero() {
                    continue;
                }
                let mut t = a.b[i].mul(&b.b[j]);
                let common = i & j;
                if common & 1 != 0 {
                    t = t.mul(&self.r1);
                }
                if common & 2 != 0 {
                    t = t.mul(&self.r2);
                }
                let k = i ^ j;
                out.b[k] = out.b[k].add(&t);
            }
        }
        out
    }

    /// `d f` as a multiple of `omega`.
    pub fn d(&self, f: &LevelSetElement) -> LevelSetForm {
        LevelSetForm {
            coefficient: self.d_over_omega(f),
        }
    }

    /// `g` with `d f = g * omega` on `E_c`, for `f` in normal form.
    ///
    /// Writing `D = (a1-a2) x1 x2 d/dx3` along the curve, differentiating the
    /// relations `x_i^2 = r_i(x3)` gives `D x1 = (a1-a2)/2 r1' x2`,
    /// `D x2 = (a1-a2)/2 r2' x1` and `D x3 = (a1-a2) x1 x2`.
    pub fn d_over_omega(&self, f: &LevelSetElement) -> LevelSetElement {
        let ctx = self.context();
        let [a1, a2, _] = self.params.a;
        let k = a1 - a2;
        let half_k = k * PAdicScalar::new(ctx, 2).inv().expect("odd p");
        let dr1 = self.r1.derivative().scale(&half_k);
        let dr2 = self.r2.derivative().scale(&half_k);
        let x1x2 = self.basis(3).scale(&k);
        let d_basis = [
            LevelSetElement::zero(ctx),
            self.mul(&LevelSetElement::from_x3(dr1.clone()), &self.basis(2)),
            self.mul(&LevelSetElement::from_x3(dr2.clone()), &self.basis(1)),
            LevelSetElement::from_x3(dr1.mul(&self.r2).add(&dr2.mul(&self.r1))),
        ];
        let mut out = LevelSetElement::zero(ctx);
        for (j, d_e) in d_basis.iter().enumerate() {
            let bj = &f.b[j];
            if bj.is_zero() {
                continue;
            }
            let mut ej = LevelSetElement::zero(ctx);
            ej.b[j] = bj.derivative();
            out = out.add(&self.mul(&ej, &x1x2));
            out = out.add(&self.mul(&LevelSetElement::from_x3(bj.clone()), d_e));
        }
        out
    }
}

/// Normal form of `f` on `E_c`, at the precision of `f`.
pub fn level_reduce(params: &SystemParams, spec: &LevelSpec, f: &MultiPoly) -> LevelSetElement {
    LevelSet::at_precision(params, spec, f.context().precision()).reduce(f)
}

/// Chart agreement of the canonical form: `dx_i = (a_j - a_k) x_j x_k omega`
/// for each cyclic `(i, j, k)`, and `omega` annihilates `dH1`, `dH2`.
pub fn canonical_form_identity_check(params: &SystemParams, spec: &LevelSpec) -> bool {
    let level = LevelSet::new(params, spec);
    let ctx = params.context();
    let xs = [Var::X1, Var::X2, Var::X3].map(|v| var(ctx, v));
    let mut dh1 = MultiPoly::zero(ctx, VarSet::SPACE);
    let mut dh2 = MultiPoly::zero(ctx, VarSet::SPACE);
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let chart = (&xs[j] * &xs[k]).scale(&(params.a[j] - params.a[k]));
        let from_curve = level.d_over_omega(&level.reduce(&xs[i]));
        if from_curve != level.reduce(&chart) {
            return false;
        }
        dh1 = dh1 + (&xs[i] * &chart).scale(&params.a[i]);
        dh2 = dh2 + &xs[i] * &chart;
    }
    level.reduce(&dh1).is_zero() && level.reduce(&dh2).is_zero()
}

/// The degree-2 map `E_c -> {y^2 = F(x, c)}`, `x -> x3`, `y -> (a1-a2) x1 x2`:
/// checks `y^2 = F(x3, c)` on `E_c` and `pi^*(dx/y) = omega`.
pub fn isogeny_identity_check(params: &SystemParams, spec: &LevelSpec) -> bool {
    let ctx = params.context();
    let y = (var(ctx, Var::X1) * var(ctx, Var::X2)).scale(&(params.a[0] - params.a[1]));
    isogeny_identity_check_with(params, spec, &make_f(params), &y)
}

/// [`isogeny_identity_check`] for an arbitrary quartic and `y`-image.
pub fn isogeny_identity_check_with(
    params: &SystemParams,
    spec: &LevelSpec,
    quartic: &MultiPoly,
    y_image: &MultiPoly,
) -> bool {
    let level = LevelSet::new(params, spec);
    let ctx = params.context();
    let f_on_curve = quartic
        .partial_substitute(&[
            (Var::Z1, cst(spec.c1)),
            (Var::Z2, cst(spec.c2)),
            (Var::X, var(ctx, Var::X3)),
        ])
        .expect("same context");
    let curve_eq = level.reduce(&(y_image.pow(2) - f_on_curve));
    let dx = level.d_over_omega(&level.reduce(&var(ctx, Var::X3)));
    curve_eq.is_zero() && dx == level.reduce(y_image)
}
