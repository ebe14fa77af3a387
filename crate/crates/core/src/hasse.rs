//! Hasse invariants, the `R_i` / `S` series used to build the flow, and
//! brute-force point counts over `F_p` that serve as an oracle for them.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{make_f, make_n, SystemParams};
use crate::padic::{legendre, PAdicContext, PAdicScalar};
use crate::poly::{Monomial, MultiPoly, UniPoly, Var, VarSet};

/// Coefficient of `x^(p-1)` in `f^((p-1)/2)`, with `p` taken from the
/// coefficient ring of `f`.
pub fn hasse_invariant(f: &MultiPoly, x: Var) -> MultiPoly {
    let p = f.context().p();
    f.pow(((p - 1) / 2) as u32).coefficient_of(x, (p - 1) as u16)
}

/// Same for a univariate polynomial, as a scalar.
pub fn hasse_invariant_uni(f: &UniPoly) -> PAdicScalar {
    let p = f.context().p() as usize;
    f.pow(((p - 1) / 2) as u32).coeff(p - 1)
}

/// `A = A_{p-1}(F)` and the numerators of
/// `A^-1 F^((p-1)/2) - x^(p-1) = sum R_i x^i` and of its antiderivative `S`.
#[derive(Debug, Clone)]
pub struct HasseData {
    pub a: MultiPoly,
    /// `r[i]` is the numerator of `R_i` over `A`, for `i` in `0..=2p-2`.
    pub r: Vec<MultiPoly>,
    /// Numerator of `S = sum R_i x^(i+1) / (i+1)` over `A`.
    pub s: MultiPoly,
}

impl HasseData {
    /// Numerator of `sum R_i x^i`.
    pub fn r_poly(&self) -> MultiPoly {
        let ctx = self.a.context();
        let mut out = MultiPoly::zero(ctx, VarSet::QUARTIC);
        for (i, ri) in self.r.iter().enumerate() {
            out = out + ri.shift(&Monomial::var(Var::X, i as u16));
        }
        out
    }
}

pub fn r_series(params: &SystemParams) -> Result<HasseData> {
    let ctx = params.context();
    let p = ctx.p();
    let power = make_f(params).pow(((p - 1) / 2) as u32);
    let a = power.coefficient_of(Var::X, (p - 1) as u16);
    let top = 2 * (p - 1) as u16;
    let mut r = Vec::with_capacity(top as usize + 1);
    let mut s = MultiPoly::zero(ctx, VarSet::QUARTIC);
    for i in 0..=top {
        let coeff = power.coefficient_of(Var::X, i);
        let ri = if i as u64 == p - 1 { &coeff - &a } else { coeff };
        if !ri.is_zero() {
            let inv = PAdicScalar::new(ctx, (i as u64 + 1) % ctx.modulus())
                .inv()
                .map_err(|_| Error::NonUnitDenominator(i as u64 + 1))?;
            s = s + ri.shift(&Monomial::var(Var::X, i + 1)).scale(&inv);
        }
        r.push(ri.with_vars(VarSet::BASE));
    }
    Ok(HasseData {
        a: a.with_vars(VarSet::BASE),
        r,
        s: s.with_vars(VarSet::QUARTIC),
    })
}

/// `#{(x, y) in F_p^2 : y^2 = f(x)}`.
pub fn count_affine(f: &UniPoly) -> u64 {
    let f = f.reduce_mod_p();
    let ctx = f.context();
    let p = ctx.p();
    (0..p)
        .map(|x| {
            let v = f.eval(&PAdicScalar::new(ctx, x)).residue();
            (1 + legendre(v as i64, p) as i64) as u64
        })
        .sum()
}

/// Outcome of the point-count congruences for one `y^2 = f(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointCountReport {
    pub p: u64,
    /// Coefficients of `f` mod `p`, constant term first.
    pub poly: Vec<u64>,
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "N_p")]
    pub n_p: u64,
    /// Points of the smooth projective model, when `f` is squarefree.
    pub projective: Option<u64>,
    /// Named differences that must vanish mod `p`.
    pub deltas: Vec<(String, u64)>,
    pub holds: bool,
}

pub fn check_point_counts(f: &UniPoly) -> Result<PointCountReport> {
    let f = f.reduce_mod_p();
    let ctx = f.context();
    let p = ctx.p();
    let deg = f.degree().unwrap_or(0);
    if deg != 3 && deg != 4 {
        return Err(Error::UnsupportedDegree(deg));
    }
    let a = hasse_invariant_uni(&f);
    let n_p = count_affine(&f);
    let n = PAdicScalar::new(ctx, n_p % p);
    let lead = f.leading().expect("nonzero");
    let mut deltas = Vec::new();
    let at_infinity = if deg == 3 {
        deltas.push(("A + N_p".to_string(), (a + n).residue()));
        1
    } else {
        let chi = legendre(lead.residue() as i64, p) as i64;
        let chi_s = PAdicScalar::from_i64(ctx, chi);
        deltas.push(("A + N_p + (a/p)".to_string(), (a + n + chi_s).residue()));
        (1 + chi) as u64
    };
    let squarefree = f.gcd_mod_p(&f.derivative()).degree() == Some(0);
    let projective = squarefree.then(|| n_p + at_infinity);
    if let Some(total) = projective {
        let one = PAdicScalar::one(ctx);
        let delta = PAdicScalar::new(ctx, total % p) - (one - a);
        deltas.push(("#C - (1 - A)".to_string(), delta.residue()));
    }
    let holds = deltas.iter().all(|(_, d)| *d == 0);
    Ok(PointCountReport {
        p,
        poly: f.coeffs().to_vec(),
        a: a.residue(),
        n_p,
        projective,
        deltas,
        holds,
    })
}

/// Random squarefree polynomials of the given degree over `F_p` with nonzero
/// leading coefficient (monic when `monic`).
pub fn random_squarefree<R: Rng>(p: u64, degree: usize, monic: bool, rng: &mut R) -> UniPoly {
    let ctx = PAdicContext::new(p, 1).expect("prime");
    loop {
        let mut c: Vec<u64> = (0..degree).map(|_| rng.gen_range(0..p)).collect();
        c.push(if monic { 1 } else { rng.gen_range(1..p) });
        let f = UniPoly::from_raw(ctx, c);
        if f.gcd_mod_p(&f.derivative()).degree() == Some(0) {
            return f;
        }
    }
}

/// True iff `E_c` has supersingular reduction, i.e. `A_{p-1}(c) = 0` in `F_p`.
pub fn is_supersingular(params: &SystemParams, residues: (u64, u64)) -> Result<bool> {
    let params = params.reduce_mod_p();
    let ctx = params.context();
    let at = [
        (Var::Z1, PAdicScalar::new(ctx, residues.0 % ctx.p())),
        (Var::Z2, PAdicScalar::new(ctx, residues.1 % ctx.p())),
    ];
    let n = make_n(&params).evaluate(&at)?.as_constant().expect("constant");
    if n.is_zero() {
        return Err(Error::DegenerateFiber(format!(
            "N({}, {}) = 0 mod p",
            residues.0, residues.1
        )));
    }
    let a = hasse_invariant(&make_f(&params), Var::X)
        .evaluate(&at)?
        .as_constant()
        .expect("constant");
    Ok(a.is_zero())
}
