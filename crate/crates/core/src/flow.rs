//! The arithmetic flow: a lift of Frobenius `x_i -> Phi_i` on the open set
//! where `Q` is invertible, fixing `H1` and `H2` up to `p`-th powers.
//!
//! The flow is pinned down by `Delta3` with `Phi3 = x3^p + p Delta3`. The
//! squares `Phi1^2, Phi2^2` then solve the linear system
//! `sum_j a_ij Phi_j^2 = H_i^p`, and `Phi1, Phi2` are principal square roots.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_h, LevelSet, LevelSetElement, LevelSpec, SystemParams};
use crate::local::{Denominator, ElementWire, LocalRing, LocalizedElement};
use crate::padic::{principal_sqrt_series, PAdicContext, PAdicScalar};
use crate::poly::{Monomial, MultiPoly, Var, VarSet};

/// `Delta3 = S(H1, H2, x3)`, a form of degree `2p - 1` over `A(H1, H2)`.
pub fn construct_delta3(ring: &Arc<LocalRing>) -> LocalizedElement {
    let ctx = ring.context();
    let (h1, h2) = make_h(ring.params());
    let num = ring
        .hasse()
        .s
        .substitute(&[(Var::Z1, h1), (Var::Z2, h2), (Var::X, MultiPoly::var(ctx, Var::X3))])
        .expect("S is in z1, z2, x");
    ring.element(num, Denominator::new(1, 0, 0, 0))
}

/// `x3^p + p * delta3`.
pub fn phi3_of(delta3: &LocalizedElement) -> LocalizedElement {
    let ring = delta3.ring();
    let ctx = delta3.context();
    let p = ctx.p();
    let x3p = ring.poly(MultiPoly::var(ctx, Var::X3).pow(p as u32));
    &x3p + &delta3.scale(&PAdicScalar::new(ctx, p % ctx.modulus()))
}

/// Solves `a1 Phi1^2 + a2 Phi2^2 = H1^p - a3 Phi3^2` and
/// `Phi1^2 + Phi2^2 = H2^p - Phi3^2`.
pub fn cramer_phi_squared(delta3: &LocalizedElement) -> Result<(LocalizedElement, LocalizedElement)> {
    let ring = delta3.ring();
    let ctx = delta3.context();
    let params = ring.params().reduce_to(ctx.precision());
    let p = ctx.p() as u32;
    let [a1, a2, a3] = params.coefficients();
    let det_inv = (a1 - a2).inv().map_err(|_| Error::SingularSystem)?;
    let phi3 = phi3_of(delta3);
    let phi3_sq = &phi3 * &phi3;
    let (h1, h2) = make_h(&params);
    let rhs1 = &ring.poly(h1.pow(p)) - &phi3_sq.scale(&a3);
    let rhs2 = &ring.poly(h2.pow(p)) - &phi3_sq;
    let phi1_sq = (&rhs1 - &rhs2.scale(&a2)).scale(&det_inv);
    let phi2_sq = (&rhs2.scale(&a1) - &rhs1).scale(&det_inv);
    Ok((phi1_sq, phi2_sq))
}

/// `G1, G2` with `Phi_i^2 = x_i^(2p) (1 + p G_i)`, known to precision `N - 1`.
#[derive(Debug, Clone)]
pub struct GUnit {
    pub g1: LocalizedElement,
    pub g2: LocalizedElement,
}

fn space_var(i: usize) -> Var {
    [Var::X1, Var::X2, Var::X3][i - 1]
}

fn x_den(i: usize, e: u32) -> Denominator {
    if i == 1 {
        Denominator::new(0, 0, e, 0)
    } else {
        Denominator::new(0, 0, 0, e)
    }
}

/// `G_i = (Phi_i^2 / x_i^(2p) - 1) / p` for `i` in `{1, 2}`.
pub fn extract_g(phi_sq: &LocalizedElement, i: usize) -> Result<LocalizedElement> {
    assert!(i == 1 || i == 2);
    let ctx = phi_sq.context();
    let p = ctx.p() as u16;
    let shift = Monomial::var(space_var(i), 2 * p);
    let diff = phi_sq.numerator() - &phi_sq.den_poly().shift(&shift);
    let g_num = diff.divide_by_p().map_err(|e| match e {
        Error::NotDivisibleByP => Error::NotCongruent,
        other => other,
    })?;
    let den = phi_sq.denominator().plus(x_den(i, 2 * p as u32));
    Ok(phi_sq.ring().element(g_num, den))
}

pub fn extract_g_pair(phi1_sq: &LocalizedElement, phi2_sq: &LocalizedElement) -> Result<GUnit> {
    Ok(GUnit {
        g1: extract_g(phi1_sq, 1)?,
        g2: extract_g(phi2_sq, 2)?,
    })
}

/// `x_i^p (1 + p G_i)^(1/2)` with the principal root, at precision `N`
/// where `G_i` is known to `N - 1`.
pub fn phi_root(g: &LocalizedElement, i: usize) -> LocalizedElement {
    let ring = g.ring();
    let t = g.times_p_lifted();
    let ctx = t.context();
    let n = ctx.precision() as usize;
    // t = 0 mod p, so the binomial series stops after t^(N-1).
    let series = principal_sqrt_series(ctx, n);
    let den = t.den_poly();
    let mut num = MultiPoly::zero(ctx, VarSet::SPACE);
    let mut t_pow = MultiPoly::one(ctx, VarSet::SPACE);
    let mut den_pows = vec![MultiPoly::one(ctx, VarSet::SPACE)];
    for k in 1..n {
        let next = &den_pows[k - 1] * &den;
        den_pows.push(next);
    }
    for (k, &s) in series.iter().enumerate() {
        if s != 0 {
            num = num + (&t_pow * &den_pows[n - 1 - k]).scale(&PAdicScalar::new(ctx, s));
        }
        if k + 1 < n {
            t_pow = &t_pow * t.numerator();
        }
    }
    let p = ctx.p() as u16;
    let num = num.shift(&Monomial::var(space_var(i), p));
    ring.element(num, t.denominator().times(n as u32 - 1))
}

pub fn phi_roots(g: &GUnit) -> (LocalizedElement, LocalizedElement) {
    (phi_root(&g.g1, 1), phi_root(&g.g2, 2))
}

/// A flow given by `Delta3`, the squares it forces, and optionally the roots.
#[derive(Debug, Clone)]
pub struct FlowDescriptor {
    ring: Arc<LocalRing>,
    delta3: LocalizedElement,
    phi3: LocalizedElement,
    phi1_sq: LocalizedElement,
    phi2_sq: LocalizedElement,
    roots: Option<(LocalizedElement, LocalizedElement)>,
}

impl PartialEq for FlowDescriptor {
    fn eq(&self, o: &Self) -> bool {
        self.ring.params() == o.ring.params()
            && self.delta3 == o.delta3
            && self.phi3 == o.phi3
            && self.phi1_sq == o.phi1_sq
            && self.phi2_sq == o.phi2_sq
            && self.roots == o.roots
    }
}

impl FlowDescriptor {
    /// The flow with `Delta3 = S(H1, H2, x3)`, roots included.
    pub fn construct(params: &SystemParams) -> Result<Self> {
        let ring = LocalRing::new(params)?;
        Self::from_delta3(construct_delta3(&ring))?.with_roots()
    }

    /// The flow determined by an arbitrary `Delta3`, without roots.
    pub fn from_delta3(delta3: LocalizedElement) -> Result<Self> {
        let (phi1_sq, phi2_sq) = cramer_phi_squared(&delta3)?;
        Ok(FlowDescriptor {
            ring: Arc::clone(delta3.ring()),
            phi3: phi3_of(&delta3),
            delta3,
            phi1_sq,
            phi2_sq,
            roots: None,
        })
    }

    /// Assembles a flow from stored components without recomputing them.
    pub fn from_parts(
        delta3: LocalizedElement,
        phi3: LocalizedElement,
        phi1_sq: LocalizedElement,
        phi2_sq: LocalizedElement,
        roots: Option<(LocalizedElement, LocalizedElement)>,
    ) -> Self {
        FlowDescriptor {
            ring: Arc::clone(delta3.ring()),
            delta3,
            phi3,
            phi1_sq,
            phi2_sq,
            roots,
        }
    }

    pub fn with_roots(mut self) -> Result<Self> {
        let ctx = self.context();
        self.roots = Some(if ctx.precision() == 1 {
            let p = ctx.p() as u32;
            (
                self.ring.poly(MultiPoly::var(ctx, Var::X1).pow(p)),
                self.ring.poly(MultiPoly::var(ctx, Var::X2).pow(p)),
            )
        } else {
            phi_roots(&extract_g_pair(&self.phi1_sq, &self.phi2_sq)?)
        });
        Ok(self)
    }

    pub fn without_roots(mut self) -> Self {
        self.roots = None;
        self
    }

    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn params(&self) -> &SystemParams {
        self.ring.params()
    }

    pub fn context(&self) -> PAdicContext {
        self.ring.context()
    }

    pub fn delta3(&self) -> &LocalizedElement {
        &self.delta3
    }

    pub fn phi3(&self) -> &LocalizedElement {
        &self.phi3
    }

    pub fn phi_squared(&self) -> (&LocalizedElement, &LocalizedElement) {
        (&self.phi1_sq, &self.phi2_sq)
    }

    pub fn roots(&self) -> Option<(&LocalizedElement, &LocalizedElement)> {
        self.roots.as_ref().map(|(a, b)| (a, b))
    }

    /// `Phi1, Phi2, Phi3`.
    pub fn images(&self) -> Result<[LocalizedElement; 3]> {
        let (a, b) = self.roots.clone().ok_or(Error::RootsUnavailable)?;
        Ok([a, b, self.phi3.clone()])
    }

    pub fn to_wire(&self) -> FlowWire {
        FlowWire {
            params: *self.params(),
            delta3: self.delta3.to_wire(),
            phi3: self.phi3.to_wire(),
            phi1_sq: self.phi1_sq.to_wire(),
            phi2_sq: self.phi2_sq.to_wire(),
            phi1: self.roots.as_ref().map(|r| r.0.to_wire()),
            phi2: self.roots.as_ref().map(|r| r.1.to_wire()),
        }
    }

    /// Rebuilds from the wire form. Components are taken as stored; run the
    /// verifiers to check them.
    pub fn from_wire(w: FlowWire) -> Result<Self> {
        let ring = LocalRing::new(&w.params)?;
        let ctx = ring.context();
        let load = |e: ElementWire| -> Result<LocalizedElement> {
            if e.numerator.context() != ctx {
                return Err(Error::ContextMismatch {
                    left: ctx.to_string(),
                    right: e.numerator.context().to_string(),
                });
            }
            for (m, _) in e.numerator.terms() {
                if m.exp(Var::Z1) + m.exp(Var::Z2) + m.exp(Var::X) > 0 {
                    return Err(Error::Malformed("flow components live in x1, x2, x3".into()));
                }
            }
            Ok(ring.element(e.numerator, e.denominator))
        };
        let roots = match (w.phi1, w.phi2) {
            (Some(a), Some(b)) => Some((load(a)?, load(b)?)),
            (None, None) => None,
            _ => return Err(Error::Malformed("only one root present".into())),
        };
        Ok(FlowDescriptor {
            delta3: load(w.delta3)?,
            phi3: load(w.phi3)?,
            phi1_sq: load(w.phi1_sq)?,
            phi2_sq: load(w.phi2_sq)?,
            roots,
            ring,
        })
    }
}

/// Serialized flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowWire {
    pub params: SystemParams,
    pub delta3: ElementWire,
    pub phi3: ElementWire,
    pub phi1_sq: ElementWire,
    pub phi2_sq: ElementWire,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<ElementWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<ElementWire>,
}

/// `phi(f)` for `f` in `x1, x2, x3` with coefficients fixed.
pub fn flow_apply_phi(flow: &FlowDescriptor, f: &MultiPoly) -> Result<LocalizedElement> {
    let images = flow.images()?;
    flow.ring.compose(f, &images)
}

/// `(phi(f) - f^p) / p`, at precision `N - 1`.
pub fn flow_delta(flow: &FlowDescriptor, f: &MultiPoly) -> Result<LocalizedElement> {
    let image = flow_apply_phi(flow, f)?;
    let frob = flow.ring.poly(f.pow(flow.context().p() as u32));
    (&image - &frob).divide_by_p()
}

/// Cleared numerators of `sum_j a_ij Phi_j^2 - H_i^p` for `i = 1, 2`.
pub fn prime_integral_residuals(flow: &FlowDescriptor) -> [MultiPoly; 2] {
    let ring = &flow.ring;
    let params = flow.params();
    let p = flow.context().p() as u32;
    let phi3_sq = &flow.phi3 * &flow.phi3;
    let (h1, h2) = make_h(params);
    let image_h1 =
        &(&flow.phi1_sq.scale(&params.a(1)) + &flow.phi2_sq.scale(&params.a(2))) + &phi3_sq.scale(&params.a(3));
    let image_h2 = &(&flow.phi1_sq + &flow.phi2_sq) + &phi3_sq;
    [
        image_h1.cleared_difference(&ring.poly(h1.pow(p))),
        image_h2.cleared_difference(&ring.poly(h2.pow(p))),
    ]
}

/// `delta H1 = delta H2 = 0`, checked on the squares.
pub fn verify_prime_integrals(flow: &FlowDescriptor) -> bool {
    prime_integral_residuals(flow).iter().all(MultiPoly::is_zero)
}

fn scan_levels(
    params: &SystemParams,
    count: usize,
    build: impl Fn(u64, u64) -> Result<LevelSpec>,
) -> Result<Vec<LevelSpec>> {
    let p = params.context().p();
    let mut out = Vec::new();
    'scan: for r1 in 0..p {
        for r2 in 0..p {
            if out.len() >= count {
                break 'scan;
            }
            if let Ok(spec) = build(r1, r2) {
                out.push(spec);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoAdmissibleLevel(p));
    }
    Ok(out)
}

/// Teichmueller levels with `N(c) A(c)` a unit, in scan order of `F_p^2`.
pub fn sample_admissible_c(params: &SystemParams, count: usize) -> Result<Vec<LevelSpec>> {
    let ctx = params.context();
    scan_levels(params, count, |r1, r2| {
        LevelSpec::admissible(
            params,
            PAdicScalar::teichmuller(ctx, r1),
            PAdicScalar::teichmuller(ctx, r2),
        )
    })
}

/// Teichmueller levels with `N(c)` a unit.
pub fn sample_nondegenerate_c(params: &SystemParams, count: usize) -> Result<Vec<LevelSpec>> {
    scan_levels(params, count, |r1, r2| LevelSpec::teichmuller(params, r1, r2))
}

/// Result of comparing `phi^* omega / p` with `A(c)^-1 omega` on a level.
#[derive(Debug, Clone)]
pub struct LinearizationCheck {
    pub holds: bool,
    /// Cleared difference of the two sides, mod `p`.
    pub residual: Option<LevelSetElement>,
    /// Whether the congruence also holds mod `p^2`; needs roots and `N >= 3`.
    pub holds_mod_p2: Option<bool>,
}

/// On `E_c`, write `Phi3 = U / D`. Then `d Phi3 = (D dU - U dD) / D^2` and
/// `phi^* omega = d Phi3 / ((a1-a2) Phi1 Phi2)`, while `Phi1 Phi2 = x1^p x2^p`
/// mod `p`. After clearing the units `D^2` and `(a1-a2) x1 x2` the claim is
/// `(D g_U - U g_D) / p = A(c)^-1 (a1-a2) D^2 x1^p x2^p` mod `p`, where
/// `g` is the coefficient of `omega` in a differential.
pub fn linearization_check(flow: &FlowDescriptor, spec: &LevelSpec) -> Result<LinearizationCheck> {
    let params = flow.params();
    let ctx = flow.context();
    let spec = LevelSpec::admissible(params, spec.c1(), spec.c2())?;
    let level = LevelSet::new(params, &spec);
    let (u, d) = flow.phi3.restrict(&level);
    let g = level
        .mul(&d, &level.d_over_omega(&u))
        .sub(&level.mul(&u, &level.d_over_omega(&d)));
    let Ok(g_p) = g.divide_by_p() else {
        return Ok(LinearizationCheck {
            holds: false,
            residual: None,
            holds_mod_p2: None,
        });
    };
    let lambda = spec.hasse_value(params).inv()?;
    let k = params.a(1) - params.a(2);
    let p = ctx.p() as u16;
    let xp = MultiPoly::monomial(ctx, Monomial::from_pairs(&[(Var::X1, p), (Var::X2, p)]), 1);
    let d_sq = level.mul(&d, &d);
    let scale = lambda * k;
    let target = level.mul(&d_sq, &level.reduce(&xp)).scale(&scale);
    let lower = g_p.context().precision();
    let residual = g_p.sub(&target.reduce_to(lower)).reduce_mod_p();
    let holds = residual.is_zero();

    let holds_mod_p2 = match (&flow.roots, lower >= 2) {
        (Some((phi1, phi2)), true) => {
            let (rn, rd) = (phi1 * phi2).restrict(&level);
            let low = LevelSet::at_precision(params, &spec, lower);
            let lhs = low.mul(&g_p, &rd.reduce_to(lower));
            let rhs = level.mul(&d_sq, &rn).scale(&scale).reduce_to(lower);
            Some(lhs.sub(&rhs).reduce_to(2).is_zero())
        }
        _ => None,
    };
    Ok(LinearizationCheck {
        holds,
        residual: Some(residual),
        holds_mod_p2,
    })
}

pub fn verify_linearization(flow: &FlowDescriptor, spec: &LevelSpec) -> Result<bool> {
    Ok(linearization_check(flow, spec)?.holds)
}

/// Largest `k` such that `Phi_i` and `Phi'_i` agree mod `p^k` for all `i`.
pub fn phi_agreement(a: &FlowDescriptor, b: &FlowDescriptor) -> Result<u32> {
    let (ia, ib) = (a.images()?, b.images()?);
    Ok(ia
        .iter()
        .zip(&ib)
        .map(|(x, y)| x.cleared_difference(y).p_valuation())
        .min()
        .expect("three images"))
}
