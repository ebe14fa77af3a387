//! The classical Euler vector field `x1' = (a2-a3) x2 x3` (and cyclic), its
//! prime integrals, how it pairs with the canonical form on level curves,
//! and the torsor of arithmetic flows over prime integrals mod `p`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowDescriptor;
use crate::geometry::{LevelSet, LevelSpec, SystemParams};
use crate::local::LocalizedElement;
use crate::poly::{MultiPoly, Var};

const SPACE_VARS: [Var; 3] = [Var::X1, Var::X2, Var::X3];

/// A derivation of `A[x1, x2, x3]` given by its values on `x1, x2, x3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalDerivation {
    images: [MultiPoly; 3],
}

impl ClassicalDerivation {
    /// `x_i -> (a_j - a_k) x_j x_k` for cyclic `(i, j, k)`.
    pub fn euler(params: &SystemParams) -> Self {
        let ctx = params.context();
        let a = params.coefficients();
        let images = std::array::from_fn(|i| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            (MultiPoly::var(ctx, SPACE_VARS[j]) * MultiPoly::var(ctx, SPACE_VARS[k])).scale(&(a[j] - a[k]))
        });
        ClassicalDerivation { images }
    }

    /// Replaces the value on `x_i` (`i` in `1..=3`).
    pub fn with_image(mut self, i: usize, image: MultiPoly) -> Self {
        self.images[i - 1] = image;
        self
    }

    pub fn image(&self, i: usize) -> &MultiPoly {
        &self.images[i - 1]
    }

    /// Leibniz extension to polynomials.
    pub fn apply(&self, f: &MultiPoly) -> MultiPoly {
        let prec = f.context().precision();
        let mut out = MultiPoly::zero(f.context(), f.vars());
        for (v, img) in SPACE_VARS.iter().zip(&self.images) {
            let df = f.partial(*v);
            if !df.is_zero() {
                out = out + df * img.reduce_to(prec);
            }
        }
        out
    }

    /// Quotient rule: `delta(U / D) = (D delta U - U delta D) / D^2`.
    pub fn apply_localized(&self, e: &LocalizedElement) -> LocalizedElement {
        let u = e.numerator();
        let d = e.den_poly();
        let num = &d * &self.apply(u) - u * &self.apply(&d);
        e.ring().element(num, e.denominator().times(2))
    }
}

pub fn classical_delta(params: &SystemParams, f: &MultiPoly) -> MultiPoly {
    ClassicalDerivation::euler(params).apply(f)
}

fn check_level(params: &SystemParams, spec: &LevelSpec) -> Result<()> {
    if !spec.n_value(params).is_unit() {
        return Err(Error::DegenerateFiber(format!(
            "N({}, {}) is not a unit",
            spec.c1(),
            spec.c2()
        )));
    }
    Ok(())
}

/// `<delta_c, omega_c> = 1`: for each `i`, `delta x_i` restricted to `E_c`
/// equals the coefficient of `dx_i` against `omega`, and equals the chart
/// expression `(a_j - a_k) x_j x_k`.
pub fn duality_check(params: &SystemParams, spec: &LevelSpec) -> Result<bool> {
    duality_check_with(&ClassicalDerivation::euler(params), params, spec)
}

pub fn duality_check_with(derivation: &ClassicalDerivation, params: &SystemParams, spec: &LevelSpec) -> Result<bool> {
    check_level(params, spec)?;
    let level = LevelSet::new(params, spec);
    let ctx = params.context();
    let a = params.coefficients();
    for (i, &v) in SPACE_VARS.iter().enumerate() {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let xi = MultiPoly::var(ctx, v);
        let along = level.reduce(&derivation.apply(&xi));
        let chart = (MultiPoly::var(ctx, SPACE_VARS[j]) * MultiPoly::var(ctx, SPACE_VARS[k])).scale(&(a[j] - a[k]));
        if along != level.d_over_omega(&level.reduce(&xi)) || along != level.reduce(&chart) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `d(K|E_c) = (delta K)|E_c * omega` over `F_p`.
pub fn lie_identity_check(params: &SystemParams, spec: &LevelSpec, k: &MultiPoly) -> Result<bool> {
    let params = params.reduce_mod_p();
    let spec = spec.reduce_to(1);
    check_level(&params, &spec)?;
    let k = k.reduce_mod_p();
    let level = LevelSet::new(&params, &spec);
    let lhs = level.d_over_omega(&level.reduce(&k));
    let rhs = level.reduce(&classical_delta(&params, &k));
    Ok(lhs == rhs)
}

/// `delta K = 0` over `F_p`.
pub fn is_prime_integral(params: &SystemParams, k: &MultiPoly) -> bool {
    classical_delta(&params.reduce_mod_p(), &k.reduce_mod_p()).is_zero()
}

/// Same for a fraction with the allowed denominators.
pub fn is_prime_integral_localized(k: &LocalizedElement) -> bool {
    let params = k.ring().params().reduce_mod_p();
    ClassicalDerivation::euler(&params)
        .apply_localized(&k.reduce_mod_p())
        .is_zero()
}

/// The flow with `Delta3 + lift(K)`, where `lift` keeps residues in `[0, p)`.
pub fn torsor_shift(flow: &FlowDescriptor, k: &LocalizedElement) -> Result<FlowDescriptor> {
    if !is_prime_integral_localized(k) {
        return Err(Error::NotPrimeIntegral);
    }
    let lifted = k.reduce_mod_p().lift_to(flow.context());
    let shifted = FlowDescriptor::from_delta3(flow.delta3() + &lifted)?;
    if flow.roots().is_some() {
        shifted.with_roots()
    } else {
        Ok(shifted)
    }
}

/// `(Delta3_A - Delta3_B) mod p` and how it behaves on level curves.
#[derive(Debug, Clone)]
pub struct FlowDifference {
    pub k: LocalizedElement,
    pub is_prime_integral: bool,
    /// Whether `d(K|E_c) = 0` on each given level.
    pub closed_on_levels: Vec<bool>,
}

pub fn flow_difference(a: &FlowDescriptor, b: &FlowDescriptor, specs: &[LevelSpec]) -> Result<FlowDifference> {
    if a.params() != b.params() {
        return Err(Error::ParamsMismatch);
    }
    let k = (a.delta3() - b.delta3()).reduce_mod_p();
    let params = a.params().reduce_mod_p();
    let closed_on_levels = specs
        .iter()
        .map(|spec| {
            let level = LevelSet::new(&params, &spec.reduce_to(1));
            let (u, d) = k.restrict(&level);
            let dk = level
                .mul(&d, &level.d_over_omega(&u))
                .sub(&level.mul(&u, &level.d_over_omega(&d)));
            dk.is_zero()
        })
        .collect();
    Ok(FlowDifference {
        is_prime_integral: is_prime_integral_localized(&k),
        k,
        closed_on_levels,
    })
}

/// Real-valued trajectory of the Euler top.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// Rows `t, x1, x2, x3, H1, H2`.
    pub rows: Vec<[f64; 6]>,
    /// `max |H_i(t) - H_i(0)|` over the run.
    pub max_drift: [f64; 2],
}

impl Trajectory {
    pub fn last_point(&self) -> Option<[f64; 3]> {
        self.rows.last().map(|r| [r[1], r[2], r[3]])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,x3,H1,H2\n");
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

fn euler_field(a: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    [
        (a[1] - a[2]) * x[1] * x[2],
        (a[2] - a[0]) * x[2] * x[0],
        (a[0] - a[1]) * x[0] * x[1],
    ]
}

fn energies(a: [f64; 3], x: [f64; 3]) -> [f64; 2] {
    [
        a[0] * x[0] * x[0] + a[1] * x[1] * x[1] + a[2] * x[2] * x[2],
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2],
    ]
}

/// Fixed-step RK4. `dt` may be negative to run backwards. The rows are the
/// initial point followed by one row per step; with `steps = 0` there are none.
pub fn integrate_demo(a: [f64; 3], x0: [f64; 3], dt: f64, steps: usize) -> Trajectory {
    let axpy = |x: [f64; 3], k: [f64; 3], h: f64| [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]];
    let h0 = energies(a, x0);
    let row = |t: f64, x: [f64; 3]| {
        let h = energies(a, x);
        [t, x[0], x[1], x[2], h[0], h[1]]
    };
    let mut rows = Vec::with_capacity(steps + 1);
    if steps > 0 {
        rows.push(row(0.0, x0));
    }
    let mut x = x0;
    let mut drift = [0.0f64; 2];
    for n in 1..=steps {
        let k1 = euler_field(a, x);
        let k2 = euler_field(a, axpy(x, k1, dt / 2.0));
        let k3 = euler_field(a, axpy(x, k2, dt / 2.0));
        let k4 = euler_field(a, axpy(x, k3, dt));
        for i in 0..3 {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let h = energies(a, x);
        drift[0] = drift[0].max((h[0] - h0[0]).abs());
        drift[1] = drift[1].max((h[1] - h0[1]).abs());
        rows.push(row(n as f64 * dt, x));
    }
    Trajectory { rows, max_drift: drift }
}
