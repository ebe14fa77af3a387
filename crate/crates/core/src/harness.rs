//! Run configuration, the flow file format, and the verification suite
//! behind the command-line tool.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{duality_check, flow_difference, lie_identity_check, torsor_shift, ClassicalDerivation};
use crate::error::{Error, Result};
use crate::flow::{
    linearization_check, phi3_of, phi_agreement, prime_integral_residuals, sample_admissible_c, sample_nondegenerate_c,
    FlowDescriptor, FlowWire,
};
use crate::geometry::{canonical_form_identity_check, isogeny_identity_check, make_f, make_h, LevelSpec, SystemParams};
use crate::hasse::{check_point_counts, hasse_invariant, r_series, random_squarefree, PointCountReport};
use crate::local::{Denominator, LocalizedElement};
use crate::padic::PAdicContext;
use crate::poly::{Monomial, MultiPoly, Var, VarSet};

pub const FLOW_SCHEMA: &str = "arith-euler/flow/v1";
/// Overrides the default output directory.
pub const OUT_DIR_ENV: &str = "ARITH_EULER_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub precision: u32,
    /// Coefficients as integers, used exactly or via Teichmueller lifts.
    pub a: [i64; 3],
    pub teichmuller: bool,
    /// Number of level sets to sample.
    pub specs: usize,
    pub seed: u64,
    /// Random trials per randomized suite.
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 5,
            precision: 3,
            a: [0, 1, 2],
            teichmuller: false,
            specs: 10,
            seed: 0,
            trials: 20,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<SystemParams> {
        let ctx = PAdicContext::new(self.p, self.precision)?;
        if self.teichmuller {
            SystemParams::teichmuller(ctx, self.a.map(|x| x.rem_euclid(self.p as i64) as u64))
        } else {
            SystemParams::from_i64(ctx, self.a)
        }
    }
}

impl RunConfig {
    /// Parameters for building or verifying a flow, which needs `N >= 2`.
    pub fn flow_params(&self) -> Result<SystemParams> {
        let params = self.params()?;
        if self.precision < 2 {
            return Err(Error::PrecisionTooLow(self.precision));
        }
        Ok(params)
    }
}

/// `ChaCha8` stream `stream` of the run seed; each suite draws from its own.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random polynomial in `x1, x2, x3` of total degree at most `max_degree`.
pub fn random_space_poly<R: Rng>(ctx: PAdicContext, max_degree: u16, terms: usize, rng: &mut R) -> MultiPoly {
    let m = ctx.modulus() as i64;
    MultiPoly::from_terms(
        ctx,
        VarSet::SPACE,
        (0..terms).map(|_| {
            let a = rng.gen_range(0..=max_degree);
            let b = rng.gen_range(0..=max_degree - a);
            let c = rng.gen_range(0..=max_degree - a - b);
            (
                Monomial::from_pairs(&[(Var::X1, a), (Var::X2, b), (Var::X3, c)]),
                rng.gen_range(0..m),
            )
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// The offending cleared difference when a congruence fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cleared_difference: Option<String>,
}

impl CheckResult {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            cleared_difference: None,
        }
    }

    fn skipped(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: Status::Skipped,
            detail: detail.into(),
            cleared_difference: None,
        }
    }

    fn error(name: impl Into<String>, e: &Error) -> Self {
        Self::new(name, false, format!("error: {e}"))
    }

    fn with_difference(mut self, d: Option<String>) -> Self {
        self.cleared_difference = d;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub params: SystemParams,
    /// Residues of the sampled admissible levels.
    pub levels: Vec<(u64, u64)>,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            out.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
            if let Some(d) = &c.cleared_difference {
                out.push_str(&format!("     cleared difference: {d}\n"));
            }
        }
        out.push_str(&format!(
            "{} passed, {} failed, {} skipped\n",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::Skipped)
        ));
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionLog {
    pub delta3_degree: Option<u32>,
    pub delta3_terms: usize,
    pub denominators: BTreeMap<String, Denominator>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub check: String,
    pub passed: bool,
    pub unix_time: u64,
}

/// On-disk flow: the components plus how and when they were checked.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowFile {
    pub schema: String,
    pub flow: FlowWire,
    pub construction: ConstructionLog,
    pub manifest: Vec<ManifestEntry>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn construction_log(flow: &FlowDescriptor) -> ConstructionLog {
    let mut denominators = BTreeMap::new();
    denominators.insert("delta3".to_string(), flow.delta3().denominator());
    denominators.insert("phi3".to_string(), flow.phi3().denominator());
    let (s1, s2) = flow.phi_squared();
    denominators.insert("phi1_sq".to_string(), s1.denominator());
    denominators.insert("phi2_sq".to_string(), s2.denominator());
    if let Some((r1, r2)) = flow.roots() {
        denominators.insert("phi1".to_string(), r1.denominator());
        denominators.insert("phi2".to_string(), r2.denominator());
    }
    ConstructionLog {
        delta3_degree: flow.delta3().numerator().total_degree(),
        delta3_terms: flow.delta3().numerator().num_terms(),
        denominators,
    }
}

/// Builds the flow and the file recording it.
pub fn construct_flow_file(config: &RunConfig) -> Result<(FlowDescriptor, FlowFile)> {
    let params = config.flow_params()?;
    let flow = FlowDescriptor::construct(&params)?;
    let manifest = [integrality_check(&flow), shape_check(&flow)]
        .into_iter()
        .map(|c| ManifestEntry {
            check: c.name,
            passed: c.status == Status::Pass,
            unix_time: unix_now(),
        })
        .collect();
    let file = FlowFile {
        schema: FLOW_SCHEMA.to_string(),
        flow: flow.to_wire(),
        construction: construction_log(&flow),
        manifest,
    };
    Ok((flow, file))
}

pub fn write_flow_file(path: &Path, file: &FlowFile) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(file).map_err(std::io::Error::other)?;
    std::fs::write(path, json + "\n")
}

pub fn read_flow_file(path: &Path) -> Result<FlowDescriptor> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))?;
    parse_flow_file(&text)
}

/// Parses a flow file; flows below precision 2 are rejected.
pub fn parse_flow_file(text: &str) -> Result<FlowDescriptor> {
    let file: FlowFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if file.schema != FLOW_SCHEMA {
        return Err(Error::Malformed(format!("unknown schema {:?}", file.schema)));
    }
    let flow = FlowDescriptor::from_wire(file.flow)?;
    match flow.context().precision() {
        n if n < 2 => Err(Error::PrecisionTooLow(n)),
        _ => Ok(flow),
    }
}

/// Output directory: explicit flag, then the environment, then `.`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn integrality_check(flow: &FlowDescriptor) -> CheckResult {
    let res = prime_integral_residuals(flow);
    let ok = res.iter().all(MultiPoly::is_zero);
    let diff = (!ok).then(|| format!("H1: {}; H2: {}", res[0], res[1]));
    CheckResult::new("prime_integrals", ok, "sum_j a_ij Phi_j^2 = H_i^p exactly for i = 1, 2").with_difference(diff)
}

fn shape_check(flow: &FlowDescriptor) -> CheckResult {
    let ring = flow.ring();
    let ctx = flow.context();
    let p = ctx.p() as u32;
    let xp = |v: Var, e: u32| ring.poly(MultiPoly::var(ctx, v).pow(e)).reduce_mod_p();
    let (s1, s2) = flow.phi_squared();
    let mut problems = Vec::new();
    if flow.phi3() != &phi3_of(flow.delta3()) {
        problems.push("Phi3 != x3^p + p Delta3".to_string());
    }
    if flow.phi3().reduce_mod_p() != xp(Var::X3, p) {
        problems.push("Phi3 != x3^p mod p".to_string());
    }
    if s1.reduce_mod_p() != xp(Var::X1, 2 * p) || s2.reduce_mod_p() != xp(Var::X2, 2 * p) {
        problems.push("Phi_i^2 != x_i^(2p) mod p".to_string());
    }
    let detail = match flow.roots() {
        Some((r1, r2)) => {
            if &(r1 * r1) != s1 || &(r2 * r2) != s2 {
                problems.push("roots do not square to Phi_i^2".to_string());
            }
            if r1.reduce_mod_p() != xp(Var::X1, p) || r2.reduce_mod_p() != xp(Var::X2, p) {
                problems.push("Phi_i != x_i^p mod p".to_string());
            }
            "Frobenius shape mod p and root round trip"
        }
        None => "Frobenius shape mod p (roots not stored)",
    };
    let ok = problems.is_empty();
    CheckResult::new("flow_shape", ok, detail).with_difference((!ok).then(|| problems.join("; ")))
}

fn level_name(spec: &LevelSpec) -> String {
    let (r1, r2) = spec.residues();
    format!("({r1},{r2})")
}

fn linearization_results(flow: &FlowDescriptor, specs: &Result<Vec<LevelSpec>>) -> Vec<CheckResult> {
    let specs = match specs {
        Ok(s) => s,
        Err(e) => return vec![CheckResult::skipped("linearization", format!("skipped: {e}"))],
    };
    if flow.context().precision() < 2 {
        return vec![CheckResult::skipped(
            "linearization",
            "skipped: precision 1 leaves no room for delta",
        )];
    }
    specs
        .par_iter()
        .map(|spec| {
            let name = format!("linearization c={}", level_name(spec));
            match linearization_check(flow, spec) {
                Ok(check) => {
                    let p2 = match check.holds_mod_p2 {
                        Some(true) => "also holds mod p^2",
                        Some(false) => "nonzero defect mod p^2",
                        None => "mod p^2 not evaluated",
                    };
                    let diff = (!check.holds).then(|| match &check.residual {
                        Some(r) => r.to_string(),
                        None => "d Phi3 not divisible by p".to_string(),
                    });
                    CheckResult::new(&name, check.holds, format!("phi^*omega/p = A(c)^-1 omega mod p; {p2}"))
                        .with_difference(diff)
                }
                Err(e) => CheckResult::error(&name, &e),
            }
        })
        .collect()
}

fn shift_library(flow: &FlowDescriptor, seed: u64) -> Vec<(String, LocalizedElement)> {
    let ring = flow.ring();
    let params = flow.params().reduce_mod_p();
    let ctx = params.context();
    let (h1, h2) = make_h(&params);
    let mut rng = rng_for(seed, 11);
    let mut f = random_space_poly(ctx, 2, 3, &mut rng);
    while f.total_degree().unwrap_or(0) == 0 {
        f = random_space_poly(ctx, 2, 3, &mut rng);
    }
    let p = ctx.p() as u32;
    vec![
        ("H1".to_string(), ring.poly(h1.clone())),
        ("H2".to_string(), ring.poly(h2.clone())),
        ("H1*H2".to_string(), ring.poly(&h1 * &h2)),
        (format!("({f})^p"), ring.poly(f.pow(p))),
        (
            "H2^2/A(H)".to_string(),
            ring.element(h2.pow(2), Denominator::new(1, 0, 0, 0)),
        ),
    ]
}

fn torsor_results(flow: &FlowDescriptor, specs: &Result<Vec<LevelSpec>>, seed: u64) -> Vec<CheckResult> {
    if flow.context().precision() < 2 {
        return vec![CheckResult::skipped("torsor", "skipped: precision 1")];
    }
    let no_specs: Vec<LevelSpec> = Vec::new();
    let specs = specs.as_ref().unwrap_or(&no_specs);
    let shifted: Vec<(String, Result<FlowDescriptor>)> = shift_library(flow, seed)
        .into_par_iter()
        .map(|(name, k)| (name, torsor_shift(flow, &k)))
        .collect();
    let mut out = Vec::new();
    let mut flows = vec![flow.clone()];
    for (name, result) in shifted {
        let check = format!("torsor_shift K={name}");
        match result {
            Ok(g) => {
                let integrals = prime_integral_residuals(&g).iter().all(MultiPoly::is_zero);
                let failed: Vec<String> = specs
                    .par_iter()
                    .filter(|s| !matches!(linearization_check(&g, s), Ok(c) if c.holds))
                    .map(level_name)
                    .collect();
                let ok = integrals && failed.is_empty();
                let detail = if specs.is_empty() {
                    "prime integrals hold; no admissible levels for linearization".to_string()
                } else {
                    format!("prime integrals and linearization on {} levels", specs.len())
                };
                let diff = (!ok).then(|| format!("integrals ok: {integrals}; failing levels: {}", failed.join(" ")));
                out.push(CheckResult::new(check, ok, detail).with_difference(diff));
                flows.push(g);
            }
            Err(e) => out.push(CheckResult::error(check, &e)),
        }
    }
    let mut pairs = 0;
    let mut bad = Vec::new();
    for i in 0..flows.len() {
        for j in (i + 1)..flows.len() {
            pairs += 1;
            match flow_difference(&flows[j], &flows[i], specs) {
                Ok(d) if d.is_prime_integral && d.closed_on_levels.iter().all(|&c| c) => {}
                Ok(d) => bad.push(format!("({i},{j}): K = {}", d.k)),
                Err(e) => bad.push(format!("({i},{j}): {e}")),
            }
        }
    }
    out.push(
        CheckResult::new(
            "torsor_difference",
            bad.is_empty(),
            format!("{pairs} pairs of generated flows differ by prime integrals mod p (finite sample)"),
        )
        .with_difference((!bad.is_empty()).then(|| bad.join("; "))),
    );
    out
}

fn lift_results(flow: &FlowDescriptor, seed: u64) -> Vec<CheckResult> {
    let ctx = flow.context();
    if ctx.precision() < 2 {
        return vec![CheckResult::skipped("lift_independence", "skipped: precision 1")];
    }
    let ring = flow.ring();
    let mut rng = rng_for(seed, 12);
    let mut run = || -> Result<(u32, u32)> {
        let base = FlowDescriptor::from_delta3(flow.delta3().clone())?.with_roots()?;
        let mut f = random_space_poly(ctx, 3, 4, &mut rng);
        while f.reduce_mod_p().is_zero() {
            f = random_space_poly(ctx, 3, 4, &mut rng);
        }
        let p = ctx.p() as i64;
        let near = FlowDescriptor::from_delta3(flow.delta3() + &ring.poly(f.scale_i64(p)))?.with_roots()?;
        let far = FlowDescriptor::from_delta3(flow.delta3() + &ring.poly(f))?.with_roots()?;
        Ok((phi_agreement(&base, &near)?, phi_agreement(&base, &far)?))
    };
    match run() {
        Ok((near, far)) => {
            let target = 2.min(ctx.precision());
            vec![CheckResult::new(
                "lift_independence",
                near >= target && far == 1,
                format!("Delta3 + p f moves Phi_i by p^{near}; Delta3 + f moves them by p^{far}"),
            )]
        }
        Err(e) => vec![CheckResult::error("lift_independence", &e)],
    }
}

fn classical_results(params: &SystemParams, levels: &Result<Vec<LevelSpec>>) -> Vec<CheckResult> {
    let d = ClassicalDerivation::euler(params);
    let (h1, h2) = make_h(params);
    let mut out = vec![CheckResult::new(
        "classical_integrals",
        d.apply(&h1).is_zero() && d.apply(&h2).is_zero(),
        "delta H1 = delta H2 = 0 exactly",
    )];
    let levels = match levels {
        Ok(l) => l,
        Err(e) => {
            out.push(CheckResult::skipped("duality", format!("skipped: {e}")));
            return out;
        }
    };
    let per_level = |name: &str, f: &(dyn Fn(&LevelSpec) -> Result<bool> + Sync)| {
        let failed: Vec<String> = levels
            .par_iter()
            .filter(|s| !matches!(f(s), Ok(true)))
            .map(level_name)
            .collect();
        let ok = failed.is_empty();
        CheckResult::new(name, ok, format!("{} nondegenerate levels", levels.len()))
            .with_difference((!ok).then(|| format!("failing levels: {}", failed.join(" "))))
    };
    out.push(per_level("duality", &|s| duality_check(params, s)));
    out.push(per_level("canonical_form", &|s| {
        Ok(canonical_form_identity_check(params, s))
    }));
    out.push(per_level("isogeny", &|s| Ok(isogeny_identity_check(params, s))));
    out
}

fn lie_results(params: &SystemParams, levels: &Result<Vec<LevelSpec>>, trials: usize, seed: u64) -> Vec<CheckResult> {
    let levels = match levels {
        Ok(l) => l,
        Err(e) => return vec![CheckResult::skipped("lie_identity", format!("skipped: {e}"))],
    };
    let mut rng = rng_for(seed, 13);
    let low = params.context().residue_field();
    let ks: Vec<MultiPoly> = (0..trials).map(|_| random_space_poly(low, 4, 5, &mut rng)).collect();
    let failures: Vec<String> = ks
        .par_iter()
        .flat_map(|k| {
            levels
                .par_iter()
                .filter(|s| !matches!(lie_identity_check(params, s, k), Ok(true)))
                .map(move |s| format!("K = {k} at {}", level_name(s)))
        })
        .collect();
    let ok = failures.is_empty();
    vec![CheckResult::new(
        "lie_identity",
        ok,
        format!(
            "{} random K of degree <= 4 on {} levels, over F_p",
            ks.len(),
            levels.len()
        ),
    )
    .with_difference((!ok).then(|| failures.join("; ")))]
}

/// Point-count congruence tallies over random squarefree cubics and quartics.
#[derive(Debug, Clone, Serialize)]
pub struct PointCountSuite {
    pub p: u64,
    pub cubics_passed: usize,
    pub quartics_passed: usize,
    pub trials: usize,
    pub failures: Vec<PointCountReport>,
}

impl PointCountSuite {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn point_count_suite(p: u64, trials: usize, seed: u64) -> PointCountSuite {
    let mut rng = rng_for(seed, 14 + p);
    let polys: Vec<_> = (0..trials)
        .flat_map(|_| {
            let c = random_squarefree(p, 3, true, &mut rng);
            let q = random_squarefree(p, 4, false, &mut rng);
            [c, q]
        })
        .collect();
    let reports: Vec<PointCountReport> = polys
        .par_iter()
        .map(|f| check_point_counts(f).expect("degree 3 or 4"))
        .collect();
    let passed = |deg: usize| reports.iter().filter(|r| r.poly.len() == deg + 1 && r.holds).count();
    PointCountSuite {
        p,
        cubics_passed: passed(3),
        quartics_passed: passed(4),
        trials,
        failures: reports.into_iter().filter(|r| !r.holds).collect(),
    }
}

/// Degree, nonvanishing and `R`-series facts about `A_{p-1}` for one system.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    #[serde(rename = "A")]
    pub a: String,
    pub degree: u64,
    pub homogeneous: bool,
    pub nonzero_mod_p: bool,
    pub r_series_exact: bool,
}

impl InvariantSummary {
    pub fn passed(&self) -> bool {
        self.homogeneous && self.nonzero_mod_p && self.r_series_exact
    }
}

pub fn invariant_summary(params: &SystemParams) -> Result<InvariantSummary> {
    let p = params.context().p();
    let f = make_f(params);
    let a = hasse_invariant(&f, Var::X);
    let degree = (p - 1) / 2;
    let h = r_series(params)?;
    let x_top = MultiPoly::monomial(params.context(), Monomial::var(Var::X, (p - 1) as u16), 1);
    let r_series_exact = h.r[(p - 1) as usize].is_zero()
        && &h.a * &x_top + h.r_poly() == f.pow(degree as u32)
        && h.s.partial(Var::X) == h.r_poly();
    Ok(InvariantSummary {
        a: a.to_string(),
        degree,
        homogeneous: a.is_homogeneous_in(&[Var::Z1, Var::Z2], degree as u32),
        nonzero_mod_p: !a.reduce_mod_p().is_zero(),
        r_series_exact,
    })
}

fn hasse_results(params: &SystemParams, trials: usize, seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();
    match invariant_summary(params) {
        Ok(s) => out.push(CheckResult::new(
            "hasse_invariant",
            s.passed(),
            format!(
                "A = {}; homogeneous of degree {}: {}; nonzero mod p: {}; R-series exact: {}",
                s.a, s.degree, s.homogeneous, s.nonzero_mod_p, s.r_series_exact
            ),
        )),
        Err(e) => out.push(CheckResult::error("hasse_invariant", &e)),
    }
    let suite = point_count_suite(params.context().p(), trials, seed);
    out.push(
        CheckResult::new(
            "point_counts",
            suite.passed(),
            format!(
                "cubics {}/{}, quartics {}/{}",
                suite.cubics_passed, suite.trials, suite.quartics_passed, suite.trials
            ),
        )
        .with_difference((!suite.passed()).then(|| serde_json::to_string(&suite.failures).unwrap_or_default())),
    );
    out
}

/// Runs every check against `flow`. Check order is fixed, so the report
/// depends only on the flow and `config`.
pub fn verify_flow(flow: &FlowDescriptor, config: &RunConfig) -> VerificationReport {
    let params = *flow.params();
    let specs = sample_admissible_c(&params, config.specs);
    let levels = sample_nondegenerate_c(&params, config.specs);
    let seed = config.seed;
    let trials = config.trials;
    type Task<'a> = Box<dyn Fn() -> Vec<CheckResult> + Send + Sync + 'a>;
    let tasks: Vec<Task> = vec![
        Box::new(|| vec![integrality_check(flow)]),
        Box::new(|| vec![shape_check(flow)]),
        Box::new(|| linearization_results(flow, &specs)),
        Box::new(|| torsor_results(flow, &specs, seed)),
        Box::new(|| lift_results(flow, seed)),
        Box::new(|| classical_results(&params, &levels)),
        Box::new(|| lie_results(&params, &levels, trials, seed)),
        Box::new(|| hasse_results(&params, trials, seed)),
    ];
    let checks = tasks.par_iter().map(|t| t()).collect::<Vec<_>>().concat();
    drop(tasks);
    VerificationReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        params,
        levels: specs
            .map(|s| s.iter().map(LevelSpec::residues).collect())
            .unwrap_or_default(),
        checks,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HasseReport {
    pub p: u64,
    pub seed: u64,
    pub invariant: InvariantSummary,
    pub point_counts: PointCountSuite,
}

impl HasseReport {
    pub fn passed(&self) -> bool {
        self.invariant.passed() && self.point_counts.passed()
    }
}

pub fn hasse_report(config: &RunConfig) -> Result<HasseReport> {
    let params = config.params()?;
    Ok(HasseReport {
        p: config.p,
        seed: config.seed,
        invariant: invariant_summary(&params)?,
        point_counts: point_count_suite(config.p, config.trials, config.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = RunConfig {
            p: 4,
            ..RunConfig::default()
        };
        assert_eq!(c.params().unwrap_err(), Error::NotPrime(4));
        c.p = 5;
        c.a = [0, 0, 1];
        assert_eq!(c.params().unwrap_err(), Error::CoefficientsNotDistinct);
        c.a = [5, 6, 7];
        c.teichmuller = true;
        let p = c.params().unwrap();
        assert_eq!(p.a(1).residue(), 0);
        assert_eq!(p.a(2).residue(), 1);
    }

    #[test]
    fn report_is_deterministic() {
        let config = RunConfig {
            p: 3,
            precision: 2,
            trials: 5,
            ..RunConfig::default()
        };
        let flow = FlowDescriptor::construct(&config.params().unwrap()).unwrap();
        let a = serde_json::to_string(&verify_flow(&flow, &config)).unwrap();
        let b = serde_json::to_string(&verify_flow(&flow, &config)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn p3_report_skips_linearization() {
        let config = RunConfig {
            p: 3,
            precision: 2,
            trials: 5,
            ..RunConfig::default()
        };
        let flow = FlowDescriptor::construct(&config.params().unwrap()).unwrap();
        let report = verify_flow(&flow, &config);
        assert!(report.passed(), "{}", report.render_text());
        let lin = report.checks.iter().find(|c| c.name == "linearization").unwrap();
        assert_eq!(lin.status, Status::Skipped);
        assert!(lin.detail.contains("no admissible level sets over F_3"));
        let pi = report.checks.iter().find(|c| c.name == "prime_integrals").unwrap();
        assert_eq!(pi.status, Status::Pass);
    }

    #[test]
    fn flow_file_roundtrip() {
        let config = RunConfig {
            p: 3,
            precision: 2,
            ..RunConfig::default()
        };
        let (flow, file) = construct_flow_file(&config).unwrap();
        assert_eq!(file.construction.delta3_degree, Some(5));
        assert!(file.manifest.iter().all(|m| m.passed));
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(parse_flow_file(&text).unwrap(), flow);
        let wrong = text.replace(FLOW_SCHEMA, "other/v0");
        assert!(matches!(parse_flow_file(&wrong), Err(Error::Malformed(_))));
    }

    #[test]
    fn out_dir_resolution() {
        assert_eq!(resolve_out_dir(Some(PathBuf::from("/tmp/x"))), PathBuf::from("/tmp/x"));
    }
}
