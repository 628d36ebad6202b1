//! Nef and effective thresholds and the Minimal Model Program with scaling.
//!
//! `run_scaling` implements the scaling loop: at each step the scaling
//! value is the least `λ` with `K+Δ+λH` nef, a `(K+Δ)`-negative extremal
//! ray supported on `K+Δ+λH` is contracted, and divisor data is pushed
//! forward.  Traces record every step together with the pushforward maps,
//! so fiber classes of terminal Mori Fiber Spaces pull back to the start.
//!
//! Thresholds are one-dimensional exact linear programs against the cone
//! generators (nef) or facets (pseudo-effective).

use crate::linalg::{self, Rat, Vector};
use crate::numlat::{ClassVector, PushforwardMap};
use crate::qcone::QCone;
use crate::toric::{
    self, classify_and_contract, common_refinement, flip, ContractionResult, Geometry, ToricPair,
};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

/// Exact threshold value with an explicit infinity sentinel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThresholdValue {
    Finite(Rat),
    Infinite,
}

impl ThresholdValue {
    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            ThresholdValue::Finite(r) => Some(r),
            ThresholdValue::Infinite => None,
        }
    }

    pub fn to_string_repr(&self) -> String {
        match self {
            ThresholdValue::Finite(r) => linalg::rat_to_string(r),
            ThresholdValue::Infinite => "infinity".to_string(),
        }
    }
}

/// Nef threshold τ and effective threshold σ of a divisor class.
#[derive(Clone, Debug)]
pub struct Thresholds {
    pub tau: ThresholdValue,
    pub sigma: ThresholdValue,
}

impl Thresholds {
    /// Fujita's log Kodaira energy `-1/σ`, when σ is finite and nonzero.
    pub fn kodaira_energy(&self) -> Option<Rat> {
        match &self.sigma {
            ThresholdValue::Finite(s) if !s.is_zero() => Some(-s.clone().recip()),
            _ => None,
        }
    }
}

/// Largest `t >= 0` with all conditions `h + t·k >= 0` satisfied, or the
/// infinity sentinel when no condition bounds `t` from above.
fn threshold_interval(
    constraints: impl Iterator<Item = (Rat, Rat)>,
    what: &str,
) -> Result<ThresholdValue> {
    let mut lower = Rat::zero();
    let mut upper: Option<Rat> = None;
    for (h, k) in constraints {
        if k.is_zero() {
            if h.is_negative() {
                return Err(Error::ThresholdUndefined(format!(
                    "{what}: a condition fails for every t"
                )));
            }
            continue;
        }
        let bound = -&h / &k;
        if k.is_positive() {
            if bound > lower {
                lower = bound;
            }
        } else {
            match &upper {
                Some(u) if *u <= bound => {}
                _ => upper = Some(bound),
            }
        }
    }
    match upper {
        None => Ok(ThresholdValue::Infinite),
        Some(u) => {
            if lower > u || u.is_negative() {
                Err(Error::ThresholdUndefined(format!(
                    "{what}: no t >= 0 satisfies all conditions"
                )))
            } else {
                Ok(ThresholdValue::Finite(u))
            }
        }
    }
}

/// Nef threshold: `sup { t >= 0 : H + t(K+Δ) nef }`, computed against the
/// generators of the cone of curves.
pub fn nef_threshold(geom: &Geometry, h_class: &ClassVector) -> Result<ThresholdValue> {
    let kd = &geom.k_delta_class;
    threshold_interval(
        geom.ne1.generators().iter().map(|c| {
            let curve = ClassVector::curve(c.clone());
            (
                geom.pair_classes(h_class, &curve),
                geom.pair_classes(kd, &curve),
            )
        }),
        "nef threshold",
    )
}

/// Effective threshold: `sup { t >= 0 : H + t(K+Δ) pseudo-effective }`,
/// computed against the facets of the pseudo-effective cone.
pub fn effective_threshold(geom: &Geometry, h_class: &ClassVector) -> Result<ThresholdValue> {
    let kd = &geom.k_delta_class;
    threshold_interval(
        geom.eff.facet_inequalities().iter().map(|f| {
            (
                linalg::dot(f, &h_class.coords),
                linalg::dot(f, &kd.coords),
            )
        }),
        "effective threshold",
    )
}

pub fn thresholds(geom: &Geometry, h_class: &ClassVector) -> Result<Thresholds> {
    let tau = nef_threshold(geom, h_class)?;
    let sigma = effective_threshold(geom, h_class)?;
    if let (Some(t), Some(s)) = (tau.as_finite(), sigma.as_finite()) {
        if t > s {
            return Err(Error::InvariantViolation(format!(
                "nef threshold {} exceeds effective threshold {}",
                linalg::rat_to_string(t),
                linalg::rat_to_string(s)
            )));
        }
    }
    Ok(Thresholds { tau, sigma })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayPolicy {
    Deterministic,
    BranchAll,
}

#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub policy: RayPolicy,
    /// Hard limit on steps per trace; `None` means `10·ρ²`.
    pub step_cap: Option<usize>,
    /// Limit on the total number of explored traces under branch-all.
    pub branch_cap: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            policy: RayPolicy::Deterministic,
            step_cap: None,
            branch_cap: 4096,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Divisorial,
    Flip,
    TerminalNef,
    TerminalMfs,
}

/// One step of a scaling run.
#[derive(Clone, Debug)]
pub struct MmpStep {
    pub pair: ToricPair,
    /// Scaling divisor as ray coefficients on this step's fan.
    pub h_divisor: Vector,
    pub lambda: Rat,
    /// Primitive generator of the contracted extremal ray, when present.
    pub ray: Option<Vector>,
    pub kind: StepKind,
    /// Pushforward of divisor classes to the next step, when present.
    pub map: Option<PushforwardMap>,
}

#[derive(Clone, Debug)]
pub struct MfsOutcome {
    pub target_dim: usize,
    /// Class of a wall curve in the contracted fiber ray, on the last step.
    pub fiber_class: Vector,
    /// Numerical pullback of the fiber class to the starting lattice.
    pub pulled_back_class: Vector,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    NefModelReached,
    MoriFiberSpace(MfsOutcome),
}

#[derive(Clone, Debug)]
pub struct MmpTrace {
    pub steps: Vec<MmpStep>,
    pub outcome: Outcome,
}

impl MmpTrace {
    pub fn lambdas(&self) -> Vec<Rat> {
        self.steps.iter().map(|s| s.lambda.clone()).collect()
    }

    /// Composition of the step pushforwards from the start up to step `i`
    /// (exclusive); the identity for `i = 0`.
    pub fn composed_map(&self, i: usize) -> Result<PushforwardMap> {
        let geom0 = Geometry::new(self.steps[0].pair.clone())?;
        let mut map = PushforwardMap::identity(geom0.lattice);
        for step in &self.steps[..i] {
            if let Some(m) = &step.map {
                map = map.compose(m)?;
            }
        }
        Ok(map)
    }
}

/// Extremal rays supported on `K+Δ+λH`: the `(K+Δ)`-negative extremal rays
/// of the cone of curves on which the scaled class vanishes.
pub fn supported_rays(geom: &Geometry, h_class: &ClassVector, lambda: &Rat) -> Result<Vec<Vector>> {
    let scaled = geom.k_delta_class.add(&h_class.scale(lambda));
    let mut out = Vec::new();
    for r in geom.ne1.extremal_rays()? {
        let curve = ClassVector::curve(r.clone());
        let kd = geom.pair_classes(&geom.k_delta_class, &curve);
        let s = geom.pair_classes(&scaled, &curve);
        if kd.is_negative() && s.is_zero() {
            out.push(r.clone());
        }
    }
    Ok(out)
}

/// The scaling value: least `λ >= 0` with `K+Δ+λH` nef.
fn scaling_value(geom: &Geometry, h_class: &ClassVector) -> Result<Rat> {
    let mut lambda = Rat::zero();
    for c in geom.ne1.generators() {
        let curve = ClassVector::curve(c.clone());
        let kd = geom.pair_classes(&geom.k_delta_class, &curve);
        if kd.is_negative() {
            let h = geom.pair_classes(h_class, &curve);
            if !h.is_positive() {
                return Err(Error::InvariantViolation(
                    "scaling divisor not positive on a (K+Δ)-negative curve".to_string(),
                ));
            }
            let ratio = -&kd / &h;
            if ratio > lambda {
                lambda = ratio;
            }
        }
    }
    Ok(lambda)
}

/// Runs the `(K+Δ)`-MMP with scaling of the effective ample divisor given
/// by ray coefficients.  Under the deterministic policy the result is a
/// single trace; under branch-all every choice of supported extremal ray is
/// explored.
pub fn run_scaling(pair: &ToricPair, h_divisor: &[Rat], cfg: &ScalingConfig) -> Result<Vec<MmpTrace>> {
    let geom = Geometry::new(pair.clone())?;
    if h_divisor.len() != pair.fan.rays().len() {
        return Err(Error::DimensionMismatch {
            expected: pair.fan.rays().len(),
            got: h_divisor.len(),
        });
    }
    if h_divisor.iter().any(|c| c.is_negative()) {
        return Err(Error::Precondition(
            "scaling divisor must be effective (nonnegative ray coefficients)".to_string(),
        ));
    }
    let h_class = geom.divisor_class(h_divisor)?;
    if !geom.nef.contains_in_interior(&h_class.coords) {
        return Err(Error::Precondition("scaling divisor must be ample".to_string()));
    }
    let entry = geom.k_delta_class.add(&h_class);
    if !geom.nef.contains(&entry.coords) {
        return Err(Error::Precondition("K+Δ+H is not nef at entry".to_string()));
    }
    let step_cap = cfg.step_cap.unwrap_or(10 * geom.rho() * geom.rho());
    let mut traces = Vec::new();
    explore(
        geom,
        h_divisor.to_vec(),
        linalg::rat(1),
        Vec::new(),
        cfg,
        step_cap,
        &mut traces,
    )?;
    Ok(traces)
}

fn explore(
    geom: Geometry,
    h_divisor: Vector,
    lambda_cap: Rat,
    steps: Vec<MmpStep>,
    cfg: &ScalingConfig,
    step_cap: usize,
    traces: &mut Vec<MmpTrace>,
) -> Result<()> {
    if steps.len() > step_cap {
        return Err(Error::StepCapExceeded(step_cap));
    }
    if traces.len() >= cfg.branch_cap {
        return Err(Error::Config(format!(
            "branch cap {} exceeded during exploration",
            cfg.branch_cap
        )));
    }
    let h_class = geom.divisor_class(&h_divisor)?;
    let lambda = scaling_value(&geom, &h_class)?;
    if lambda > lambda_cap {
        return Err(Error::InvariantViolation(format!(
            "scaling values increased: {} after {}",
            linalg::rat_to_string(&lambda),
            linalg::rat_to_string(&lambda_cap)
        )));
    }

    if geom.nef.contains(&geom.k_delta_class.coords) {
        let mut steps = steps;
        steps.push(MmpStep {
            pair: geom.pair.clone(),
            h_divisor,
            lambda,
            ray: None,
            kind: StepKind::TerminalNef,
            map: None,
        });
        traces.push(MmpTrace {
            steps,
            outcome: Outcome::NefModelReached,
        });
        return Ok(());
    }

    let supported = supported_rays(&geom, &h_class, &lambda)?;
    if supported.is_empty() {
        return Err(Error::InvariantViolation(
            "no supported extremal ray; the cone computation is inconsistent".to_string(),
        ));
    }
    let chosen: Vec<Vector> = match cfg.policy {
        RayPolicy::Deterministic => vec![supported[0].clone()],
        RayPolicy::BranchAll => supported,
    };

    for ray in chosen {
        match classify_and_contract(&geom, &ray)? {
            ContractionResult::Fiber {
                target_dim,
                fiber_wall,
            } => {
                let fiber_class = geom.walls[fiber_wall].class.clone();
                let mut terminal_steps = steps.clone();
                terminal_steps.push(MmpStep {
                    pair: geom.pair.clone(),
                    h_divisor: h_divisor.clone(),
                    lambda: lambda.clone(),
                    ray: Some(ray.clone()),
                    kind: StepKind::TerminalMfs,
                    map: None,
                });
                let mut trace = MmpTrace {
                    steps: terminal_steps,
                    outcome: Outcome::NefModelReached,
                };
                let composed = trace.composed_map(trace.steps.len() - 1)?;
                let pulled =
                    composed.numerical_pullback(&ClassVector::curve(fiber_class.clone()))?;
                trace.outcome = Outcome::MoriFiberSpace(MfsOutcome {
                    target_dim,
                    fiber_class,
                    pulled_back_class: pulled.coords,
                });
                traces.push(trace);
            }
            ContractionResult::Divisorial {
                result,
                contracted_ray,
                pushforward,
            } => {
                let next_h = toric::geometry::drop_ray(&h_divisor, contracted_ray);
                let mut next_steps = steps.clone();
                next_steps.push(MmpStep {
                    pair: geom.pair.clone(),
                    h_divisor: h_divisor.clone(),
                    lambda: lambda.clone(),
                    ray: Some(ray.clone()),
                    kind: StepKind::Divisorial,
                    map: Some(pushforward),
                });
                explore(
                    Geometry::new(result)?,
                    next_h,
                    lambda.clone(),
                    next_steps,
                    cfg,
                    step_cap,
                    traces,
                )?;
            }
            ContractionResult::Small { circuit } => {
                let (flipped, map) = flip(&geom, &circuit)?;
                let mut next_steps = steps.clone();
                next_steps.push(MmpStep {
                    pair: geom.pair.clone(),
                    h_divisor: h_divisor.clone(),
                    lambda: lambda.clone(),
                    ray: Some(ray.clone()),
                    kind: StepKind::Flip,
                    map: Some(map),
                });
                explore(
                    Geometry::new(flipped)?,
                    h_divisor.clone(),
                    lambda.clone(),
                    next_steps,
                    cfg,
                    step_cap,
                    traces,
                )?;
            }
        }
    }
    Ok(())
}

/// Per-condition result of a nef-model check along a trace.
#[derive(Clone, Debug, Serialize)]
pub struct NefModelCertificate {
    pub step: usize,
    pub t: String,
    pub inverse_contracts_no_divisor: bool,
    pub boundary_is_pushforward: bool,
    pub scaled_class_is_nef: bool,
    pub difference_effective_and_exceptional: bool,
    pub pass: bool,
    /// Refinement ray witnessing a failure, if any.
    pub offending_ray: Option<Vec<String>>,
}

/// Checks that step `i` of the trace is a nef model for `(X, Δ + t·H)` at
/// `t = λ_i` (or a supplied `0 <= t <= λ_i`): the inverse map contracts no
/// divisor, boundary data is pushed forward, `K+Δ+tH` is nef downstream,
/// and the pullback difference on a common refinement is effective and
/// exceptional.
pub fn verify_nef_model(trace: &MmpTrace, i: usize, t: Option<Rat>) -> Result<NefModelCertificate> {
    if i >= trace.steps.len() {
        return Err(Error::Config(format!("trace has no step {i}")));
    }
    let start = &trace.steps[0];
    let here = &trace.steps[i];
    let t = t.unwrap_or_else(|| here.lambda.clone());
    if t.is_negative() || t > here.lambda {
        return Err(Error::Precondition(format!(
            "t = {} outside the certified range [0, λ_{i}]",
            linalg::rat_to_string(&t)
        )));
    }

    // (1) every ray downstream is a ray upstream
    let mut inverse_ok = true;
    for r in here.pair.fan.rays() {
        if start.pair.fan.ray_index(r).is_none() {
            inverse_ok = false;
        }
    }

    // (2) boundary and scaling data are carried along surviving rays
    let mut boundary_ok = true;
    for (idx, r) in here.pair.fan.rays().iter().enumerate() {
        match start.pair.fan.ray_index(r) {
            Some(j) => {
                if here.pair.delta[idx] != start.pair.delta[j]
                    || here.h_divisor[idx] != start.h_divisor[j]
                {
                    boundary_ok = false;
                }
            }
            None => boundary_ok = false,
        }
    }

    // (3) K + Δ + tH nef on this step
    let geom_i = Geometry::new(here.pair.clone())?;
    let h_class_i = geom_i.divisor_class(&here.h_divisor)?;
    let scaled = geom_i.k_delta_class.add(&h_class_i.scale(&t));
    let nef_ok = geom_i.nef.contains(&scaled.coords);

    // (4) E_i(t) = p*(K+Δ+tH) - q*(K_i+Δ_i+tH_i) effective and exceptional
    let refinement = common_refinement(&start.pair.fan, &here.pair.fan)?;
    let div0 = divisor_k_delta_th(&start.pair, &start.h_divisor, &t);
    let divi = divisor_k_delta_th(&here.pair, &here.h_divisor, &t);
    let up = toric::refine::pullback_coefficients(&start.pair, &div0, &refinement.fan)?;
    let down = toric::refine::pullback_coefficients(&here.pair, &divi, &refinement.fan)?;
    let mut diff_ok = true;
    let mut offending = None;
    for (w, (pu, qd)) in refinement.fan.rays().iter().zip(up.iter().zip(&down)) {
        let e = pu - qd;
        let on_target = here.pair.fan.ray_index(w).is_some();
        let bad = if on_target { !e.is_zero() } else { e.is_negative() };
        if bad {
            diff_ok = false;
            offending = Some(linalg::vec_to_strings(w));
            break;
        }
    }

    let pass = inverse_ok && boundary_ok && nef_ok && diff_ok;
    Ok(NefModelCertificate {
        step: i,
        t: linalg::rat_to_string(&t),
        inverse_contracts_no_divisor: inverse_ok,
        boundary_is_pushforward: boundary_ok,
        scaled_class_is_nef: nef_ok,
        difference_effective_and_exceptional: diff_ok,
        pass,
        offending_ray: offending,
    })
}

/// Ray coefficients of `K + Δ + tH`.
fn divisor_k_delta_th(pair: &ToricPair, h: &[Rat], t: &Rat) -> Vector {
    pair.delta
        .iter()
        .zip(h)
        .map(|(a, hc)| a - linalg::rat(1) + t * hc)
        .collect()
}

/// Configuration of the Σ enumeration grid.
#[derive(Clone, Debug)]
pub struct SigmaConfig {
    pub grid_depth: usize,
    pub step_cap: Option<usize>,
    pub branch_cap: usize,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig {
            grid_depth: 3,
            step_cap: None,
            branch_cap: 4096,
        }
    }
}

/// A Σ ray: the numerical pullback of a fiber curve of some Mori Fiber
/// Space reached by scaling, with provenance.
#[derive(Clone, Debug)]
pub struct SigmaRay {
    /// Primitive generator of the ray in N_1(X).
    pub ray: Vector,
    /// The exact pulled-back class that produced it.
    pub class: Vector,
    /// A scaling class in N^1(X) whose runs reach this outcome.
    pub sample_class: Vector,
    pub target_dim: usize,
    pub trace_steps: usize,
}

/// Enumerates Σ: classes of curves on general fibers of Mori Fiber Spaces
/// reached from `X` by scaling runs, pulled back numerically.  Ample
/// divisors are sampled from a rational grid on the nef generators at the
/// configured depth; every branch of supported-ray choices is explored.
pub fn enumerate_sigma(pair: &ToricPair, cfg: &SigmaConfig) -> Result<Vec<SigmaRay>> {
    let geom = Geometry::new(pair.clone())?;
    if geom.eff.contains(&geom.k_delta_class.coords) {
        return Err(Error::Precondition(
            "K+Δ is pseudo-effective; Σ is defined for the non-pseudo-effective case".to_string(),
        ));
    }
    if cfg.grid_depth == 0 {
        return Err(Error::Config("grid depth must be at least 1".to_string()));
    }
    let nef_gens = geom.nef.extremal_rays()?;
    let mut seen: BTreeSet<Vector> = BTreeSet::new();
    let mut sampled: BTreeSet<Vector> = BTreeSet::new();
    let mut out: Vec<SigmaRay> = Vec::new();
    let mut any_sample = false;
    // grid anchored at the all-ones weight vector, which is interior since
    // it is a positive combination of every extremal nef generator
    for extra in compositions(cfg.grid_depth - 1, nef_gens.len()) {
        let weights: Vec<usize> = extra.iter().map(|e| e + 1).collect();
        let mut class = linalg::zeros(geom.rho());
        for (w, g) in weights.iter().zip(&nef_gens) {
            class = linalg::add_scaled(&class, &linalg::rat(*w as i64), g);
        }
        if !geom.nef.contains_in_interior(&class) {
            continue;
        }
        if !sampled.insert(linalg::primitive(&class)) {
            continue;
        }
        any_sample = true;
        let ample = ClassVector::divisor(class);
        let h = geom.effective_representative(&ample).ok_or_else(|| {
            Error::InvariantViolation("ample class has no effective representative".to_string())
        })?;
        let tau = match nef_threshold(&geom, &ample)? {
            ThresholdValue::Finite(t) if t.is_positive() => t,
            _ => {
                return Err(Error::InvariantViolation(
                    "nef threshold of an ample divisor must be finite and positive here"
                        .to_string(),
                ))
            }
        };
        let scaled_h: Vector = h.iter().map(|c| c / &tau).collect();
        let scaling = ScalingConfig {
            policy: RayPolicy::BranchAll,
            step_cap: cfg.step_cap,
            branch_cap: cfg.branch_cap,
        };
        for trace in run_scaling(pair, &scaled_h, &scaling)? {
            if let Outcome::MoriFiberSpace(mfs) = &trace.outcome {
                let ray = linalg::primitive(&mfs.pulled_back_class);
                if seen.insert(ray.clone()) {
                    out.push(SigmaRay {
                        ray,
                        class: mfs.pulled_back_class.clone(),
                        sample_class: ample.coords.clone(),
                        target_dim: mfs.target_dim,
                        trace_steps: trace.steps.len(),
                    });
                }
            }
        }
    }
    if !any_sample {
        return Err(Error::Config(
            "ample-cone grid sample is empty; increase the grid depth".to_string(),
        ));
    }
    out.sort_by(|a, b| linalg::lex_cmp(&a.ray, &b.ray));
    Ok(out)
}

/// Σ enumeration repeated at increasing depth until the ray set stabilizes.
pub fn enumerate_sigma_stable(pair: &ToricPair, cfg: &SigmaConfig) -> Result<Vec<SigmaRay>> {
    let mut depth = cfg.grid_depth.max(1);
    let mut current = enumerate_sigma(
        pair,
        &SigmaConfig {
            grid_depth: depth,
            ..cfg.clone()
        },
    )?;
    for _ in 0..3 {
        let next = enumerate_sigma(
            pair,
            &SigmaConfig {
                grid_depth: depth + 1,
                ..cfg.clone()
            },
        )?;
        let same = current.len() == next.len()
            && current.iter().zip(&next).all(|(a, b)| a.ray == b.ray);
        if same {
            return Ok(current);
        }
        current = next;
        depth += 1;
    }
    Ok(current)
}

/// Exact Σ enumeration by chamber decomposition of the nef cone.
///
/// Which extremal ray is contracted first depends on `H` only through the
/// sign pattern of the linear functionals comparing contraction ratios,
/// and divisor pushforward keeps every later comparison linear in the
/// original `H`.  The scaling outcomes therefore partition the nef cone of
/// the start into finitely many polyhedral chambers, which this walk
/// enumerates exhaustively; chambers without ample points (inside a facet
/// of the nef cone) are unreachable by scaling runs and are skipped.
pub fn enumerate_sigma_exact(pair: &ToricPair) -> Result<Vec<SigmaRay>> {
    let geom = Geometry::new(pair.clone())?;
    if geom.eff.contains(&geom.k_delta_class.coords) {
        return Err(Error::Precondition(
            "K+Δ is pseudo-effective; Σ is defined for the non-pseudo-effective case".to_string(),
        ));
    }
    let step_cap = 10 * geom.rho() * geom.rho();
    let composed = PushforwardMap::identity(geom.lattice.clone());
    let mut seen: BTreeSet<Vector> = BTreeSet::new();
    let mut out: Vec<SigmaRay> = Vec::new();
    let start_nef = geom.nef.clone();
    chamber_walk(
        &start_nef,
        &geom,
        &composed,
        &start_nef.clone(),
        0,
        step_cap,
        &mut seen,
        &mut out,
    )?;
    out.sort_by(|a, b| linalg::lex_cmp(&a.ray, &b.ray));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn chamber_walk(
    start_nef: &QCone,
    geom: &Geometry,
    composed: &PushforwardMap,
    chamber: &QCone,
    depth: usize,
    step_cap: usize,
    seen: &mut BTreeSet<Vector>,
    out: &mut Vec<SigmaRay>,
) -> Result<()> {
    if depth > step_cap {
        return Err(Error::StepCapExceeded(step_cap));
    }
    if geom.nef.contains(&geom.k_delta_class.coords) {
        return Ok(()); // nef model; contributes nothing to Σ
    }
    let neg: Vec<Vector> = geom
        .ne1
        .extremal_rays()?
        .into_iter()
        .filter(|r| {
            geom.pair_classes(&geom.k_delta_class, &ClassVector::curve(r.clone()))
                .is_negative()
        })
        .collect();
    // pairing of the pushed-forward H with a downstream curve C is linear
    // in H with coefficient vector Mᵀ C
    let m_t = linalg::transpose(composed.matrix());
    let pullback_functional: Vec<Vector> =
        neg.iter().map(|c| linalg::mat_vec(&m_t, c)).collect();
    let degrees: Vec<Rat> = neg
        .iter()
        .map(|c| -geom.pair_classes(&geom.k_delta_class, &ClassVector::curve(c.clone())))
        .collect();
    for (i, c) in neg.iter().enumerate() {
        // region of H where c attains the maximal contraction ratio
        let mut ineqs = chamber.facet_inequalities().to_vec();
        for (j, _) in neg.iter().enumerate() {
            if i == j {
                continue;
            }
            let f = linalg::sub(
                &linalg::scale(&pullback_functional[j], &degrees[i]),
                &linalg::scale(&pullback_functional[i], &degrees[j]),
            );
            ineqs.push(f);
        }
        let sub = QCone::from_halfspaces(chamber.dim(), &ineqs, chamber.equations())?;
        if sub.is_zero() {
            continue;
        }
        // skip chambers with no ample representatives
        let inside_facet = start_nef.facet_inequalities().iter().any(|f| {
            sub.generators()
                .iter()
                .chain(sub.lineality())
                .all(|g| linalg::dot(f, g).is_zero())
        });
        if inside_facet {
            continue;
        }
        match classify_and_contract(geom, c)? {
            ContractionResult::Fiber {
                target_dim,
                fiber_wall,
            } => {
                let fiber_class = geom.walls[fiber_wall].class.clone();
                let pulled =
                    composed.numerical_pullback(&ClassVector::curve(fiber_class))?;
                let ray = linalg::primitive(&pulled.coords);
                if seen.insert(ray.clone()) {
                    let mut rep = linalg::zeros(sub.dim());
                    for g in sub.generators() {
                        rep = linalg::add(&rep, g);
                    }
                    out.push(SigmaRay {
                        ray,
                        class: pulled.coords,
                        sample_class: rep,
                        target_dim,
                        trace_steps: depth + 1,
                    });
                }
            }
            ContractionResult::Divisorial {
                result, pushforward, ..
            } => {
                let next = Geometry::new(result)?;
                let next_map = composed.compose(&pushforward)?;
                chamber_walk(start_nef, &next, &next_map, &sub, depth + 1, step_cap, seen, out)?;
            }
            ContractionResult::Small { circuit } => {
                let (flipped, map) = flip(geom, &circuit)?;
                let next = Geometry::new(flipped)?;
                let next_map = composed.compose(&map)?;
                chamber_walk(start_nef, &next, &next_map, &sub, depth + 1, step_cap, seen, out)?;
            }
        }
    }
    Ok(())
}

/// Weak compositions of `total` into `parts` nonnegative summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            let mut full = prefix.clone();
            full.push(total);
            out.push(full);
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// Serializable view of a trace.
#[derive(Serialize)]
pub struct TraceJson {
    pub steps: Vec<TraceStepJson>,
    pub outcome: TraceOutcomeJson,
}

#[derive(Serialize)]
pub struct TraceStepJson {
    pub fan: toric::FanJson,
    pub h_divisor: Vec<String>,
    pub lambda: String,
    pub ray: Option<Vec<String>>,
    pub kind: StepKind,
    pub pushforward: Option<Vec<Vec<String>>>,
}

#[derive(Serialize)]
pub struct TraceOutcomeJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber_class: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulled_back_class: Option<Vec<String>>,
}

impl TraceJson {
    pub fn from_trace(trace: &MmpTrace) -> Self {
        let steps = trace
            .steps
            .iter()
            .map(|s| TraceStepJson {
                fan: s.pair.to_json(),
                h_divisor: linalg::vec_to_strings(&s.h_divisor),
                lambda: linalg::rat_to_string(&s.lambda),
                ray: s.ray.as_ref().map(|r| linalg::vec_to_strings(r)),
                kind: s.kind,
                pushforward: s.map.as_ref().map(|m| {
                    m.matrix()
                        .iter()
                        .map(|row| linalg::vec_to_strings(row))
                        .collect()
                }),
            })
            .collect();
        let outcome = match &trace.outcome {
            Outcome::NefModelReached => TraceOutcomeJson {
                kind: "nef_model_reached".to_string(),
                target_dim: None,
                fiber_class: None,
                pulled_back_class: None,
            },
            Outcome::MoriFiberSpace(m) => TraceOutcomeJson {
                kind: "mori_fiber_space".to_string(),
                target_dim: Some(m.target_dim),
                fiber_class: Some(linalg::vec_to_strings(&m.fiber_class)),
                pulled_back_class: Some(linalg::vec_to_strings(&m.pulled_back_class)),
            },
        };
        TraceJson { steps, outcome }
    }
}
