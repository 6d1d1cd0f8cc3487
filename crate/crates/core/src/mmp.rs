//! The minimal model program driven by a weak Zariski decomposition, the
//! program with scaling, verification of log minimal models and Mori fibre
//! spaces, and the θ-descent that feeds them.

use serde::Serialize;

use crate::decomp::{
    ckm_from_lmm, from_lmm_fujita, fujita_challengers, nef_threshold_values, validate_fujita,
    validate_weak, LmmData, ValidationReport, WeakDecomposition,
};
use crate::divisor::{alpha_split, theta, Boundary, RationalDivisor};
use crate::error::{Error, Result};
use crate::model::{Model, Pair};
use crate::rational::Rational;
use crate::surface::contract_curve;
use crate::toric::{
    ample_divisor, common_refinement, contract_or_flip, dlt_surrogate, is_pseudoeffective,
    ContractionKind, Fibration, ToricVariety,
};

/// Subdivision bound used by the dlt surrogate inside verification.
const RESOLUTION_STEPS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Run on `K + B`.
    Kb,
    /// Run on an arbitrary divisor `D`.
    Divisor,
}

/// The divisor an MMP run makes nef.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    LogCanonical,
    Divisor(RationalDivisor),
}

impl Target {
    pub fn mode(&self) -> Mode {
        match self {
            Target::LogCanonical => Mode::Kb,
            Target::Divisor(_) => Mode::Divisor,
        }
    }

    pub fn resolve(&self, pair: &Pair) -> Result<RationalDivisor> {
        match self {
            Target::LogCanonical => pair.log_canonical(),
            Target::Divisor(d) => {
                pair.model.check_divisor(d)?;
                Ok(d.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    WeakDecomposition,
    Scaling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Divisorial,
    Flip,
    Fibration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MinimalModel,
    MoriFibreSpace,
    StepLimit,
    /// The selected ray is not a curve the surface model can contract.
    NoModeledContraction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayChoice {
    /// Generator index on the model before the step.
    pub index: usize,
    pub label: String,
    /// `D . R` for the run's divisor.
    pub target_value: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_value: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepState {
    pub model: Model,
    pub boundary: Boundary,
    pub target: RationalDivisor,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<RationalDivisor>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<RationalDivisor>,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h: Option<RationalDivisor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MMPStep {
    pub index: usize,
    pub kind: StepKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Rational>,
    pub ray: RayChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contracted: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibration: Option<Fibration>,
    pub state_after: StepState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_after: Option<usize>,
    /// Diagnostic `(K + B) . R >= -2 dim X` on the chosen toric curve.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_bound_holds: Option<bool>,
    /// `P` lost nefness after the surgery and the decomposition was rebuilt.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub recertified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MMPTrace {
    pub driver: Driver,
    pub mode: Mode,
    pub step_limit: usize,
    pub initial: StepState,
    pub steps: Vec<MMPStep>,
    pub outcome: Outcome,
    /// `D . R` on every generator of the final model when it is nef.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_certificate: Option<Vec<Rational>>,
    pub contracted: Vec<String>,
}

impl MMPTrace {
    pub fn final_state(&self) -> &StepState {
        self.steps.last().map_or(&self.initial, |s| &s.state_after)
    }
}

enum Applied {
    Birational {
        model: Model,
        kind: StepKind,
        contracted: Option<String>,
    },
    Fibration(Fibration),
    Unmodeled,
}

fn apply_ray(model: &Model, ray: usize) -> Result<Applied> {
    match model {
        Model::Toric(x) => {
            let s = contract_or_flip(ray, x)?;
            Ok(match s.kind {
                ContractionKind::Fibration => {
                    Applied::Fibration(s.fibration.expect("fibrations carry base data"))
                }
                ContractionKind::Divisorial => Applied::Birational {
                    model: Model::Toric(s.target),
                    kind: StepKind::Divisorial,
                    contracted: s.contracted,
                },
                ContractionKind::Flip => Applied::Birational {
                    model: Model::Toric(s.target),
                    kind: StepKind::Flip,
                    contracted: None,
                },
            })
        }
        Model::Surface(s) => {
            let label = s.generator_label(ray);
            let negative = s.is_prime_curve(&label)
                && s.class_pairing(&label, &label)?.is_negative();
            if !negative {
                return Ok(Applied::Unmodeled);
            }
            let c = contract_curve(&label, s)?;
            Ok(Applied::Birational {
                model: Model::Surface(c.target),
                kind: StepKind::Divisorial,
                contracted: Some(label),
            })
        }
    }
}

/// First tie whose class spans an extremal ray (toric); the first tie on
/// surface lattices, whose generators are declared.
fn select_ray(model: &Model, ties: &[usize]) -> usize {
    match model {
        Model::Toric(x) => ties
            .iter()
            .copied()
            .find(|&w| x.is_extremal(w))
            .unwrap_or(ties[0]),
        Model::Surface(_) => ties[0],
    }
}

fn transform(d: &RationalDivisor, contracted: &Option<String>) -> RationalDivisor {
    match contracted {
        Some(id) => d.restrict(|k| k != id),
        None => d.clone(),
    }
}

fn length_bound(model: &Model, mode: Mode, value: &Rational) -> Option<bool> {
    match (model, mode) {
        (Model::Toric(x), Mode::Kb) => Some(*value >= Rational::from_int(-2 * x.dim() as i64)),
        _ => None,
    }
}

fn nef_certificate(model: &Model, d: &RationalDivisor) -> Result<Option<Vec<Rational>>> {
    let v = model.generator_values(d)?;
    Ok(if v.iter().all(|x| !x.is_negative()) { Some(v) } else { None })
}

/// The LMMP on `D ≡ P + N` (with `D = K + B` in kb mode): repeatedly raise
/// `P` to `P + mu N`, contract or flip a ray with `N . R < 0` and
/// `(P + mu N) . R = 0`, and push everything forward.
pub fn run_wzd_mmp(
    pair: &Pair,
    target: &Target,
    wzd: &WeakDecomposition,
    step_limit: usize,
) -> Result<MMPTrace> {
    let mode = target.mode();
    let d = target.resolve(pair)?;
    if wzd.model != pair.model {
        return Err(Error::ModelMismatch(
            "the program runs on the decomposition's own model".into(),
        ));
    }
    let report = validate_weak(&d, &pair.model, wzd)?;
    if !report.valid {
        return Err(Error::Precondition(format!(
            "not a weak decomposition: {}",
            report.witnesses[0].reason
        )));
    }
    let th = theta(&pair.boundary, &wzd.n)?;
    if mode == Mode::Kb && th > 0 {
        return Err(Error::ThetaPositive(th));
    }

    let mut model = pair.model.clone();
    let mut boundary = pair.boundary.clone();
    let mut d = d;
    let mut p = wzd.p.clone();
    let mut n = wzd.n.clone();
    let initial = StepState {
        model: model.clone(),
        boundary: boundary.clone(),
        target: d.clone(),
        p: Some(p.clone()),
        n: Some(n.clone()),
        h: None,
    };
    let mut steps = Vec::new();
    let mut contracted_all = Vec::new();
    let outcome = loop {
        let pv = model.generator_values(&p)?;
        let nv = model.generator_values(&n)?;
        let thr = nef_threshold_values(&pv, &nv)?;
        if thr.ray.is_none() {
            break Outcome::MinimalModel;
        }
        if steps.len() == step_limit {
            break Outcome::StepLimit;
        }
        let mu = thr.mu.clone();
        let ray = select_ray(&model, &thr.ties);
        p = &p + &n.scale(&mu);
        n = n.scale(&(Rational::one() - &mu));
        let dv = model.generator_values(&d)?[ray].clone();
        let n_value = nv[ray].clone();
        if !dv.is_negative() || !n_value.is_negative() {
            return Err(Error::Invariant(format!(
                "selected ray {} is not negative for D and N",
                model.generator_label(ray)
            )));
        }
        let choice = RayChoice {
            index: ray,
            label: model.generator_label(ray),
            target_value: dv.clone(),
            n_value: Some(n_value),
            h_value: None,
        };
        let bound = length_bound(&model, mode, &dv);
        match apply_ray(&model, ray)? {
            Applied::Unmodeled => break Outcome::NoModeledContraction,
            Applied::Fibration(fib) => {
                steps.push(MMPStep {
                    index: steps.len(),
                    kind: StepKind::Fibration,
                    mu: Some(mu),
                    lambda: None,
                    ray: choice,
                    contracted: None,
                    fibration: Some(fib),
                    state_after: StepState {
                        model: model.clone(),
                        boundary: boundary.clone(),
                        target: d.clone(),
                        p: Some(p.clone()),
                        n: Some(n.clone()),
                        h: None,
                    },
                    theta_after: Some(theta(&boundary, &n)?),
                    length_bound_holds: bound,
                    recertified: false,
                });
                break Outcome::MoriFibreSpace;
            }
            Applied::Birational {
                model: next,
                kind,
                contracted,
            } => {
                model = next;
                boundary = Boundary::new(transform(boundary.divisor(), &contracted))?;
                d = transform(&d, &contracted);
                p = transform(&p, &contracted);
                n = transform(&n, &contracted);
                let mut recertified = false;
                if !model.is_nef(&p)? {
                    let cert = match &model {
                        Model::Toric(x) => is_pseudoeffective(&d, x)?,
                        Model::Surface(_) => {
                            return Err(Error::Invariant("P lost nefness on a surface".into()))
                        }
                    };
                    let rep = cert
                        .representative
                        .ok_or_else(|| Error::NotPseudoEffective("transformed divisor".into()))?;
                    p = RationalDivisor::zero();
                    n = rep;
                    recertified = true;
                }
                let residual = model.generator_values(&(&d - &(&p + &n)))?;
                if residual.iter().any(|v| !v.is_zero()) {
                    return Err(Error::Invariant("D ≡ P + N failed after surgery".into()));
                }
                let th = theta(&boundary, &n)?;
                if mode == Mode::Kb && th != 0 {
                    return Err(Error::Invariant(format!("θ became {th} after a step")));
                }
                if let Some(c) = &contracted {
                    contracted_all.push(c.clone());
                }
                steps.push(MMPStep {
                    index: steps.len(),
                    kind,
                    mu: Some(mu),
                    lambda: None,
                    ray: choice,
                    contracted,
                    fibration: None,
                    state_after: StepState {
                        model: model.clone(),
                        boundary: boundary.clone(),
                        target: d.clone(),
                        p: Some(p.clone()),
                        n: Some(n.clone()),
                        h: None,
                    },
                    theta_after: Some(th),
                    length_bound_holds: bound,
                    recertified,
                });
            }
        }
    };
    let final_certificate = if outcome == Outcome::MinimalModel {
        nef_certificate(&model, &d)?
    } else {
        None
    };
    Ok(MMPTrace {
        driver: Driver::WeakDecomposition,
        mode,
        step_limit,
        initial,
        steps,
        outcome,
        final_certificate,
        contracted: contracted_all,
    })
}

/// The LMMP with scaling of `H`: `lambda_i = min { t : D + tH nef }`, and a
/// ray with `(D + lambda_i H) . R = 0`, `D . R < 0` is contracted or flipped.
pub fn run_mmp_with_scaling(
    pair: &Pair,
    target: &Target,
    h: &RationalDivisor,
    step_limit: usize,
) -> Result<MMPTrace> {
    let mode = target.mode();
    let mut d = target.resolve(pair)?;
    let mut model = pair.model.clone();
    model.check_divisor(h)?;
    if let Some((i, v)) = model
        .generator_values(h)?
        .into_iter()
        .enumerate()
        .find(|(_, v)| !v.is_positive())
    {
        return Err(Error::Precondition(format!(
            "H is not positive on {} (value {v})",
            model.generator_label(i)
        )));
    }
    if let Some((i, v)) = model.nef_witness(&(&d + h))? {
        return Err(Error::Precondition(format!(
            "D + H is not nef: {} gives {v}",
            model.generator_label(i)
        )));
    }
    let mut h = h.clone();
    let mut boundary = pair.boundary.clone();
    let initial = StepState {
        model: model.clone(),
        boundary: boundary.clone(),
        target: d.clone(),
        p: None,
        n: None,
        h: Some(h.clone()),
    };
    let mut steps: Vec<MMPStep> = Vec::new();
    let mut contracted_all = Vec::new();
    let mut previous = Rational::one();
    let outcome = loop {
        let dv = model.generator_values(&d)?;
        let hv = model.generator_values(&h)?;
        if dv.iter().all(|v| !v.is_negative()) {
            break Outcome::MinimalModel;
        }
        if steps.len() == step_limit {
            break Outcome::StepLimit;
        }
        let mut lambda: Option<Rational> = None;
        let mut ties = Vec::new();
        for (i, (a, b)) in dv.iter().zip(&hv).enumerate() {
            if !a.is_negative() {
                continue;
            }
            if !b.is_positive() {
                return Err(Error::Invariant(format!(
                    "H is not positive on the D-negative generator {}",
                    model.generator_label(i)
                )));
            }
            let t = -a / b;
            match &lambda {
                Some(l) if t < *l => {}
                Some(l) if t == *l => ties.push(i),
                _ => {
                    lambda = Some(t);
                    ties = vec![i];
                }
            }
        }
        let lambda = lambda.expect("some generator is negative");
        if lambda > previous {
            return Err(Error::Invariant(format!(
                "scaling threshold increased from {previous} to {lambda}"
            )));
        }
        previous = lambda.clone();
        let ray = select_ray(&model, &ties);
        let choice = RayChoice {
            index: ray,
            label: model.generator_label(ray),
            target_value: dv[ray].clone(),
            n_value: None,
            h_value: Some(hv[ray].clone()),
        };
        let bound = length_bound(&model, mode, &dv[ray]);
        match apply_ray(&model, ray)? {
            Applied::Unmodeled => break Outcome::NoModeledContraction,
            Applied::Fibration(fib) => {
                steps.push(MMPStep {
                    index: steps.len(),
                    kind: StepKind::Fibration,
                    mu: None,
                    lambda: Some(lambda),
                    ray: choice,
                    contracted: None,
                    fibration: Some(fib),
                    state_after: StepState {
                        model: model.clone(),
                        boundary: boundary.clone(),
                        target: d.clone(),
                        p: None,
                        n: None,
                        h: Some(h.clone()),
                    },
                    theta_after: None,
                    length_bound_holds: bound,
                    recertified: false,
                });
                break Outcome::MoriFibreSpace;
            }
            Applied::Birational {
                model: next,
                kind,
                contracted,
            } => {
                model = next;
                boundary = Boundary::new(transform(boundary.divisor(), &contracted))?;
                d = transform(&d, &contracted);
                h = transform(&h, &contracted);
                if let Some(c) = &contracted {
                    contracted_all.push(c.clone());
                }
                steps.push(MMPStep {
                    index: steps.len(),
                    kind,
                    mu: None,
                    lambda: Some(lambda),
                    ray: choice,
                    contracted,
                    fibration: None,
                    state_after: StepState {
                        model: model.clone(),
                        boundary: boundary.clone(),
                        target: d.clone(),
                        p: None,
                        n: None,
                        h: Some(h.clone()),
                    },
                    theta_after: None,
                    length_bound_holds: bound,
                    recertified: false,
                });
            }
        }
    };
    let final_certificate = if outcome == Outcome::MinimalModel {
        nef_certificate(&model, &d)?
    } else {
        None
    };
    Ok(MMPTrace {
        driver: Driver::Scaling,
        mode,
        step_limit,
        initial,
        steps,
        outcome,
        final_certificate,
        contracted: contracted_all,
    })
}

/// An ample `H` on a complete fan with `D + H` nef: a multiple of the
/// LP-minimal ample divisor.
pub fn scaling_divisor(x: &ToricVariety, d: &RationalDivisor) -> Result<RationalDivisor> {
    let a = ample_divisor(x)?
        .ok_or_else(|| Error::Precondition("fan is not projective".into()))?;
    let dv = x.wall_values(d)?;
    let av = x.wall_values(&a)?;
    let mut t = Rational::one();
    for (dvi, avi) in dv.iter().zip(&av) {
        let need = -dvi / avi;
        if need > t {
            t = need;
        }
    }
    Ok(a.scale(&t.ceil()))
}

/// Run without a supplied decomposition: a pseudo-effective target gets the
/// trivial decomposition `P = 0`, `N` an effective representative (run with
/// θ-descent when needed); otherwise the program runs with scaling of an
/// automatically chosen ample divisor.
pub fn run_mmp(pair: &Pair, target: &Target, step_limit: usize) -> Result<MMPTrace> {
    let d = target.resolve(pair)?;
    let x = pair
        .model
        .as_toric()
        .ok_or_else(|| Error::Precondition("automatic runs need a toric model".into()))?;
    let cert = is_pseudoeffective(&d, x)?;
    match cert.representative {
        Some(rep) => {
            let wzd = WeakDecomposition::trivial(pair.model.clone(), rep)?;
            let (pair, target, wzd, _) = descend(pair, target, wzd)?;
            run_wzd_mmp(&pair, &target, &wzd, step_limit)
        }
        None => {
            let h = scaling_divisor(x, &d)?;
            run_mmp_with_scaling(pair, target, &h, step_limit)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaDescent {
    pub alpha: Rational,
    #[serde(rename = "C")]
    pub c: RationalDivisor,
    #[serde(rename = "A")]
    pub a: RationalDivisor,
    pub boundary: Boundary,
    pub target: RationalDivisor,
    pub decomposition: WeakDecomposition,
    pub theta_before: usize,
    pub theta_after: usize,
}

/// One descent: `B -> B + C`, `N -> N + C` with `alpha N = C + A`, so that
/// `D + C ≡ P + (N + C)` and θ strictly drops.
pub fn theta_descent_step(
    pair: &Pair,
    target: &Target,
    wzd: &WeakDecomposition,
) -> Result<ThetaDescent> {
    let d = target.resolve(pair)?;
    let before = theta(&pair.boundary, &wzd.n)?;
    if before == 0 {
        return Err(Error::Precondition("θ is already 0".into()));
    }
    let split = alpha_split(&pair.boundary, &wzd.n)?;
    let boundary = Boundary::new(pair.boundary.divisor() + &split.c)?;
    let n = &wzd.n + &split.c;
    let after = theta(&boundary, &n)?;
    if after >= before {
        return Err(Error::Invariant(format!("θ did not drop: {before} -> {after}")));
    }
    let decomposition = WeakDecomposition::new(wzd.kind, wzd.model.clone(), wzd.p.clone(), n)?;
    Ok(ThetaDescent {
        alpha: split.alpha,
        c: split.c.clone(),
        a: split.a,
        boundary,
        target: &d + &split.c,
        decomposition,
        theta_before: before,
        theta_after: after,
    })
}

/// Apply θ-descent until θ = 0; returns the new pair, target and
/// decomposition with the descent record.
pub fn descend(
    pair: &Pair,
    target: &Target,
    wzd: WeakDecomposition,
) -> Result<(Pair, Target, WeakDecomposition, Vec<ThetaDescent>)> {
    let mut pair = pair.clone();
    let mut target = target.clone();
    let mut wzd = wzd;
    let mut record = Vec::new();
    while theta(&pair.boundary, &wzd.n)? > 0 {
        let step = theta_descent_step(&pair, &target, &wzd)?;
        pair = Pair::new(pair.model.clone(), step.boundary.clone())?;
        target = match target {
            Target::LogCanonical => Target::LogCanonical,
            Target::Divisor(_) => Target::Divisor(step.target.clone()),
        };
        wzd = step.decomposition.clone();
        record.push(step);
    }
    Ok((pair, target, wzd, record))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
}

impl Condition {
    fn new(name: &str, holds: bool) -> Self {
        Condition {
            name: name.to_string(),
            holds,
            witness: None,
            value: None,
        }
    }

    fn failing(name: &str, witness: String, value: Option<Rational>) -> Self {
        Condition {
            name: name.to_string(),
            holds: false,
            witness: Some(witness),
            value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogMinimalModel,
    MoriFibreSpace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelReport {
    pub valid: bool,
    pub kind: ModelKind,
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
}

const DLT_NOTE: &str = "dlt is tested by the toric surrogate: simplicial fan, boundary coefficients in [0,1], positive log discrepancy on every exceptional ray of the standard resolution";

/// `B_Y` must be the birational transform of `B` plus the reduced divisors
/// of `Y` that are exceptional over `X`.
fn check_boundary_form(x: &ToricVariety, b: &Boundary, y: &ToricVariety, b_y: &Boundary) -> Result<()> {
    y.coefficients(b_y.divisor())?;
    for id in y.ray_ids() {
        let expected = if x.has_component(&id) { b.coeff(&id) } else { Rational::one() };
        if b_y.coeff(&id) != expected {
            return Err(Error::Precondition(format!(
                "B_Y has coefficient {} at {id}, expected {expected}",
                b_y.coeff(&id)
            )));
        }
    }
    Ok(())
}

struct Fibre {
    wall: usize,
    base_dim: usize,
}

/// Conditions shared by every verification: nefness or the fibration
/// structure on `Y`, then the discrepancy comparison on a common
/// refinement. The gap at a ray `v` is `g^*D_X(v) - h^*D_Y(v)`, which for
/// `D = K + B` equals `a(v, Y, B_Y) - a(v, X, B)`.
fn verify_targets(
    x: &ToricVariety,
    dx: &RationalDivisor,
    y: &ToricVariety,
    dy: &RationalDivisor,
    fibre: Option<Fibre>,
    conditions: &mut Vec<Condition>,
) -> Result<()> {
    let ym = Model::Toric(y.clone());
    match &fibre {
        None => match ym.nef_witness(dy)? {
            None => conditions.push(Condition::new("nef", true)),
            Some((i, v)) => conditions.push(Condition::failing("nef", ym.generator_label(i), Some(v))),
        },
        Some(f) => {
            if f.wall >= y.walls().len() {
                return Err(Error::UnknownWall(vec![f.wall]));
            }
            let label = ym.generator_label(f.wall);
            let value = ym.generator_values(dy)?[f.wall].clone();
            conditions.push(if value.is_negative() {
                Condition::new("negative_on_contracted_ray", true)
            } else {
                Condition::failing("negative_on_contracted_ray", label.clone(), Some(value))
            });
            let actual = match contract_or_flip(f.wall, y) {
                Ok(s) => s.fibration.map(|fib| fib.base_dim),
                Err(_) => None,
            };
            conditions.push(match actual {
                Some(_) => Condition::new("fibration", true),
                None => Condition::failing("fibration", label.clone(), None),
            });
            let drop = f.base_dim < y.dim() && actual == Some(f.base_dim);
            conditions.push(if drop {
                Condition::new("dimension_drop", true)
            } else {
                Condition::failing(
                    "dimension_drop",
                    format!("declared base dimension {}", f.base_dim),
                    Some(Rational::from_int(f.base_dim as i64)),
                )
            });
        }
    }

    let w = common_refinement(x, y)?;
    let mut strict = Condition::new("strict_increase_on_contracted", true);
    let mut weak = Condition::new("weak_increase", true);
    for v in w.rays() {
        let gap = x.pullback_coefficient(dx, v)? - y.pullback_coefficient(dy, v)?;
        let id = crate::toric::ray_id(v);
        let contracted = x.ray_index(v).is_some() && y.ray_index(v).is_none();
        if contracted && !gap.is_positive() && strict.holds {
            strict = Condition::failing("strict_increase_on_contracted", id.clone(), Some(gap.clone()));
        }
        if gap.is_negative() && weak.holds {
            weak = Condition::failing("weak_increase", id, Some(gap));
        }
    }
    conditions.push(strict);
    if fibre.is_some() {
        conditions.push(weak);
    }
    Ok(())
}

fn finish(kind: ModelKind, conditions: Vec<Condition>, notes: Vec<String>) -> ModelReport {
    ModelReport {
        valid: conditions.iter().all(|c| c.holds),
        kind,
        conditions,
        notes,
    }
}

fn toric_base(base: &Pair) -> Result<&ToricVariety> {
    base.model
        .as_toric()
        .ok_or_else(|| Error::Precondition("model verification needs a toric base".into()))
}

fn dlt_condition(y: &ToricVariety, b_y: &Boundary) -> Result<Condition> {
    let rep = dlt_surrogate(y, b_y, RESOLUTION_STEPS)?;
    Ok(match rep.witness {
        None => Condition::new("dlt", true),
        Some((id, a)) => Condition::failing("dlt", id, Some(a)),
    })
}

/// Log minimal model test for `(Y, B_Y)` over `(X, B)`.
pub fn verify_lmm(base: &Pair, y: &ToricVariety, b_y: &Boundary) -> Result<ModelReport> {
    let x = toric_base(base)?;
    check_boundary_form(x, &base.boundary, y, b_y)?;
    let mut conditions = vec![dlt_condition(y, b_y)?];
    let dx = base.log_canonical()?;
    let dy = Pair::toric(y.clone(), b_y.clone())?.log_canonical()?;
    verify_targets(x, &dx, y, &dy, None, &mut conditions)?;
    Ok(finish(ModelKind::LogMinimalModel, conditions, vec![DLT_NOTE.to_string()]))
}

/// Mori fibre space test for `(Y, B_Y)` with the fibration of wall `wall`
/// onto a base of dimension `base_dim`.
pub fn verify_mfs(
    base: &Pair,
    y: &ToricVariety,
    b_y: &Boundary,
    wall: usize,
    base_dim: usize,
) -> Result<ModelReport> {
    let x = toric_base(base)?;
    check_boundary_form(x, &base.boundary, y, b_y)?;
    let mut conditions = vec![dlt_condition(y, b_y)?];
    let dx = base.log_canonical()?;
    let dy = Pair::toric(y.clone(), b_y.clone())?.log_canonical()?;
    verify_targets(x, &dx, y, &dy, Some(Fibre { wall, base_dim }), &mut conditions)?;
    Ok(finish(ModelKind::MoriFibreSpace, conditions, vec![DLT_NOTE.to_string()]))
}

fn check_transform(x: &ToricVariety, d: &RationalDivisor, y: &ToricVariety, d_y: &RationalDivisor) -> Result<()> {
    y.coefficients(d_y)?;
    x.coefficients(d)?;
    for id in y.ray_ids() {
        if x.has_component(&id) && d.coeff(&id) != d_y.coeff(&id) {
            return Err(Error::Precondition(format!(
                "D_Y is not the birational transform of D at {id}"
            )));
        }
    }
    Ok(())
}

/// Divisor-mode analogue of [`verify_lmm`]: `D_Y` nef and `g^*D - h^*D_Y`
/// strictly positive on every divisor contracted by `X ⇢ Y`.
pub fn verify_divisor_lmm(
    x: &ToricVariety,
    d: &RationalDivisor,
    y: &ToricVariety,
    d_y: &RationalDivisor,
) -> Result<ModelReport> {
    check_transform(x, d, y, d_y)?;
    let mut conditions = Vec::new();
    verify_targets(x, d, y, d_y, None, &mut conditions)?;
    Ok(finish(ModelKind::LogMinimalModel, conditions, Vec::new()))
}

/// Divisor-mode analogue of [`verify_mfs`].
pub fn verify_divisor_mfs(
    x: &ToricVariety,
    d: &RationalDivisor,
    y: &ToricVariety,
    d_y: &RationalDivisor,
    wall: usize,
    base_dim: usize,
) -> Result<ModelReport> {
    check_transform(x, d, y, d_y)?;
    let mut conditions = Vec::new();
    verify_targets(x, d, y, d_y, Some(Fibre { wall, base_dim }), &mut conditions)?;
    Ok(finish(ModelKind::MoriFibreSpace, conditions, Vec::new()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineOptions {
    pub step_limit: usize,
    pub m_max: u64,
    pub challengers: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            step_limit: 64,
            m_max: 12,
            challengers: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub valid: bool,
    pub mode: Mode,
    pub options: PipelineOptions,
    pub descent: Vec<ThetaDescent>,
    pub trace: MMPTrace,
    pub model_check: Option<ModelReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<WeakDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fujita: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ckm: Option<ValidationReport>,
}

/// θ-descent, the decomposition-guided run, and every check on its output:
/// model verification, and for minimal models the Fujita decomposition
/// validated as weak, against generated challengers, and for CKM sections.
pub fn pipeline(
    pair: &Pair,
    target: &Target,
    wzd: Option<WeakDecomposition>,
    options: &PipelineOptions,
) -> Result<PipelineReport> {
    let x = pair
        .model
        .as_toric()
        .ok_or_else(|| Error::Precondition("the pipeline needs a toric model".into()))?
        .clone();
    let d0 = target.resolve(pair)?;
    let wzd = match wzd {
        Some(w) => w,
        None => {
            let rep = is_pseudoeffective(&d0, &x)?
                .representative
                .ok_or_else(|| Error::NotPseudoEffective("target divisor".into()))?;
            WeakDecomposition::trivial(pair.model.clone(), rep)?
        }
    };
    let (pair, target, wzd, descent) = descend(pair, target, wzd)?;
    let d = target.resolve(&pair)?;
    let trace = run_wzd_mmp(&pair, &target, &wzd, options.step_limit)?;
    let last = trace.final_state().clone();
    let y = last.model.as_toric().expect("toric run").clone();
    let mut report = PipelineReport {
        valid: false,
        mode: target.mode(),
        options: options.clone(),
        descent,
        trace,
        model_check: None,
        decomposition: None,
        weak: None,
        fujita: None,
        ckm: None,
    };
    match report.trace.outcome {
        Outcome::MinimalModel => {
            let check = match target {
                Target::LogCanonical => verify_lmm(&pair, &y, &last.boundary)?,
                Target::Divisor(_) => verify_divisor_lmm(&x, &d, &y, &last.target)?,
            };
            let lmm = LmmData {
                base: x.clone(),
                base_target: d.clone(),
                model: y,
                model_target: last.target.clone(),
            };
            let fujita = from_lmm_fujita(&lmm)?;
            let base = Model::Toric(x.clone());
            let weak = validate_weak(&d, &base, &fujita)?;
            let w = fujita.model.as_toric().expect("toric decomposition");
            let challengers = fujita_challengers(&x, &d, w, options.challengers, options.seed)?;
            let fuj = validate_fujita(&d, &base, &fujita, &challengers)?;
            let (_, ckm) = ckm_from_lmm(&lmm, options.m_max)?;
            report.valid = check.valid && weak.valid && fuj.valid && ckm.valid;
            report.model_check = Some(check);
            report.decomposition = Some(fujita);
            report.weak = Some(weak);
            report.fujita = Some(fuj);
            report.ckm = Some(ckm);
        }
        Outcome::MoriFibreSpace => {
            let step = report.trace.steps.last().expect("fibration step");
            let fib = step.fibration.as_ref().expect("fibration data");
            let check = match target {
                Target::LogCanonical => {
                    verify_mfs(&pair, &y, &last.boundary, step.ray.index, fib.base_dim)?
                }
                Target::Divisor(_) => {
                    verify_divisor_mfs(&x, &d, &y, &last.target, step.ray.index, fib.base_dim)?
                }
            };
            report.valid = check.valid;
            report.model_check = Some(check);
        }
        Outcome::StepLimit | Outcome::NoModeledContraction => {}
    }
    Ok(report)
}
