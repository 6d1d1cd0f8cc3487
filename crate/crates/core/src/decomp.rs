//! Weak, Fujita and CKM Zariski decompositions: data, validators, nef
//! thresholds, and constructions from log minimal models.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::divisor::{Boundary, RationalDivisor};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::model::Model;
use crate::rational::Rational;
use crate::toric::{canonical_divisor, common_refinement, sections, star_subdivide, ToricVariety};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    Weak,
    Fujita,
    Ckm,
    SurfaceZariski,
}

/// `f^*D ≡ P + N` on a model `W` over the base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakDecomposition {
    pub kind: DecompositionKind,
    pub model: Model,
    #[serde(rename = "P")]
    pub p: RationalDivisor,
    #[serde(rename = "N")]
    pub n: RationalDivisor,
    /// `P . R` for every Mori generator of the model.
    pub nef_certificate: Vec<Rational>,
}

impl WeakDecomposition {
    pub fn new(
        kind: DecompositionKind,
        model: Model,
        p: RationalDivisor,
        n: RationalDivisor,
    ) -> Result<Self> {
        model.check_divisor(&p)?;
        model.check_divisor(&n)?;
        let nef_certificate = model.generator_values(&p)?;
        Ok(Self {
            kind,
            model,
            p,
            n,
            nef_certificate,
        })
    }

    /// `P = 0`, `N = representative` for an effective representative of `D`.
    pub fn trivial(model: Model, representative: RationalDivisor) -> Result<Self> {
        Self::new(DecompositionKind::Weak, model, RationalDivisor::zero(), representative)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiple: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub challenger: Option<usize>,
}

impl Witness {
    fn new(reason: &str) -> Self {
        Witness {
            reason: reason.to_string(),
            ..Default::default()
        }
    }
}

/// What a report actually verified when the definition quantifies over an
/// infinite family.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Truncation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub challengers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub kind: DecompositionKind,
    pub witnesses: Vec<Witness>,
    pub truncation: Truncation,
}

impl ValidationReport {
    fn from_witnesses(kind: DecompositionKind, witnesses: Vec<Witness>, truncation: Truncation) -> Self {
        ValidationReport {
            valid: witnesses.is_empty(),
            kind,
            witnesses,
            truncation,
        }
    }
}

fn nef_witnesses(model: &Model, p: &RationalDivisor) -> Result<Vec<Witness>> {
    Ok(model
        .generator_values(p)?
        .into_iter()
        .enumerate()
        .filter(|(_, v)| v.is_negative())
        .map(|(i, v)| Witness {
            generator: Some(model.generator_label(i)),
            value: Some(v),
            ..Witness::new("nef_violation")
        })
        .collect())
}

fn negative_witnesses(n: &RationalDivisor) -> Vec<Witness> {
    n.iter()
        .filter(|(_, c)| c.is_negative())
        .map(|(id, c)| Witness {
            component: Some(id.to_string()),
            value: Some(c.clone()),
            ..Witness::new("negative_coefficient")
        })
        .collect()
}

/// `f^*D ≡ P + N` against every generator of the decomposition model, `P`
/// nef and `N >= 0`.
pub fn validate_weak(d: &RationalDivisor, base: &Model, wzd: &WeakDecomposition) -> Result<ValidationReport> {
    base.check_divisor(d)?;
    let pulled = base.pullback_to(d, &wzd.model)?;
    let diff = &pulled - &(&wzd.p + &wzd.n);
    let mut witnesses: Vec<Witness> = wzd
        .model
        .generator_values(&diff)?
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| Witness {
            generator: Some(wzd.model.generator_label(i)),
            value: Some(v),
            ..Witness::new("numerical_mismatch")
        })
        .collect();
    witnesses.extend(nef_witnesses(&wzd.model, &wzd.p)?);
    witnesses.extend(negative_witnesses(&wzd.n));
    Ok(ValidationReport::from_witnesses(
        DecompositionKind::Weak,
        witnesses,
        Truncation::default(),
    ))
}

/// Section spaces of `floor(mP)` and `floor(mD)` agree for `m = 1..=m_max`.
/// Stops at the first failing multiple.
pub fn validate_ckm(
    d: &RationalDivisor,
    p: &RationalDivisor,
    x: &ToricVariety,
    m_max: u64,
) -> Result<ValidationReport> {
    let mut witnesses = negative_witnesses(&(d - p));
    for m in (1..=m_max).take_while(|_| witnesses.is_empty()) {
        let s = Rational::from_int(m as i64);
        let sd = sections(&d.scale(&s), x)?;
        let sp = sections(&p.scale(&s), x)?;
        if sd != sp {
            witnesses.push(Witness {
                multiple: Some(m),
                value: Some(Rational::from_int((sd.len() - sp.len()) as i64)),
                ..Witness::new("sections_mismatch")
            });
            break;
        }
    }
    Ok(ValidationReport::from_witnesses(
        DecompositionKind::Ckm,
        witnesses,
        Truncation {
            m_max: Some(m_max),
            challengers: None,
        },
    ))
}

/// A competing decomposition `f'^*D = P' + N'` on some model over the base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Challenger {
    pub model: Model,
    #[serde(rename = "P")]
    pub p: RationalDivisor,
    #[serde(rename = "N")]
    pub n: RationalDivisor,
}

/// Finite-challenger Fujita check: every challenger's nef part is bounded by
/// the pullback of `P` on a common model. This verifies maximality only
/// against the supplied family.
pub fn validate_fujita(
    d: &RationalDivisor,
    base: &Model,
    decomposition: &WeakDecomposition,
    challengers: &[Challenger],
) -> Result<ValidationReport> {
    let mut witnesses = Vec::new();
    for (k, ch) in challengers.iter().enumerate() {
        let pulled = base.pullback_to(d, &ch.model).map_err(|_| {
            Error::ModelMismatch(format!("challenger {k} is not on a model over the base"))
        })?;
        if pulled != &ch.p + &ch.n {
            return Err(Error::Precondition(format!(
                "challenger {k}: P' + N' differs from the pullback of D"
            )));
        }
        if !ch.n.is_effective() {
            return Err(Error::Precondition(format!("challenger {k}: N' is not effective")));
        }
        if !ch.model.is_nef(&ch.p)? {
            return Err(Error::Precondition(format!("challenger {k}: P' is not nef")));
        }
        let (p_common, q_common) = match (&decomposition.model, &ch.model) {
            (Model::Toric(w), Model::Toric(v)) => {
                let u = common_refinement(w, v)?;
                (w.pullback_to(&decomposition.p, &u)?, v.pullback_to(&ch.p, &u)?)
            }
            (a, b) if a == b => (decomposition.p.clone(), ch.p.clone()),
            _ => {
                return Err(Error::ModelMismatch(format!(
                    "challenger {k} lives on an incompatible model"
                )))
            }
        };
        let excess = &q_common - &p_common;
        let first = excess
            .iter()
            .find(|(_, c)| c.is_positive())
            .map(|(id, c)| (id.to_string(), c.clone()));
        if let Some((id, c)) = first {
            witnesses.push(Witness {
                component: Some(id),
                value: Some(c),
                challenger: Some(k),
                ..Witness::new("challenger_exceeds")
            });
        }
    }
    Ok(ValidationReport::from_witnesses(
        DecompositionKind::Fujita,
        witnesses,
        Truncation {
            m_max: None,
            challengers: Some(challengers.len()),
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NefThreshold {
    pub mu: Rational,
    /// Selected generator (lowest index among the minimizers) when `mu < 1`.
    pub ray: Option<usize>,
    /// Every generator attaining the threshold.
    pub ties: Vec<usize>,
}

/// Threshold from generator values `P . R` and `N . R`.
pub fn nef_threshold_values(p: &[Rational], n: &[Rational]) -> Result<NefThreshold> {
    if let Some(i) = p.iter().position(|v| v.is_negative()) {
        return Err(Error::NotNef {
            divisor: "P".into(),
            witness: i.to_string(),
            value: p[i].clone(),
        });
    }
    let mut mu = Rational::one();
    let mut ties = Vec::new();
    for (i, (pv, nv)) in p.iter().zip(n).enumerate() {
        if !nv.is_negative() {
            continue;
        }
        let t = pv / &(-nv);
        if t < mu {
            mu = t;
            ties = vec![i];
        } else if t == mu && mu < Rational::one() {
            ties.push(i);
        }
    }
    if mu == Rational::one() {
        ties.clear();
    }
    Ok(NefThreshold {
        ray: ties.first().copied(),
        mu,
        ties,
    })
}

/// Largest `mu` in `[0, 1]` with `P + mu N` nef against the generators.
pub fn nef_threshold(p: &RationalDivisor, n: &RationalDivisor, model: &Model) -> Result<NefThreshold> {
    let pv = model.generator_values(p)?;
    let nv = model.generator_values(n)?;
    nef_threshold_values(&pv, &nv).map_err(|e| match e {
        Error::NotNef { value, witness, .. } => Error::NotNef {
            divisor: "P".into(),
            witness: model.generator_label(witness.parse().unwrap_or(0)),
            value,
        },
        other => other,
    })
}

/// A toric model `Y` reached from `X`, with the divisor tracked on each
/// (`K_X + B` and `K_Y + B_Y` for a log minimal model, or `D` and its
/// birational transform in divisor mode).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LmmData {
    pub base: ToricVariety,
    pub base_target: RationalDivisor,
    pub model: ToricVariety,
    pub model_target: RationalDivisor,
}

impl LmmData {
    pub fn from_pairs(x: ToricVariety, b: &Boundary, y: ToricVariety, b_y: &Boundary) -> Self {
        let base_target = &canonical_divisor(&x) + b.divisor();
        let model_target = &canonical_divisor(&y) + b_y.divisor();
        LmmData {
            base: x,
            base_target,
            model: y,
            model_target,
        }
    }
}

/// `P = h^*(K_Y + B_Y)` and `N = g^*(K_X + B) - P` on a common refinement.
/// `N` must be effective and exceptional over `Y`.
pub fn from_lmm_fujita(lmm: &LmmData) -> Result<WeakDecomposition> {
    let w = common_refinement(&lmm.base, &lmm.model)?;
    let g = lmm.base.pullback_to(&lmm.base_target, &w)?;
    let p = lmm.model.pullback_to(&lmm.model_target, &w)?;
    let n = &g - &p;
    if let Some((id, c)) = n.negative_witness() {
        return Err(Error::Invariant(format!(
            "negative part has coefficient {c} at {id}: model data is not a minimal model"
        )));
    }
    if let Some((id, _)) = n.iter().find(|(id, _)| lmm.model.has_component(id)) {
        return Err(Error::Invariant(format!(
            "negative part contains {id}, which is not exceptional over the model"
        )));
    }
    let model = Model::Toric(w);
    model.require_nef("P", &p)?;
    WeakDecomposition::new(DecompositionKind::Fujita, model, p, n)
}

/// Build the decomposition of [`from_lmm_fujita`] and check the CKM section
/// condition up to `m_max`.
pub fn ckm_from_lmm(lmm: &LmmData, m_max: u64) -> Result<(WeakDecomposition, ValidationReport)> {
    let mut wzd = from_lmm_fujita(lmm)?;
    wzd.kind = DecompositionKind::Ckm;
    let w = wzd.model.as_toric().expect("toric decomposition");
    let d = &wzd.p + &wzd.n;
    let report = validate_ckm(&d, &wzd.p, w, m_max)?;
    Ok((wzd, report))
}

/// Weak decomposition of `K_X + B` from a log minimal model of `(X, B')`
/// with `B' <= B`: keep `P`, add `g^*(B - B')` to `N`.
pub fn monotone_boundary_wzd(
    lmm: &LmmData,
    b_prime: &Boundary,
    b: &Boundary,
) -> Result<WeakDecomposition> {
    if !b_prime.divisor().le(b.divisor()) {
        return Err(Error::Precondition("B' is not bounded by B".into()));
    }
    let base = from_lmm_fujita(lmm)?;
    let w = base.model.as_toric().expect("toric decomposition");
    let extra = lmm
        .base
        .pullback_to(&(b.divisor() - b_prime.divisor()), w)?;
    let n = &base.n + &extra;
    WeakDecomposition::new(DecompositionKind::Weak, base.model, base.p, n)
}

/// `min { t >= 0 : K_X + tB pseudo-effective }`, solved as one exact LP in
/// `(t, m)`: minimize `t` subject to `-1 + t b_rho + <m, u_rho> >= 0`.
pub fn pseff_threshold(b: &Boundary, x: &ToricVariety) -> Result<Rational> {
    let coeffs = x.coefficients(b.divisor())?;
    let n = x.dim();
    let mut lp = LinearProgram::new(n + 1);
    for j in 1..=n {
        lp.set_free(j);
    }
    let mut obj = vec![Rational::zero(); n + 1];
    obj[0] = Rational::one();
    lp.minimize(obj);
    for (u, b_rho) in x.rays().iter().zip(&coeffs) {
        let mut row = vec![b_rho.clone()];
        row.extend(u.iter().map(|&v| Rational::from_int(v)));
        lp.add(row, Relation::Ge, Rational::one());
    }
    let mut at_one = lp.clone();
    let mut fix = vec![Rational::zero(); n + 1];
    fix[0] = Rational::one();
    at_one.add(fix, Relation::Eq, Rational::one());
    if at_one.feasible_point().is_none() {
        return Err(Error::NotPseudoEffective("K_X + B".into()));
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        _ => Err(Error::Invariant("threshold LP has no optimum".into())),
    }
}

/// Challengers for [`validate_fujita`]: on `w` and on random star
/// subdivisions of it, the nef divisors `P' <= f^*D` maximizing random
/// positive objectives, with `N' = f^*D - P'`.
pub fn fujita_challengers(
    base: &ToricVariety,
    d: &RationalDivisor,
    w: &ToricVariety,
    count: usize,
    seed: u64,
) -> Result<Vec<Challenger>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut model = w.clone();
    while out.len() < count {
        if !out.is_empty() && rng.gen_bool(0.5) {
            model = random_subdivision(if rng.gen_bool(0.5) { w } else { &model }, &mut rng)?;
        }
        let pulled = base.pullback_to(d, &model)?;
        let upper = model.coefficients(&pulled)?;
        let k = model.rays().len();
        let mut lp = LinearProgram::new(k).all_free();
        let obj: Vec<Rational> = (0..k).map(|_| Rational::from_int(-rng.gen_range(1..=6))).collect();
        lp.minimize(obj);
        for c in model.walls() {
            lp.add(c.intersections.clone(), Relation::Ge, Rational::zero());
        }
        for (i, u) in upper.iter().enumerate() {
            let mut row = vec![Rational::zero(); k];
            row[i] = Rational::one();
            lp.add(row, Relation::Le, u.clone());
        }
        let LpOutcome::Optimal { x: coeffs, .. } = lp.solve() else {
            return Err(Error::Precondition("no nef divisor below the pullback of D".into()));
        };
        let p = model.divisor_from_coefficients(&coeffs);
        let n = &pulled - &p;
        out.push(Challenger {
            model: Model::Toric(model.clone()),
            p,
            n,
        });
    }
    Ok(out)
}

fn random_subdivision(x: &ToricVariety, rng: &mut ChaCha8Rng) -> Result<ToricVariety> {
    let cone = x.max_cones().choose(rng).expect("fans have cones").clone();
    loop {
        let mut v = vec![0i64; x.dim()];
        for &r in &cone {
            let c = rng.gen_range(0..=2);
            for (vi, ui) in v.iter_mut().zip(&x.rays()[r]) {
                *vi += c * ui;
            }
        }
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        let v = linalg::primitive(&v);
        if x.ray_index(&v).is_none() {
            return star_subdivide(x, &v);
        }
    }
}
