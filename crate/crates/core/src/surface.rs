//! Abstract surface intersection lattices.
//!
//! A [`SurfaceModel`] is a free lattice of classes with a symmetric rational
//! intersection form, a declared finite set of generators for the cone of
//! curves, and the subset of classes that are irreducible curves. Nefness is
//! always "nef against the declared generators".

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::divisor::RationalDivisor;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModel {
    classes: Vec<String>,
    form: Matrix,
    mori_generators: Vec<RationalDivisor>,
    prime_curves: Vec<String>,
    canonical: Option<RationalDivisor>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GeneratorRepr {
    Class(String),
    Divisor(RationalDivisor),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceModelRepr {
    classes: Vec<String>,
    form: Vec<Vec<Rational>>,
    mori_generators: Vec<GeneratorRepr>,
    prime_curves: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canonical: Option<RationalDivisor>,
}

impl Serialize for SurfaceModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let gens = self
            .mori_generators
            .iter()
            .map(|g| match self.as_single_class(g) {
                Some(id) => GeneratorRepr::Class(id.to_string()),
                None => GeneratorRepr::Divisor(g.clone()),
            })
            .collect();
        SurfaceModelRepr {
            classes: self.classes.clone(),
            form: self.form.clone(),
            mori_generators: gens,
            prime_curves: self.prime_curves.clone(),
            canonical: self.canonical.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SurfaceModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SurfaceModelRepr::deserialize(d)?;
        let gens = r
            .mori_generators
            .into_iter()
            .map(|g| match g {
                GeneratorRepr::Class(id) => RationalDivisor::single(id, Rational::one()),
                GeneratorRepr::Divisor(d) => d,
            })
            .collect();
        SurfaceModel::new(r.classes, r.form, gens, r.prime_curves, r.canonical)
            .map_err(serde::de::Error::custom)
    }
}

impl SurfaceModel {
    pub fn new(
        classes: Vec<String>,
        form: Matrix,
        mori_generators: Vec<RationalDivisor>,
        prime_curves: Vec<String>,
        canonical: Option<RationalDivisor>,
    ) -> Result<Self> {
        let n = classes.len();
        let distinct: BTreeSet<&String> = classes.iter().collect();
        if distinct.len() != n {
            return Err(Error::Parse("duplicate class id".into()));
        }
        if form.len() != n || form.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!(
                "intersection form must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if form[i][j] != form[j][i] {
                    return Err(Error::Parse(format!(
                        "intersection form is not symmetric at ({}, {})",
                        classes[i], classes[j]
                    )));
                }
            }
        }
        let model = SurfaceModel {
            classes,
            form,
            mori_generators,
            prime_curves,
            canonical,
        };
        for c in &model.prime_curves {
            model.index(c)?;
        }
        for g in &model.mori_generators {
            model.vector(g)?;
        }
        if let Some(k) = &model.canonical {
            model.vector(k)?;
        }
        for c in &model.prime_curves {
            let i = model.index(c)?;
            if model.form[i][i].is_negative() && model.generator_index_of_class(c).is_none() {
                return Err(Error::Parse(format!(
                    "negative curve `{c}` must be one of the Mori generators"
                )));
            }
        }
        Ok(model)
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn form(&self) -> &Matrix {
        &self.form
    }

    pub fn mori_generators(&self) -> &[RationalDivisor] {
        &self.mori_generators
    }

    pub fn prime_curves(&self) -> &[String] {
        &self.prime_curves
    }

    pub fn canonical(&self) -> Option<&RationalDivisor> {
        self.canonical.as_ref()
    }

    pub fn is_prime_curve(&self, id: &str) -> bool {
        self.prime_curves.iter().any(|c| c == id)
    }

    pub fn index(&self, id: &str) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| Error::UnknownComponent(id.to_string()))
    }

    fn as_single_class<'a>(&self, g: &'a RationalDivisor) -> Option<&'a str> {
        let mut it = g.iter();
        match (it.next(), it.next()) {
            (Some((id, c)), None) if c.is_one() => Some(id),
            _ => None,
        }
    }

    /// Index of the generator that is exactly the class `id`, if declared.
    pub fn generator_index_of_class(&self, id: &str) -> Option<usize> {
        self.mori_generators
            .iter()
            .position(|g| self.as_single_class(g) == Some(id))
    }

    pub fn generator_label(&self, i: usize) -> String {
        let g = &self.mori_generators[i];
        match self.as_single_class(g) {
            Some(id) => id.to_string(),
            None => g.to_string(),
        }
    }

    /// Coordinates of `d` in the class basis.
    pub fn vector(&self, d: &RationalDivisor) -> Result<Vec<Rational>> {
        let mut v = vec![Rational::zero(); self.classes.len()];
        for (id, c) in d.iter() {
            v[self.index(id)?] = c.clone();
        }
        Ok(v)
    }

    pub fn intersect(&self, a: &RationalDivisor, b: &RationalDivisor) -> Result<Rational> {
        let va = self.vector(a)?;
        let vb = self.vector(b)?;
        let mut s = Rational::zero();
        for (i, x) in va.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in vb.iter().enumerate() {
                if !y.is_zero() && !self.form[i][j].is_zero() {
                    s += x * y * &self.form[i][j];
                }
            }
        }
        Ok(s)
    }

    pub fn class_pairing(&self, a: &str, b: &str) -> Result<Rational> {
        Ok(self.form[self.index(a)?][self.index(b)?].clone())
    }

    /// `d . R` for every declared generator `R`, in generator order.
    pub fn generator_values(&self, d: &RationalDivisor) -> Result<Vec<Rational>> {
        self.mori_generators
            .iter()
            .map(|g| self.intersect(d, g))
            .collect()
    }

    /// First generator meeting `d` negatively.
    pub fn nef_witness(&self, d: &RationalDivisor) -> Result<Option<(usize, Rational)>> {
        Ok(self
            .generator_values(d)?
            .into_iter()
            .enumerate()
            .find(|(_, v)| v.is_negative()))
    }

    pub fn gram(&self, ids: &[String]) -> Result<Matrix> {
        let idx: Vec<usize> = ids.iter().map(|c| self.index(c)).collect::<Result<_>>()?;
        Ok(idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.form[i][j].clone()).collect())
            .collect())
    }
}

/// Decide negative definiteness of the Gram matrix of `support` exactly via
/// the signs of leading principal minors: `(-1)^k det_k > 0` for every k.
pub fn is_negative_definite(support: &[String], model: &SurfaceModel) -> Result<bool> {
    Ok(first_definiteness_failure(support, model)?.is_none())
}

fn first_definiteness_failure(support: &[String], model: &SurfaceModel) -> Result<Option<usize>> {
    if support.is_empty() {
        return Err(Error::Precondition(
            "negative definiteness needs a nonempty set of curves".into(),
        ));
    }
    let gram = model.gram(support)?;
    let minors = linalg::leading_minors(&gram);
    Ok(minors.iter().enumerate().position(|(k, d)| {
        // k is zero-based, so the minor has size k + 1
        if k % 2 == 0 {
            !d.is_negative()
        } else {
            !d.is_positive()
        }
    }))
}

/// `D = P + N` with `P` nef against the declared generators, `N >= 0` on a
/// negative-definite set of prime curves, and `P . C = 0` on every component of `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZariskiResult {
    #[serde(rename = "P")]
    pub positive: RationalDivisor,
    #[serde(rename = "N")]
    pub negative: RationalDivisor,
    pub negative_support: Vec<String>,
    /// `P . R` for each Mori generator, in declaration order.
    pub certificate: Vec<Rational>,
    pub iterations: usize,
}

/// Zariski's decomposition by support enlargement.
///
/// Start from the prime curves meeting `D` negatively, solve for the unique `N`
/// supported there with `N . C_j = D . C_j`, add every prime curve that `D - N`
/// still meets negatively, and repeat. The support only grows, so the loop
/// runs at most once per prime curve.
pub fn zariski_decompose(d: &RationalDivisor, model: &SurfaceModel) -> Result<ZariskiResult> {
    model.vector(d)?;
    let order = |set: &BTreeSet<String>| -> Vec<String> {
        model
            .classes()
            .iter()
            .filter(|c| set.contains(*c))
            .cloned()
            .collect()
    };
    let mut support: BTreeSet<String> = BTreeSet::new();
    for c in model.prime_curves() {
        let e = RationalDivisor::single(c.clone(), Rational::one());
        if model.intersect(d, &e)?.is_negative() {
            support.insert(c.clone());
        }
    }
    let mut negative;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > model.prime_curves().len() + 1 {
            return Err(Error::Invariant("support enlargement did not stabilise".into()));
        }
        let ids = order(&support);
        negative = solve_negative_part(d, &ids, model)?;
        let positive = d - &negative;
        let mut grew = false;
        for c in model.prime_curves() {
            if support.contains(c) {
                continue;
            }
            let e = RationalDivisor::single(c.clone(), Rational::one());
            if model.intersect(&positive, &e)?.is_negative() {
                support.insert(c.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let positive = d - &negative;
    let certificate = model.generator_values(&positive)?;
    if let Some((i, v)) = certificate.iter().enumerate().find(|(_, v)| v.is_negative()) {
        return Err(Error::NotNef {
            divisor: positive.to_string(),
            witness: model.generator_label(i),
            value: v.clone(),
        });
    }
    Ok(ZariskiResult {
        positive,
        negative,
        negative_support: order(&support),
        certificate,
        iterations,
    })
}

fn solve_negative_part(
    d: &RationalDivisor,
    support: &[String],
    model: &SurfaceModel,
) -> Result<RationalDivisor> {
    if support.is_empty() {
        return Ok(RationalDivisor::zero());
    }
    if !is_negative_definite(support, model)? {
        return Err(Error::NotNegativeDefinite {
            support: support.to_vec(),
        });
    }
    let gram = model.gram(support)?;
    let rhs: Vec<Rational> = support
        .iter()
        .map(|c| model.intersect(d, &RationalDivisor::single(c.clone(), Rational::one())))
        .collect::<Result<_>>()?;
    let x = linalg::solve(&gram, &rhs)
        .ok_or_else(|| Error::Invariant("negative definite system is singular".into()))?;
    let n = RationalDivisor::from_terms(support.iter().cloned().zip(x));
    if let Some((id, c)) = n.negative_witness() {
        return Err(Error::NotPseudoEffective(format!(
            "negative part acquires coefficient {c} on `{id}`"
        )));
    }
    Ok(n)
}

/// Outcome of [`negativity_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NegativityReport {
    /// All hypotheses hold, and hence `G >= 0`.
    pub holds: bool,
    pub witness: Option<String>,
    pub reason: Option<String>,
}

impl NegativityReport {
    fn fail(witness: &str, reason: impl Into<String>) -> Self {
        NegativityReport {
            holds: false,
            witness: Some(witness.to_string()),
            reason: Some(reason.into()),
        }
    }
}

/// Negativity lemma on a negative-definite exceptional configuration.
///
/// Hypotheses: the exceptional Gram matrix is negative definite, `G . E <= 0`
/// for every exceptional `E`, the non-exceptional part of `G` is effective and
/// meets every `E` nonnegatively. Under these, `G >= 0`. A violated hypothesis
/// is reported with the offending class.
pub fn negativity_check(
    g: &RationalDivisor,
    exceptional: &[String],
    model: &SurfaceModel,
) -> Result<NegativityReport> {
    model.vector(g)?;
    if let Some(k) = first_definiteness_failure(exceptional, model)? {
        return Ok(NegativityReport::fail(
            &exceptional[k],
            "exceptional configuration is not negative definite",
        ));
    }
    let exc: BTreeSet<&str> = exceptional.iter().map(String::as_str).collect();
    let rest = g.restrict(|id| !exc.contains(id));
    if let Some((id, _)) = rest.negative_witness() {
        return Ok(NegativityReport::fail(id, "non-exceptional part is not effective"));
    }
    for e in exceptional {
        let ediv = RationalDivisor::single(e.clone(), Rational::one());
        if model.intersect(g, &ediv)?.is_positive() {
            return Ok(NegativityReport::fail(e, "G . E > 0"));
        }
        if model.intersect(&rest, &ediv)?.is_negative() {
            return Ok(NegativityReport::fail(
                e,
                "non-exceptional part meets E negatively",
            ));
        }
    }
    if let Some((id, c)) = g.negative_witness() {
        return Err(Error::Invariant(format!(
            "negativity lemma hypotheses hold but `{id}` has coefficient {c}"
        )));
    }
    Ok(NegativityReport {
        holds: true,
        witness: None,
        reason: None,
    })
}

/// Contraction of one negative curve by orthogonal projection of the lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceContraction {
    pub source: SurfaceModel,
    pub target: SurfaceModel,
    pub curve: String,
}

impl SurfaceContraction {
    pub fn pushforward(&self, d: &RationalDivisor) -> RationalDivisor {
        let c = &self.curve;
        d.restrict(|id| id != c)
    }

    /// `D - (D . C / C . C) C`, computed in the source lattice.
    pub fn pullback(&self, d: &RationalDivisor) -> Result<RationalDivisor> {
        let c = RationalDivisor::single(self.curve.clone(), Rational::one());
        let c2 = self.source.intersect(&c, &c)?;
        let dc = self.source.intersect(d, &c)?;
        Ok(d - &c.scale(&(dc / c2)))
    }
}

/// Contract the negative curve `curve`.
///
/// The new form is `a.b - (a.C)(b.C)/(C.C)` on the remaining classes, which is
/// the Mumford pullback pairing; curves with `C.C < -1` give rational
/// self-intersections on the image.
pub fn contract_curve(curve: &str, model: &SurfaceModel) -> Result<SurfaceContraction> {
    let ci = model.index(curve)?;
    let c2 = model.form[ci][ci].clone();
    if !c2.is_negative() {
        return Err(Error::Precondition(format!(
            "cannot contract `{curve}` with self-intersection {c2}"
        )));
    }
    if model.generator_index_of_class(curve).is_none() {
        return Err(Error::Precondition(format!(
            "`{curve}` is not a declared Mori generator"
        )));
    }
    let keep: Vec<usize> = (0..model.classes.len()).filter(|&i| i != ci).collect();
    let form: Matrix = keep
        .iter()
        .map(|&i| {
            keep.iter()
                .map(|&j| {
                    &model.form[i][j] - &(&model.form[i][ci] * &model.form[j][ci] / &c2)
                })
                .collect()
        })
        .collect();
    let classes: Vec<String> = keep.iter().map(|&i| model.classes[i].clone()).collect();
    let mut gens: Vec<RationalDivisor> = Vec::new();
    for g in &model.mori_generators {
        let pushed = g.restrict(|id| id != curve);
        if !pushed.is_zero() && !gens.contains(&pushed) {
            gens.push(pushed);
        }
    }
    let prime_curves = model
        .prime_curves
        .iter()
        .filter(|c| c.as_str() != curve)
        .cloned()
        .collect();
    let canonical = model
        .canonical
        .as_ref()
        .map(|k| k.restrict(|id| id != curve));
    let target = SurfaceModel::new(classes, form, gens, prime_curves, canonical)?;
    Ok(SurfaceContraction {
        source: model.clone(),
        target,
        curve: curve.to_string(),
    })
}

/// A composite of contractions `X = X_0 -> X_1 -> ... -> X_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SurfaceChain {
    pub steps: Vec<SurfaceContraction>,
}

impl SurfaceChain {
    pub fn contracted_curves(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.curve.clone()).collect()
    }

    pub fn pushforward(&self, d: &RationalDivisor) -> RationalDivisor {
        self.steps.iter().fold(d.clone(), |acc, s| s.pushforward(&acc))
    }

    pub fn pullback(&self, d: &RationalDivisor) -> Result<RationalDivisor> {
        self.steps
            .iter()
            .rev()
            .try_fold(d.clone(), |acc, s| s.pullback(&acc))
    }
}

/// Small lattices shared by the test suites.
pub mod fixtures {
    use super::SurfaceModel;
    use crate::divisor::RationalDivisor;
    use crate::rational::{q, Rational};

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn one(id: &str) -> RationalDivisor {
        RationalDivisor::single(id, Rational::one())
    }

    /// The Hirzebruch surface F2: negative section `s`, fibre `f`.
    pub fn f2() -> SurfaceModel {
        SurfaceModel::new(
            ids(&["s", "f"]),
            vec![vec![q(-2, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]],
            vec![one("s"), one("f")],
            ids(&["s", "f"]),
            None,
        )
        .unwrap()
    }

    /// Classes `A` (A^2 = 1), `C1`, `C2` (two (-2)-curves meeting once) with
    /// `A.C1 = 0`, `A.C2 = 1`; the curves generate the cone of curves.
    pub fn three_class() -> SurfaceModel {
        SurfaceModel::new(
            ids(&["A", "C1", "C2"]),
            vec![
                vec![q(1, 1), q(0, 1), q(1, 1)],
                vec![q(0, 1), q(-2, 1), q(1, 1)],
                vec![q(1, 1), q(1, 1), q(-2, 1)],
            ],
            vec![one("C1"), one("C2")],
            ids(&["C1", "C2"]),
            None,
        )
        .unwrap()
    }

    /// [`three_class`] with canonical class `A`.
    pub fn three_class_canonical() -> SurfaceModel {
        let m = three_class();
        SurfaceModel::new(
            m.classes().to_vec(),
            m.form().clone(),
            m.mori_generators().to_vec(),
            m.prime_curves().to_vec(),
            Some(one("A")),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::q;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn one(id: &str) -> RationalDivisor {
        RationalDivisor::single(id, Rational::one())
    }


    fn chain(m: Vec<Vec<Rational>>) -> SurfaceModel {
        SurfaceModel::new(
            ids(&["C1", "C2"]),
            m,
            vec![one("C1"), one("C2")],
            ids(&["C1", "C2"]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn negative_definite_examples() {
        let single = SurfaceModel::new(
            ids(&["C"]),
            vec![vec![q(-1, 1)]],
            vec![one("C")],
            ids(&["C"]),
            None,
        )
        .unwrap();
        assert!(is_negative_definite(&ids(&["C"]), &single).unwrap());

        let a2 = chain(vec![vec![q(-2, 1), q(1, 1)], vec![q(1, 1), q(-2, 1)]]);
        assert!(is_negative_definite(&ids(&["C1", "C2"]), &a2).unwrap());

        let degenerate = chain(vec![vec![q(-2, 1), q(2, 1)], vec![q(2, 1), q(-2, 1)]]);
        assert!(!is_negative_definite(&ids(&["C1", "C2"]), &degenerate).unwrap());

        assert!(matches!(
            is_negative_definite(&ids(&["X"]), &a2),
            Err(Error::UnknownComponent(_))
        ));
    }

    #[test]
    fn zariski_on_f2() {
        let m = f2();
        let d = &one("s") + &one("f");
        let z = zariski_decompose(&d, &m).unwrap();
        assert_eq!(z.positive, RationalDivisor::from_terms([("s", q(1, 2)), ("f", q(1, 1))]));
        assert_eq!(z.negative, RationalDivisor::single("s", q(1, 2)));
        assert_eq!(z.certificate, vec![q(0, 1), q(1, 2)]);
        assert_eq!(z.negative_support, ids(&["s"]));

        let z = zariski_decompose(&one("f"), &m).unwrap();
        assert_eq!(z.positive, one("f"));
        assert!(z.negative.is_zero());
    }

    #[test]
    fn zariski_three_class() {
        let m = three_class();
        let z = zariski_decompose(&(&one("A") + &one("C1")), &m).unwrap();
        assert_eq!(z.positive, one("A"));
        assert_eq!(z.negative, one("C1"));
    }

    #[test]
    fn zariski_enlarges_support() {
        // D = C1 + (1/4) C2 on the A2 chain: first S = {C1}; then D - N meets C2
        // negatively, so the support grows to both curves and P = 0.
        let m = chain(vec![vec![q(-2, 1), q(1, 1)], vec![q(1, 1), q(-2, 1)]]);
        let d = RationalDivisor::from_terms([("C1", q(1, 1)), ("C2", q(1, 4))]);
        let z = zariski_decompose(&d, &m).unwrap();
        assert_eq!(z.negative_support, ids(&["C1", "C2"]));
        assert!(z.positive.is_zero());
        assert_eq!(z.negative, d);
        assert_eq!(z.iterations, 2);
    }

    #[test]
    fn zariski_rejects_non_pseudoeffective() {
        let m = f2();
        let d = one("s").scale(&q(-1, 1));
        assert!(zariski_decompose(&d, &m).is_err());
    }

    #[test]
    fn negativity_examples() {
        let single = SurfaceModel::new(
            ids(&["E"]),
            vec![vec![q(-1, 1)]],
            vec![one("E")],
            ids(&["E"]),
            None,
        )
        .unwrap();
        let r = negativity_check(&RationalDivisor::single("E", q(1, 2)), &ids(&["E"]), &single)
            .unwrap();
        assert!(r.holds);

        let r = negativity_check(&RationalDivisor::single("E", q(-1, 1)), &ids(&["E"]), &single)
            .unwrap();
        assert!(!r.holds);
        assert_eq!(r.witness.as_deref(), Some("E"));

        let a2 = chain(vec![vec![q(-2, 1), q(1, 1)], vec![q(1, 1), q(-2, 1)]]);
        let g = RationalDivisor::from_terms([("C1", q(2, 3)), ("C2", q(1, 3))]);
        assert_eq!(a2.intersect(&g, &one("C1")).unwrap(), q(-1, 1));
        assert_eq!(a2.intersect(&g, &one("C2")).unwrap(), q(0, 1));
        assert!(negativity_check(&g, &ids(&["C1", "C2"]), &a2).unwrap().holds);
    }

    #[test]
    fn contraction_on_f2() {
        let c = contract_curve("s", &f2()).unwrap();
        assert_eq!(c.target.classes(), &ids(&["f"])[..]);
        assert_eq!(c.target.class_pairing("f", "f").unwrap(), q(1, 2));
        let back = c.pullback(&one("f")).unwrap();
        assert_eq!(back, RationalDivisor::from_terms([("f", q(1, 1)), ("s", q(1, 2))]));
    }

    #[test]
    fn contraction_of_orthogonal_curve() {
        let m = SurfaceModel::new(
            ids(&["H", "E"]),
            vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(-1, 1)]],
            vec![one("E"), one("H")],
            ids(&["E"]),
            None,
        )
        .unwrap();
        let c = contract_curve("E", &m).unwrap();
        assert_eq!(c.target.class_pairing("H", "H").unwrap(), q(1, 1));
        assert_eq!(c.pullback(&one("H")).unwrap(), one("H"));
        assert_eq!(c.pushforward(&c.pullback(&one("H")).unwrap()), one("H"));
    }

    #[test]
    fn contraction_rejects_nonnegative_curve() {
        assert!(matches!(
            contract_curve("f", &f2()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn projection_formula_on_contraction() {
        let m = three_class();
        let c = contract_curve("C2", &m).unwrap();
        for a in ["A", "C1"] {
            for b in ["A", "C1", "C2"] {
                let lhs = m.intersect(&c.pullback(&one(a)).unwrap(), &one(b)).unwrap();
                let rhs = c.target.intersect(&one(a), &c.pushforward(&one(b))).unwrap();
                assert_eq!(lhs, rhs, "{a} {b}");
            }
        }
    }

    #[test]
    fn json_schema() {
        let m = f2();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"classes":["s","f"],"form":[["-2","1"],["1","0"]],"mori_generators":["s","f"],"prime_curves":["s","f"]}"#
        );
        let back: SurfaceModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"classes":["a"],"form":[["-1"]],"mori_generators":[],"prime_curves":["a"]}"#;
        assert!(serde_json::from_str::<SurfaceModel>(bad).is_err());
    }
}
