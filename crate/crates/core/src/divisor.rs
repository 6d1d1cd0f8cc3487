//! Divisors with exact rational coefficients and the elementary operators on
//! them: `D^{<=1}` truncation, the theta count, and the alpha split used by the
//! theta-descent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Formal finite sum of prime components with rational coefficients.
///
/// Zero coefficients are never stored, so two divisors are equal iff they
/// agree coefficient-wise. Components are ordered by id, which makes every
/// iteration (and therefore every serialized artifact) deterministic.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalDivisor {
    terms: BTreeMap<String, Rational>,
}

impl RationalDivisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let mut d = Self::zero();
        for (id, c) in terms {
            d.add_term(id, &c);
        }
        d
    }

    /// `c * id`.
    pub fn single(id: impl Into<String>, c: Rational) -> Self {
        Self::from_terms([(id.into(), c)])
    }

    pub fn coeff(&self, id: &str) -> Rational {
        self.terms.get(id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, id: impl Into<String>, c: Rational) {
        let id = id.into();
        if c.is_zero() {
            self.terms.remove(&id);
        } else {
            self.terms.insert(id, c);
        }
    }

    pub fn add_term(&mut self, id: impl Into<String>, c: &Rational) {
        let id = id.into();
        let v = self.coeff(&id) + c;
        self.set(id, v);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> BTreeSet<String> {
        self.terms.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Rational)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// First component with a negative coefficient, if any.
    pub fn negative_witness(&self) -> Option<(&str, &Rational)> {
        self.iter().find(|(_, c)| c.is_negative())
    }

    pub fn require_effective(&self) -> Result<()> {
        match self.negative_witness() {
            Some((id, c)) => Err(Error::NegativeCoefficient {
                component: id.to_string(),
                coefficient: c.clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    /// Keep the components satisfying `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Apply `f` to every coefficient, dropping results that become zero.
    pub fn map_coeffs(&self, mut f: impl FnMut(&str, &Rational) -> Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (k.clone(), f(k, v))))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        (other - self).is_effective()
    }

    /// Componentwise minimum.
    pub fn min(&self, other: &Self) -> Self {
        let ids: BTreeSet<&String> = self.terms.keys().chain(other.terms.keys()).collect();
        Self::from_terms(
            ids.into_iter()
                .map(|k| (k.clone(), self.coeff(k).min(other.coeff(k)))),
        )
    }
}

impl fmt::Display for RationalDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{v}*{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for RationalDivisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalDivisor({self})")
    }
}

impl<'a, 'b> Add<&'b RationalDivisor> for &'a RationalDivisor {
    type Output = RationalDivisor;
    fn add(self, rhs: &'b RationalDivisor) -> RationalDivisor {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v);
        }
        out
    }
}

impl Add for RationalDivisor {
    type Output = RationalDivisor;
    fn add(self, rhs: RationalDivisor) -> RationalDivisor {
        &self + &rhs
    }
}

impl<'a, 'b> Sub<&'b RationalDivisor> for &'a RationalDivisor {
    type Output = RationalDivisor;
    fn sub(self, rhs: &'b RationalDivisor) -> RationalDivisor {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), &-v);
        }
        out
    }
}

impl Sub for RationalDivisor {
    type Output = RationalDivisor;
    fn sub(self, rhs: RationalDivisor) -> RationalDivisor {
        &self - &rhs
    }
}

impl Neg for &RationalDivisor {
    type Output = RationalDivisor;
    fn neg(self) -> RationalDivisor {
        self.scale(&Rational::from_int(-1))
    }
}

impl Neg for RationalDivisor {
    type Output = RationalDivisor;
    fn neg(self) -> RationalDivisor {
        -&self
    }
}

impl Serialize for RationalDivisor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalDivisor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Rational>::deserialize(d)?;
        Ok(Self::from_terms(raw))
    }
}

/// A divisor whose coefficients all lie in `[0,1]`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Boundary(RationalDivisor);

impl Boundary {
    pub fn new(divisor: RationalDivisor) -> Result<Self> {
        for (id, c) in divisor.iter() {
            if c.is_negative() || c > &Rational::one() {
                return Err(Error::InvalidBoundary {
                    component: id.to_string(),
                    coefficient: c.clone(),
                });
            }
        }
        Ok(Boundary(divisor))
    }

    pub fn zero() -> Self {
        Boundary(RationalDivisor::zero())
    }

    pub fn divisor(&self) -> &RationalDivisor {
        &self.0
    }

    pub fn into_divisor(self) -> RationalDivisor {
        self.0
    }

    /// Components with coefficient exactly one.
    pub fn reduced_components(&self) -> BTreeSet<String> {
        self.0
            .iter()
            .filter(|(_, c)| c.is_one())
            .map(|(k, _)| k.to_string())
            .collect()
    }

    pub fn coeff(&self, id: &str) -> Rational {
        self.0.coeff(id)
    }
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Boundary({})", self.0)
    }
}

impl<'de> Deserialize<'de> for Boundary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let div = RationalDivisor::deserialize(d)?;
        Boundary::new(div).map_err(serde::de::Error::custom)
    }
}

/// `D^{<=1}`: every coefficient replaced by `min(d, 1)`.
pub fn truncate_le1(d: &RationalDivisor) -> RationalDivisor {
    let one = Rational::one();
    d.map_coeffs(|_, c| c.clone().min(one.clone()))
}

/// Number of components of the (already pushed-forward) divisor `n` that are
/// not components of the reduced boundary.
pub fn theta(boundary: &Boundary, n: &RationalDivisor) -> Result<usize> {
    n.require_effective()?;
    let reduced = boundary.reduced_components();
    Ok(n.iter().filter(|(id, _)| !reduced.contains(*id)).count())
}

/// Result of [`alpha_split`]: `alpha * N = C + A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaSplit {
    pub alpha: Rational,
    /// Part of `alpha * N` off the reduced boundary; `(B + alpha N)^{<=1} = B + C`.
    #[serde(rename = "C")]
    pub c: RationalDivisor,
    /// Part of `alpha * N` supported on the reduced boundary.
    #[serde(rename = "A")]
    pub a: RationalDivisor,
}

/// Smallest `t > 0` at which the reduced part of `(B + tN)^{<=1}` changes,
/// together with the split of `t N` into the part that enters the boundary and
/// the part absorbed by truncation.
///
/// The threshold of a component outside the reduced boundary with `n_i > 0` is
/// `(1 - b_i) / n_i`; components already at coefficient one never move.
pub fn alpha_split(boundary: &Boundary, n: &RationalDivisor) -> Result<AlphaSplit> {
    n.require_effective()?;
    let reduced = boundary.reduced_components();
    let alpha = n
        .iter()
        .filter(|(id, c)| !reduced.contains(*id) && c.is_positive())
        .map(|(id, c)| (Rational::one() - boundary.coeff(id)) / c)
        .min()
        .ok_or(Error::NoThreshold)?;
    let scaled = n.scale(&alpha);
    let c = scaled.restrict(|id| !reduced.contains(id));
    let a = scaled.restrict(|id| reduced.contains(id));
    Ok(AlphaSplit { alpha, c, a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn div(terms: &[(&str, Rational)]) -> RationalDivisor {
        RationalDivisor::from_terms(terms.iter().map(|(k, v)| (k.to_string(), v.clone())))
    }

    fn bnd(terms: &[(&str, Rational)]) -> Boundary {
        Boundary::new(div(terms)).unwrap()
    }

    #[test]
    fn zeros_are_not_stored() {
        let d = div(&[("a", q(1, 2)), ("b", q(0, 1))]);
        assert_eq!(d.len(), 1);
        let e = &d - &d;
        assert!(e.is_zero());
        assert_eq!(e, RationalDivisor::zero());
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(
            truncate_le1(&div(&[("D1", q(2, 1)), ("D2", q(1, 2))])),
            div(&[("D1", q(1, 1)), ("D2", q(1, 2))])
        );
        assert_eq!(truncate_le1(&RationalDivisor::zero()), RationalDivisor::zero());
        let d = div(&[("D1", q(-1, 1)), ("D2", q(1, 1))]);
        assert_eq!(truncate_le1(&d), d);
    }

    #[test]
    fn theta_examples() {
        let b = bnd(&[("D1", q(1, 1)), ("D2", q(1, 2))]);
        assert_eq!(theta(&b, &div(&[("D1", q(3, 1))])).unwrap(), 0);

        let b = bnd(&[("D1", q(1, 1))]);
        assert_eq!(
            theta(&b, &div(&[("D1", q(1, 1)), ("D2", q(1, 4))])).unwrap(),
            1
        );

        let b = bnd(&[("D1", q(1, 2))]);
        assert_eq!(theta(&b, &RationalDivisor::zero()).unwrap(), 0);
    }

    #[test]
    fn theta_rejects_negative_n() {
        let err = theta(&Boundary::zero(), &div(&[("D1", q(-1, 3))])).unwrap_err();
        assert!(matches!(err, Error::NegativeCoefficient { .. }));
    }

    #[test]
    fn boundary_rejects_out_of_range() {
        assert!(Boundary::new(div(&[("D", q(3, 2))])).is_err());
        assert!(Boundary::new(div(&[("D", q(-1, 2))])).is_err());
    }

    #[test]
    fn alpha_split_examples() {
        let s = alpha_split(
            &bnd(&[("D1", q(1, 1))]),
            &div(&[("D1", q(1, 1)), ("D2", q(1, 1))]),
        )
        .unwrap();
        assert_eq!(s.alpha, q(1, 1));
        assert_eq!(s.c, div(&[("D2", q(1, 1))]));
        assert_eq!(s.a, div(&[("D1", q(1, 1))]));

        let s = alpha_split(
            &bnd(&[("D1", q(1, 2))]),
            &div(&[("D1", q(1, 4)), ("D2", q(1, 1))]),
        )
        .unwrap();
        assert_eq!(s.alpha, q(1, 1));
        assert_eq!(s.c, div(&[("D1", q(1, 4)), ("D2", q(1, 1))]));
        assert!(s.a.is_zero());

        let s = alpha_split(&Boundary::zero(), &div(&[("D1", q(2, 1))])).unwrap();
        assert_eq!(s.alpha, q(1, 2));
        assert_eq!(s.c, div(&[("D1", q(1, 1))]));
        assert!(s.a.is_zero());
    }

    #[test]
    fn alpha_may_exceed_one() {
        let s = alpha_split(&Boundary::zero(), &div(&[("D1", q(1, 5))])).unwrap();
        assert_eq!(s.alpha, q(5, 1));
    }

    #[test]
    fn alpha_split_needs_positive_theta() {
        let b = bnd(&[("D1", q(1, 1))]);
        assert_eq!(
            alpha_split(&b, &div(&[("D1", q(2, 1))])).unwrap_err(),
            Error::NoThreshold
        );
        assert_eq!(
            alpha_split(&Boundary::zero(), &RationalDivisor::zero()).unwrap_err(),
            Error::NoThreshold
        );
    }

    const IDS: [&str; 4] = ["D0", "D1", "D2", "D3"];

    fn arb_divisor(lo: i64, hi: i64) -> impl Strategy<Value = RationalDivisor> {
        proptest::collection::vec((lo..=hi, 1i64..=6), IDS.len()).prop_map(|cs| {
            RationalDivisor::from_terms(IDS.iter().zip(cs).map(|(k, (n, d))| (*k, q(n, d))))
        })
    }

    fn arb_boundary() -> impl Strategy<Value = Boundary> {
        proptest::collection::vec((0i64..=4, prop::bool::ANY), IDS.len()).prop_map(|cs| {
            Boundary::new(RationalDivisor::from_terms(
                IDS.iter()
                    .zip(cs)
                    .map(|(k, (n, full))| (*k, if full { q(1, 1) } else { q(n, 5) })),
            ))
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn truncation_is_idempotent(d in arb_divisor(-8, 8)) {
            let once = truncate_le1(&d);
            prop_assert_eq!(truncate_le1(&once), once);
        }

        #[test]
        fn alpha_split_postconditions(b in arb_boundary(), n in arb_divisor(0, 6)) {
            let th = theta(&b, &n).unwrap();
            match alpha_split(&b, &n) {
                Err(Error::NoThreshold) => prop_assert_eq!(th, 0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
                Ok(s) => {
                    prop_assert!(th > 0);
                    prop_assert_eq!(&s.c + &s.a, n.scale(&s.alpha));
                    prop_assert!(s.c.is_effective() && s.a.is_effective());
                    prop_assert!(s.c.support().is_disjoint(&s.a.support()));
                    let bd = b.divisor();
                    prop_assert_eq!(truncate_le1(&(bd + &n.scale(&s.alpha))), bd + &s.c);

                    // The reduced part is constant strictly below alpha; it is
                    // enough to test just below each candidate threshold.
                    let floor_of = |t: &Rational| {
                        Boundary::new(truncate_le1(&(bd + &n.scale(t)))).unwrap().reduced_components()
                    };
                    let base = b.reduced_components();
                    for (id, c) in n.iter() {
                        if c.is_positive() && !base.contains(id) {
                            let t = (Rational::one() - b.coeff(id)) / c;
                            if t < s.alpha {
                                prop_assert!(false, "threshold below alpha");
                            }
                        }
                    }
                    let below = &s.alpha * &q(99, 100);
                    prop_assert_eq!(floor_of(&below), base.clone());
                    prop_assert_ne!(floor_of(&s.alpha), base);

                    let new_b = Boundary::new(bd + &s.c).unwrap();
                    prop_assert!(theta(&new_b, &(&n + &s.c)).unwrap() < th);
                }
            }
        }

        #[test]
        fn json_round_trip(d in arb_divisor(-50, 50)) {
            let s = serde_json::to_string(&d).unwrap();
            let back: RationalDivisor = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(serde_json::to_string(&back).unwrap(), s);
            prop_assert_eq!(back, d);
        }
    }
}
