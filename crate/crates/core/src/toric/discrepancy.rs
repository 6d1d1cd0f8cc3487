use serde::Serialize;

use super::{canonical_divisor, resolve, ToricVariety};
use crate::divisor::{Boundary, RationalDivisor};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::Rational;

impl ToricVariety {
    /// Coefficient at the ray `v` of the pullback of `d` to any refinement
    /// containing `v`: `-phi_D(v)`, linear on each maximal cone.
    pub fn pullback_coefficient(&self, d: &RationalDivisor, v: &[i64]) -> Result<Rational> {
        let coeffs = self.coefficients(d)?;
        let (c, lambda) = self.locate(v).ok_or_else(|| Error::OutsideSupport(v.to_vec()))?;
        Ok(self.max_cones[c]
            .iter()
            .zip(&lambda)
            .map(|(&r, l)| l * &coeffs[r])
            .sum())
    }

    /// Pullback of `d` to a refinement `w` of this fan.
    pub fn pullback_to(&self, d: &RationalDivisor, w: &ToricVariety) -> Result<RationalDivisor> {
        let coeffs: Result<Vec<Rational>> = w
            .rays
            .iter()
            .map(|v| self.pullback_coefficient(d, v))
            .collect();
        Ok(w.divisor_from_coefficients(&coeffs?))
    }

    /// Pushforward to a fan `y` on the same lattice: keep the components
    /// that are rays of `y`.
    pub fn pushforward_to(&self, d: &RationalDivisor, y: &ToricVariety) -> RationalDivisor {
        d.restrict(|id| y.has_component(id))
    }
}

/// Log discrepancy `a(E_v, X, B)` of the divisor of the primitive vector `v`.
///
/// `K_X + B` has `-phi(u_rho) = b_rho - 1`, so the log discrepancy is the
/// linear function with value `1 - b_rho` on each ray of the cone holding `v`.
pub fn log_discrepancy(v: &[i64], x: &ToricVariety, b: &Boundary) -> Result<Rational> {
    if v.len() != x.dim() || v.iter().all(|&c| c == 0) {
        return Err(Error::Precondition("vector must be nonzero".into()));
    }
    if linalg::gcd_slice(v) != 1 {
        return Err(Error::Precondition(format!("{v:?} is not primitive")));
    }
    let kb = &canonical_divisor(x) + b.divisor();
    Ok(-x.pullback_coefficient(&kb, v)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogSmoothModel {
    pub model: ToricVariety,
    /// `B_W`: strict transform of `B` plus the reduced exceptional divisors.
    pub boundary: Boundary,
    /// `F = K_W + B_W - f^*(K_X + B)`, supported on exceptional divisors.
    pub discrepancy: RationalDivisor,
    pub exceptional: Vec<String>,
}

/// Toric log resolution `f: W -> X` of `(X, B)`. Toric boundaries on smooth
/// fans are simple normal crossing, so a resolution of `X` suffices.
pub fn log_smooth_model(x: &ToricVariety, b: &Boundary, max_steps: usize) -> Result<LogSmoothModel> {
    x.coefficients(b.divisor())?;
    let r = resolve(x, max_steps)?;
    let w = r.variety;
    let mut bw = b.divisor().clone();
    for id in &r.added {
        bw.set(id.clone(), Rational::one());
    }
    let boundary = Boundary::new(bw)?;
    let kb = &canonical_divisor(x) + b.divisor();
    let f = &(&canonical_divisor(&w) + boundary.divisor()) - &x.pullback_to(&kb, &w)?;
    Ok(LogSmoothModel {
        model: w,
        boundary,
        discrepancy: f,
        exceptional: r.added,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DltReport {
    pub dlt: bool,
    /// An exceptional ray of the resolution with non-positive log discrepancy.
    pub witness: Option<(String, Rational)>,
}

/// Toric dlt test: the fan is simplicial, `B` has coefficients in `[0, 1]`,
/// and every exceptional ray of the standard resolution has positive log
/// discrepancy.
pub fn dlt_surrogate(x: &ToricVariety, b: &Boundary, max_steps: usize) -> Result<DltReport> {
    x.coefficients(b.divisor())?;
    let r = resolve(x, max_steps)?;
    for id in &r.added {
        let v = super::parse_ray_id(id).expect("ids are ray vectors");
        let a = log_discrepancy(&v, x, b)?;
        if !a.is_positive() {
            return Ok(DltReport {
                dlt: false,
                witness: Some((id.clone(), a)),
            });
        }
    }
    Ok(DltReport {
        dlt: true,
        witness: None,
    })
}
