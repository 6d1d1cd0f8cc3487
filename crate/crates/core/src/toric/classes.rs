use serde::Serialize;

use super::ToricVariety;
use crate::divisor::RationalDivisor;
use crate::error::Result;
use crate::linalg;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseffCertificate {
    pub pseudo_effective: bool,
    /// An effective divisor linearly equivalent to the input.
    pub representative: Option<RationalDivisor>,
    /// The character `m` with `representative = D + div(chi^m)`.
    pub character: Option<Vec<Rational>>,
}

/// A torus-invariant divisor is pseudo-effective iff some character `m`
/// makes `D + div(chi^m)` effective: the effective cone is spanned by the
/// ray divisors.
pub fn is_pseudoeffective(d: &RationalDivisor, x: &ToricVariety) -> Result<PseffCertificate> {
    let a = x.coefficients(d)?;
    if d.is_effective() {
        return Ok(PseffCertificate {
            pseudo_effective: true,
            representative: Some(d.clone()),
            character: Some(vec![Rational::zero(); x.dim]),
        });
    }
    let mut lp = LinearProgram::new(x.dim).all_free();
    for (u, a_rho) in x.rays.iter().zip(&a) {
        lp.add(
            u.iter().map(|&v| Rational::from_int(v)).collect(),
            Relation::Ge,
            -a_rho,
        );
    }
    Ok(match lp.feasible_point() {
        Some(m) => {
            let rep = d + &x.principal_divisor(&m);
            PseffCertificate {
                pseudo_effective: true,
                representative: Some(rep),
                character: Some(m),
            }
        }
        None => PseffCertificate {
            pseudo_effective: false,
            representative: None,
            character: None,
        },
    })
}

/// An effective ample divisor with `H . C >= 1` on every wall, minimizing the
/// sum of coefficients. `None` when the fan is not projective.
pub fn ample_divisor(x: &ToricVariety) -> Result<Option<RationalDivisor>> {
    x.require_complete()?;
    let n = x.rays.len();
    let mut lp = LinearProgram::new(n);
    lp.minimize(vec![Rational::one(); n]);
    for c in &x.walls {
        lp.add(c.intersections.clone(), Relation::Ge, Rational::one());
    }
    Ok(match lp.solve() {
        LpOutcome::Optimal { x: h, .. } => Some(x.divisor_from_coefficients(&h)),
        _ => None,
    })
}

impl ToricVariety {
    /// Are `a` and `b` linearly equivalent (their difference principal)?
    pub fn linearly_equivalent(&self, a: &RationalDivisor, b: &RationalDivisor) -> Result<bool> {
        let diff = self.coefficients(&(a - b))?;
        let rows: linalg::Matrix = self
            .rays
            .iter()
            .map(|u| u.iter().map(|&v| Rational::from_int(v)).collect())
            .collect();
        Ok(linalg::solve_any(&rows, &diff).is_some())
    }
}
