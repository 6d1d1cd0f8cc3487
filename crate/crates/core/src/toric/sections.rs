use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::ToricVariety;
use crate::divisor::RationalDivisor;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::rational::{denominator_lcm, Rational};

/// Lattice points of `P_D = { m : <m, u_rho> >= -floor(a_rho) }`, in
/// lexicographic order. They index a basis of `H^0(X, O(floor D))`.
pub fn sections(d: &RationalDivisor, x: &ToricVariety) -> Result<Vec<Vec<i64>>> {
    let a: Vec<i64> = x
        .coefficients(d)?
        .iter()
        .map(|c| c.floor_i64())
        .collect();
    lattice_points(x, &a)
}

fn lattice_points(x: &ToricVariety, a: &[i64]) -> Result<Vec<Vec<i64>>> {
    let n = x.dim;
    let mut lp = LinearProgram::new(n).all_free();
    for (u, &a_rho) in x.rays.iter().zip(a) {
        lp.add(
            u.iter().map(|&v| Rational::from_int(v)).collect(),
            Relation::Ge,
            Rational::from_int(-a_rho),
        );
    }
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        for sign in [1i64, -1] {
            let mut obj = vec![Rational::zero(); n];
            obj[i] = Rational::from_int(sign);
            let mut p = lp.clone();
            p.minimize(obj);
            match p.solve() {
                LpOutcome::Infeasible => return Ok(Vec::new()),
                LpOutcome::Unbounded => return Err(Error::Unbounded),
                LpOutcome::Optimal { value, .. } => {
                    if sign == 1 {
                        lo.push(value.ceil_i64());
                    } else {
                        hi.push((-value).floor_i64());
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(out);
    }
    let mut m = lo.clone();
    loop {
        if x
            .rays
            .iter()
            .zip(a)
            .all(|(u, &a_rho)| u.iter().zip(&m).map(|(p, q)| p * q).sum::<i64>() >= -a_rho)
        {
            out.push(m.clone());
        }
        // odometer, last coordinate fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if m[k] < hi[k] {
                m[k] += 1;
                for j in k + 1..n {
                    m[j] = lo[j];
                }
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableBaseLocus {
    /// The multiples `m` of `D` that were examined.
    pub multiples: Vec<u64>,
    /// Minimal cones `sigma` (ray indices) with `V(sigma)` in the locus.
    pub components: Vec<Vec<usize>>,
    /// No multiple up to `m_max` has a section.
    pub whole_variety: bool,
    /// The base loci of the last two multiples agree.
    pub stabilized: bool,
    pub m_max: u64,
}

impl StableBaseLocus {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Stable base locus of `D`, approximated by intersecting the base loci of
/// `mD` over the multiples `m <= m_max` that make `mD` integral.
///
/// The orbit `O(sigma)` avoids `Bs(mD)` iff some section `m'` of `mD`
/// satisfies `<m', u_rho> = -m a_rho` for every ray of `sigma`.
pub fn stable_base_locus(
    d: &RationalDivisor,
    x: &ToricVariety,
    m_max: u64,
) -> Result<StableBaseLocus> {
    let coeffs = x.coefficients(d)?;
    let l = denominator_lcm(coeffs.iter())
        .to_u64()
        .ok_or_else(|| Error::BoundExceeded("coefficient denominators too large".into()))?;
    if l > m_max {
        return Err(Error::BoundExceeded(format!(
            "D becomes integral only at multiple {l} > m_max = {m_max}"
        )));
    }
    let cones = x.all_cones();
    let mut multiples = Vec::new();
    let mut loci: Vec<BTreeSet<usize>> = Vec::new();
    let mut m = l;
    while m <= m_max {
        let scaled: Vec<i64> = coeffs
            .iter()
            .map(|c| (c * &Rational::from_int(m as i64)).floor_i64())
            .collect();
        let pts = lattice_points(x, &scaled)?;
        let bad: BTreeSet<usize> = cones
            .iter()
            .enumerate()
            .filter(|(_, sigma)| {
                !pts.iter().any(|p| {
                    sigma.iter().all(|&r| {
                        x.rays[r].iter().zip(p).map(|(u, v)| u * v).sum::<i64>() == -scaled[r]
                    })
                })
            })
            .map(|(i, _)| i)
            .collect();
        multiples.push(m);
        loci.push(bad);
        m += l;
    }
    let mut stable = loci[0].clone();
    for b in &loci[1..] {
        stable = stable.intersection(b).copied().collect();
    }
    let stabilized = loci.len() >= 2 && loci[loci.len() - 1] == loci[loci.len() - 2];
    let whole_variety = stable.contains(&0);
    let components: Vec<Vec<usize>> = stable
        .iter()
        .map(|&i| &cones[i])
        .filter(|sigma| {
            !stable
                .iter()
                .any(|&j| cones[j].len() < sigma.len() && cones[j].iter().all(|r| sigma.contains(r)))
        })
        .cloned()
        .collect();
    Ok(StableBaseLocus {
        multiples,
        components,
        whole_variety,
        stabilized,
        m_max,
    })
}
