use serde::Serialize;

use super::ToricVariety;
use crate::divisor::RationalDivisor;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, Relation};
use crate::rational::Rational;

/// The torus-invariant curve `V(tau)` of an interior wall `tau`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantCurve {
    /// Sorted ray indices spanning the wall.
    pub wall: Vec<usize>,
    /// The two maximal cones sharing the wall.
    pub cones: [usize; 2],
    /// The ray of each adjacent cone that is not on the wall.
    pub opposite: [usize; 2],
    /// Primitive integer wall relation over all rays (zero off the two cones),
    /// positive on the two opposite rays.
    pub relation: Vec<i64>,
    /// `D_rho . V(tau)` for every ray `rho`.
    pub intersections: Vec<Rational>,
}

impl InvariantCurve {
    pub(super) fn from_wall(x: &ToricVariety, wall: Vec<usize>, cones: [usize; 2]) -> Result<Self> {
        let other = |c: usize| {
            x.max_cones[c]
                .iter()
                .copied()
                .find(|r| !wall.contains(r))
                .expect("maximal cone strictly contains its wall")
        };
        let opposite = [other(cones[0]), other(cones[1])];
        let mut involved = wall.clone();
        involved.extend_from_slice(&opposite);
        // columns are the n + 1 rays; the kernel is one-dimensional
        let a: linalg::Matrix = (0..x.dim)
            .map(|i| involved.iter().map(|&r| Rational::from_int(x.rays[r][i])).collect())
            .collect();
        let ker = linalg::kernel(&a, involved.len());
        if ker.len() != 1 {
            return Err(Error::InvalidFan(format!("wall {wall:?} has no unique relation")));
        }
        let mut local = linalg::primitive_integer(&ker[0]);
        let a_pos = involved.len() - 2;
        if local[a_pos] < 0 {
            local.iter_mut().for_each(|c| *c = -*c);
        }
        let mut relation = vec![0i64; x.rays.len()];
        for (k, &r) in involved.iter().enumerate() {
            relation[r] = local[k];
        }

        let mult_sigma = x.multiplicity(cones[0]);
        let wall_gens: Vec<Vec<i64>> = wall.iter().map(|&r| x.rays[r].clone()).collect();
        let mult_tau = Rational::from_bigint(linalg::lattice_index(&wall_gens));
        let scale = mult_tau / Rational::from_int(mult_sigma * relation[opposite[0]]);
        let intersections: Vec<Rational> = relation
            .iter()
            .map(|&r| Rational::from_int(r) * &scale)
            .collect();
        debug_assert_eq!(
            intersections[opposite[1]],
            Rational::from_bigint(linalg::lattice_index(&wall_gens))
                / Rational::from_int(x.multiplicity(cones[1]))
        );
        Ok(InvariantCurve {
            wall,
            cones,
            opposite,
            relation,
            intersections,
        })
    }

    /// Ray indices with negative, positive and zero relation coefficient.
    pub fn relation_signs(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        let mut zero = Vec::new();
        for (i, &r) in self.relation.iter().enumerate() {
            match r.signum() {
                -1 => neg.push(i),
                1 => pos.push(i),
                _ => zero.push(i),
            }
        }
        (neg, pos, zero)
    }
}

/// Intersection number `D . V(tau)`.
pub fn intersect(d: &RationalDivisor, c: &InvariantCurve, x: &ToricVariety) -> Result<Rational> {
    let coeffs = x.coefficients(d)?;
    Ok(linalg::dot(&coeffs, &c.intersections))
}

/// Generators of the Mori cone: one per interior wall of a complete fan.
pub fn mori_generators(x: &ToricVariety) -> Result<&[InvariantCurve]> {
    x.require_complete()?;
    Ok(&x.walls)
}

/// `K_X = -sum D_rho`.
pub fn canonical_divisor(x: &ToricVariety) -> RationalDivisor {
    x.divisor_from_coefficients(&vec![Rational::from_int(-1); x.rays.len()])
}

impl ToricVariety {
    pub fn wall_index(&self, wall: &[usize]) -> Result<usize> {
        let mut w = wall.to_vec();
        w.sort_unstable();
        self.walls
            .iter()
            .position(|c| c.wall == w)
            .ok_or(Error::UnknownWall(w))
    }

    /// Values `D . C` on every interior wall, in wall order.
    pub fn wall_values(&self, d: &RationalDivisor) -> Result<Vec<Rational>> {
        let coeffs = self.coefficients(d)?;
        Ok(self
            .walls
            .iter()
            .map(|c| linalg::dot(&coeffs, &c.intersections))
            .collect())
    }

    /// Nefness on a complete fan: `D . C >= 0` on every wall. Returns the
    /// first wall with a negative value when `D` is not nef.
    pub fn nef_witness(&self, d: &RationalDivisor) -> Result<Option<(usize, Rational)>> {
        self.require_complete()?;
        Ok(self
            .wall_values(d)?
            .into_iter()
            .enumerate()
            .find(|(_, v)| v.is_negative()))
    }

    pub fn is_nef(&self, d: &RationalDivisor) -> Result<bool> {
        Ok(self.nef_witness(d)?.is_none())
    }

    /// The linear form `m_sigma` with `<m_sigma, u_rho> = -a_rho` on cone `c`.
    pub fn cone_character(&self, coeffs: &[Rational], c: usize) -> Vec<Rational> {
        let cone = &self.max_cones[c];
        let a: linalg::Matrix = cone
            .iter()
            .map(|&r| self.rays[r].iter().map(|&v| Rational::from_int(v)).collect())
            .collect();
        let b: Vec<Rational> = cone.iter().map(|&r| -&coeffs[r]).collect();
        linalg::solve(&a, &b).expect("maximal cones are full-dimensional")
    }

    /// Nefness through convexity of the support function: for every maximal
    /// cone, `<m_sigma, u_rho> >= -a_rho` on all rays.
    pub fn is_nef_by_support_function(&self, d: &RationalDivisor) -> Result<bool> {
        self.require_complete()?;
        let coeffs = self.coefficients(d)?;
        for c in 0..self.max_cones.len() {
            let m = self.cone_character(&coeffs, c);
            for (r, u) in self.rays.iter().enumerate() {
                if linalg::dot_int(&m, u) < -&coeffs[r] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Is wall `w` an extremal ray of the cone spanned by all wall classes?
    pub fn is_extremal(&self, w: usize) -> bool {
        let target = &self.walls[w].intersections;
        let others: Vec<&Vec<Rational>> = self
            .walls
            .iter()
            .map(|c| &c.intersections)
            .filter(|v| !positively_proportional(v, target))
            .collect();
        if others.is_empty() {
            return true;
        }
        let mut lp = LinearProgram::new(others.len());
        for (k, t) in target.iter().enumerate() {
            lp.add(others.iter().map(|v| v[k].clone()).collect(), Relation::Eq, t.clone());
        }
        lp.feasible_point().is_none()
    }
}

/// `v = t w` for some `t > 0`.
pub(crate) fn positively_proportional(v: &[Rational], w: &[Rational]) -> bool {
    let Some(k) = w.iter().position(|x| !x.is_zero()) else {
        return v.iter().all(|x| x.is_zero());
    };
    let t = &v[k] / &w[k];
    t.is_positive() && v.iter().zip(w).all(|(a, b)| *a == &t * b)
}
