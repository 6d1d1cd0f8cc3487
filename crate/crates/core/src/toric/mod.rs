//! Simplicial toric varieties given by fans.
//!
//! Torus-invariant prime divisors are identified by their primitive ray
//! vector (component id `"(a,b,..)"`), so a divisor keeps its identity across
//! every fan in the same lattice: contractions, flips and refinements never
//! need an id translation table.

mod classes;
mod curves;
mod discrepancy;
mod refine;
mod sections;
mod surgery;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::divisor::RationalDivisor;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, Relation};
use crate::rational::Rational;

pub use classes::{ample_divisor, is_pseudoeffective, PseffCertificate};
pub use curves::{canonical_divisor, intersect, mori_generators, InvariantCurve};
pub use discrepancy::{
    dlt_surrogate, log_discrepancy, log_smooth_model, DltReport, LogSmoothModel,
};
pub use refine::{common_refinement, resolve, star_subdivide, Refinement};
pub use sections::{sections, stable_base_locus, StableBaseLocus};
pub use surgery::{contract_or_flip, ContractionKind, Fibration, Surgery};

/// Component id of the ray divisor with primitive generator `v`.
pub fn ray_id(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Inverse of [`ray_id`].
pub fn parse_ray_id(id: &str) -> Option<Vec<i64>> {
    let inner = id.trim().strip_prefix('(')?.strip_suffix(')')?;
    inner
        .split(',')
        .map(|s| s.trim().parse::<i64>().ok())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricVariety {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
    complete: bool,
    smooth: bool,
    walls: Vec<InvariantCurve>,
    ray_lookup: BTreeMap<Vec<i64>, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FanRepr {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

impl Serialize for ToricVariety {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FanRepr {
            dim: self.dim,
            rays: self.rays.clone(),
            max_cones: self.max_cones.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ToricVariety {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FanRepr::deserialize(d)?;
        ToricVariety::new(r.dim, r.rays, r.max_cones).map_err(serde::de::Error::custom)
    }
}

impl ToricVariety {
    /// Validate and build a simplicial fan whose maximal cones are all
    /// full-dimensional.
    ///
    /// Checks: primitive distinct rays, each maximal cone spanned by `dim`
    /// independent rays, and every pair of maximal cones meeting in their
    /// common face (decided by an exact separating-hyperplane LP).
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFan("dimension must be positive".into()));
        }
        let mut ray_lookup = BTreeMap::new();
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::InvalidFan(format!("ray {i} has wrong length")));
            }
            if r.iter().all(|&x| x == 0) {
                return Err(Error::InvalidFan(format!("ray {i} is zero")));
            }
            if linalg::gcd_slice(r) != 1 {
                return Err(Error::InvalidFan(format!("ray {i} {r:?} is not primitive")));
            }
            if ray_lookup.insert(r.clone(), i).is_some() {
                return Err(Error::InvalidFan(format!("ray {r:?} listed twice")));
            }
        }
        if max_cones.is_empty() {
            return Err(Error::InvalidFan("no maximal cones".into()));
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for c in max_cones {
            let mut c = c;
            c.sort_unstable();
            c.dedup();
            if c.len() != dim || c.iter().any(|&i| i >= rays.len()) {
                return Err(Error::InvalidFan(format!(
                    "cone {c:?} must list {dim} distinct valid ray indices"
                )));
            }
            let m: Vec<Vec<i64>> = c.iter().map(|&i| rays[i].clone()).collect();
            if linalg::det_int(&m).is_zero_big() {
                return Err(Error::InvalidFan(format!("cone {c:?} is not full-dimensional")));
            }
            cones.push(c);
        }
        cones.sort();
        if cones.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFan("maximal cone listed twice".into()));
        }
        let used: BTreeSet<usize> = cones.iter().flatten().copied().collect();
        if used.len() != rays.len() {
            return Err(Error::InvalidFan("every ray must lie in a maximal cone".into()));
        }

        for i in 0..cones.len() {
            for j in i + 1..cones.len() {
                check_proper_intersection(&rays, &cones[i], &cones[j])?;
            }
        }

        // codimension-one faces and the cones containing them
        let mut faces: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (ci, c) in cones.iter().enumerate() {
            for skip in 0..dim {
                let face: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &r)| r)
                    .collect();
                faces.entry(face).or_default().push(ci);
            }
        }
        if let Some((f, _)) = faces.iter().find(|(_, cs)| cs.len() > 2) {
            return Err(Error::InvalidFan(format!(
                "face {f:?} lies in more than two maximal cones"
            )));
        }
        let complete = faces.values().all(|cs| cs.len() == 2);
        let smooth = cones.iter().all(|c| {
            let m: Vec<Vec<i64>> = c.iter().map(|&i| rays[i].clone()).collect();
            linalg::det_int(&m).abs() == 1.into()
        });

        let mut variety = ToricVariety {
            dim,
            rays,
            max_cones: cones,
            complete,
            smooth,
            walls: Vec::new(),
            ray_lookup,
        };
        let mut walls = Vec::new();
        for (face, cs) in &faces {
            if cs.len() == 2 {
                walls.push(InvariantCurve::from_wall(&variety, face.clone(), [cs[0], cs[1]])?);
            }
        }
        variety.walls = walls;
        Ok(variety)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// Interior walls (codimension-one cones shared by two maximal cones),
    /// sorted by their ray-index sets.
    pub fn walls(&self) -> &[InvariantCurve] {
        &self.walls
    }

    pub fn ray_index(&self, v: &[i64]) -> Option<usize> {
        self.ray_lookup.get(v).copied()
    }

    pub fn ray_id(&self, i: usize) -> String {
        ray_id(&self.rays[i])
    }

    pub fn ray_ids(&self) -> Vec<String> {
        (0..self.rays.len()).map(|i| self.ray_id(i)).collect()
    }

    /// Index of the ray whose divisor has component id `id`.
    pub fn component_index(&self, id: &str) -> Result<usize> {
        parse_ray_id(id)
            .and_then(|v| self.ray_index(&v))
            .ok_or_else(|| Error::UnknownComponent(id.to_string()))
    }

    pub fn has_component(&self, id: &str) -> bool {
        self.component_index(id).is_ok()
    }

    /// Coefficient vector of `d` indexed by ray.
    pub fn coefficients(&self, d: &RationalDivisor) -> Result<Vec<Rational>> {
        let mut v = vec![Rational::zero(); self.rays.len()];
        for (id, c) in d.iter() {
            v[self.component_index(id)?] = c.clone();
        }
        Ok(v)
    }

    pub fn divisor_from_coefficients(&self, coeffs: &[Rational]) -> RationalDivisor {
        RationalDivisor::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (self.ray_id(i), c.clone())),
        )
    }

    /// `D_rho` for ray `i`.
    pub fn ray_divisor(&self, i: usize) -> RationalDivisor {
        RationalDivisor::single(self.ray_id(i), Rational::one())
    }

    /// Re-key a divisor read from JSON: keys may be ray indices of this fan
    /// (`"0"`, `"1"`, ...) or ray ids (`"(1,0)"`).
    pub fn rekey_divisor(&self, d: &RationalDivisor) -> Result<RationalDivisor> {
        let mut out = RationalDivisor::zero();
        for (key, c) in d.iter() {
            let id = match key.trim().parse::<usize>() {
                Ok(i) if i < self.rays.len() => self.ray_id(i),
                Ok(_) => return Err(Error::UnknownComponent(key.to_string())),
                Err(_) => self.ray_id(self.component_index(key)?),
            };
            out.add_term(id, c);
        }
        Ok(out)
    }

    /// Principal divisor `div(chi^m) = sum <m, u_rho> D_rho`.
    pub fn principal_divisor(&self, m: &[Rational]) -> RationalDivisor {
        let coeffs: Vec<Rational> = self.rays.iter().map(|u| linalg::dot_int(m, u)).collect();
        self.divisor_from_coefficients(&coeffs)
    }

    /// Coordinates of `v` in the basis of maximal cone `c`, if `v` lies in it.
    pub fn cone_coordinates(&self, c: usize, v: &[i64]) -> Option<Vec<Rational>> {
        let gens: Vec<Vec<i64>> = self.max_cones[c].iter().map(|&i| self.rays[i].clone()).collect();
        linalg::cone_coordinates(&gens, v).filter(|x| linalg::is_nonneg(x))
    }

    /// First maximal cone containing `v`, with `v`'s coordinates in it.
    pub fn locate(&self, v: &[i64]) -> Option<(usize, Vec<Rational>)> {
        (0..self.max_cones.len()).find_map(|c| self.cone_coordinates(c, v).map(|x| (c, x)))
    }

    /// `|det|` of the ray matrix of maximal cone `c`.
    pub fn multiplicity(&self, c: usize) -> i64 {
        let m: Vec<Vec<i64>> = self.max_cones[c].iter().map(|&i| self.rays[i].clone()).collect();
        use num_traits::ToPrimitive;
        linalg::det_int(&m).abs().to_i64().expect("multiplicity out of range")
    }

    /// All cones of the fan (faces of maximal cones, including the zero cone),
    /// as sorted ray-index sets ordered by size then lexicographically.
    pub fn all_cones(&self) -> Vec<Vec<usize>> {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in &self.max_cones {
            for mask in 0u32..(1 << c.len()) {
                let face: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &r)| r)
                    .collect();
                set.insert(face);
            }
        }
        let mut v: Vec<Vec<usize>> = set.into_iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        v
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.complete {
            Ok(())
        } else {
            Err(Error::NotComplete)
        }
    }
}

trait IsZeroBig {
    fn is_zero_big(&self) -> bool;
}

impl IsZeroBig for num_bigint::BigInt {
    fn is_zero_big(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

/// Two simplicial full-dimensional cones meet in their common face iff some
/// linear form vanishes on the shared rays, is positive on the other rays of
/// the first cone and negative on the other rays of the second.
fn check_proper_intersection(rays: &[Vec<i64>], a: &[usize], b: &[usize]) -> Result<()> {
    let dim = rays[a[0]].len();
    let mut lp = LinearProgram::new(dim).all_free();
    for &i in a {
        let row: Vec<Rational> = rays[i].iter().map(|&x| Rational::from_int(x)).collect();
        if b.contains(&i) {
            lp.add(row, Relation::Eq, Rational::zero());
        } else {
            lp.add(row, Relation::Ge, Rational::one());
        }
    }
    for &i in b {
        if a.contains(&i) {
            continue;
        }
        let row: Vec<Rational> = rays[i].iter().map(|&x| Rational::from_int(x)).collect();
        lp.add(row, Relation::Le, Rational::from_int(-1));
    }
    if lp.feasible_point().is_some() {
        Ok(())
    } else {
        Err(Error::NonFan {
            first: a.to_vec(),
            second: b.to_vec(),
            detail: "do not meet in a common face".into(),
        })
    }
}

/// Fixture fans used across the test suites.
pub mod fixtures {
    use super::ToricVariety;

    pub fn p1() -> ToricVariety {
        ToricVariety::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]).unwrap()
    }

    pub fn p2() -> ToricVariety {
        ToricVariety::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
    }

    pub fn p1xp1() -> ToricVariety {
        ToricVariety::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap()
    }

    /// Hirzebruch surface `F_a` with rays (1,0), (0,1), (-1,a), (0,-1).
    pub fn hirzebruch(a: i64) -> ToricVariety {
        ToricVariety::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .unwrap()
    }

    pub fn f1() -> ToricVariety {
        hirzebruch(1)
    }

    /// The affine plane: a single smooth cone.
    pub fn a2() -> ToricVariety {
        ToricVariety::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]]).unwrap()
    }

    /// The quadric cone: the cone over (1,0) and (1,2).
    pub fn quadric_cone() -> ToricVariety {
        ToricVariety::new(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]).unwrap()
    }

    pub fn p3() -> ToricVariety {
        ToricVariety::new(
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
        .unwrap()
    }

    /// Weighted projective plane P(1,1,2): the simplicial, singular fan with
    /// rays (1,0), (0,1), (-1,-2).
    pub fn p112() -> ToricVariety {
        ToricVariety::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -2]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap()
    }
}
