use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::ToricVariety;
use crate::divisor::RationalDivisor;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionKind {
    Divisorial,
    Flip,
    Fibration,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fibration {
    /// Dimension of the base `T`.
    pub base_dim: usize,
    /// The base fan, `None` when `T` is a point.
    pub base: Option<ToricVariety>,
    /// Integer matrix (rows) of the lattice projection `N -> N_T`.
    pub projection: Vec<Vec<i64>>,
}

/// Result of contracting an extremal wall class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Surgery {
    pub kind: ContractionKind,
    /// Index of the contracted wall in the source fan.
    pub wall: usize,
    /// Component ids with negative / positive wall-relation coefficient.
    pub negative: Vec<String>,
    pub positive: Vec<String>,
    /// The new model: the contraction target or the flip. For a fibration
    /// the model is unchanged and the structure lives in `fibration`.
    pub target: ToricVariety,
    /// Divisor removed by a divisorial contraction.
    pub contracted: Option<String>,
    pub fibration: Option<Fibration>,
}

impl Surgery {
    /// Birational transform of a divisor to the new model.
    pub fn transform(&self, d: &RationalDivisor) -> RationalDivisor {
        match &self.contracted {
            Some(id) => d.restrict(|k| k != id),
            None => d.clone(),
        }
    }
}

/// Contract the wall class `wall` of a complete fan (Reid's construction).
///
/// With the wall relation split into `J-` and `J+`: `J-` empty gives a
/// fibration, `|J-| = 1` a divisorial contraction removing that ray, and
/// `|J-| >= 2` a flip exchanging `cone(J \ {j}), j in J+` for
/// `cone(J \ {i}), i in J-`.
pub fn contract_or_flip(wall: usize, x: &ToricVariety) -> Result<Surgery> {
    x.require_complete()?;
    if wall >= x.walls.len() {
        return Err(Error::Precondition(format!("no wall with index {wall}")));
    }
    if !x.is_extremal(wall) {
        return Err(Error::Precondition(format!(
            "wall {:?} does not span an extremal ray",
            x.walls[wall].wall
        )));
    }
    let curve = &x.walls[wall];
    let (neg, pos, _) = curve.relation_signs();
    let ids = |v: &[usize]| v.iter().map(|&i| x.ray_id(i)).collect::<Vec<_>>();
    if neg.is_empty() {
        let fibration = fibration(x, &pos)?;
        return Ok(Surgery {
            kind: ContractionKind::Fibration,
            wall,
            negative: Vec::new(),
            positive: ids(&pos),
            target: x.clone(),
            contracted: None,
            fibration: Some(fibration),
        });
    }

    let j: BTreeSet<usize> = neg.iter().chain(&pos).copied().collect();
    // group the maximal cones of the star of cone(J-) by their part off J
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (ci, sigma) in x.max_cones.iter().enumerate() {
        if !neg.iter().all(|r| sigma.contains(r)) {
            continue;
        }
        let missing: Vec<usize> = pos.iter().copied().filter(|r| !sigma.contains(r)).collect();
        if missing.len() != 1 {
            return Err(Error::NonFan {
                first: sigma.clone(),
                second: curve.wall.clone(),
                detail: "cone over the exceptional locus is not of the form K + J \\ {j}".into(),
            });
        }
        let k: Vec<usize> = sigma.iter().copied().filter(|r| !j.contains(r)).collect();
        groups.entry(k).or_default().push(ci);
    }
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let mut added: Vec<Vec<usize>> = Vec::new();
    for (k, cones) in &groups {
        if cones.len() != pos.len() {
            return Err(Error::NonFan {
                first: k.clone(),
                second: curve.wall.clone(),
                detail: "incomplete star around the exceptional locus".into(),
            });
        }
        removed.extend(cones);
        if neg.len() == 1 {
            let mut c: Vec<usize> = k.iter().chain(&pos).copied().collect();
            c.sort_unstable();
            added.push(c);
        } else {
            for &i in &neg {
                let mut c: Vec<usize> = k.iter().chain(&j).copied().filter(|&r| r != i).collect();
                c.sort_unstable();
                added.push(c);
            }
        }
    }
    let mut cones: Vec<Vec<usize>> = x
        .max_cones
        .iter()
        .enumerate()
        .filter(|(ci, _)| !removed.contains(ci))
        .map(|(_, c)| c.clone())
        .chain(added)
        .collect();
    let mut rays = x.rays.clone();
    let (kind, contracted) = if neg.len() == 1 {
        let rho = neg[0];
        rays.remove(rho);
        for c in cones.iter_mut() {
            for r in c.iter_mut() {
                if *r > rho {
                    *r -= 1;
                }
            }
        }
        (ContractionKind::Divisorial, Some(x.ray_id(rho)))
    } else {
        (ContractionKind::Flip, None)
    };
    let target = ToricVariety::new(x.dim, rays, cones).map_err(|e| match e {
        Error::NonFan { .. } => e,
        other => Error::NonFan {
            first: Vec::new(),
            second: Vec::new(),
            detail: format!("surgery produced an invalid fan: {other}"),
        },
    })?;
    Ok(Surgery {
        kind,
        wall,
        negative: ids(&neg),
        positive: ids(&pos),
        target,
        contracted,
        fibration: None,
    })
}

/// Quotient fan for a fibration contracting the span of the rays `pos`.
fn fibration(x: &ToricVariety, pos: &[usize]) -> Result<Fibration> {
    let gens: Vec<Vec<i64>> = pos.iter().map(|&r| x.rays[r].clone()).collect();
    let projection = linalg::integer_kernel(&gens, x.dim);
    let base_dim = projection.len();
    if base_dim == 0 {
        return Ok(Fibration {
            base_dim,
            base: None,
            projection,
        });
    }
    let project = |u: &[i64]| -> Vec<i64> {
        projection
            .iter()
            .map(|m| m.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut base_rays: Vec<Vec<i64>> = Vec::new();
    let mut index: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut base_cones: BTreeSet<Vec<usize>> = BTreeSet::new();
    for sigma in &x.max_cones {
        let mut images: BTreeSet<Vec<i64>> = BTreeSet::new();
        for &r in sigma {
            let p = project(&x.rays[r]);
            if p.iter().any(|&c| c != 0) {
                images.insert(linalg::primitive(&p));
            }
        }
        let images: Vec<Vec<i64>> = images.into_iter().collect();
        if linalg::rank_int(&images) < base_dim {
            continue;
        }
        if images.len() != base_dim {
            return Err(Error::Invariant(format!(
                "image of cone {sigma:?} in the base is not simplicial"
            )));
        }
        let mut cone = Vec::new();
        for im in images {
            let next = index.len();
            let i = *index.entry(im.clone()).or_insert_with(|| {
                base_rays.push(im);
                next
            });
            cone.push(i);
        }
        cone.sort_unstable();
        base_cones.insert(cone);
    }
    let base = ToricVariety::new(base_dim, base_rays, base_cones.into_iter().collect())?;
    Ok(Fibration {
        base_dim,
        base: Some(base),
        projection,
    })
}
