use std::collections::{BTreeMap, BTreeSet};

use super::{ray_id, ToricVariety};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::Rational;

/// A refinement `W -> X` produced by star subdivisions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub variety: ToricVariety,
    /// Component ids of the rays added to `X`, in insertion order.
    pub added: Vec<String>,
}

/// Star subdivision of `x` at the primitive vector `v`.
pub fn star_subdivide(x: &ToricVariety, v: &[i64]) -> Result<ToricVariety> {
    if v.len() != x.dim || v.iter().all(|&c| c == 0) {
        return Err(Error::Precondition("subdivision vector must be nonzero".into()));
    }
    if linalg::gcd_slice(v) != 1 {
        return Err(Error::Precondition(format!("{v:?} is not primitive")));
    }
    if x.ray_index(v).is_some() {
        return Ok(x.clone());
    }
    let (c, coords) = x.locate(v).ok_or_else(|| Error::OutsideSupport(v.to_vec()))?;
    let face: Vec<usize> = x.max_cones[c]
        .iter()
        .zip(&coords)
        .filter(|(_, l)| l.is_positive())
        .map(|(&r, _)| r)
        .collect();
    let new_index = x.rays.len();
    let mut rays = x.rays.clone();
    rays.push(v.to_vec());
    let mut cones = Vec::new();
    for sigma in &x.max_cones {
        if face.iter().all(|r| sigma.contains(r)) {
            for u in &face {
                let mut s: Vec<usize> = sigma.iter().copied().filter(|r| r != u).collect();
                s.push(new_index);
                cones.push(s);
            }
        } else {
            cones.push(sigma.clone());
        }
    }
    ToricVariety::new(x.dim, rays, cones)
}

/// Nonzero lattice point of the fundamental parallelepiped of cone `c` with
/// the smallest coordinate sum (ties broken lexicographically).
fn parallelepiped_point(x: &ToricVariety, c: usize) -> Option<Vec<i64>> {
    let gens: Vec<Vec<i64>> = x.max_cones[c].iter().map(|&r| x.rays[r].clone()).collect();
    let n = x.dim;
    let lo: Vec<i64> = (0..n).map(|j| gens.iter().map(|g| g[j].min(0)).sum()).collect();
    let hi: Vec<i64> = (0..n).map(|j| gens.iter().map(|g| g[j].max(0)).sum()).collect();
    let mut best: Option<(Rational, Vec<i64>)> = None;
    let mut w = lo.clone();
    loop {
        if w.iter().any(|&t| t != 0) {
            if let Some(l) = linalg::cone_coordinates(&gens, &w) {
                let one = Rational::one();
                if l.iter().all(|t| !t.is_negative() && *t < one) {
                    let s: Rational = l.iter().cloned().sum();
                    if best.as_ref().map_or(true, |(b, _)| s < *b) {
                        best = Some((s, w.clone()));
                    }
                }
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best.map(|(_, w)| w);
            }
            k -= 1;
            if w[k] < hi[k] {
                w[k] += 1;
                for j in k + 1..n {
                    w[j] = lo[j];
                }
                break;
            }
        }
    }
}

/// Toric resolution of singularities by repeated star subdivision at
/// parallelepiped points of the first singular maximal cone.
pub fn resolve(x: &ToricVariety, max_steps: usize) -> Result<Refinement> {
    let mut w = x.clone();
    let mut added = Vec::new();
    for _ in 0..=max_steps {
        let Some(c) = (0..w.max_cones.len()).find(|&c| w.multiplicity(c) != 1) else {
            return Ok(Refinement { variety: w, added });
        };
        let v = parallelepiped_point(&w, c)
            .ok_or_else(|| Error::Invariant("singular cone without interior lattice point".into()))?;
        added.push(ray_id(&v));
        w = star_subdivide(&w, &v)?;
    }
    Err(Error::BoundExceeded(format!(
        "resolution needs more than {max_steps} subdivisions"
    )))
}

impl ToricVariety {
    /// Every maximal cone of `self` lies in a maximal cone of `x`.
    pub fn refines(&self, x: &ToricVariety) -> bool {
        self.dim == x.dim
            && self.max_cones.iter().all(|sigma| {
                (0..x.max_cones.len()).any(|c| {
                    sigma
                        .iter()
                        .all(|&r| x.cone_coordinates(c, &self.rays[r]).is_some())
                })
            })
    }

    /// Codimension-one faces lying in exactly one maximal cone.
    pub fn boundary_faces(&self) -> Vec<Vec<usize>> {
        let mut count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for c in &self.max_cones {
            for skip in 0..c.len() {
                let f: Vec<usize> = c
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, &r)| r)
                    .collect();
                *count.entry(f).or_default() += 1;
            }
        }
        count
            .into_iter()
            .filter(|(_, k)| *k == 1)
            .map(|(f, _)| f)
            .collect()
    }

    /// Inward facet normals of maximal cone `c`: `m_i` with `<m_i, u_j> = delta_ij`.
    fn facet_normals(&self, c: usize) -> Vec<Vec<Rational>> {
        let cone = &self.max_cones[c];
        let a: linalg::Matrix = cone
            .iter()
            .map(|&r| self.rays[r].iter().map(|&v| Rational::from_int(v)).collect())
            .collect();
        (0..cone.len())
            .map(|i| {
                let e: Vec<Rational> = (0..cone.len())
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect();
                linalg::solve(&a, &e).expect("maximal cones are full-dimensional")
            })
            .collect()
    }
}

fn satisfies(h: &[Vec<Rational>], v: &[i64]) -> bool {
    h.iter().all(|m| !linalg::dot_int(m, v).is_negative())
}

/// Extreme rays of the full cone `{x : <h, x> >= 0 for h in h}` (assumed pointed).
fn extreme_rays(h: &[Vec<Rational>], n: usize) -> Vec<Vec<i64>> {
    let mut out: BTreeSet<Vec<i64>> = BTreeSet::new();
    for subset in linalg::combinations(h.len(), n - 1) {
        let rows: linalg::Matrix = subset.iter().map(|&i| h[i].clone()).collect();
        let ker = if rows.is_empty() {
            (0..n)
                .map(|i| (0..n).map(|j| Rational::from_int(i64::from(i == j))).collect())
                .collect()
        } else {
            linalg::kernel(&rows, n)
        };
        if ker.len() != 1 {
            continue;
        }
        let d = linalg::primitive_integer(&ker[0]);
        let neg: Vec<i64> = d.iter().map(|x| -x).collect();
        if satisfies(h, &d) {
            out.insert(d);
        } else if satisfies(h, &neg) {
            out.insert(neg);
        }
    }
    out.into_iter().collect()
}

/// Pulling triangulation of the cone on `face` (global ray indices, sorted),
/// whose faces are cut out by the inequalities `h`.
fn pull(
    face: &[usize],
    rays: &[Vec<i64>],
    h: &[Vec<Rational>],
    out: &mut BTreeSet<Vec<usize>>,
    prefix: &mut Vec<usize>,
) {
    let gens: Vec<Vec<i64>> = face.iter().map(|&r| rays[r].clone()).collect();
    let d = linalg::rank_int(&gens);
    if face.len() == d {
        let mut s: Vec<usize> = prefix.iter().chain(face).copied().collect();
        s.sort_unstable();
        out.insert(s);
        return;
    }
    let v = face[0];
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for m in h {
        let z: Vec<usize> = face
            .iter()
            .copied()
            .filter(|&r| linalg::dot_int(m, &rays[r]).is_zero())
            .collect();
        if z.len() == face.len() || z.contains(&v) || z.is_empty() {
            continue;
        }
        let zg: Vec<Vec<i64>> = z.iter().map(|&r| rays[r].clone()).collect();
        if linalg::rank_int(&zg) == d - 1 {
            facets.insert(z);
        }
    }
    prefix.push(v);
    for f in facets {
        pull(&f, rays, h, out, prefix);
    }
    prefix.pop();
}

/// Coarsest-looking simplicial fan refining both `x` and `y`: the pairwise
/// intersections of maximal cones, triangulated by pulling rays in a single
/// global order (rays of `x`, then new rays of `y`, then new rays
/// lexicographically) so that shared faces are triangulated identically.
pub fn common_refinement(x: &ToricVariety, y: &ToricVariety) -> Result<ToricVariety> {
    if x.dim != y.dim {
        return Err(Error::Precondition("fans live in different lattices".into()));
    }
    let n = x.dim;
    let mut pieces: Vec<(Vec<Vec<i64>>, Vec<Vec<Rational>>)> = Vec::new();
    let mut extra: BTreeSet<Vec<i64>> = BTreeSet::new();
    let xn: Vec<Vec<Vec<Rational>>> = (0..x.max_cones.len()).map(|c| x.facet_normals(c)).collect();
    let yn: Vec<Vec<Vec<Rational>>> = (0..y.max_cones.len()).map(|c| y.facet_normals(c)).collect();
    for hx in &xn {
        for hy in &yn {
            let mut h: Vec<Vec<Rational>> = hx.iter().chain(hy).cloned().collect();
            h.dedup();
            let ext = extreme_rays(&h, n);
            if ext.len() < n || linalg::rank_int(&ext) < n {
                continue;
            }
            for e in &ext {
                if x.ray_index(e).is_none() && y.ray_index(e).is_none() {
                    extra.insert(e.clone());
                }
            }
            pieces.push((ext, h));
        }
    }
    let mut order: Vec<Vec<i64>> = x.rays.clone();
    order.extend(y.rays.iter().filter(|r| x.ray_index(r).is_none()).cloned());
    order.extend(extra);
    let index: BTreeMap<&Vec<i64>, usize> = order.iter().enumerate().map(|(i, r)| (r, i)).collect();

    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (ext, h) in &pieces {
        let mut face: Vec<usize> = ext.iter().map(|e| index[e]).collect();
        face.sort_unstable();
        pull(&face, &order, h, &mut simplices, &mut Vec::new());
    }

    let used: BTreeSet<usize> = simplices.iter().flatten().copied().collect();
    let renum: BTreeMap<usize, usize> = used.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let rays: Vec<Vec<i64>> = used.iter().map(|&g| order[g].clone()).collect();
    let cones: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| s.iter().map(|g| renum[g]).collect())
        .collect();
    let w = ToricVariety::new(n, rays, cones)?;

    if !(x.complete && y.complete) {
        let on_boundary = |v: &ToricVariety, face: &[Vec<i64>]| {
            v.boundary_faces().iter().any(|f| {
                let gens: Vec<Vec<i64>> = f.iter().map(|&r| v.rays[r].clone()).collect();
                face.iter().all(|u| {
                    linalg::cone_coordinates(&gens, u).is_some_and(|c| linalg::is_nonneg(&c))
                })
            })
        };
        for f in w.boundary_faces() {
            let face: Vec<Vec<i64>> = f.iter().map(|&r| w.rays[r].clone()).collect();
            if !on_boundary(x, &face) || !on_boundary(y, &face) {
                return Err(Error::Precondition("fans have different supports".into()));
            }
        }
    }
    Ok(w)
}
