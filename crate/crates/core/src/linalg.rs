//! Dense exact linear algebra over the rationals and small integer lattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::{denominator_lcm, Rational};

pub type Matrix = Vec<Vec<Rational>>;

pub fn to_rational_matrix(m: &[Vec<i64>]) -> Matrix {
    m.iter()
        .map(|r| r.iter().map(|&x| Rational::from_int(x)).collect())
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[Rational], b: &[i64]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(_, &y)| y != 0)
        .map(|(x, &y)| x * &Rational::from_int(y))
        .sum()
}

/// Row-reduce `m` in place to reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

pub fn rank_int(m: &[Vec<i64>]) -> usize {
    rank(&to_rational_matrix(m))
}

pub fn det(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let delta = &f * &a[c][j];
                a[i][j] -= delta;
            }
        }
    }
    det
}

pub fn det_int(m: &[Vec<i64>]) -> BigInt {
    let d = det(&to_rational_matrix(m));
    debug_assert!(d.is_integer());
    d.numer().clone()
}

/// Leading principal minors `det_1, ..., det_n`.
pub fn leading_minors(m: &Matrix) -> Vec<Rational> {
    (1..=m.len())
        .map(|k| {
            let sub: Matrix = m[..k].iter().map(|r| r[..k].to_vec()).collect();
            det(&sub)
        })
        .collect()
}

/// Unique solution of the square system `a x = b`, or `None` if `a` is singular.
pub fn solve(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(r, y)| {
            let mut row = r.clone();
            row.push(y.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Some solution of `a x = b` (free variables set to zero), or `None`.
pub fn solve_any(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(r, y)| {
            let mut row = r.clone();
            row.push(y.clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][cols].clone();
    }
    Some(x)
}

/// Basis of the rational null space `{x : m x = 0}`.
pub fn kernel(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&a[i][f];
            }
            v
        })
        .collect()
}

/// Scale a rational vector to the primitive integer vector on the same ray.
pub fn primitive_integer(v: &[Rational]) -> Vec<i64> {
    let l = denominator_lcm(v.iter());
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    ints.iter()
        .map(|x| {
            let y = if g.is_zero() { x.clone() } else { x / &g };
            y.to_i64().expect("primitive vector entry out of range")
        })
        .collect()
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)).abs()
}

pub fn primitive(v: &[i64]) -> Vec<i64> {
    let g = gcd_slice(v);
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Index of the lattice generated by the integer vectors `gens` inside its
/// saturation: the gcd of the maximal minors of the matrix with rows `gens`.
/// Assumes the rows are linearly independent; returns 1 for an empty set.
pub fn lattice_index(gens: &[Vec<i64>]) -> BigInt {
    let k = gens.len();
    if k == 0 {
        return BigInt::from(1);
    }
    let n = gens[0].len();
    let mut g = BigInt::zero();
    for cols in combinations(n, k) {
        let sub: Vec<Vec<i64>> = gens
            .iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect())
            .collect();
        g = g.gcd(&det_int(&sub));
    }
    g.abs()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Lattice basis of `{x in Z^n : <r, x> = 0 for every row r}`.
///
/// Column operations bring the matrix to echelon form while tracking the
/// unimodular transform; the transform columns beyond the rank span the
/// integer kernel, and they are a basis because the transform is invertible
/// over the integers.
pub fn integer_kernel(rows: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    let col_op = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, f: i128| {
        for r in a.iter_mut() {
            r[dst] -= f * r[src];
        }
        for r in u.iter_mut() {
            r[dst] -= f * r[src];
        }
    };
    let swap = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for r in a.iter_mut() {
            r.swap(i, j);
        }
        for r in u.iter_mut() {
            r.swap(i, j);
        }
    };
    let mut pivot_col = 0;
    for row in 0..a.len() {
        if pivot_col == n {
            break;
        }
        loop {
            // smallest nonzero entry among remaining columns moves to pivot_col
            let best = (pivot_col..n)
                .filter(|&c| a[row][c] != 0)
                .min_by_key(|&c| a[row][c].abs());
            let Some(best) = best else { break };
            swap(&mut a, &mut u, pivot_col, best);
            let mut done = true;
            for c in pivot_col + 1..n {
                if a[row][c] != 0 {
                    let f = a[row][c].div_euclid(a[row][pivot_col]);
                    col_op(&mut a, &mut u, c, pivot_col, f);
                    if a[row][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[row][pivot_col] != 0 {
            pivot_col += 1;
        }
    }
    (pivot_col..n)
        .map(|c| {
            let v: Vec<i64> = (0..n).map(|r| u[r][c] as i64).collect();
            v
        })
        .collect()
}

/// Is the integer vector `v` a nonnegative combination of `gens` (assumed
/// linearly independent)? Returns the coefficients when it is.
pub fn cone_coordinates(gens: &[Vec<i64>], v: &[i64]) -> Option<Vec<Rational>> {
    // solve sum_j c_j gens[j] = v
    let n = v.len();
    let a: Matrix = (0..n)
        .map(|i| gens.iter().map(|g| Rational::from_int(g[i])).collect())
        .collect();
    let b: Vec<Rational> = v.iter().map(|&x| Rational::from_int(x)).collect();
    let mut aug = a.clone();
    for (row, y) in aug.iter_mut().zip(&b) {
        row.push(y.clone());
    }
    let k = gens.len();
    let pivots = rref(&mut aug);
    if pivots.contains(&k) || pivots.len() != k {
        return None;
    }
    let coords: Vec<Rational> = (0..k).map(|i| aug[i][k].clone()).collect();
    Some(coords)
}

pub fn is_nonneg(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}
