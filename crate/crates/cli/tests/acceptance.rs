//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! Set `WZD_BLESS=1` to rewrite the golden traces instead of comparing.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wzd_core::decomp::{
    monotone_boundary_wzd, nef_threshold, pseff_threshold, validate_weak, LmmData,
    WeakDecomposition,
};
use wzd_core::mmp::{descend, pipeline, run_wzd_mmp, PipelineOptions};
use wzd_core::rational::q;
use wzd_core::surface::{fixtures::three_class_canonical, zariski_decompose};
use wzd_core::toric::fixtures::{f1, hirzebruch, p112, p1xp1, p2, p3};
use wzd_core::toric::{
    ample_divisor, canonical_divisor, is_pseudoeffective, log_discrepancy, star_subdivide,
};
use wzd_core::{
    Boundary, Error, Model, Outcome, Pair, Rational, RationalDivisor, SurfaceModel, Target,
    ToricVariety,
};

const SEED: u64 = 20_240_601;

const SURFACE_FIXTURES: usize = 200;
const SURFACE_MAX_CURVES: usize = 5;
const GRID_DENOMINATOR: i64 = 8;
const SURFACE_TIME_LIMIT: Duration = Duration::from_secs(60);

const THRESHOLD_SURFACE_FIXTURES: usize = 100;
const THRESHOLD_TORIC_FIXTURES: usize = 100;

const CHALLENGERS: usize = 50;
const M_MAX: u64 = 12;
const STEP_LIMIT: usize = 64;
const RANDOM_PIPELINE_FIXTURES: usize = 20;

const SUBDIVISION_FIXTURES: usize = 20;

const MONOTONE_FIXTURES: usize = 50;
const THRESHOLD_BOUNDARY_FIXTURES: usize = 40;
/// Width of the final bisection interval: `2^-BISECTION_STEPS`.
const BISECTION_STEPS: u32 = 40;

const DETERMINISM_RUNS: usize = 3;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: wzd_core::Result<T>, ctx: &str) -> Result<T, String> {
    r.map_err(|e| format!("{ctx}: {e}"))
}

fn one(id: &str) -> RationalDivisor {
    RationalDivisor::single(id, Rational::one())
}

fn saturated(x: &ToricVariety) -> Boundary {
    Boundary::new(-canonical_divisor(x)).unwrap()
}

/// Rays a, b, c, d with 2a + 2b = c + d, closed up by -a - b.
fn flip3() -> ToricVariety {
    ToricVariety::new(
        3,
        vec![
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![1, 1, 1],
            vec![1, 1, -1],
            vec![-1, -1, 0],
        ],
        vec![
            vec![0, 2, 3],
            vec![1, 2, 3],
            vec![0, 2, 4],
            vec![0, 3, 4],
            vec![1, 2, 4],
            vec![1, 3, 4],
        ],
    )
    .unwrap()
}

fn complete_fans() -> Vec<(&'static str, ToricVariety)> {
    vec![
        ("P2", p2()),
        ("P1xP1", p1xp1()),
        ("F1", f1()),
        ("F2", hirzebruch(2)),
        ("F3", hirzebruch(3)),
        ("P112", p112()),
        ("P3", p3()),
        ("flip3", flip3()),
    ]
}

fn random_effective(x: &ToricVariety, rng: &mut ChaCha8Rng) -> RationalDivisor {
    loop {
        let coeffs: Vec<Rational> = (0..x.rays().len())
            .map(|_| q(*[0, 0, 1, 2, 3, 4].choose(rng).unwrap(), 2))
            .collect();
        let d = x.divisor_from_coefficients(&coeffs);
        if !d.is_zero() {
            return d;
        }
    }
}

fn random_boundary(x: &ToricVariety, rng: &mut ChaCha8Rng) -> Boundary {
    let coeffs: Vec<Rational> = (0..x.rays().len())
        .map(|_| q(*[0, 1, 2, 3, 4, 4].choose(rng).unwrap(), 4))
        .collect();
    Boundary::new(x.divisor_from_coefficients(&coeffs)).unwrap()
}

// ---------------------------------------------------------------------------
// 1. surface Zariski decompositions against an integer grid search

/// Classes `A, C1..Ck`; all pairings are stored doubled so everything below is
/// integral. `D = a A + sum d_i C_i` with `d_i` stored doubled too.
struct Lattice {
    k: usize,
    a_dot_c2: Vec<i64>,
    form2: Vec<Vec<i64>>,
    a: i64,
    d2: Vec<i64>,
}

impl Lattice {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.gen_range(1..=SURFACE_MAX_CURVES);
        let mut form2 = vec![vec![0i64; k]; k];
        for i in 0..k {
            for j in 0..i {
                let v = *[0, 0, 1, 2].choose(rng).unwrap();
                form2[i][j] = v;
                form2[j][i] = v;
            }
        }
        for i in 0..k {
            let off: i64 = (0..k).filter(|&j| j != i).map(|j| form2[i][j]).sum();
            form2[i][i] = -off - rng.gen_range(1..=4);
        }
        Lattice {
            k,
            a_dot_c2: (0..k).map(|_| *[0, 1, 2, 4].choose(rng).unwrap()).collect(),
            form2,
            a: rng.gen_range(0..=2),
            d2: (0..k).map(|_| rng.gen_range(0..=2)).collect(),
        }
    }

    fn curve(i: usize) -> String {
        format!("C{}", i + 1)
    }

    fn model(&self) -> SurfaceModel {
        let mut classes = vec!["A".to_string()];
        classes.extend((0..self.k).map(Self::curve));
        let n = self.k + 1;
        let mut form = vec![vec![Rational::zero(); n]; n];
        form[0][0] = Rational::one();
        for i in 0..self.k {
            form[0][i + 1] = q(self.a_dot_c2[i], 2);
            form[i + 1][0] = q(self.a_dot_c2[i], 2);
            for j in 0..self.k {
                form[i + 1][j + 1] = q(self.form2[i][j], 2);
            }
        }
        let curves: Vec<String> = (0..self.k).map(Self::curve).collect();
        let gens = curves.iter().map(|c| one(c)).collect();
        SurfaceModel::new(classes, form, gens, curves, None).unwrap()
    }

    fn divisor(&self) -> RationalDivisor {
        let mut d = RationalDivisor::single("A", Rational::from_int(self.a));
        for i in 0..self.k {
            d.add_term(Self::curve(i), &q(self.d2[i], 2));
        }
        d
    }

    /// `16 (D . C_j)`.
    fn d16(&self) -> Vec<i64> {
        (0..self.k)
            .map(|j| {
                8 * self.a * self.a_dot_c2[j]
                    + (0..self.k).map(|i| 4 * self.d2[i] * self.form2[i][j]).sum::<i64>()
            })
            .collect()
    }

    /// `(D - sum n_i C_i) . C_j` for a divisor `N` on the curves.
    fn residual(&self, n: &[Rational]) -> Vec<Rational> {
        let d16 = self.d16();
        (0..self.k)
            .map(|j| {
                let mut v = q(d16[j], 16);
                for i in 0..self.k {
                    v = v - &n[i] * q(self.form2[i][j], 2);
                }
                v
            })
            .collect()
    }
}

/// Sylvester: every leading principal minor of `-G` is positive.
fn negative_definite(g: &[Vec<Rational>]) -> bool {
    let n = g.len();
    (1..=n).all(|k| {
        let m: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| -g[i][j].clone()).collect())
            .collect();
        determinant(m).is_positive()
    })
}

fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det = det * &pivot;
        for r in c + 1..n {
            let f = &m[r][c] / &pivot;
            for k in c..n {
                let sub = &f * &m[c][k];
                m[r][k] = &m[r][k] - sub;
            }
        }
    }
    det
}

fn surface_zariski_suite() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut points = 0u64;
    let mut on_grid = 0usize;
    for f in 0..SURFACE_FIXTURES {
        let lat = Lattice::random(&mut rng);
        let model = lat.model();
        let d = lat.divisor();
        let z = ok(zariski_decompose(&d, &model), &format!("fixture {f}"))?;
        let (p, n) = (&z.positive, &z.negative);
        ensure(&(p + n) == &d, || format!("fixture {f}: P + N != D"))?;
        ensure(n.is_effective(), || format!("fixture {f}: N not effective"))?;
        ensure(n.iter().all(|(id, _)| id != "A"), || format!("fixture {f}: N meets A"))?;
        let nv: Vec<Rational> = (0..lat.k).map(|i| n.coeff(&Lattice::curve(i))).collect();
        let pv = lat.residual(&nv);
        ensure(pv.iter().all(|v| !v.is_negative()), || format!("fixture {f}: P not nef"))?;
        let support: Vec<usize> = (0..lat.k).filter(|&i| nv[i].is_positive()).collect();
        ensure(support.iter().all(|&i| pv[i].is_zero()), || {
            format!("fixture {f}: P . C != 0 on the support of N")
        })?;
        let gram: Vec<Vec<Rational>> = support
            .iter()
            .map(|&i| support.iter().map(|&j| q(lat.form2[i][j], 2)).collect())
            .collect();
        ensure(negative_definite(&gram), || format!("fixture {f}: support not negative definite"))?;
        let n8_true: Option<Vec<i64>> = nv
            .iter()
            .map(|c| {
                let s = c * Rational::from_int(GRID_DENOMINATOR);
                s.is_integer().then(|| s.floor_i64())
            })
            .collect();
        if n8_true.is_some() {
            on_grid += 1;
        }

        let d16 = lat.d16();
        let hi: Vec<i64> = lat.d2.iter().map(|&c| c * GRID_DENOMINATOR / 2).collect();
        let mut n8 = vec![0i64; lat.k];
        loop {
            points += 1;
            let vals: Vec<i64> = (0..lat.k)
                .map(|j| d16[j] - (0..lat.k).map(|i| n8[i] * lat.form2[i][j]).sum::<i64>())
                .collect();
            if vals.iter().all(|&v| v >= 0) {
                // nef challenger: N' >= N, equivalently P' <= P
                for i in 0..lat.k {
                    let ni = q(n8[i], GRID_DENOMINATOR);
                    ensure(ni >= nv[i], || {
                        format!("fixture {f}: grid challenger {n8:?}/8 beats N at C{}", i + 1)
                    })?;
                }
                let orthogonal = (0..lat.k).all(|i| n8[i] == 0 || vals[i] == 0);
                let support_nd = {
                    let s: Vec<usize> = (0..lat.k).filter(|&i| n8[i] > 0).collect();
                    let g: Vec<Vec<Rational>> = s
                        .iter()
                        .map(|&i| s.iter().map(|&j| q(lat.form2[i][j], 2)).collect())
                        .collect();
                    negative_definite(&g)
                };
                if orthogonal && support_nd {
                    ensure(n8_true.as_deref() == Some(&n8[..]), || {
                        format!("fixture {f}: second Zariski decomposition N = {n8:?}/8")
                    })?;
                }
            }
            let mut i = 0;
            while i < lat.k && n8[i] == hi[i] {
                n8[i] = 0;
                i += 1;
            }
            if i == lat.k {
                break;
            }
            n8[i] += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < SURFACE_TIME_LIMIT, || {
        format!("runtime {:.1}s exceeds {}s", elapsed.as_secs_f64(), SURFACE_TIME_LIMIT.as_secs())
    })?;
    Ok(format!(
        "{SURFACE_FIXTURES} lattices, {points} grid points at denominator {GRID_DENOMINATOR}, \
         {on_grid} decompositions on the grid, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 2. nef thresholds against a breakpoint scan

fn threshold_case(model: &Model, p: &RationalDivisor, n: &RationalDivisor, tag: &str) -> Result<bool, String> {
    let pv = ok(model.generator_values(p), tag)?;
    let nv = ok(model.generator_values(n), tag)?;
    let nef_at = |t: &Rational| pv.iter().zip(&nv).all(|(a, b)| !(a + &(t * b)).is_negative());
    let mut candidates: Vec<Rational> = pv
        .iter()
        .zip(&nv)
        .filter(|(_, b)| b.is_negative())
        .map(|(a, b)| a / &(-b))
        .filter(|t| *t <= Rational::one())
        .collect();
    candidates.push(Rational::zero());
    candidates.push(Rational::one());
    candidates.sort();
    candidates.dedup();
    let expected = candidates
        .iter()
        .filter(|t| nef_at(t))
        .max()
        .cloned()
        .ok_or_else(|| format!("{tag}: P itself is not nef"))?;
    let got = ok(nef_threshold(p, n, model), tag)?;
    ensure(got.mu == expected, || format!("{tag}: mu {} but scan gives {expected}", got.mu))?;
    if got.mu < Rational::one() {
        let r = got.ray.ok_or_else(|| format!("{tag}: no ray for mu < 1"))?;
        ensure(nv[r].is_negative(), || format!("{tag}: N . R >= 0 on the returned ray"))?;
        ensure((&pv[r] + &(&got.mu * &nv[r])).is_zero(), || {
            format!("{tag}: (P + mu N) . R != 0")
        })?;
        let gap = candidates
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .min()
            .expect("mu < 1 leaves two candidates");
        let eps = gap / Rational::from_int(2);
        ensure(!nef_at(&(&got.mu + &eps)), || format!("{tag}: P + (mu + eps) N still nef"))?;
        Ok(true)
    } else {
        Ok(false)
    }
}

fn nef_threshold_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut below_one = 0;
    let mut total = 0;
    let mut s = 0;
    while s < THRESHOLD_SURFACE_FIXTURES {
        let lat = Lattice::random(&mut rng);
        let model = lat.model();
        let z = ok(zariski_decompose(&lat.divisor(), &model), "surface fixture")?;
        let mut n = RationalDivisor::zero();
        for i in 0..lat.k {
            n.add_term(Lattice::curve(i), &q(rng.gen_range(0..=4), 2));
        }
        if n.is_zero() {
            continue;
        }
        s += 1;
        let m = Model::Surface(model);
        below_one += threshold_case(&m, &z.positive, &n, &format!("surface {s}"))? as usize;
        total += 1;
    }
    let fans = complete_fans();
    for t in 0..THRESHOLD_TORIC_FIXTURES {
        let (name, x) = fans.choose(&mut rng).unwrap();
        let h = ok(ample_divisor(x), name)?.ok_or_else(|| format!("{name} not projective"))?;
        let p = match rng.gen_range(0..3) {
            0 => RationalDivisor::zero(),
            1 => h.scale(&q(rng.gen_range(1..=4), 2)),
            _ => &h + &x.ray_divisor(0).scale(&Rational::zero()),
        };
        let n = random_effective(x, &mut rng);
        let m = Model::Toric(x.clone());
        below_one += threshold_case(&m, &p, &n, &format!("toric {t} on {name}"))? as usize;
        total += 1;
    }
    Ok(format!("{total} fixtures, {below_one} with mu < 1 refuted at mu + eps"))
}

// ---------------------------------------------------------------------------
// 3. golden toric runs

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
        .join(name)
}

struct Run {
    code: Option<i32>,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn wzd(args: &[String]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_wzd"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code(),
        stdout: out.stdout,
        stderr: out.stderr,
    }
}

fn args(v: &[&str]) -> Vec<String> {
    v.iter()
        .map(|a| match a.strip_prefix('@') {
            Some(f) => fixture(f),
            None => a.to_string(),
        })
        .collect()
}

fn golden_runs() -> Check {
    let bless = std::env::var_os("WZD_BLESS").is_some();
    let runs: Vec<(&str, Vec<String>, Vec<&str>)> = vec![
        (
            "f1_scaling.json",
            args(&["scaling-mmp", "--fan", "@f1.json", "--ample", "@f1_scaling_h.json"]),
            vec!["divisorial", "fibration"],
        ),
        ("p1xp1_scaling.json", args(&["scaling-mmp", "--fan", "@p1xp1.json"]), vec!["fibration"]),
        (
            "p2_saturated.json",
            args(&["mmp", "--fan", "@p2.json", "--boundary", "@p2_saturated.json"]),
            vec![],
        ),
        (
            "f1_saturated.json",
            args(&["mmp", "--fan", "@f1.json", "--boundary", "@f1_saturated.json"]),
            vec![],
        ),
        (
            "p1xp1_saturated.json",
            args(&["mmp", "--fan", "@p1xp1.json", "--boundary", "@p1xp1_saturated.json"]),
            vec![],
        ),
    ];
    for (golden, argv, kinds) in &runs {
        let r = wzd(argv);
        ensure(r.code == Some(0), || {
            format!("{golden}: exit {:?}: {}", r.code, String::from_utf8_lossy(&r.stderr))
        })?;
        let v: serde_json::Value = serde_json::from_slice(&r.stdout).map_err(|e| e.to_string())?;
        let got: Vec<&str> = v["steps"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s["kind"].as_str().unwrap())
            .collect();
        ensure(&got == kinds, || format!("{golden}: steps {got:?}, expected {kinds:?}"))?;
        let expected_outcome = if kinds.is_empty() { "minimal_model" } else { "mori_fibre_space" };
        ensure(v["outcome"] == expected_outcome, || format!("{golden}: outcome {}", v["outcome"]))?;
        if *golden == "f1_scaling.json" {
            ensure(v["steps"][0]["contracted"] == "(0,1)", || "F1: wrong divisor contracted".into())?;
            let y = &v["steps"][0]["state_after"]["model"];
            ensure(y["rays"] == serde_json::json!([[1, 0], [-1, 1], [0, -1]]), || {
                format!("F1: contraction target {y} is not the plane fan")
            })?;
            ensure(v["steps"][1]["fibration"]["base_dim"] == 0, || "F1: base is not a point".into())?;
        }
        if *golden == "p1xp1_scaling.json" {
            ensure(v["steps"][0]["fibration"]["base_dim"] == 1, || "P1xP1: base is not a line".into())?;
        }
        let path = golden_path(golden);
        if bless {
            std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &r.stdout).map_err(|e| e.to_string())?;
        } else {
            let committed = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            ensure(committed == r.stdout, || format!("{golden}: trace differs from the golden"))?;
        }
    }
    Ok(format!("{} traces byte-identical to goldens{}", runs.len(), if bless { " (blessed)" } else { "" }))
}

// ---------------------------------------------------------------------------
// 4. pipeline closure

fn options() -> PipelineOptions {
    PipelineOptions {
        step_limit: STEP_LIMIT,
        m_max: M_MAX,
        challengers: CHALLENGERS,
        seed: SEED,
    }
}

fn closed(pair: &Pair, target: &Target, wzd: Option<WeakDecomposition>, tag: &str) -> Result<usize, String> {
    let rep = ok(pipeline(pair, target, wzd, &options()), tag)?;
    for d in &rep.descent {
        ensure(d.theta_after < d.theta_before, || format!("{tag}: theta did not drop"))?;
    }
    if let Some(last) = rep.descent.last() {
        ensure(last.theta_after == 0, || format!("{tag}: descent stopped at theta {}", last.theta_after))?;
    }
    ensure(rep.trace.outcome == Outcome::MinimalModel, || {
        format!("{tag}: outcome {:?}", rep.trace.outcome)
    })?;
    let check = rep.model_check.as_ref().unwrap();
    ensure(check.valid, || format!("{tag}: minimal model check failed: {:?}", check.conditions))?;
    for (name, r) in [("weak", &rep.weak), ("fujita", &rep.fujita), ("ckm", &rep.ckm)] {
        let r = r.as_ref().unwrap();
        ensure(r.valid, || format!("{tag}: {name} rejected: {:?}", r.witnesses))?;
    }
    let fujita = rep.fujita.as_ref().unwrap();
    ensure(fujita.truncation.challengers == Some(CHALLENGERS), || format!("{tag}: challenger count"))?;
    ensure(rep.ckm.as_ref().unwrap().truncation.m_max == Some(M_MAX), || format!("{tag}: m_max"))?;
    Ok(rep.trace.steps.len())
}

fn pipeline_closure() -> Check {
    let mut fixtures = 0;
    let mut steps = 0;
    // (X, sum D) is dlt only on smooth fans
    for (name, x) in complete_fans().into_iter().filter(|(_, x)| x.is_smooth()) {
        let pair = Pair::toric(x.clone(), saturated(&x)).unwrap();
        steps += closed(&pair, &Target::LogCanonical, None, &format!("{name} kb"))?;
        fixtures += 1;
    }
    let named: Vec<(&str, ToricVariety, Vec<(usize, Rational)>)> = vec![
        ("F1 f+2E", f1(), vec![(0, q(1, 1)), (1, q(2, 1))]),
        ("F1 E", f1(), vec![(1, q(1, 1))]),
        ("P2 line", p2(), vec![(0, q(1, 1))]),
        ("F2 s+f", hirzebruch(2), vec![(1, q(1, 1)), (0, q(1, 1))]),
        ("F3 2s+f", hirzebruch(3), vec![(1, q(2, 1)), (0, q(1, 1))]),
        ("flip3 c", flip3(), vec![(2, q(1, 1))]),
        ("flip3 c+d+v", flip3(), vec![(2, q(1, 1)), (3, q(1, 1)), (4, q(1, 1))]),
    ];
    for (name, x, terms) in &named {
        let mut d = RationalDivisor::zero();
        for (i, c) in terms {
            d.add_term(x.ray_id(*i), c);
        }
        let pair = Pair::toric(x.clone(), Boundary::zero()).unwrap();
        steps += closed(&pair, &Target::Divisor(d), None, name)?;
        fixtures += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let fans = complete_fans();
    for k in 0..RANDOM_PIPELINE_FIXTURES {
        let (name, x) = fans.choose(&mut rng).unwrap();
        let d = random_effective(x, &mut rng);
        let pair = Pair::toric(x.clone(), Boundary::zero()).unwrap();
        steps += closed(&pair, &Target::Divisor(d), None, &format!("random {k} on {name}"))?;
        fixtures += 1;
    }

    // theta > 0: descent until theta = 0, then the closure checks
    let mut descents = 0;
    let theta_cases: Vec<(&str, ToricVariety, Vec<(usize, Rational)>)> = vec![
        ("P2 2D", p2(), vec![(0, q(2, 1))]),
        ("F1 f+E/2", f1(), vec![(0, q(1, 1)), (1, q(1, 2))]),
        ("P1xP1 three", p1xp1(), vec![(0, q(1, 1)), (1, q(1, 3)), (2, q(2, 1))]),
    ];
    for (name, x, terms) in &theta_cases {
        let mut n = RationalDivisor::zero();
        for (i, c) in terms {
            n.add_term(x.ray_id(*i), c);
        }
        let pair = Pair::toric(x.clone(), Boundary::zero()).unwrap();
        let wzd = WeakDecomposition::trivial(pair.model.clone(), n.clone()).unwrap();
        let rep = ok(pipeline(&pair, &Target::Divisor(n), Some(wzd.clone()), &options()), name)?;
        ensure(!rep.descent.is_empty(), || format!("{name}: no descent"))?;
        descents += rep.descent.len();
        steps += closed(&pair, &Target::Divisor(wzd.n.clone()), Some(wzd), name)?;
        fixtures += 1;
    }
    let s = three_class_canonical();
    let half = RationalDivisor::single("C2", q(1, 2));
    let pair = Pair::new(Model::Surface(s), Boundary::new(half.clone()).unwrap()).unwrap();
    let wzd = WeakDecomposition::new(wzd_core::DecompositionKind::Weak, pair.model.clone(), one("A"), half).unwrap();
    let (p2_, t2, w2, record) = ok(descend(&pair, &Target::LogCanonical, wzd), "surface descent")?;
    ensure(record.iter().all(|d| d.theta_after < d.theta_before), || "surface: theta did not drop".into())?;
    descents += record.len();
    let trace = ok(run_wzd_mmp(&p2_, &t2, &w2, STEP_LIMIT), "surface run")?;
    ensure(trace.outcome == Outcome::MinimalModel, || "surface run did not reach a minimal model".into())?;
    Ok(format!(
        "{fixtures} toric fixtures closed ({steps} steps, {CHALLENGERS} challengers, m_max {M_MAX}), \
         {descents} theta descents"
    ))
}

// ---------------------------------------------------------------------------
// 5. discrepancies

/// Coordinates of `v` in a 2-cone `(a, b)` by Cramer's rule, if nonnegative.
fn cone_coords(a: &[i64], b: &[i64], v: &[i64]) -> Option<(Rational, Rational)> {
    let det = a[0] * b[1] - a[1] * b[0];
    let l1 = q(v[0] * b[1] - v[1] * b[0], det);
    let l2 = q(a[0] * v[1] - a[1] * v[0], det);
    (!l1.is_negative() && !l2.is_negative()).then_some((l1, l2))
}

/// `(f^*(K + B))` coefficient at `v` and `a(v) = sum lambda_i (1 - b_i)`.
fn pullback_oracle(x: &ToricVariety, b: &Boundary, v: &[i64]) -> (Rational, Rational) {
    for c in x.max_cones() {
        let (ua, ub) = (&x.rays()[c[0]], &x.rays()[c[1]]);
        if let Some((l1, l2)) = cone_coords(ua, ub, v) {
            let ba = b.coeff(&x.ray_id(c[0]));
            let bb = b.coeff(&x.ray_id(c[1]));
            let a = &l1 * (Rational::one() - &ba) + &l2 * (Rational::one() - &bb);
            return (-a.clone(), a);
        }
    }
    panic!("{v:?} outside the fan");
}

fn adjunction(x: &ToricVariety, tag: &str) -> Result<usize, String> {
    let k = canonical_divisor(x);
    for r in 0..x.rays().len() {
        let w = ok(x.wall_index(&[r]), tag)?;
        let e = x.ray_divisor(r);
        let vals_k = ok(x.wall_values(&k), tag)?;
        let vals_e = ok(x.wall_values(&e), tag)?;
        let total = &vals_k[w] + &vals_e[w];
        ensure(total == Rational::from_int(-2), || {
            format!("{tag}: K.E + E.E = {total} on {}", x.ray_id(r))
        })?;
    }
    Ok(x.rays().len())
}

fn discrepancy_suite() -> Check {
    let a2 = ToricVariety::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]]).unwrap();
    let a = ok(log_discrepancy(&[1, 1], &a2, &Boundary::zero()), "A2")?;
    ensure(a == Rational::from_int(2), || format!("a(E) = {a} for the blow-up of A2"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let bases = [("P2", p2()), ("P1xP1", p1xp1()), ("F1", f1()), ("F2", hirzebruch(2)), ("F3", hirzebruch(3))];
    let mut curves = 0;
    let mut pairings = 0;
    for (name, x) in &bases {
        curves += adjunction(x, name)?;
    }
    for s in 0..SUBDIVISION_FIXTURES {
        let (name, x) = bases.choose(&mut rng).unwrap();
        let b = random_boundary(x, &mut rng);
        let mut w = x.clone();
        for _ in 0..rng.gen_range(1..=4) {
            let c = w.max_cones().choose(&mut rng).unwrap().clone();
            let v: Vec<i64> = (0..2).map(|i| w.rays()[c[0]][i] + w.rays()[c[1]][i]).collect();
            w = ok(star_subdivide(&w, &v), "subdivision")?;
        }
        let tag = format!("subdivision {s} of {name}");
        ensure(w.is_smooth() && w.is_complete(), || format!("{tag}: not smooth and complete"))?;
        curves += adjunction(&w, &tag)?;

        let kb = &canonical_divisor(x) + b.divisor();
        let pulled = ok(x.pullback_to(&kb, &w), &tag)?;
        let mut b_w = RationalDivisor::zero();
        let mut f = RationalDivisor::zero();
        for (i, v) in w.rays().iter().enumerate() {
            let id = w.ray_id(i);
            let (coeff, a) = pullback_oracle(x, &b, v);
            ensure(pulled.coeff(&id) == coeff, || format!("{tag}: pullback at {id}"))?;
            if x.ray_index(v).is_some() {
                b_w.add_term(id.clone(), &b.coeff(&id));
            } else {
                let core_a = ok(log_discrepancy(v, x, &b), &tag)?;
                ensure(core_a == a, || format!("{tag}: a({id}) = {core_a}, oracle {a}"))?;
                ensure(!a.is_negative(), || format!("{tag}: F negative at {id}"))?;
                b_w.add_term(id.clone(), &Rational::one());
                f.add_term(id, &a);
            }
        }
        let lhs = &canonical_divisor(&w) + &b_w;
        let rhs = &pulled + &f;
        let lv = ok(w.wall_values(&lhs), &tag)?;
        let rv = ok(w.wall_values(&rhs), &tag)?;
        ensure(lv == rv, || format!("{tag}: K_W + B_W and f^*(K + B) + F pair differently"))?;
        ensure(lhs == rhs, || format!("{tag}: crepant formula fails as divisors"))?;
        pairings += lv.len();
    }
    Ok(format!(
        "a(E) = 2 on A2; {SUBDIVISION_FIXTURES} subdivisions, {pairings} curve pairings; adjunction on {curves} curves"
    ))
}

// ---------------------------------------------------------------------------
// 6. monotone boundaries and the pseudo-effective threshold

fn bisection_agrees(x: &ToricVariety, b: &Boundary, tag: &str) -> Result<&'static str, String> {
    let k = canonical_divisor(x);
    let feasible = |t: &Rational| -> Result<bool, String> {
        let d = &k + &b.divisor().scale(t);
        Ok(ok(is_pseudoeffective(&d, x), tag)?.pseudo_effective)
    };
    let got = pseff_threshold(b, x);
    if !feasible(&Rational::one())? {
        return match got {
            Err(Error::NotPseudoEffective(_)) => Ok("infeasible"),
            other => Err(format!("{tag}: K + B not pseudo-effective but threshold gave {other:?}")),
        };
    }
    let lambda = ok(got, tag)?;
    if feasible(&Rational::zero())? {
        ensure(lambda.is_zero(), || format!("{tag}: K pseudo-effective but lambda = {lambda}"))?;
        return Ok("zero");
    }
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    for _ in 0..BISECTION_STEPS {
        let mid = (&lo + &hi) / Rational::from_int(2);
        if feasible(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ensure(lo < lambda && lambda <= hi, || {
        format!("{tag}: lambda {lambda} outside bisection bracket [{lo}, {hi}]")
    })?;
    ensure(feasible(&lambda)?, || format!("{tag}: K + lambda B not pseudo-effective"))?;
    Ok("interior")
}

fn monotone_suite() -> Check {
    for (name, x) in [("P2", p2()), ("P1xP1", p1xp1())] {
        let l = ok(pseff_threshold(&saturated(&x), &x), name)?;
        ensure(l == Rational::one(), || format!("{name}: lambda = {l}"))?;
    }
    let noncomplete = vec![
        ("A2", ToricVariety::new(2, vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]]).unwrap()),
        ("quadric cone", ToricVariety::new(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]).unwrap()),
        (
            "half plane",
            ToricVariety::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, 0]], vec![vec![0, 1], vec![1, 2]]).unwrap(),
        ),
        (
            "punctured plane",
            ToricVariety::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2]]).unwrap(),
        ),
    ];
    let mut all: Vec<(&str, ToricVariety)> = complete_fans();
    all.extend(noncomplete);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut tally = std::collections::BTreeMap::new();
    for t in 0..THRESHOLD_BOUNDARY_FIXTURES {
        let (name, x) = all.choose(&mut rng).unwrap();
        let b = if rng.gen_bool(0.4) { saturated(x) } else { random_boundary(x, &mut rng) };
        let kind = bisection_agrees(x, &b, &format!("threshold {t} on {name}"))?;
        *tally.entry(kind).or_insert(0) += 1;
    }

    let fans = complete_fans();
    let mut count = 0;
    for (name, x) in fans.iter().take(3) {
        // K + B' pseudo-effective forces B' = sum D_rho on a complete fan
        let b = saturated(x);
        let lmm = LmmData::from_pairs(x.clone(), &b, x.clone(), &b);
        let wzd = ok(monotone_boundary_wzd(&lmm, &b, &b), name)?;
        let kb = &canonical_divisor(x) + b.divisor();
        let rep = ok(validate_weak(&kb, &Model::Toric(x.clone()), &wzd), name)?;
        ensure(rep.valid, || format!("{name} kb: {:?}", rep.witnesses))?;
        count += 1;
    }
    while count < MONOTONE_FIXTURES {
        let (name, x) = fans.choose(&mut rng).unwrap();
        let tag = format!("monotone {count} on {name}");
        let d_prime = random_effective(x, &mut rng);
        let pair = Pair::toric(x.clone(), Boundary::zero()).unwrap();
        let target = Target::Divisor(d_prime.clone());
        let trivial = WeakDecomposition::trivial(pair.model.clone(), d_prime.clone()).unwrap();
        let trace = ok(run_wzd_mmp(&pair, &target, &trivial, STEP_LIMIT), &tag)?;
        ensure(trace.outcome == Outcome::MinimalModel, || format!("{tag}: {:?}", trace.outcome))?;
        let last = trace.final_state();
        let lmm = LmmData {
            base: x.clone(),
            base_target: d_prime.clone(),
            model: last.model.as_toric().unwrap().clone(),
            model_target: last.target.clone(),
        };
        let b = random_boundary(x, &mut rng);
        let b_prime = Boundary::new(b.divisor().map_coeffs(|_, c| c * q(rng.gen_range(0..=4), 4))).unwrap();
        let wzd = ok(monotone_boundary_wzd(&lmm, &b_prime, &b), &tag)?;
        let d = &d_prime + &(b.divisor() - b_prime.divisor());
        let rep = ok(validate_weak(&d, &Model::Toric(x.clone()), &wzd), &tag)?;
        ensure(rep.valid, || format!("{tag}: {:?}", rep.witnesses))?;
        let base = ok(wzd_core::decomp::from_lmm_fujita(&lmm), &tag)?;
        ensure(base.n.le(&wzd.n), || format!("{tag}: N decreased"))?;
        count += 1;
    }
    Ok(format!(
        "lambda = 1 on P2 and P1xP1; {THRESHOLD_BOUNDARY_FIXTURES} thresholds agree with bisection {tally:?}; \
         {count} monotone decompositions weak"
    ))
}

// ---------------------------------------------------------------------------
// 7. CLI determinism

fn corpus() -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = [
        &["zariski-surface", "--model", "@f2.json", "--divisor", "@s_plus_f.json"][..],
        &["validate", "--kind", "weak", "--model", "@f1.json", "--divisor", "@f1_d.json", "--p", "@f1_d_p.json", "--n", "@f1_d_n.json"],
        &["validate", "--kind", "weak", "--model", "@f1.json", "--divisor", "@f1_d.json", "--p", "@f1_d_n.json", "--n", "@f1_d_p.json"],
        &["validate", "--kind", "fujita", "--model", "@f1.json", "--divisor", "@f1_d.json", "--p", "@f1_d_p.json", "--n", "@f1_d_n.json", "--seed", "7"],
        &["validate", "--kind", "ckm", "--m-max", "12", "--model", "@f1.json", "--divisor", "@f1_d.json", "--p", "@f1_d.json", "--n", "@zero.json"],
        &["nef-threshold", "--model", "@three_class.json", "--p", "@three_class_p.json", "--n", "@three_class_n.json"],
        &["mmp", "--fan", "@f1.json", "--boundary", "@zero.json", "--mode", "kb"],
        &["mmp", "--model", "@three_class.json", "--boundary", "@three_class_b.json", "--p", "@three_class_p.json", "--n", "@three_class_n.json"],
        &["mmp", "--fan", "@flip3.json", "--mode", "divisor", "--divisor", "@flip3_d.json"],
        &["scaling-mmp", "--fan", "@f1.json", "--ample", "@f1_scaling_h.json"],
        &["scaling-mmp", "--fan", "@p1xp1.json"],
        &["sections", "--model", "@f1.json", "--divisor", "@f1_d.json"],
        &["sbl", "--model", "@f1.json", "--divisor", "@f1_negative_section.json", "--m-max", "12"],
        &["sbl", "--model", "@f1.json", "--divisor", "@f1_half_fibre.json"],
        &["discrepancy", "--model", "@plane_a2.json", "--ray", "1,1", "--ray", "2,1"],
        &["discrepancy", "--model", "@quadric_cone.json"],
        &["theta", "--boundary", "@theta_b.json", "--n", "@theta_n.json"],
        &["alpha-split", "--boundary", "@theta_b.json", "--n", "@theta_n.json"],
        &["pipeline", "--fan", "@f1.json", "--mode", "divisor", "--divisor", "@f1_d.json"],
        &["pipeline", "--fan", "@f1.json", "--mode", "divisor", "--divisor", "@f1_two_component.json", "--p", "@zero.json", "--n", "@f1_two_component.json", "--challengers", "20", "--seed", "3"],
        &["sections", "--model", "/nonexistent.json", "--divisor", "@zero.json"],
    ]
    .iter()
    .map(|a| args(a))
    .collect();
    let text: Vec<Vec<String>> = out
        .iter()
        .take(6)
        .map(|a| {
            let mut a = a.clone();
            a.extend(["--format".to_string(), "text".to_string()]);
            a
        })
        .collect();
    out.extend(text);
    out
}

fn determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("wzd-determinism-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let commands = corpus();
    let mut verbs = std::collections::BTreeSet::new();
    for (c, argv) in commands.iter().enumerate() {
        verbs.insert(argv[0].clone());
        let mut first: Option<(Option<i32>, Vec<u8>, Vec<u8>, Vec<u8>)> = None;
        for run in 0..DETERMINISM_RUNS {
            let path = dir.join(format!("{c}-{run}.out"));
            let mut a = argv.clone();
            a.extend(["--output".to_string(), path.to_string_lossy().into_owned()]);
            let with_file = wzd(&a);
            let file = std::fs::read(&path).unwrap_or_default();
            let plain = wzd(argv);
            ensure(plain.stdout == file || plain.code == Some(2), || {
                format!("{}: --output differs from stdout", argv.join(" "))
            })?;
            let this = (plain.code, plain.stdout, plain.stderr, file);
            ensure(with_file.code == this.0, || format!("{}: exit code differs with --output", argv.join(" ")))?;
            match &first {
                None => first = Some(this),
                Some(f) => ensure(*f == this, || format!("{}: run {run} differs", argv.join(" ")))?,
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(verbs.len() == 11, || format!("corpus covers {} verbs", verbs.len()))?;
    Ok(format!(
        "{} invocations over {} verbs, {DETERMINISM_RUNS} runs each, byte-identical",
        commands.len(),
        verbs.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("surface Zariski suite", surface_zariski_suite),
        ("nef threshold suite", nef_threshold_suite),
        ("toric golden runs", golden_runs),
        ("pipeline closure", pipeline_closure),
        ("discrepancy suite", discrepancy_suite),
        ("monotone boundary construction", monotone_suite),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>().map(String::as_str).or(p.downcast_ref::<&str>().copied()))));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
