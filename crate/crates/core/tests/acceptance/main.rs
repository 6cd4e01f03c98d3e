//! Acceptance gate. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

mod random;

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use suborbifold::corpus::{corpus_cases, run_corpus};
use suborbifold::group::{generating_set, GroupHom, GroupTable};
use suborbifold::linalg::{int, solve_affine, AffineSet, AffineSubspace, RatMatrix, Rational};
use suborbifold::maps::{
    fibered_product, graph_suborbifold, intersect_full, preimage_suborbifold, EquivariantAffineMap,
};
use suborbifold::metric::lemma_metrics_check;
use suborbifold::scene::{Report, RunOptions, Scene, SceneOptions};
use suborbifold::suborbifold::{
    check_embedded, check_full, check_saturated, isotropy_sub_point, isotropy_sub_point_via_chart, verify_splitting,
    ChartModel, EmbeddedVerdict, SaturationVerdict, SuborbifoldCandidate,
};

use random::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn facts(report: &Report, scene: &str, index: usize) -> BTreeMap<String, String> {
    report
        .queries
        .iter()
        .find(|q| q.scene == scene && q.index == index)
        .map(|q| q.result.facts())
        .unwrap_or_default()
}

fn expect_facts(report: &Report, scene: &str, index: usize, expected: &[(&str, &str)]) -> Result<(), String> {
    let f = facts(report, scene, index);
    for (k, v) in expected {
        ensure(f.get(*k).map(String::as_str) == Some(*v), || {
            format!("{scene}#{index}: {k} = {:?}, wanted {v}", f.get(*k))
        })?;
    }
    Ok(())
}

fn criterion_corpus() -> Outcome {
    let start = Instant::now();
    let report = run_corpus(None, &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let t = [("saturated", "true"), ("embedded", "true")];
    expect_facts(
        &report,
        "quarter-turn-line",
        0,
        &[
            t[0],
            t[1],
            ("full", "false"),
            ("full.kind", "fixed-point"),
            ("full.element", "[[0,-1],[1,0]]"),
            ("full.point", "[0,0]"),
        ],
    )?;
    for i in 0..6 {
        expect_facts(&report, "points", i, &[("dim", "0"), ("full", "true"), t[1]])?;
    }
    let charts: std::collections::BTreeSet<String> = corpus_cases()
        .into_iter()
        .filter(|c| c.name == "points")
        .flat_map(|c| c.scene.candidates.into_values().map(|cand| cand.group))
        .collect();
    ensure(charts.len() >= 3, || "point candidates cover fewer than 3 charts".into())?;
    for i in 0..4 {
        expect_facts(&report, "whole-space", i, &[("full", "true"), t[1]])?;
    }
    for i in 0..2 {
        expect_facts(&report, "diagonal", i, &t)?;
    }
    expect_facts(&report, "klein-diagonal", 0, &[t[0], ("full", "false")])?;
    expect_facts(
        &report,
        "klein-diagonal",
        1,
        &[("sub_isotropy", "Z2"), ("omega_isotropy", "Z2 x Z2"), ("obstruction", "true")],
    )?;
    expect_facts(
        &report,
        "realified-z4",
        0,
        &[
            ("full", "true"),
            ("embedded", "false"),
            ("embedded.mode", "not-embedded"),
            ("embedded.subgroups_searched", "3"),
        ],
    )?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{} queries, {:.2?}", report.queries.len(), elapsed))
}

/// `Γ` generated by random sign flips, conjugated by `p`, with `Γ`-invariant
/// subspaces `p·{x_i = c_i for i ∈ s}`.
struct SignChart {
    chart: ChartModel,
    flipped: Vec<bool>,
    p: RatMatrix,
}

fn sign_chart(rng: &mut ChaCha8Rng, n: usize) -> SignChart {
    let gens: Vec<Vec<i64>> = (0..rng.gen_range(0..=2))
        .map(|_| (0..n).map(|_| if rng.gen_bool(0.4) { -1 } else { 1 }).collect())
        .collect();
    let flipped = (0..n).map(|i| gens.iter().any(|g| g[i] == -1)).collect();
    let p = random_invertible(rng, n);
    let inv = p.inverse().unwrap();
    let mats: Vec<RatMatrix> = gens
        .iter()
        .map(|g| {
            let d = RatMatrix::diagonal(&g.iter().map(|&s| int(s)).collect::<Vec<_>>());
            &(&p * &d) * &inv
        })
        .collect();
    let group = suborbifold::group::generate_group(n, &mats, 64).unwrap();
    SignChart {
        chart: ChartModel::new(group),
        flipped,
        p,
    }
}

fn sign_subspace(rng: &mut ChaCha8Rng, sc: &SignChart, fixed: &[usize]) -> AffineSubspace {
    let n = sc.flipped.len();
    let mut base = vec![Rational::default(); n];
    let mut dirs = Vec::new();
    for i in 0..n {
        if fixed.contains(&i) {
            if !sc.flipped[i] {
                base[i] = int(rng.gen_range(-3..=3));
            }
        } else {
            let mut e = vec![Rational::default(); n];
            e[i] = int(1);
            dirs.push(e);
        }
    }
    AffineSubspace::new(base, &dirs).unwrap().image(&sc.p, &vec![Rational::default(); n]).unwrap()
}

fn criterion_dimensions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut intersections = 0;
    while intersections < 12 {
        let n = rng.gen_range(2..=4);
        let sc = sign_chart(&mut rng, n);
        let mut coords: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(coords.as_mut_slice(), &mut rng);
        let cut = rng.gen_range(0..=n);
        let split = rng.gen_range(0..=cut);
        let (s1, s2) = (coords[..split].to_vec(), coords[split..cut].to_vec());
        let a = SuborbifoldCandidate::with_whole_group(sc.chart.clone(), sign_subspace(&mut rng, &sc, &s1))
            .map_err(|e| e.to_string())?;
        let b = SuborbifoldCandidate::with_whole_group(sc.chart.clone(), sign_subspace(&mut rng, &sc, &s2))
            .map_err(|e| e.to_string())?;
        let c = intersect_full(&a, &b).map_err(|e| format!("intersect: {e}"))?;
        ensure(c.dim() == a.dim() + b.dim() - n, || {
            format!("intersection dim {} vs {}+{}-{}", c.dim(), a.dim(), b.dim(), n)
        })?;
        intersections += 1;
    }

    let mut preimages = 0;
    let mut attempts = 0;
    while preimages < 12 {
        attempts += 1;
        ensure(attempts < 1000, || "too few transverse preimage cases".into())?;
        let n1 = rng.gen_range(1..=4);
        let n2 = rng.gen_range(1..=3);
        let k = rng.gen_range(0..=n2);
        let antipodal = rng.gen_bool(0.5);
        let a = random_int_matrix(&mut rng, n2, n1, 2);
        let q_dirs: Vec<Vec<Rational>> = (0..k).map(|_| random_vector(&mut rng, n2, 2)).collect();
        let (f, q) = if antipodal {
            let minus = |n: usize| RatMatrix::diagonal(&vec![int(-1); n]);
            let g1 = ChartModel::new(suborbifold::group::generate_group(n1, &[minus(n1)], 2).unwrap());
            let g2 = ChartModel::new(suborbifold::group::generate_group(n2, &[minus(n2)], 2).unwrap());
            let pair = (g1.group().index_of(&minus(n1)).unwrap(), g2.group().index_of(&minus(n2)).unwrap());
            let f = EquivariantAffineMap::from_generator_images(
                g1,
                g2.clone(),
                a,
                vec![Rational::default(); n2],
                &[pair],
            )
            .map_err(|e| e.to_string())?;
            let v = AffineSubspace::span(n2, &q_dirs).unwrap();
            (f, SuborbifoldCandidate::with_whole_group(g2, v).map_err(|e| e.to_string())?)
        } else {
            let g1 = ChartModel::manifold(n1);
            let g2 = ChartModel::manifold(n2);
            let b = random_vector(&mut rng, n2, 3);
            let f = EquivariantAffineMap::with_trivial_theta(g1, g2.clone(), a, b).map_err(|e| e.to_string())?;
            let v = AffineSubspace::new(random_vector(&mut rng, n2, 3), &q_dirs).unwrap();
            (f, SuborbifoldCandidate::with_whole_group(g2, v).map_err(|e| e.to_string())?)
        };
        let spans = {
            let mut cols: Vec<Vec<Rational>> = (0..n1).map(|j| f.linear().column(j)).collect();
            cols.extend(q.v().basis().iter().cloned());
            AffineSubspace::span(n2, &cols).unwrap().dim() == n2
        };
        if !spans {
            continue;
        }
        let p = preimage_suborbifold(&f, &q).map_err(|e| format!("preimage: {e}"))?;
        ensure(p.dim() == n1 - (n2 - q.dim()), || {
            format!("preimage dim {} vs {}-({}-{})", p.dim(), n1, n2, q.dim())
        })?;
        preimages += 1;
    }

    let mut fibered = 0;
    while fibered < 6 {
        let m = rng.gen_range(1..=2);
        let n1 = rng.gen_range(m..=3);
        let n2 = rng.gen_range(m..=3);
        let a1 = random_int_matrix(&mut rng, m, n1, 2);
        let a2 = random_int_matrix(&mut rng, m, n2, 2);
        if a1.rank() < m || a2.rank() < m {
            continue;
        }
        let target = ChartModel::manifold(m);
        let f1 = EquivariantAffineMap::with_trivial_theta(
            ChartModel::manifold(n1),
            target.clone(),
            a1,
            random_vector(&mut rng, m, 2),
        )
        .map_err(|e| e.to_string())?;
        let f2 = EquivariantAffineMap::with_trivial_theta(
            ChartModel::manifold(n2),
            target,
            a2,
            random_vector(&mut rng, m, 2),
        )
        .map_err(|e| e.to_string())?;
        let fp = fibered_product(&f1, &f2).map_err(|e| format!("fibered product: {e}"))?;
        ensure(fp.candidate.dim() == n1 + n2 - m, || {
            format!("fibered dim {} vs {}+{}-{}", fp.candidate.dim(), n1, n2, m)
        })?;
        fibered += 1;
    }
    Ok(format!("{intersections} intersections, {preimages} preimages, {fibered} fibered products"))
}

/// Brute-force saturation oracle: a sampled point `x` with `gx ∈ Ṽ` but no
/// `h ∈ Δ` agreeing with `g` at `x`.
fn oracle_refutation(cand: &SuborbifoldCandidate) -> Option<(usize, Vec<Rational>)> {
    let g = cand.group();
    for x in sample_points(cand.v()) {
        for e in 0..g.order() {
            let gx = g.act(e, &x);
            if cand.v().contains_point(&gx) && cand.delta().members().iter().all(|&h| g.act(h, &x) != gx) {
                return Some((e, x));
            }
        }
    }
    None
}

fn random_pool(count: usize) -> Vec<SuborbifoldCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..count).map(|_| random_candidate(&mut rng)).collect()
}

fn criterion_oracle(pool: &[SuborbifoldCandidate]) -> Outcome {
    let start = Instant::now();
    let (mut positive, mut negative, mut oracle_found) = (0, 0, 0);
    for (i, cand) in pool.iter().enumerate() {
        ensure(cand.group().order() <= MAX_GROUP_ORDER && cand.group().dim() <= 4, || "pool out of range".into())?;
        match check_saturated(cand) {
            SaturationVerdict::Saturated => {
                positive += 1;
                if let Some((e, x)) = oracle_refutation(cand) {
                    return Err(format!("candidate {i}: saturated, but element {e} refutes at {x:?}"));
                }
            }
            SaturationVerdict::NotSaturated(w) => {
                negative += 1;
                ensure(w.replays(cand), || format!("candidate {i}: witness does not replay"))?;
                // independent replay
                let g = cand.group();
                let gx = g.act(w.element, &w.point);
                ensure(
                    cand.v().contains_point(&w.point)
                        && cand.v().contains_point(&gx)
                        && cand.delta().members().iter().all(|&h| g.act(h, &w.point) != gx),
                    || format!("candidate {i}: witness fails independent replay"),
                )?;
                if oracle_refutation(cand).is_some() {
                    oracle_found += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    ensure(positive > 0 && negative > 0, || format!("degenerate pool: {positive} saturated, {negative} not"))?;
    Ok(format!(
        "{} candidates ({positive} saturated, {negative} not; oracle also refuted {oracle_found}), {elapsed:.2?}",
        pool.len()
    ))
}

fn corpus_candidates() -> Vec<(String, SuborbifoldCandidate)> {
    corpus_cases()
        .into_iter()
        .flat_map(|case| {
            let scene = Scene::resolve(case.scene, &SceneOptions::default()).expect("corpus resolves");
            scene
                .candidates
                .into_iter()
                .map(move |(name, c)| (format!("{}/{}", case.name, name), c))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn criterion_isotropy(pool: &[SuborbifoldCandidate]) -> Outcome {
    let mut corpus_checked = 0;
    for (name, cand) in corpus_candidates() {
        if !check_saturated(&cand).holds() {
            continue;
        }
        for x in sample_points(cand.v()).into_iter().take(6) {
            let a = isotropy_sub_point(&cand, &x).map_err(|e| format!("{name}: {e}"))?;
            let b = isotropy_sub_point_via_chart(&cand, &x).map_err(|e| format!("{name}: {e}"))?;
            ensure(a == b, || format!("{name} at {x:?}: {a} vs {b}"))?;
        }
        corpus_checked += 1;
    }
    let mut random_checked = 0;
    for (i, cand) in pool.iter().enumerate() {
        if !check_saturated(cand).holds() {
            continue;
        }
        let mut points = vec![cand.v().base_point().to_vec()];
        points.extend(sample_points(cand.v()).into_iter().step_by(7).take(3));
        for x in points {
            let a = isotropy_sub_point(cand, &x).map_err(|e| format!("random {i}: {e}"))?;
            let b = isotropy_sub_point_via_chart(cand, &x).map_err(|e| format!("random {i}: {e}"))?;
            ensure(a == b, || format!("random {i} at {x:?}: {a} vs {b}"))?;
        }
        random_checked += 1;
    }
    ensure(corpus_checked > 0 && random_checked >= 50, || {
        format!("only {corpus_checked} corpus and {random_checked} random candidates")
    })?;
    Ok(format!("{corpus_checked} corpus and {random_checked} random candidates agree"))
}

fn criterion_splitting(pool: &[SuborbifoldCandidate]) -> Outcome {
    let mut verified = 0;
    let all: Vec<(String, SuborbifoldCandidate)> = corpus_candidates()
        .into_iter()
        .chain(pool.iter().enumerate().map(|(i, c)| (format!("random {i}"), c.clone())))
        .collect();
    for (name, cand) in &all {
        if !check_saturated(cand).holds() {
            continue;
        }
        let check = check_embedded(cand, false).map_err(|e| format!("{name}: {e}"))?;
        let EmbeddedVerdict::Split { complement } = &check.verdict else {
            continue;
        };
        let report = verify_splitting(cand, &check.kernel, complement).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.holds(), || format!("{name}: {report:?}"))?;
        // independent: |Δ′|·|K| = |Δ|, Δ′ ∩ K = {e}, Δ′ acts effectively on Ṽ
        let g = cand.group();
        ensure(complement.order() * check.kernel.order() == cand.delta().order(), || {
            format!("{name}: orders do not multiply")
        })?;
        ensure(complement.intersection(&check.kernel).is_trivial(), || format!("{name}: complement meets K"))?;
        let points = sample_points(cand.v());
        for &h in complement.members() {
            if h != g.identity() {
                ensure(points.iter().any(|x| g.act(h, x) != *x), || {
                    format!("{name}: complement element {h} fixes Ṽ")
                })?;
            }
        }
        let restricted = cand.with_delta(complement.clone()).map_err(|e| format!("{name}: {e}"))?;
        ensure(oracle_refutation(&restricted).is_none(), || format!("{name}: Ṽ not a Δ′-submanifold"))?;
        verified += 1;
    }
    Ok(format!("{verified} splittings verified"))
}

fn criterion_metric() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for case in corpus_cases() {
        let scene = Scene::resolve(case.scene, &SceneOptions::default()).map_err(|e| e.to_string())?;
        for (name, spec) in &scene.probes {
            let probe = spec.build(Some(8), Some(1e-9)).map_err(|e| e.to_string())?;
            let report = lemma_metrics_check(&probe).map_err(|e| format!("{name}: {e}"))?;
            ensure(report.passed() && report.max_deviation <= 1e-9, || {
                format!("{name}: max deviation {}", report.max_deviation)
            })?;
            checked += report.pairs.len();
        }
    }
    let elapsed = start.elapsed();
    ensure(checked >= 10, || "corpus has too few probe pairs".into())?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} pairs within 1e-9 at depth 8, {elapsed:.2?}"))
}

/// Full iff no `g ≠ e` has `(g − I)(Ax + b) = 0` solvable.
fn image_avoids_fixed_points(f: &EquivariantAffineMap) -> bool {
    let g = f.codomain().group();
    let n = g.dim();
    (0..g.order()).filter(|&e| e != g.identity()).all(|e| {
        let shifted = g.matrix(e).sub(&RatMatrix::identity(n)).unwrap();
        let lhs = &shifted * f.linear();
        let rhs: Vec<Rational> = shifted.apply(f.offset()).into_iter().map(|v| -v).collect();
        matches!(solve_affine(&lhs, &rhs).unwrap(), AffineSet::Empty)
    })
}

fn random_hom(rng: &mut ChaCha8Rng, g1: &ChartModel, g2: &ChartModel) -> GroupHom {
    let (a, b) = (g1.group(), g2.group());
    if rng.gen_bool(0.2) {
        return GroupHom::trivial(a, b);
    }
    let gens = generating_set(a);
    for _ in 0..20 {
        let images: Vec<(usize, usize)> = gens.iter().map(|&x| (x, rng.gen_range(0..b.order()))).collect();
        if let Ok(h) = GroupHom::from_generator_images(a, b, &images) {
            return h;
        }
    }
    GroupHom::trivial(a, b)
}

fn criterion_graph() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut full, mut not_full) = (0, 0);
    for i in 0..30 {
        let n1 = rng.gen_range(1..=3);
        let n2 = rng.gen_range(1..=3);
        let g1 = ChartModel::new(random_group(&mut rng, n1));
        let g2 = if n1 == n2 && rng.gen_bool(0.3) {
            g1.clone()
        } else {
            ChartModel::new(random_group(&mut rng, n2))
        };
        let theta = if g1 == g2 && rng.gen_bool(0.5) {
            GroupHom {
                image_of: (0..g1.group().order()).collect(),
            }
        } else {
            random_hom(&mut rng, &g1, &g2)
        };
        let b = random_int_matrix(&mut rng, n2, n1, 2);
        let linear = intertwiner(g1.group(), g2.group(), &theta.image_of, &b);
        let offset = fixed_offset(g2.group(), &theta.image_of, &random_vector(&mut rng, n2, 3));
        let f = EquivariantAffineMap::new(g1, g2, linear, offset, theta).map_err(|e| format!("map {i}: {e}"))?;
        let graph = graph_suborbifold(&f).map_err(|e| format!("map {i}: {e}"))?;
        ensure(check_saturated(&graph.candidate).holds(), || format!("map {i}: graph not saturated"))?;
        ensure(
            check_embedded(&graph.candidate, false).map_err(|e| e.to_string())?.holds(),
            || format!("map {i}: graph not embedded"),
        )?;
        let expected = image_avoids_fixed_points(&f);
        ensure(graph.full == expected, || format!("map {i}: full = {}, oracle {expected}", graph.full))?;
        ensure(check_full(&graph.candidate).map_err(|e| e.to_string())?.holds() == expected, || {
            format!("map {i}: check_full disagrees")
        })?;
        if expected {
            full += 1;
        } else {
            not_full += 1;
        }
    }
    ensure(full > 0 && not_full > 0, || format!("degenerate sample: {full} full, {not_full} not"))?;
    Ok(format!("30 maps ({full} full, {not_full} not full)"))
}

fn strip_timing(text: &str) -> String {
    let mut value: serde_json::Value = serde_json::from_str(text).expect("machine report is JSON");
    value.as_object_mut().expect("report is an object").remove("timing");
    serde_json::to_string_pretty(&value).unwrap()
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_suborb"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn criterion_determinism() -> Outcome {
    let a = run_cli(&["corpus", "--format", "machine"])?;
    let b = run_cli(&["corpus", "--format", "machine"])?;
    let c = run_cli(&["corpus", "--format", "machine", "--parallel"])?;
    let body = |s: &str| s.split("\"timing\"").next().unwrap_or_default().to_string();
    ensure(body(&a) == body(&b), || "two runs differ".into())?;
    ensure(body(&a) == body(&c), || "parallel run differs".into())?;
    ensure(strip_timing(&a) == strip_timing(&b), || "reports differ outside timing".into())?;
    Ok(format!("{} bytes identical modulo timing", body(&a).len()))
}

fn main() -> ExitCode {
    let pool = random_pool(240);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 corpus verdicts", Box::new(criterion_corpus)),
        ("2 dimension formulas", Box::new(criterion_dimensions)),
        ("3 saturation oracle", Box::new(|| criterion_oracle(&pool))),
        ("4 two-path isotropy", Box::new(|| criterion_isotropy(&pool))),
        ("5 splitting soundness", Box::new(|| criterion_splitting(&pool))),
        ("6 metric coincidence", Box::new(criterion_metric)),
        ("7 graph dichotomy", Box::new(criterion_graph)),
        ("8 determinism", Box::new(criterion_determinism)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
