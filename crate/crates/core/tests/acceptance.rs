//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every tolerance is fixed here.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use jtlab::completion::complete;
use jtlab::dual::{chi_segment, dual_norm, l2_combination_check, DualOptions};
use jtlab::norm::{norm_bruteforce, norm_dp, projection_pi_s};
use jtlab::probe::{
    chi_initial, flat_segment_witness, CanonicalOracle, FlatVerdict, PerturbedOracle,
};
use jtlab::sample::{
    random_antichain, random_forest, random_functional, random_rational, random_vector,
    random_vector_above, rng, rooted_tree_shapes,
};
use jtlab::scalar::{int, Rational};
use jtlab::sigma_q::{ambient_truncation, parse_support, random_support, reduce_and_norm};
use jtlab::tree::enumerate_segments;
use jtlab::{JtVector, NodeId, RatFunctional, Segment, Tree};

const WIDTH: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Every rooted shape on up to 8 nodes.
fn shapes() -> Vec<Tree> {
    (1..=8).flat_map(rooted_tree_shapes).collect()
}

fn random_small_tree<R: Rng>(r: &mut R) -> Tree {
    let n = r.gen_range(1..=8);
    random_forest(r, n, 0.15)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut mismatches = 0;
    let trials = 500;
    for _ in 0..trials {
        let tree = random_small_tree(&mut r);
        let f = random_vector(&mut r, &tree, 0.8, 9, 6);
        let dp = norm_dp(&tree, &f).expect("dp");
        let brute = norm_bruteforce(&tree, &f).expect("enumeration");
        if dp.norm_sq != brute.norm_sq {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{trials} trees, {mismatches} mismatches, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn l2_sum_law() -> Outcome {
    let mut r = rng(2);
    let mut done = 0;
    let mut failures = 0;
    while done < 200 {
        let n = r.gen_range(3..=10);
        let tree = random_forest(&mut r, n, 0.1);
        let antichain = random_antichain(&mut r, &tree);
        if antichain.len() < 2 {
            continue;
        }
        let parts: Vec<JtVector<Rational>> = antichain
            .iter()
            .map(|&a| random_vector_above(&mut r, &tree, a, 7, 5))
            .collect();
        let sum = parts.iter().fold(JtVector::zero(), |acc, p| &acc + p);
        let separate = parts.iter().fold(int(0), |acc, p| {
            acc + norm_dp(&tree, p).expect("dp").norm_sq
        });
        if norm_dp(&tree, &sum).expect("dp").norm_sq != separate {
            failures += 1;
        }
        done += 1;
    }
    outcome(
        failures == 0,
        format!("{done} instances, {failures} violations"),
    )
}

fn segment_functionals() -> Outcome {
    let opts = DualOptions::default();
    let mut count = 0;
    let mut bad = Vec::new();
    let mut widest: f64 = 0.0;
    for tree in shapes() {
        for seg in enumerate_segments(&tree) {
            let chi = chi_segment(&tree, &seg).expect("segment");
            let b = dual_norm(&tree, &chi, &opts).expect("dual");
            count += 1;
            widest = widest.max(b.width());
            if !(b.contains(1.0, 0.0) && b.width() <= WIDTH) {
                bad.push(format!("{:?} [{}, {}]", tree.parents(), b.lower, b.upper));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{count} segments on all shapes |T| ≤ 8, widest {widest:.2e}, failures {bad:?}"),
    )
}

fn dual_l2_law() -> Outcome {
    let opts = DualOptions::default();
    let seg = |b: usize, t: usize| Segment {
        bottom: NodeId(b),
        top: NodeId(t),
    };
    // V-tree with singleton leaves, and a root with two chains of length 2
    // whose segments start at the branch points.
    let cases = [
        (Tree::star(2), vec![seg(1, 1), seg(2, 2)]),
        (
            Tree::from_parents(&[None, Some(0), Some(1), Some(0), Some(3)]).unwrap(),
            vec![seg(1, 2), seg(3, 4)],
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (tree, segments) in &cases {
        for (weights, target) in [([3, 4], 5.0), ([1, 1], 2f64.sqrt())] {
            let w: Vec<Rational> = weights.iter().map(|&x| int(x)).collect();
            let (_, b) = l2_combination_check(tree, segments, &w, &opts).expect("combination");
            let hit = b.contains(target, WIDTH) && b.width() <= WIDTH;
            ok &= hit;
            lines.push(format!("{weights:?}→[{:.9}, {:.9}]", b.lower, b.upper));
        }
    }
    outcome(ok, lines.join(" "))
}

fn projection_contract() -> Outcome {
    let mut r = rng(5);
    let mut failures = 0;
    let trials = 200;
    for _ in 0..trials {
        let n = r.gen_range(1..=10);
        let tree = random_forest(&mut r, n, 0.1);
        let f = random_vector(&mut r, &tree, 0.8, 9, 5);
        let s = random_antichain(&mut r, &tree);
        let p = projection_pi_s(&tree, &f, &s).expect("projection");
        let pp = projection_pi_s(&tree, &p, &s).expect("projection");
        let shrinks = norm_dp(&tree, &p).unwrap().norm_sq <= norm_dp(&tree, &f).unwrap().norm_sq;
        if !shrinks || pp != p {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{trials} instances, {failures} violations"),
    )
}

fn flat_segments() -> Outcome {
    let canonical = CanonicalOracle::default();
    let perturbed: Vec<PerturbedOracle> = [0.1, 0.01]
        .iter()
        .map(|&e| PerturbedOracle::new(e, DualOptions::default()).unwrap())
        .collect();
    let (mut nodes, mut not_flat, mut not_inconclusive) = (0, 0, 0);
    for tree in shapes() {
        for t in tree.nodes().filter(|&t| tree.children(t).len() >= 2) {
            nodes += 1;
            let r = flat_segment_witness(&tree, t, &canonical, WIDTH).unwrap();
            if r.verdict != FlatVerdict::Flat {
                not_flat += 1;
            }
            for o in &perturbed {
                let r = flat_segment_witness(&tree, t, o, WIDTH).unwrap();
                if r.verdict != FlatVerdict::Inconclusive {
                    not_inconclusive += 1;
                }
            }
        }
    }
    outcome(
        nodes > 0 && not_flat == 0 && not_inconclusive == 0,
        format!(
            "{nodes} branching nodes, {not_flat} not FLAT (canonical), \
             {not_inconclusive} not INCONCLUSIVE (ε = 0.1, 0.01)"
        ),
    )
}

fn kadec_distances() -> Outcome {
    let opts = DualOptions::default();
    let (mut checked, mut bad) = (0, 0);
    for tree in shapes() {
        for t in tree.nodes() {
            let base = chi_initial(&tree, t).unwrap();
            for &s in tree.children(t) {
                let diff = &chi_initial(&tree, s).unwrap() - &base;
                let b = dual_norm(&tree, &diff, &opts).unwrap();
                checked += 1;
                if !(b.lower >= 1.0 - WIDTH && b.upper <= 1.0 + WIDTH) {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{checked} successor pairs, {bad} outside [1−1e-6, 1+1e-6]"),
    )
}

fn operator_f() -> Outcome {
    let mut r = rng(8);
    let opts = DualOptions::default();
    let (mut norm_bad, mut injective_bad) = (0, 0);
    let trials = 200;
    for i in 0..trials {
        let n = r.gen_range(1..=9);
        let tree = random_forest(&mut r, n, 0.1);
        let c = complete(&tree);
        let x: RatFunctional = if i % 20 == 0 {
            RatFunctional::zero()
        } else {
            random_functional(&mut r, &tree, 0.7, 6, 4)
        };
        let img = c.operator_f(&x).unwrap();
        let b = dual_norm(&tree, &x, &opts).unwrap();
        if img.sup > b.upper_exact {
            norm_bad += 1;
        }
        let vanishes = img.values.iter().all(|v| *v == int(0));
        if vanishes != x.is_zero() || img.recover(&c) != x {
            injective_bad += 1;
        }
    }
    outcome(
        norm_bad == 0 && injective_bad == 0,
        format!(
            "{trials} functionals, {norm_bad} sup > upper, {injective_bad} injectivity failures"
        ),
    )
}

fn sigma_q_reduction() -> Outcome {
    let mut r = rng(9);
    let mut bad = 0;
    let trials = 100;
    for _ in 0..trials {
        let size = r.gen_range(1..=6);
        let support = random_support(&mut r, size, 4);
        let reduced = reduce_and_norm(&support).unwrap().certificate.norm_sq;
        let ambient = ambient_truncation(&support);
        let direct = if ambient.tree.len() <= 10 {
            norm_bruteforce(&ambient.tree, &ambient.values)
                .unwrap()
                .norm_sq
        } else {
            norm_dp(&ambient.tree, &ambient.values).unwrap().norm_sq
        };
        if reduced != direct {
            bad += 1;
        }
    }
    let worked = parse_support("1/2 1\n1/2,2/3 1\n1/2,3/4 1\n").unwrap();
    let five = reduce_and_norm(&worked).unwrap().certificate.norm_sq;
    outcome(
        bad == 0 && five == int(5),
        format!("{trials} supports, {bad} disagreements; worked example normSq {five}"),
    )
}

fn scale() -> Outcome {
    let mut r = rng(10);
    let big = random_forest(&mut r, 500, 0.0);
    let f = JtVector::from_pairs(big.nodes().map(|t| {
        let mut v = random_rational(&mut r, 50, 12);
        if v == int(0) {
            v = int(1);
        }
        (t, v)
    }));
    let start = Instant::now();
    norm_dp(&big, &f).unwrap();
    let dp_time = start.elapsed();

    let opts = DualOptions {
        tol: 1e-4,
        ..DualOptions::default()
    };
    let trials = 30;
    let (mut met, mut unsound) = (0, 0);
    let start = Instant::now();
    for _ in 0..trials {
        let tree = random_forest(&mut r, 40, 0.02);
        let c = random_functional(&mut r, &tree, 0.6, 9, 4);
        let b = dual_norm(&tree, &c, &opts).unwrap();
        if b.verify(&tree, &c).is_err() {
            unsound += 1;
        }
        if b.tolerance_met && b.width() <= 1e-4 {
            met += 1;
        }
    }
    let dual_time = start.elapsed();
    let rate = met as f64 / trials as f64;
    outcome(
        dp_time < Duration::from_secs(1) && rate >= 0.9 && unsound == 0,
        format!(
            "500-node DP {:.3}s; 40-node dual: {met}/{trials} reach 1e-4 ({:.2}s total), {unsound} unsound",
            dp_time.as_secs_f64(),
            dual_time.as_secs_f64()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("l2-sum law", l2_sum_law),
        ("segment functionals", segment_functionals),
        ("dual l2 law", dual_l2_law),
        ("projection contract", projection_contract),
        ("flat-segment witness", flat_segments),
        ("kadec pattern", kadec_distances),
        ("operator F", operator_f),
        ("sigma'Q reduction", sigma_q_reduction),
        ("scale", scale),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} ({:.2}s)",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
