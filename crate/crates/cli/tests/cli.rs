use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jtlab::dual::{dual_norm, DualBracket, DualOptions};
use jtlab::sample::{random_forest, random_functional, rng};
use jtlab::tree::write_tree_text;

fn write(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("jtlab-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn jtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtlab"))
        .args(args)
        .env_remove("JTLAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const CHAIN2: &str = "0 -\n1 0\n";
const VTREE: &str = "0 -\n1 0\n2 0\n";

#[test]
fn norm_prints_certificate() {
    let tree = write("chain2.txt", CHAIN2);
    let ones = write("ones.txt", "0 1\n1 1\n");
    let o = jtlab(&["norm", p(&tree), p(&ones)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.starts_with("normSq 4\nnorm 2\nfamily [[0,1]]\n"),
        "{out}"
    );

    let empty = write("empty.txt", "");
    let o = jtlab(&["norm", p(&tree), p(&empty)]);
    assert!(stdout(&o).starts_with("normSq 0\n"));

    let o = jtlab(&["norm", p(&tree), p(&ones), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["normSq"], "4/1");
    assert_eq!(v["crossChecked"], true);
}

#[test]
fn malformed_input_exits_2() {
    let bad = write("bad-tree.txt", "0 x\n");
    let ones = write("ones2.txt", "0 1\n");
    assert_eq!(jtlab(&["norm", p(&bad), p(&ones)]).status.code(), Some(2));
    let tree = write("chain2b.txt", CHAIN2);
    let out_of_range = write("oor.txt", "5 1\n");
    assert_eq!(
        jtlab(&["norm", p(&tree), p(&out_of_range)]).status.code(),
        Some(2)
    );
    assert_eq!(
        jtlab(&["norm", "/nonexistent/tree", p(&ones)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        jtlab(&["dualnorm", p(&tree), p(&ones), "--tol", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn dualnorm_brackets_segment_functional() {
    let tree = write("v-dual.txt", VTREE);
    let chi = write("chi.txt", "0 1\n1 1\n");
    let o = jtlab(&["dualnorm", p(&tree), p(&chi), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let b: DualBracket = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(b.contains(1.0, 0.0) && b.width() <= 1e-6);
    let t = jtlab::tree::parse_tree_text(VTREE).unwrap();
    let c = jtlab::RatVector::parse_text("0 1\n1 1\n")
        .unwrap()
        .as_functional();
    b.verify(&t, &c).unwrap();

    let zero = write("zero.txt", "");
    let o = jtlab(&["dualnorm", p(&tree), p(&zero)]);
    assert!(stdout(&o).starts_with("bracket [0, 0]\n"));
}

#[test]
fn tiny_budget_exits_4_with_sound_bracket() {
    let (tree, c) = (0..200)
        .find_map(|seed| {
            let mut r = rng(seed);
            let tree = random_forest(&mut r, 20, 0.0);
            let c = random_functional(&mut r, &tree, 0.7, 9, 4);
            let opts = DualOptions {
                tol: 1e-6,
                max_iter: 1,
            };
            let b = dual_norm(&tree, &c, &opts).unwrap();
            (!b.tolerance_met).then_some((tree, c))
        })
        .expect("some instance needs more than one solve");
    let tree_path = write("hard-tree.txt", &write_tree_text(&tree));
    let c_path = write("hard-c.txt", &c.to_text());
    let o = jtlab(&[
        "dualnorm",
        p(&tree_path),
        p(&c_path),
        "--budget",
        "1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let b: DualBracket = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!b.tolerance_met);
    b.verify(&tree, &c).unwrap();
}

#[test]
fn probes() {
    let v = write("v-probe.txt", VTREE);
    let o = jtlab(&["probe", p(&v), "--node", "0", "--kind", "flat"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("verdict FLAT\n"));

    let o = jtlab(&[
        "probe",
        p(&v),
        "--node",
        "0",
        "--kind",
        "flat",
        "--oracle",
        "perturbed:0.1",
        "--format",
        "json",
    ]);
    let j: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["verdict"], "INCONCLUSIVE");

    let star = write("star3.txt", "0 -\n1 0\n2 0\n3 0\n");
    let o = jtlab(&["probe", p(&star), "--node", "0", "--kind", "kadec"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("pattern certified\n"));

    let o = jtlab(&["probe", p(&v), "--kind", "rho"]);
    assert!(stdout(&o).starts_with("rho [1, 1"));

    assert_eq!(
        jtlab(&["probe", p(&v), "--node", "1", "--kind", "flat"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        jtlab(&["probe", p(&v), "--node", "9", "--kind", "flat"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        jtlab(&["probe", p(&v), "--node", "0", "--kind", "bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        jtlab(&[
            "probe",
            p(&v),
            "--node",
            "0",
            "--kind",
            "flat",
            "--oracle",
            "fancy"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn analyze_and_complete() {
    let chain3 = write("chain3.txt", "0 -\n1 0\n2 1\n");
    let out = stdout(&jtlab(&["analyze", p(&chain3)]));
    assert!(out.contains("height 3\nantichains 3\n"), "{out}");
    let star = write("star4.txt", "0 -\n1 0\n2 0\n3 0\n4 0\n");
    let out = stdout(&jtlab(&["analyze", p(&star)]));
    assert!(out.contains("height 2\nantichains 2\n"));
    let v = write("v-analyze.txt", VTREE);
    let out = stdout(&jtlab(&["analyze", p(&v)]));
    assert!(out.contains("segments 5\ncompletionSize 4\n"));

    let out = stdout(&jtlab(&["complete", p(&v)]));
    assert_eq!(
        out,
        "#completed base_nodes=3\n#empty 0\n0 -\n1 0\n2 1\n3 1\n"
    );
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&jtlab(&["complete", p(&v), "--format", "json"]))).unwrap();
    assert_eq!(j["segments"][0], "empty");
}

#[test]
fn sigmaq_support_and_descent() {
    let sup = write("sup.txt", "1/2 1\n1/2,2/3 1\n1/2,3/4 1\n");
    let o = jtlab(&["sigmaq", "--support", p(&sup)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("normSq 5\n"));
    let empty = write("empty-sup.txt", "");
    assert!(stdout(&jtlab(&["sigmaq", "--support", p(&empty)])).starts_with("normSq 0\n"));

    let out = stdout(&jtlab(&[
        "sigmaq",
        "--descent",
        "--depth",
        "4",
        "--labeling",
        "length",
    ]));
    assert!(out.starts_with("labels 1,2,3,4\n"), "{out}");
    assert_eq!(
        jtlab(&["sigmaq", "--descent", "--lo", "1", "--hi", "1"])
            .status
            .code(),
        Some(2)
    );
    let bad = write("bad-sup.txt", "1/2,1/3 1\n");
    assert_eq!(
        jtlab(&["sigmaq", "--support", p(&bad)]).status.code(),
        Some(2)
    );
}

#[test]
fn output_is_deterministic_and_seed_env_wins() {
    let v = write("v-det.txt", VTREE);
    let args = [
        "probe",
        p(&v),
        "--node",
        "0",
        "--kind",
        "flat",
        "--format",
        "json",
        "--seed",
        "3",
    ];
    let a = jtlab(&args);
    let b = jtlab(&args);
    assert_eq!(a.stdout, b.stdout);
    let with_env = Command::new(env!("CARGO_BIN_EXE_jtlab"))
        .args(args)
        .env("JTLAB_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(2));
}
