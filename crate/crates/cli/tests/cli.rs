use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use greduce::{
    local_index, pagerank, parse_edge_list, reduce, top_followers, top_friends, GoogleOperator,
    LabelTable, PowerConfig, ReduceConfig, SubsetSelection,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn greduce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greduce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn countries(cmd: &str, out: &Path, extra: &[&str]) -> Output {
    let conf = fixtures().join("countries40/greduce.conf");
    let mut args = vec![
        cmd,
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    greduce(&args)
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn matrix(path: &Path) -> Vec<Vec<f64>> {
    records(path)
        .1
        .into_iter()
        .map(|r| r.iter().map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn two_cycle_ranks_evenly() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    fs::write(&edges, "0 1\n1 0\n").unwrap();
    let out = dir.path().join("out");
    ok(&greduce(&[
        "rank",
        "--edges",
        edges.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    for name in ["pagerank.csv", "cheirank.csv"] {
        let (header, rows) = records(&out.join(name));
        assert_eq!(header, ["node_id", "label", "probability", "global_rank"]);
        for row in rows {
            assert_eq!(row[2].parse::<f64>().unwrap(), 0.5);
        }
    }
    assert!(!out.join("local_indices.csv").exists());
}

#[test]
fn rank_local_indices_are_permutations() {
    let dir = tempfile::tempdir().unwrap();
    ok(&countries("rank", dir.path(), &[]));
    let (header, rows) = records(&dir.path().join("local_indices.csv"));
    assert_eq!(header, ["node_id", "label", "K", "K_star"]);
    let mut k: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let mut ks: Vec<usize> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    let top_k = rows.iter().find(|r| r[2] == "1").unwrap()[1].clone();
    let top_ks = rows.iter().find(|r| r[3] == "1").unwrap()[1].clone();
    assert_ne!(top_k, top_ks);
    k.sort_unstable();
    ks.sort_unstable();
    assert_eq!(k, (1..=40).collect::<Vec<_>>());
    assert_eq!(ks, (1..=40).collect::<Vec<_>>());

    let (_, front) = records(&dir.path().join("nondominated.csv"));
    assert_eq!(front[0][1], top_k);
    assert_eq!(front.last().unwrap()[1], top_ks);

    let again = tempfile::tempdir().unwrap();
    ok(&countries("rank", again.path(), &[]));
    for name in [
        "pagerank.csv",
        "cheirank.csv",
        "local_indices.csv",
        "nondominated.csv",
    ] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again.path().join(name)).unwrap()
        );
    }
}

#[test]
fn reduce_summary_and_matrices() {
    let dir = tempfile::tempdir().unwrap();
    ok(&countries(
        "reduce",
        dir.path(),
        &["--alpha", "0.85", "--top-k", "2"],
    ));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let w = &summary["weights"];
    let total = w["rr"].as_f64().unwrap() + w["pr"].as_f64().unwrap() + w["qr"].as_f64().unwrap();
    assert!((total - 1.0).abs() <= 1e-12);
    assert_eq!(summary["config"]["top_k"], 2);
    assert_eq!(summary["config"]["seeds"].as_array().unwrap().len(), 7);
    assert!(summary["config"].get("out").is_none());
    assert!(summary["lambda_c"].as_f64().unwrap() < 1.0);
    assert!(summary["residuals"]["reduced_pagerank"].as_f64().unwrap() <= 1e-8);

    let gr = matrix(&dir.path().join("gr.csv"));
    assert_eq!(gr.len(), 40);
    for j in 0..40 {
        let s: f64 = gr.iter().map(|row| row[j]).sum();
        assert!((s - 1.0).abs() <= 1e-10);
    }
    let (header, _) = records(&dir.path().join("gqrnd.csv"));
    assert_eq!(header[0], "US");
    let gqrd = matrix(&dir.path().join("gqrd.csv"));
    assert!((0..40).all(|i| (0..40).all(|j| i == j || gqrd[i][j] == 0.0)));
}

#[test]
fn reduce_matches_oracle_on_random30() {
    let dir = tempfile::tempdir().unwrap();
    let conf = fixtures().join("random30/greduce.conf");
    let conf = conf.to_str().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&greduce(&["reduce", "--config", conf, "--out", out]));
    let o = greduce(&["oracle", "--config", conf, "--out", out]);
    ok(&o);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report
        .lines()
        .any(|l| l.starts_with("PASS deflated_vs_dense")));
    assert!(!report.contains("FAIL"));
    assert_eq!(
        fs::read_to_string(dir.path().join("oracle_report.txt")).unwrap(),
        report
    );
    let a = matrix(&dir.path().join("gr.csv"));
    let b = matrix(&dir.path().join("dense_gr.csv"));
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
}

#[test]
fn oracle_passes_on_countries() {
    let dir = tempfile::tempdir().unwrap();
    let o = countries("oracle", dir.path(), &[]);
    ok(&o);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("PASS surfer_max_z"));
}

#[test]
fn oracle_rejects_reference_from_perturbed_graph() {
    let dir = tempfile::tempdir().unwrap();
    let original = fixtures().join("random30/edges.txt");
    let subset = fixtures().join("random30/subset.txt");
    let text = fs::read_to_string(&original).unwrap();
    let perturbed = dir.path().join("perturbed.txt");
    // Redirect one edge of member 3.
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let at = lines.iter().position(|l| l.starts_with("3 ")).unwrap();
    let target: usize = lines[at]
        .split_whitespace()
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    lines[at] = format!("3 {}", if target == 28 { 29 } else { 28 });
    fs::write(&perturbed, lines.join("\n") + "\n").unwrap();

    let out = dir.path().join("clean");
    let s = subset.to_str().unwrap();
    ok(&greduce(&[
        "reduce",
        "--edges",
        original.to_str().unwrap(),
        "--subset",
        s,
        "--out",
        out.to_str().unwrap(),
    ]));
    let reference = out.join("gr.csv");
    let o = greduce(&[
        "oracle",
        "--edges",
        perturbed.to_str().unwrap(),
        "--subset",
        s,
        "--reference",
        reference.to_str().unwrap(),
        "--surfer-steps",
        "1000000",
    ]);
    assert_eq!(o.status.code(), Some(5));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("FAIL reference_vs_dense"), "{report}");
    assert!(report.contains("PASS deflated_vs_dense"));
}

#[test]
fn friends_outputs_agree_with_library() {
    let dir = tempfile::tempdir().unwrap();
    ok(&countries(
        "friends",
        dir.path(),
        &["--source", "gqrnd", "--mode", "followers"],
    ));
    ok(&countries(
        "friends",
        dir.path(),
        &["--source", "gr", "--mode", "friends"],
    ));

    let base = fixtures().join("countries40");
    let labels = LabelTable::parse(&fs::read_to_string(base.join("labels.tsv")).unwrap()).unwrap();
    let g = parse_edge_list(
        &fs::read_to_string(base.join("edges.tsv")).unwrap(),
        Some(labels),
    )
    .unwrap();
    let subset =
        SubsetSelection::parse(&fs::read_to_string(base.join("subset.txt")).unwrap(), &g).unwrap();
    let op = GoogleOperator::new(&g, 0.85).unwrap();
    let d = reduce(&op, &subset, ReduceConfig::default()).unwrap();
    let tie = local_index(&pagerank(&op, PowerConfig::default()).unwrap(), &subset).unwrap();

    for (stem, m, followers) in [
        ("gqrnd_followers", &d.gqrnd, true),
        ("gr_friends", &d.gr, false),
    ] {
        let (header, rows) = records(&dir.path().join(format!("{stem}.csv")));
        assert_eq!(
            header,
            [
                "seed_id",
                "seed_label",
                "rank",
                "member_id",
                "member_label",
                "value"
            ]
        );
        assert!(!rows.is_empty() && rows.len() <= 7 * 4);
        for seed in ["US", "FR", "IN", "JP", "BR", "TR", "RU"] {
            let j = subset.labels().iter().position(|l| l == seed).unwrap();
            let want = if followers {
                top_followers(m, j, 4, &tie)
            } else {
                top_friends(m, j, 4, &tie)
            }
            .unwrap();
            let got: Vec<(String, f64)> = rows
                .iter()
                .filter(|r| r[1] == seed)
                .map(|r| (r[4].clone(), r[5].parse().unwrap()))
                .collect();
            let want: Vec<(String, f64)> = want
                .into_iter()
                .map(|(i, v)| (subset.labels()[i].clone(), v))
                .collect();
            assert_eq!(got, want);
        }

        let dot = fs::read_to_string(dir.path().join(format!("{stem}.dot"))).unwrap();
        let ast = dot_parser::ast::Graph::try_from(dot.as_str()).expect("valid DOT");
        let graph = dot_parser::canonical::Graph::from(ast);
        assert!(graph.is_digraph);
        let edges = &graph.edges.set;
        assert!(!edges.is_empty());
        type Id<'a> = dot_parser::ast::ID<'a>;
        let attrs = |e: &dot_parser::canonical::Edge<(Id, Id)>| -> Vec<(String, String)> {
            e.attr
                .elems
                .iter()
                .map(|(k, v)| (k.clone().into(), v.clone().into()))
                .collect()
        };
        let bold = edges
            .iter()
            .filter(|e| attrs(e).contains(&("style".into(), "bold".into())))
            .count();
        let red = edges
            .iter()
            .filter(|e| attrs(e).contains(&("color".into(), "red".into())))
            .count();
        assert_eq!(bold + red, edges.len());
        assert!(bold > 0);

        let json: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(dir.path().join(format!("{stem}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(json["edges"].as_array().unwrap().len(), edges.len());
        assert!(json["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .all(|n| n["group"] != "none"));
    }
}

#[test]
fn friends_unknown_seed_and_missing_groups() {
    let dir = tempfile::tempdir().unwrap();
    let o = countries("friends", dir.path(), &["--seeds", "US,XX"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("XX"));

    let groups = dir.path().join("groups.tsv");
    fs::write(&groups, "US\tOC\nFR\tRC\n").unwrap();
    let o = countries(
        "friends",
        dir.path(),
        &["--groups", groups.to_str().unwrap(), "--seeds", "US"],
    );
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no group for"));
    let dot = fs::read_to_string(dir.path().join("gr_friends.dot")).unwrap();
    assert!(dot.contains("group=\"none\""));
    assert!(dot.contains("group=\"OC\""));
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str, body: &str| {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        path.to_str().unwrap().to_string()
    };
    let good = p("good.txt", "0 1\n1 2\n2 0\n2 3\n");
    let bad = p("bad.txt", "0 1\n1 2 3\n");
    let subset_all = p("all.txt", "0\n1\n2\n3\n");
    let conf = p("bad.conf", "colour = red\n");
    let code = |args: &[&str]| greduce(args).status.code();

    assert_eq!(code(&["rank", "--edges", &bad]), Some(3));
    assert_eq!(
        code(&[
            "rank",
            "--edges",
            &good,
            "--pagerank-max-iter",
            "2",
            "--out",
            dir.path().to_str().unwrap()
        ]),
        Some(4)
    );
    assert_eq!(
        code(&["reduce", "--edges", &good, "--subset", &subset_all]),
        Some(6)
    );
    assert_eq!(
        code(&["rank", "--edges", "/nonexistent/edges.txt"]),
        Some(7)
    );
    assert_eq!(code(&["rank", "--config", &conf]), Some(8));
    assert_eq!(code(&["rank", "--edges", &good, "--alpha", "1.5"]), Some(8));
    assert_eq!(code(&["reduce", "--edges", &good]), Some(8));
    assert_eq!(
        code(&[
            "oracle",
            "--edges",
            &good,
            "--subset",
            &p("s.txt", "0\n"),
            "--oracle-cap",
            "3"
        ]),
        Some(6)
    );
    assert_eq!(code(&["friends", "--source", "gx"]), Some(2));
}
