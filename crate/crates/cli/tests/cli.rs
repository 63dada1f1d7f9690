use std::path::Path;
use std::process::Command;

use coupon_cli::output::read_rows;

fn coupon(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_coupon"))
        .args(args)
        .env_remove("COUPON_THREADS")
        .output()
        .expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, std::path::PathBuf) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let path = out.to_str().unwrap().to_string();
    full.extend(["--out", &path]);
    let status = coupon(&full).status.code().unwrap();
    (status, out)
}

#[test]
fn normal_distance_row_respects_bound() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "d.csv", &["distance", "--n", "200", "--m", "40", "--target", "normal"]);
    assert_eq!(code, 0);
    let rows = read_rows(&out).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!((row.n, row.m, row.metric.as_str()), (Some(200), Some(40), "d_k"));
    assert!(row.preconditions_met);
    assert!(row.value <= row.bound.unwrap());
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "distance");
    assert_eq!(sidecar["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(sidecar["config"]["command"]["distance"]["nm"]["n"], 200);
}

#[test]
fn coupling_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["couple", "--lemma", "uniform", "--l", "2", "--r", "16", "--trials", "100000", "--seed", "7"];
    let (a, first) = run_to(dir.path(), "a.csv", &args);
    let (b, second) = run_to(dir.path(), "b.csv", &args);
    assert_eq!((a, b), (0, 0));
    let first = std::fs::read(first).unwrap();
    assert_eq!(first, std::fs::read(second).unwrap());
    let threaded = Command::new(env!("CARGO_BIN_EXE_coupon"))
        .args(args)
        .env("COUPON_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(threaded.stdout, first);
}

#[test]
fn empty_sweep_is_an_argument_error() {
    let out = coupon(&["sweep", "--n-values", "--m-rule", "ratio:0.5", "--targets", "normal"]);
    assert_eq!(out.status.code(), Some(1));
    let out = coupon(&["sweep", "--m-rule", "ratio:0.5", "--targets", "normal"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(coupon(&["moments", "--n", "1", "--m", "0"]).status.code(), Some(1));
    assert_eq!(coupon(&["distance", "--n", "10", "--m", "2", "--target", "nope"]).status.code(), Some(1));
    assert_eq!(coupon(&["sweep", "--n-values", "10", "--m-rule", "half", "--targets", "normal"]).status.code(), Some(1));
    assert_eq!(coupon(&["couple", "--lemma", "uniform", "--l", "2"]).status.code(), Some(1));
    assert_eq!(coupon(&["--help"]).status.code(), Some(0));
}

#[test]
fn precondition_violations_are_reported_with_exit_two() {
    let out = coupon(&["distance", "--n", "100", "--m", "0", "--target", "normal"]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("needs m >= 1"));
    let out = coupon(&["couple", "--lemma", "embedding", "--n", "100", "--m", "60"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let (code, path) = run_to(
        dir.path(),
        "s.csv",
        &["sweep", "--n-values", "100,200", "--m-rule", "ratio:0.7", "--targets", "embedding,normal", "--trials", "100"],
    );
    assert_eq!(code, 2);
    let rows = read_rows(&path).unwrap();
    assert_eq!(rows.iter().filter(|r| r.metric == "refused").count(), 2);
    assert!(rows.iter().any(|r| r.target == "normal" && r.preconditions_met));
}

#[test]
fn sweep_rows_follow_grid_order_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (code, path) = run_to(
        dir.path(),
        "s.csv",
        &[
            "sweep",
            "--n-values",
            "400,100,200",
            "--m-rule",
            "poisson:2",
            "--targets",
            "poisson,corrected_poisson,compound_poisson",
            "--threads",
            "2",
        ],
    );
    assert_eq!(code, 0);
    let rows = read_rows(&path).unwrap();
    let order: Vec<(u64, &str)> = rows.iter().map(|r| (r.n.unwrap(), r.target.as_str())).collect();
    assert_eq!(
        order,
        [
            (400, "poisson"),
            (400, "corrected_poisson"),
            (400, "compound_poisson"),
            (100, "poisson"),
            (100, "corrected_poisson"),
            (100, "compound_poisson"),
            (200, "poisson"),
            (200, "corrected_poisson"),
            (200, "compound_poisson"),
        ]
    );
    let copy = dir.path().join("copy.csv");
    coupon_cli::output::write_rows(std::fs::File::create(&copy).unwrap(), &rows).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&copy).unwrap());
}

#[test]
fn timing_fills_runtime_column_only_on_request() {
    let plain = coupon(&["moments", "--n", "50", "--m", "5"]);
    let text = String::from_utf8(plain.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
    let timed = coupon(&["moments", "--n", "50", "--m", "5", "--timing"]);
    let text = String::from_utf8(timed.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| !l.ends_with(',')));
}

#[test]
fn other_subcommands_emit_rows() {
    let pmf = String::from_utf8(coupon(&["pmf", "--n", "3", "--m", "0", "--t-max", "3"]).stdout).unwrap();
    assert_eq!(pmf.lines().count(), 2);
    assert!(pmf.contains(",pmf,3,0.2222222222222"));
    let markov = coupon(&["pmf", "--n", "3", "--m", "0", "--engine", "markov", "--t-max", "5"]);
    assert_eq!(markov.status.code(), Some(0));
    let bounds = coupon(&["bounds", "--n", "400", "--m", "100"]);
    assert_eq!(bounds.status.code(), Some(0));
    let text = String::from_utf8(bounds.stdout).unwrap();
    assert!(text.contains("normal_kolmogorov") && text.contains("structural") && text.contains(",t0,"));
    let mineka = coupon(&["couple", "--lemma", "mineka", "--n", "30", "--m", "20", "--trials", "2000"]);
    assert_eq!(mineka.status.code(), Some(0));
    let gumbel = coupon(&["distance", "--n", "128", "--m", "1", "--target", "gumbel_corrected"]);
    assert_eq!(gumbel.status.code(), Some(0));
}
