//! End-to-end runs of the `pinchjet` binary: report contents, exit
//! codes, tolerance resolution, and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_pinchjet");

/// Gluing tuple 2z + i zbar: |mu| = |i / 2| = 0.5.
const TUPLE_MU_HALF: &str = "n 2 order 2\norder 2\n1 0 2 0\n0 1 0 1\n";

/// Gluing tuple z + 0.5 zbar, same modulus as TUPLE_MU_HALF.
const TUPLE_HALF_REAL: &str = "n 2 order 2\norder 2\n1 0 1 0\n0 1 0.5 0\n";

/// Gluing tuple z + 0.7 zbar, a different modulus.
const TUPLE_SEVEN: &str = "n 2 order 2\norder 2\n1 0 1 0\n0 1 0.7 0\n";

/// z + zbar^2 mixes pure-z and pure-zbar monomials.
const MIXED_JET: &str = "order 2\n1 0 1 0\n0 2 1 0\n";

/// z + 0.5 z^2 is divisible by z.
const PURE_Z_JET: &str = "order 2\n1 0 1 0\n2 0 0.5 0\n";

/// Two-point family: identity frames, fixed chart z, moving chart
/// z + (0.2 + 0.5 t) zbar over t in [0, 1].
const FAMILY: &str = "family n_points 2 t_min 0 t_max 1\n\
1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\
1 0 : 1 0\n\
1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\
1 0 : 1 0\n0 1 : 0.2 0 0.5 0\n";

fn cmd() -> Command {
    let mut c = Command::new(BIN);
    // keep an ambient tolerance override from leaking into the tests
    c.env_remove("PINCHJET_TOL");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

#[test]
fn invariant_report_pins_mu_half() {
    let dir = TempDir::new().unwrap();
    let tuple = write(dir.path(), "tuple.txt", TUPLE_MU_HALF);
    let out = cmd().arg("orbit").arg("invariants").arg(&tuple).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = stdout_text(&out);
    assert_eq!(data_lines(&text), vec!["2\t0.5\t0\t0.5"], "{text}");
}

#[test]
fn mixed_monomials_classify_not_liftable() {
    let dir = TempDir::new().unwrap();
    let jet = write(dir.path(), "mixed.txt", MIXED_JET);
    let out = cmd().arg("germ").arg("liftable").arg(&jet).output().unwrap();
    assert!(out.status.success());
    assert_eq!(data_lines(&stdout_text(&out)), vec!["NOT_LIFTABLE"]);

    // asking for the lift anyway is a contract violation
    let out = cmd().arg("germ").arg("lift").arg(&jet).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_text(&out).starts_with("ERR NOT_LIFTABLE:"),
        "{}",
        stderr_text(&out)
    );
}

#[test]
fn divisible_jet_lifts() {
    let dir = TempDir::new().unwrap();
    let jet = write(dir.path(), "purez.txt", PURE_Z_JET);
    let out = cmd().arg("germ").arg("liftable").arg(&jet).output().unwrap();
    assert!(out.status.success());
    assert_eq!(data_lines(&stdout_text(&out)), vec!["LIFTABLE z"]);

    let out = cmd().arg("germ").arg("lift").arg(&jet).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    assert!(!data_lines(&stdout_text(&out)).is_empty());
}

#[test]
fn profile_follows_declared_modulus() {
    let dir = TempDir::new().unwrap();
    let fam = write(dir.path(), "family.txt", FAMILY);
    let out = cmd().arg("lab").arg("profile").arg(&fam).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = stdout_text(&out);
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 11, "{text}");
    for row in rows {
        let cols: Vec<&str> = row.split('\t').collect();
        assert_eq!(cols.len(), 4, "{row}");
        let t: f64 = cols[0].parse().unwrap();
        let mu: f64 = cols[2].parse().unwrap();
        assert!((mu - (0.2 + 0.5 * t)).abs() < 1e-6, "t={t} mu={mu}");
        assert_eq!(cols[3], "ok");
    }
}

#[test]
fn varying_family_is_not_a_product() {
    let dir = TempDir::new().unwrap();
    let fam = write(dir.path(), "family.txt", FAMILY);
    let out = cmd().arg("lab").arg("obstruction").arg(&fam).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = stdout_text(&out);
    assert!(
        text.lines().any(|l| l.starts_with("verdict\tNOT_ALMOST_DIRECT_PRODUCT")),
        "{text}"
    );
}

#[test]
fn equivalence_verdicts() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.txt", TUPLE_HALF_REAL);
    let b = write(dir.path(), "b.txt", TUPLE_MU_HALF);
    let c = write(dir.path(), "c.txt", TUPLE_SEVEN);

    let out = cmd().arg("orbit").arg("equiv").arg(&a).arg(&b).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = stdout_text(&out);
    assert!(
        data_lines(&text)[0].starts_with("EQUIVALENT\tresidual "),
        "{text}"
    );

    let out = cmd().arg("orbit").arg("equiv").arg(&a).arg(&c).output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = stdout_text(&out);
    assert_eq!(
        data_lines(&text),
        vec!["NOT_EQUIVALENT\tmu_left 0.5\tmu_right 0.7"],
        "{text}"
    );
}

#[test]
fn eigen_mu_spot_value() {
    // lambda = (1 + m) / (1 - m) at m = 0 and m = 0.5 gives mu = 0.5
    let out = cmd().arg("geom").arg("eigen-mu").arg("1").arg("3").output().unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
    assert_eq!(data_lines(&stdout_text(&out)), vec!["0.5\t0\t0.5"]);
}

#[test]
fn missing_input_exits_io() {
    let dir = TempDir::new().unwrap();
    let absent = dir.path().join("absent.txt");
    let out = cmd().arg("jet").arg("invert").arg(&absent).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_text(&out).starts_with("ERR IO:"), "{}", stderr_text(&out));
}

#[test]
fn malformed_jet_exits_parse() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.txt", "order 2\nbogus line\n");
    let out = cmd().arg("jet").arg("invert").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_text(&out).starts_with("ERR PARSE:"), "{}", stderr_text(&out));
}

#[test]
fn env_tolerance_is_validated_and_flag_wins() {
    let dir = TempDir::new().unwrap();
    let tuple = write(dir.path(), "tuple.txt", TUPLE_MU_HALF);

    let out = cmd()
        .arg("orbit")
        .arg("invariants")
        .arg(&tuple)
        .env("PINCHJET_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_text(&out).starts_with("ERR BAD_TOLERANCE:"),
        "{}",
        stderr_text(&out)
    );

    // an explicit --tol is taken before the environment is consulted
    let out = cmd()
        .arg("--tol")
        .arg("1e-8")
        .arg("orbit")
        .arg("invariants")
        .arg(&tuple)
        .env("PINCHJET_TOL", "abc")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_text(&out));
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let fam = write(dir.path(), "family.txt", FAMILY);
    let first = cmd().arg("lab").arg("obstruction").arg(&fam).output().unwrap();
    let second = cmd().arg("lab").arg("obstruction").arg(&fam).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn conjugation_report_reparses() {
    let dir = TempDir::new().unwrap();
    let jet = write(dir.path(), "f.txt", "order 3\n1 0 1 0\n2 0 0.3 0\n");

    let once = cmd().arg("jet").arg("conj").arg(&jet).output().unwrap();
    assert!(once.status.success(), "{}", stderr_text(&once));

    let c1 = write(dir.path(), "c1.txt", &stdout_text(&once));
    let twice = cmd().arg("jet").arg("conj").arg(&c1).output().unwrap();
    assert!(twice.status.success(), "{}", stderr_text(&twice));
    assert_ne!(once.stdout, twice.stdout);

    // conjugation is an involution, so a third pass restores the first
    let c2 = write(dir.path(), "c2.txt", &stdout_text(&twice));
    let thrice = cmd().arg("jet").arg("conj").arg(&c2).output().unwrap();
    assert!(thrice.status.success(), "{}", stderr_text(&thrice));
    assert_eq!(once.stdout, thrice.stdout);
}
