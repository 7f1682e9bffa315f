use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opnerve_cli::format::{self, Document, Object, Operad, OperadRef, Overrides};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_opnerve"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("opnerve-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn toml_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(toml_files(&p));
        } else if p.extension().is_some_and(|x| x == "toml") {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn every_tree_operad_fixture_validates() {
    let files = toml_files(&fixtures().join("tree-operads"));
    assert!(files.len() >= 20);
    // every tree up to three vertices, a stride through the four-vertex ones
    let small = |f: &&PathBuf| !f.file_name().unwrap().to_str().unwrap().starts_with("v4-");
    let picked: Vec<&PathBuf> = files
        .iter()
        .filter(small)
        .chain(files.iter().filter(|f| !small(f)).step_by(20))
        .collect();
    for f in picked {
        let o = run(&["validate", f.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", f.display());
    }
}

#[test]
fn documents_round_trip() {
    for f in toml_files(&fixtures()) {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = Document::from_toml(&text).unwrap();
        assert_eq!(doc.to_toml().unwrap(), text, "{}", f.display());
        let obj = format::load(&f, &Overrides::default()).unwrap();
        let again = match obj {
            Object::Operad(op) if doc.kind != format::Kind::Endomorphism => {
                Some(format::operad_doc(&op).unwrap())
            }
            Object::Complex(c) => Some(format::complex_doc(&c)),
            Object::Dendrex(op, x) => {
                Some(format::dendrex_doc(doc.operad.clone().unwrap(), &op.su, &x))
            }
            Object::Horn(op, h) => Some(format::horn_doc(doc.operad.clone().unwrap(), &op.su, &h)),
            _ => None,
        };
        if let Some(d) = again {
            assert_eq!(d.to_toml().unwrap(), text, "{}", f.display());
        }
    }
}

#[test]
fn a_infinity_fixture_is_a_stored_su_operad() {
    let obj = format::load(&fixtures().join("a-infinity.toml"), &Overrides::default()).unwrap();
    let Object::Operad(Operad { dg: None, su }) = obj else {
        panic!("expected an su operad")
    };
    assert_eq!(su, opnerve::fixtures::a_infinity());
}

#[test]
fn fill_horn_then_check_dendrex() {
    // next to the horn the operad stays a path reference
    let dir = scratch("fill-near");
    for f in ["horn.toml", "endomorphism.toml"] {
        std::fs::copy(fixtures().join(f), dir.join(f)).unwrap();
    }
    let out = dir.join("filled.toml");
    let o = bin()
        .args([
            "fill-horn",
            "horn.toml",
            "--out",
            "filled.toml",
            "--report",
            "/dev/null",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = Document::from_toml(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(matches!(doc.operad, Some(OperadRef::Path(_))));
    let c = bin()
        .args(["check-dendrex", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stdout));
    // elsewhere it is written inline
    let away = scratch("fill-away").join("filled.toml");
    let o = run(&[
        "fill-horn",
        "horn.toml",
        "--out",
        away.to_str().unwrap(),
        "--report",
        "/dev/null",
    ]);
    assert_eq!(code(&o), 0);
    let doc = Document::from_toml(&std::fs::read_to_string(&away).unwrap()).unwrap();
    assert!(matches!(doc.operad, Some(OperadRef::Inline(_))));
    assert_eq!(code(&run(&["check-dendrex", away.to_str().unwrap()])), 0);
}

#[test]
fn morphism_predicates_follow_the_file_names() {
    for f in toml_files(&fixtures().join("morphisms")) {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        let cmd = if name.starts_with("we-") {
            "check-we"
        } else {
            "check-fib"
        };
        let o = run(&[cmd, f.to_str().unwrap()]);
        let want = if name.contains("-positive-") { 0 } else { 1 };
        assert_eq!(code(&o), want, "{name}");
        let report = String::from_utf8(o.stdout).unwrap();
        assert!(
            report.contains(&format!("\"holds\": \"{}\"", want == 0)),
            "{name}"
        );
        if want == 1 {
            assert!(report.contains("\"witness\""), "{name}");
        }
    }
}

#[test]
fn identity_morphism_written_by_hand() {
    let tmp = scratch("identity");
    std::fs::copy(fixtures().join("endomorphism.toml"), tmp.join("end.toml")).unwrap();
    let f = tmp.join("id.toml");
    std::fs::write(
        &f,
        "kind = \"morphism\"\nidentity = true\nsource = \"end.toml\"\n",
    )
    .unwrap();
    let o = bin()
        .args(["check-we", f.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("\"holds\": \"true\""));
}

#[test]
fn inconsistent_degree_is_rejected_with_its_location() {
    let tmp = scratch("degree");
    let f = tmp.join("bad.toml");
    let src = "kind = \"dg-operad\"\ncolors = [\"c\"]\n\n[units]\nc = [[\"id\", \"1\"]]\n\n\
               [[components]]\nprofile = \"c->c\"\nbasis = [[\"id\", 0], [\"a\", 1], [\"b\", 1]]\nd = [[\"a\", \"b\", \"1\"]]\n";
    std::fs::write(&f, src).unwrap();
    let o = bin()
        .args(["validate", f.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("components[0].d[0]"), "{err}");
}

#[test]
fn unknown_fields_and_commands_are_usage_errors() {
    let tmp = scratch("unknown");
    let f = tmp.join("extra.toml");
    std::fs::write(
        &f,
        "kind = \"complex\"\nflavour = 1\n[space]\nbasis = [[\"x\", 0]]\n",
    )
    .unwrap();
    assert_eq!(
        code(
            &bin()
                .args(["validate", f.to_str().unwrap()])
                .output()
                .unwrap()
        ),
        2
    );
    assert_eq!(code(&bin().args(["no-such-command"]).output().unwrap()), 2);
    assert_eq!(
        code(&bin().args(["homology", "missing.toml"]).output().unwrap()),
        2
    );
    assert_eq!(code(&run(&["check-dendrex", "horn.toml"])), 2);
}

#[test]
fn bv_respects_the_vertex_bound() {
    let o = run(&["bv", "--tree", "((| |) |)", "--report", "/dev/null"]);
    assert_eq!(code(&o), 0);
    let listing = Document::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    // one inner edge: three labels
    assert_eq!(listing.space.unwrap().basis.len(), 3);
    assert_eq!(
        code(&run(&["bv", "--tree", "(((|)))", "--bound-vertices", "2"])),
        2
    );
}

#[test]
fn reports_are_deterministic() {
    let a = run(&[
        "compare-nerves",
        "endomorphism.toml",
        "--tree",
        "((|))",
        "--samples",
        "10",
        "--seed",
        "3",
    ]);
    let b = run(&[
        "compare-nerves",
        "endomorphism.toml",
        "--tree",
        "((|))",
        "--samples",
        "10",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn mapspace_homology_and_suite() {
    assert_eq!(
        code(&run(&[
            "mapspace",
            "two-colored.toml",
            "--profile",
            "a->b",
            "--level",
            "3"
        ])),
        0
    );
    let h = run(&["homology", "padded.toml", "--profile", "c->c"]);
    assert_eq!(code(&h), 0);
    // n₋₁ ← z₀ and k₁ ← t₂ cancel; the unit survives in degree 0
    let out = String::from_utf8(h.stdout).unwrap();
    assert!(
        out.contains("\"H0\": \"1\"") && out.contains("\"H1\": \"0\""),
        "{out}"
    );
    let s = run(&["doldkan-suite", "--level", "3", "--samples", "5"]);
    assert_eq!(code(&s), 0, "{}", String::from_utf8_lossy(&s.stdout));
    assert_eq!(code(&run(&["faces", "dendrex.toml"])), 0);
}

#[test]
fn degree_window_flag_is_enforced() {
    let o = run(&["validate", "padded.toml", "--degree-window", "0..6"]);
    assert_eq!(code(&o), 2);
    assert_eq!(
        code(&run(&[
            "validate",
            "padded.toml",
            "--degree-window",
            "-2..6"
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "validate",
            "padded.toml",
            "--degree-window",
            "3..1"
        ])),
        2
    );
}

#[test]
fn export_matches_the_shipped_fixtures() {
    let tmp = scratch("export");
    assert_eq!(
        code(
            &bin()
                .args(["export-fixtures", tmp.to_str().unwrap()])
                .output()
                .unwrap()
        ),
        0
    );
    let shipped = toml_files(&fixtures());
    let fresh = toml_files(&tmp);
    assert_eq!(shipped.len(), fresh.len());
    for (a, b) in shipped.iter().zip(&fresh) {
        assert_eq!(
            std::fs::read_to_string(a).unwrap(),
            std::fs::read_to_string(b).unwrap(),
            "{}",
            a.display()
        );
    }
}
