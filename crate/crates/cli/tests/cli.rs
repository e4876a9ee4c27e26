use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn revm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revm"))
        .args(args)
        .env_remove("REVM_FUEL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Compiles `program` and returns the automaton path.
    fn compiled(&self, name: &str, program: &str) -> PathBuf {
        let src = self.file(&format!("{name}.prog"), program);
        let out = revm(&["compile", s(&src)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        src.with_extension("aut")
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_identity() {
    let ws = Workspace::new();
    let src = ws.file("i.prog", "I\n");
    let out = revm(&["compile", s(&src), "-o", s(&ws.path("i.aut"))]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("rules=2 states=2"));
    let text = fs::read_to_string(ws.path("i.aut")).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 2);
}

#[test]
fn compile_counts_pairs_and_rules() {
    let ws = Workspace::new();
    let src = ws.file("k.prog", "K !I");
    let out = revm(&["compile", s(&src)]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out).trim(),
        "leaves=2 base_pairs=2 base_rules=4 rules=4 states=4 specialized=0 pruned=0"
    );
    assert!(ws.path("k.aut").exists());
}

#[test]
fn compile_errors() {
    let ws = Workspace::new();
    let bad = ws.file("bad.prog", "\\x.");
    let out = revm(&["compile", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.prog:1:4:"), "{}", stderr(&out));

    let open = ws.file("open.prog", "\\x. y");
    assert_eq!(code(&revm(&["compile", s(&open)])), 3);

    let mixed = ws.file("mixed.prog", "S !K");
    assert_eq!(code(&revm(&["compile", s(&mixed)])), 2);

    assert_eq!(code(&revm(&["compile", s(&ws.path("missing.prog"))])), 9);
}

#[test]
fn run_forwards_backwards_and_out_of_fuel() {
    let ws = Workspace::new();
    let aut = ws.compiled("i", "I");
    let out = revm(&["run", s(&aut), "l(e)"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "r(e)\n"));
    let out = revm(&["run", s(&aut), "r(e)", "--reverse"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "l(e)\n"));
    let out = revm(&["run", s(&aut), "l(e)", "--fuel", "0"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).is_empty());
    let out = revm(&["run", s(&aut), "p(e,e)"]);
    assert_eq!(code(&out), 4);
    assert_eq!(code(&revm(&["run", s(&aut), "l(x)"])), 2);
    assert_eq!(code(&revm(&["run", s(&aut), "l("])), 2);
}

#[test]
fn fuel_from_environment() {
    let ws = Workspace::new();
    let aut = ws.compiled("i", "I");
    let out = Command::new(env!("CARGO_BIN_EXE_revm"))
        .args(["run", s(&aut), "l(e)"])
        .env("REVM_FUEL", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 5);
}

#[test]
fn forward_then_reverse_recovers_input() {
    let ws = Workspace::new();
    let aut = ws.compiled("ki", "K !I");
    let mut reversed = 0;
    for input in ["r(p(e,l(e)))", "r(p(l(e),r(e)))", "l(e)"] {
        let fwd = revm(&["run", s(&aut), input, "--trace", s(&ws.path("fwd.trace"))]);
        if code(&fwd) != 0 {
            continue;
        }
        let output = stdout(&fwd);
        let back = revm(&["run", s(&aut), output.trim(), "--reverse", "--trace", s(&ws.path("back.trace"))]);
        assert_eq!(stdout(&back).trim(), input);
        let f = fs::read_to_string(ws.path("fwd.trace")).unwrap();
        let b = fs::read_to_string(ws.path("back.trace")).unwrap();
        let states = |t: &str| t.lines().map(|l| l.split(" | ").take(2).collect::<Vec<_>>().join(" | ")).collect::<Vec<_>>();
        let mut rev = states(&f);
        rev.reverse();
        assert_eq!(states(&b), rev);
        reversed += 1;
    }
    assert_eq!(reversed, 2);
}

#[test]
fn trace_file_format() {
    let ws = Workspace::new();
    let aut = ws.compiled("i", "I");
    let trace = ws.path("t.trace");
    let out = revm(&["run", s(&aut), "l(e)", "--trace", s(&trace)]);
    assert_eq!(stdout(&out), "r(e)\n");
    assert_eq!(
        fs::read_to_string(&trace).unwrap(),
        "I0.i | l(e) | rule=0\nI0.f | r(e) | rule=-\n"
    );
}

#[test]
fn check_reports_violations() {
    let ws = Workspace::new();
    for c in ["B", "C", "I", "K", "D", "delta", "F", "W"] {
        let aut = ws.compiled(c, c);
        assert_eq!(code(&revm(&["check", s(&aut)])), 0, "{c}");
    }
    let broken = ws.file(
        "broken.aut",
        "automaton broken initial=qi final=qf\nqi : l(x) -> r(x) : qf\nqi : l(r(y)) -> r(l(y)) : qf\n",
    );
    let out = revm(&["check", s(&broken)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("rules 0 and 1"), "{}", stdout(&out));

    let empty = ws.file("empty.aut", "automaton empty initial=qi final=qf\n");
    assert_eq!(code(&revm(&["check", s(&empty)])), 0);

    let garbage = ws.file("garbage.aut", "automaton x initial=a final=b\na : l(x) => r(x) : b\n");
    assert_eq!(code(&revm(&["check", s(&garbage)])), 2);
}

#[test]
fn readout_values() {
    let ws = Workspace::new();
    let run = |name: &str, program: &str, kind: &str| {
        let src = ws.file(name, program);
        revm(&["readout", s(&src), "--kind", kind])
    };
    let out = run("three.prog", "#3", "nat");
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "3\n"));
    let out = run("k.prog", "K", "bool");
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "true\n"));
    // church 0 is K I, which is false
    let out = run("zero.prog", "#0", "bool");
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "false\n"));
    let out = run("iszero.prog", "(\\n. n (K (K I)) K) #0", "bool");
    assert_eq!(stdout(&out), "true\n");
    let out = run("iszero2.prog", "(\\n. n (K (K I)) K) #2", "bool");
    assert_eq!(stdout(&out), "false\n");
}

#[test]
fn readout_failures() {
    let ws = Workspace::new();
    let stuck = ws.file("delta.prog", "delta");
    assert_eq!(code(&revm(&["readout", s(&stuck), "--kind", "bool"])), 7);
    let k = ws.file("k.prog", "K");
    assert_eq!(code(&revm(&["readout", s(&k), "--kind", "nat"])), 7);
    let two = ws.file("two.prog", "#2");
    assert_eq!(code(&revm(&["readout", s(&two), "--kind", "nat", "--fuel", "3"])), 6);
    assert_eq!(code(&revm(&["readout", s(&two), "--kind", "nat", "--max-n", "1"])), 8);
    assert_eq!(code(&revm(&["readout", s(&two), "--kind", "octal"])), 2);
}

#[test]
fn oracle_agrees() {
    let ws = Workspace::new();
    let i = ws.file("i.prog", "I");
    let k = ws.file("k.prog", "K");
    let report = ws.path("report.tsv");
    let out = revm(&["oracle", s(&i), s(&k), "--depth", "3", "--report", s(&report)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("disagree=0"));
    let lines = fs::read_to_string(&report).unwrap();
    assert_eq!(lines.lines().count(), 2 * 676);
    assert!(lines.lines().all(|l| l.split('\t').count() == 5));

    assert_eq!(code(&revm(&["oracle", s(&k), s(&k), "--depth", "3"])), 0);
    let out = revm(&["oracle", s(&i), s(&k), "--depth", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "agree=2 disagree=0 inconclusive=0\n");
}
