use seqstr::engine::{solve, solve_source, SolveOptions, Verdict};
use seqstr::frontend::parse_script;
use seqstr::interp::check_model;
use std::time::Duration;

fn opts() -> SolveOptions {
    SolveOptions {
        timeout: Some(Duration::from_secs(30)),
        ..SolveOptions::default()
    }
}

/// Solves `src` and re-checks any model against the script.
fn verdict(src: &str) -> &'static str {
    let script = parse_script(src).expect("parses");
    let v = solve(&script, &opts()).expect("solves");
    if let Verdict::Sat(m) = &v {
        assert!(check_model(&script, m), "model fails:\n{src}");
    }
    v.name()
}

#[test]
fn corpus_verdicts() {
    let cases = [
        (include_str!("corpus/length_sat.smt2"), "sat"),
        (include_str!("corpus/seq_concat_unsat.smt2"), "unsat"),
        (include_str!("corpus/version_number.smt2"), "unsat"),
    ];
    for (src, expected) in cases {
        assert_eq!(verdict(src), expected, "{src}");
    }
}

#[test]
fn relaxing_the_version_pipeline_gives_a_model() {
    // without the negated output format the pipeline is satisfiable
    let src = include_str!("corpus/version_number.smt2").replace(
        "(assert (not (str.in_re result postReg)))",
        "(assert (str.in_re result postReg))",
    );
    assert_eq!(verdict(&src), "sat");
}

#[test]
fn reads_and_writes() {
    let write_then_read = r#"
        (declare-fun s () (Seq String))
        (declare-fun t () (Seq String))
        (declare-fun x () String)
        (assert (= t (seq.update s 1 "ab")))
        (assert (= x (seq.nth t 1)))
        (assert (not (= (str.len x) 2)))
        (assert (< 1 (seq.len s)))
    "#;
    assert_eq!(verdict(write_then_read), "unsat");

    let out_of_range = r#"
        (declare-fun s () (Seq String))
        (declare-fun t () (Seq String))
        (assert (= t (seq.update s 5 "ab")))
        (assert (= (seq.len t) 2))
    "#;
    assert_eq!(verdict(out_of_range), "sat");
}

#[test]
fn symbolic_indices() {
    let src = r#"
        (declare-fun s () (Seq String))
        (declare-fun x () String)
        (declare-fun y () String)
        (declare-fun i () Int)
        (assert (= x (seq.nth s i)))
        (assert (= y (seq.nth s (+ i 1))))
        (assert (str.in_re x (re.+ (str.to_re "a"))))
        (assert (str.in_re y (re.+ (str.to_re "b"))))
        (assert (<= 3 i))
    "#;
    assert_eq!(verdict(src), "sat");
    let unsat = format!("{src}(assert (< (seq.len s) (+ i 2)))");
    assert_eq!(verdict(&unsat), "unsat");
}

#[test]
fn split_join_and_filter() {
    let src = r#"
        (declare-fun u () String)
        (declare-fun parts () (Seq String))
        (declare-fun kept () (Seq String))
        (declare-fun out () String)
        (assert (= parts (str.splitre u (str.to_re ","))))
        (assert (= kept (seq.filterre parts (re.+ (re.range "0" "9")))))
        (assert (= out (seq.join kept "-")))
        (assert (str.in_re out (re.++ (re.+ (re.range "0" "9")) (str.to_re "-") (re.+ (re.range "0" "9")))))
        (assert (str.in_re u (re.* (re.union (re.range "a" "z") (re.range "0" "9") (str.to_re ",")))))
    "#;
    assert_eq!(verdict(src), "sat");
    // joining with "-" never produces a "-" when at most one part survives
    let unsat = format!("{src}(assert (<= (seq.len kept) 1))");
    assert_eq!(verdict(&unsat), "unsat");
}

#[test]
fn non_straight_line_input_is_unknown() {
    let src = r#"
        (declare-fun x () String)
        (declare-fun y () String)
        (assert (= x (str.++ y "a")))
        (assert (= y (str.++ x "b")))
    "#;
    match solve_source(src, &opts()).unwrap() {
        Verdict::Unknown(why) => assert!(why.contains("straight-line"), "{why}"),
        other => panic!("expected unknown, got {other}"),
    }
}
