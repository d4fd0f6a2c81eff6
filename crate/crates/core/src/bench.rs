//! Random benchmark scripts over sequence reads, writes and extracts, and
//! summaries of solver runs.

use crate::regex::Regex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchInstance {
    pub template: u8,
    pub seed: u64,
    pub symbolic: bool,
    pub name: String,
    pub script: String,
    pub seq_vars: usize,
    pub str_vars: usize,
    pub int_vars: usize,
}

/// Random regex of depth at most 3 over a class of lowercase letters or
/// digits at most 10 wide. Stars are never nested.
pub fn random_regex(rng: &mut impl Rng) -> Regex {
    gen_regex(rng, 3, true)
}

fn random_class(rng: &mut impl Rng) -> Regex {
    let (base, span) = if rng.gen_bool(0.5) { ('a' as u32, 26) } else { ('0' as u32, 10) };
    let lo = rng.gen_range(0..span);
    let width = rng.gen_range(1..=10.min(span - lo));
    Regex::range(base + lo, base + lo + width - 1).expect("ordered bounds")
}

fn gen_regex(rng: &mut impl Rng, depth: u32, star_ok: bool) -> Regex {
    if depth <= 1 {
        return random_class(rng);
    }
    match rng.gen_range(0..4) {
        0 => random_class(rng),
        1 => Regex::concat(gen_regex(rng, depth - 1, star_ok), gen_regex(rng, depth - 1, star_ok)),
        2 => Regex::union(gen_regex(rng, depth - 1, star_ok), gen_regex(rng, depth - 1, star_ok)),
        _ if star_ok => Regex::star(gen_regex(rng, depth - 1, false)),
        _ => random_class(rng),
    }
}

struct Script {
    decls: String,
    body: String,
    counts: [usize; 3],
}

impl Script {
    fn new() -> Script {
        Script {
            decls: String::new(),
            body: String::new(),
            counts: [0; 3],
        }
    }

    fn seq(&mut self, n: &str) {
        let _ = writeln!(self.decls, "(declare-fun {n} () (Seq String))");
        self.counts[0] += 1;
    }

    fn string(&mut self, n: &str) {
        let _ = writeln!(self.decls, "(declare-fun {n} () String)");
        self.counts[1] += 1;
    }

    /// A fresh integer variable or a constant in `0..=hi`.
    fn index(&mut self, name: &str, symbolic: bool, hi: i64, rng: &mut impl Rng) -> String {
        if symbolic {
            let _ = writeln!(self.decls, "(declare-fun {name} () Int)");
            self.counts[2] += 1;
            name.to_string()
        } else {
            rng.gen_range(0..=hi).to_string()
        }
    }

    fn assert(&mut self, a: &str) {
        let _ = writeln!(self.body, "(assert {a})");
    }

    fn finish(self, template: u8, seed: u64, symbolic: bool) -> BenchInstance {
        let kind = if symbolic { "sym" } else { "con" };
        BenchInstance {
            template,
            seed,
            symbolic,
            name: format!("t{template}_{kind}_{seed:04}"),
            script: format!("{}{}(check-sat)\n", self.decls, self.body),
            seq_vars: self.counts[0],
            str_vars: self.counts[1],
            int_vars: self.counts[2],
        }
    }
}

fn template1(sc: &mut Script, symbolic: bool, rng: &mut impl Rng) {
    for v in ["s1", "s2"] {
        sc.seq(v);
    }
    for v in ["u1", "u2"] {
        sc.string(v);
    }
    let n1 = sc.index("n1", symbolic, 10, rng);
    let n2 = sc.index("n2", symbolic, 10, rng);
    let m1 = sc.index("m1", symbolic, 10, rng);
    let m2 = sc.index("m2", symbolic, 10, rng);
    let (e1, e2) = (random_regex(rng), random_regex(rng));
    sc.assert(&format!("(str.in_re u1 {})", e1.to_smtlib()));
    sc.assert(&format!("(= s2 (seq.update (seq.update s1 {n1} u1) {n2} u1))"));
    sc.assert(&format!("(= u2 (str.++ (seq.nth s2 {m1}) (seq.nth s2 {m2})))"));
    sc.assert(&format!("(str.in_re u2 {})", e2.to_smtlib()));
    sc.assert("(< (seq.len s2) (str.len u2))");
}

fn template2(sc: &mut Script, symbolic: bool, rng: &mut impl Rng) {
    for v in ["s1", "s2", "s3"] {
        sc.seq(v);
    }
    for v in ["u1", "u2", "u3"] {
        sc.string(v);
    }
    let mut idx = |name: &str, sc: &mut Script| sc.index(name, symbolic, 10, rng);
    let n: Vec<String> = ["n1", "n2", "n3", "n4"].iter().map(|v| idx(v, sc)).collect();
    let len: Vec<String> = ["len1", "len2"].iter().map(|v| idx(v, sc)).collect();
    let m: Vec<String> = ["m1", "m2", "m3", "m4"].iter().map(|v| idx(v, sc)).collect();
    let (e1, e2) = (random_regex(rng), random_regex(rng));
    sc.assert(&format!("(str.in_re u1 {})", e1.to_smtlib()));
    sc.assert(&format!("(= s2 (seq.update (seq.update s1 {} u1) {} u2))", n[0], n[1]));
    sc.assert(&format!(
        "(= s3 (seq.++ (seq.extract s2 {} {}) (seq.extract s2 {} {})))",
        n[2], len[0], n[3], len[1]
    ));
    sc.assert(&format!(
        "(= u3 (str.++ (seq.nth s3 {}) (seq.nth s3 {}) (seq.nth s3 {}) (seq.nth s3 {})))",
        m[0], m[1], m[2], m[3]
    ));
    sc.assert(&format!("(str.in_re u3 {})", e2.to_smtlib()));
    sc.assert("(< (seq.len s3) (+ (str.len u3) 1))");
}

/// A chain of writes followed by reads of the intermediate sequences. The
/// written strings `u_k` and the read strings `v_k` are distinct variables,
/// which keeps the script straight-line.
fn template3(sc: &mut Script, symbolic: bool, rng: &mut impl Rng) {
    let writes = rng.gen_range(0..=20usize);
    let reads = rng.gen_range(0..=20usize);
    for k in 0..=writes {
        sc.seq(&format!("s{k}"));
    }
    for k in 1..=writes {
        sc.string(&format!("u{k}"));
        let m = sc.index(&format!("m{k}"), symbolic, 5, rng);
        sc.assert(&format!("(= s{k} (seq.update s{} {m} u{k}))", k - 1));
    }
    for k in 1..=reads {
        sc.string(&format!("v{k}"));
        let n = sc.index(&format!("n{k}"), symbolic, 5, rng);
        let e = random_regex(rng);
        sc.assert(&format!("(= v{k} (seq.nth s{} {n}))", k.min(writes)));
        sc.assert(&format!("(str.in_re v{k} {})", e.to_smtlib()));
    }
}

/// Instantiates template 1, 2 or 3. The same arguments always give the same
/// script text.
pub fn gen_template(template: u8, seed: u64, symbolic: bool) -> BenchInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(template as u64));
    let mut sc = Script::new();
    match template {
        1 => template1(&mut sc, symbolic, &mut rng),
        2 => template2(&mut sc, symbolic, &mut rng),
        _ => template3(&mut sc, symbolic, &mut rng),
    }
    sc.finish(template, seed, symbolic)
}

/// 140 instances: 40 of template 1 and 40 of template 2 (half with symbolic
/// indices), and 60 of template 3 with constant indices.
pub fn template_suite(seed: u64) -> Vec<BenchInstance> {
    let mut out = Vec::new();
    for template in [1u8, 2] {
        for k in 0..40 {
            out.push(gen_template(template, seed + k, k < 20));
        }
    }
    for k in 0..60 {
        out.push(gen_template(3, seed + k, false));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRecord {
    pub instance: String,
    pub verdict: String,
    pub time_ms: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchSummary {
    pub sat: usize,
    pub unsat: usize,
    pub solved: usize,
    pub unknown: usize,
    /// Mean time over solved instances, in milliseconds.
    pub avg_time_ms: f64,
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut s = BenchSummary::default();
    let mut total = 0u64;
    for r in records {
        match r.verdict.as_str() {
            "sat" => s.sat += 1,
            "unsat" => s.unsat += 1,
            _ => s.unknown += 1,
        }
        if r.verdict == "sat" || r.verdict == "unsat" {
            total += r.time_ms;
        }
    }
    s.solved = s.sat + s.unsat;
    if s.solved > 0 {
        s.avg_time_ms = total as f64 / s.solved as f64;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check_straight_line, normalize, parse_script};

    #[test]
    fn deterministic() {
        for t in 1..=3 {
            assert_eq!(gen_template(t, 7, false), gen_template(t, 7, false));
            assert_eq!(gen_template(t, 7, true).script, gen_template(t, 7, true).script);
        }
        assert_ne!(gen_template(1, 7, false).script, gen_template(1, 8, false).script);
    }

    #[test]
    fn instances_parse_and_are_straight_line() {
        for inst in template_suite(0) {
            let s = parse_script(&inst.script).unwrap_or_else(|e| panic!("{}: {e}", inst.name));
            assert!(check_straight_line(&normalize(&s)).is_ok(), "{}", inst.name);
            assert_eq!(s.decls.len(), inst.seq_vars + inst.str_vars + inst.int_vars);
        }
    }

    #[test]
    fn template1_shape() {
        let inst = gen_template(1, 7, false);
        assert!(inst.script.contains("(seq.update (seq.update s1"));
        assert!(inst.script.contains("(< (seq.len s2) (str.len u2))"));
        assert_eq!(inst.int_vars, 0);
        assert_eq!(gen_template(1, 7, true).int_vars, 4);
    }

    #[test]
    fn summary() {
        let r = |v: &str, t| BenchRecord {
            instance: "x".into(),
            verdict: v.into(),
            time_ms: t,
        };
        let s = summarize(&[r("sat", 10), r("unsat", 30), r("unknown", 1000)]);
        assert_eq!((s.sat, s.unsat, s.solved, s.unknown), (1, 1, 2, 1));
        assert_eq!(s.avg_time_ms, 20.0);
        assert_eq!(summarize(&[]), BenchSummary::default());
    }
}
