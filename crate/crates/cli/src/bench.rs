//! Timing harness for the five performance suites.
//!
//! Every size is first run once and checked against an independent oracle;
//! only then is it timed. Reported figures are medians of wall-clock runs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use normspec::knowledge::{Elem, Instance, Literal};
use normspec::syntax::{parse_str, ParseError, Phrase};
use normspec::transition::{Session, TransitionError};
use normspec::Name;

use crate::EngineOptions;

pub const CHAIN: &str = "\
Fact x Identified by int Derived from
  (Foreach x: x(x.int - 1) Where 0 < x.int).
";

pub const ARITH: &str = "\
Fact x Identified by Int Derived from
  (Foreach x1, x2: x((x1 + x2) / 2)).
";

// No comma after `(Foreach y: y.x2)`: juxtaposed clauses must parse.
pub const COMBO: &str = "\
Fact x Identified by Int Derived from
  (Foreach y: y.x1), (Foreach y: y.x2)
  (Foreach y: y.x3), (Foreach x: x(x - 1) Where 0 < x)
Fact y Identified by x1 * x2 * x3 Derived from
  (Foreach x: y(x,x,x)),
  (Foreach x1, x2, x3: y(x1,x2,x3)
                Where (x1 == x2 || x2 != x3)
                   && (Exists y: x2 < y.x1)).
";

pub const PRIMES: &str = "\
Fact prime Identified by Int
  Derived from (Foreach int: prime(int)
    Where Not(Exists int1, int2:
      1 Where int1 * int2 == int)).
Event addleq Related to int Creates int
  Syncs with addleq(int - 1) Where 2 < int.
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Chain,
    Arith,
    Combo,
    Long,
    Primes,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Chain, Suite::Arith, Suite::Combo, Suite::Long, Suite::Primes];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Chain => "chain",
            Suite::Arith => "arith",
            Suite::Combo => "combo",
            Suite::Long => "long",
            Suite::Primes => "primes",
        }
    }

    pub fn spec(self) -> &'static str {
        match self {
            Suite::Chain => CHAIN,
            Suite::Arith => ARITH,
            Suite::Combo | Suite::Long => COMBO,
            Suite::Primes => PRIMES,
        }
    }

    pub fn scenario(self, n: usize) -> String {
        match self {
            Suite::Chain | Suite::Combo => format!("+x({n})."),
            Suite::Arith => format!("+x(0).\n+x({n})."),
            Suite::Long => "+x(4).\n".repeat(n),
            Suite::Primes => format!("addleq({n})."),
        }
    }

    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Suite::Chain => vec![8, 16, 32, 64, 128, 256, 512],
            Suite::Arith => vec![0, 4, 8, 16, 32, 64],
            Suite::Combo => (0..=6).collect(),
            Suite::Long => vec![1, 2, 4, 8, 16, 32],
            Suite::Primes => vec![25, 50, 75, 100],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Suite, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s} (expected chain, arith, combo, long or primes)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("{suite} n={n}: {detail}")]
    CorrectnessFailure { suite: Suite, n: usize, detail: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Exec(#[from] TransitionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub suite: Suite,
    pub n: usize,
    pub median_ms: f64,
    pub runs: usize,
}

pub fn phrases(suite: Suite, n: usize) -> Result<Vec<Phrase>, ParseError> {
    let mut ps = parse_str(suite.spec())?;
    ps.extend(parse_str(&suite.scenario(n))?);
    Ok(ps)
}

pub fn execute(phrases: &[Phrase], engine: EngineOptions) -> Result<Session, TransitionError> {
    let mut s = Session::new(engine.config());
    for p in phrases {
        s.exec(p)?;
    }
    Ok(s)
}

fn int_of(i: &Instance) -> Option<i64> {
    match (i.literal(), i.field(0)) {
        (Some(Literal::Num(n)), _) => Some(*n),
        (None, Some(f)) if i.args.len() == 1 => int_of(f),
        _ => None,
    }
}

fn ints(s: &Session, ty: &str) -> BTreeSet<i64> {
    s.head().kb.true_instances(&Name::new(ty)).iter().filter_map(int_of).collect()
}

fn triples(s: &Session) -> BTreeSet<(i64, i64, i64)> {
    let mut out = BTreeSet::new();
    for i in s.head().kb.true_instances(&Name::new("y")) {
        let f: Vec<i64> = i
            .args
            .iter()
            .filter_map(|a| match a {
                Elem::Inst(x) => int_of(x),
                Elem::Lit(Literal::Num(n)) => Some(*n),
                _ => None,
            })
            .collect();
        if let [a, b, c] = f[..] {
            out.insert((a, b, c));
        }
    }
    out
}

/// Closure of {0, n} under integer midpoints.
pub fn arith_oracle(n: i64) -> BTreeSet<i64> {
    let mut set: BTreeSet<i64> = [0, n].into_iter().collect();
    loop {
        let mut next = set.clone();
        for a in &set {
            for b in &set {
                next.insert((a + b) / 2);
            }
        }
        if next == set {
            return set;
        }
        set = next;
    }
}

/// Fixpoint of the combination rules, seeded with x(n).
pub fn combo_oracle(n: i64) -> (BTreeSet<i64>, BTreeSet<(i64, i64, i64)>) {
    let mut xs: BTreeSet<i64> = [n].into_iter().collect();
    let mut ys: BTreeSet<(i64, i64, i64)> = BTreeSet::new();
    loop {
        let (px, py) = (xs.len(), ys.len());
        for &(a, b, c) in &ys.clone() {
            xs.extend([a, b, c]);
        }
        for x in xs.clone() {
            if 0 < x {
                xs.insert(x - 1);
            }
            ys.insert((x, x, x));
        }
        let max_first = ys.iter().map(|t| t.0).max();
        for &a in &xs {
            for &b in &xs {
                for &c in &xs {
                    if (a == b || b != c) && max_first.is_some_and(|m| b < m) {
                        ys.insert((a, b, c));
                    }
                }
            }
        }
        if xs.len() == px && ys.len() == py {
            return (xs, ys);
        }
    }
}

/// Primes up to `n` by the sieve of Eratosthenes.
pub fn sieve(n: usize) -> BTreeSet<i64> {
    let mut composite = vec![false; n + 1];
    let mut out = BTreeSet::new();
    for i in 2..=n {
        if !composite[i] {
            out.insert(i as i64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Compare the final state of one run with the suite's oracle.
pub fn check(suite: Suite, n: usize, s: &Session) -> Result<(), BenchError> {
    let fail = |detail: String| Err(BenchError::CorrectnessFailure { suite, n, detail });
    let ni = n as i64;
    match suite {
        Suite::Chain => {
            let got = ints(s, "x");
            let want: BTreeSet<i64> = (0..=ni).collect();
            if got != want {
                return fail(format!("{} x-instances held, expected {}", got.len(), n + 1));
            }
        }
        Suite::Arith => {
            let (got, want) = (ints(s, "x"), arith_oracle(ni));
            if got != want {
                return fail(format!("x = {got:?}, expected {want:?}"));
            }
        }
        Suite::Combo | Suite::Long => {
            let seed = if suite == Suite::Long { 4 } else { ni };
            let (wx, wy) = combo_oracle(seed);
            let (gx, gy) = (ints(s, "x"), triples(s));
            if gx != wx || gy != wy {
                return fail(format!("{} x and {} y held, expected {} and {}", gx.len(), gy.len(), wx.len(), wy.len()));
            }
            if suite == Suite::Long {
                let statements = parse_str(&suite.scenario(n))?.iter().filter(|p| matches!(p, Phrase::Statement(..))).count();
                if statements != n {
                    return fail(format!("scenario has {statements} statements"));
                }
            }
        }
        Suite::Primes => {
            let (got, want) = (ints(s, "prime"), sieve(n));
            if got != want {
                return fail(format!("{} primes held, expected {}", got.len(), want.len()));
            }
        }
    }
    Ok(())
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[m - 1] + xs[m]) / 2
    } else {
        xs[m]
    }
}

/// Check, then time `runs` executions of each size.
pub fn bench(suite: Suite, sizes: &[usize], runs: usize, engine: EngineOptions) -> Result<Vec<Row>, BenchError> {
    let runs = runs.max(1);
    let mut rows = Vec::new();
    for &n in sizes {
        let ps = phrases(suite, n)?;
        check(suite, n, &execute(&ps, engine)?)?;
        let mut times = Vec::with_capacity(runs);
        for _ in 0..runs {
            let t = Instant::now();
            let s = execute(&ps, engine)?;
            times.push(t.elapsed());
            drop(s);
        }
        rows.push(Row { suite, n, median_ms: median(times).as_secs_f64() * 1e3, runs });
    }
    Ok(rows)
}

pub fn csv(rows: &[Row]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "n", "median_ms", "runs"]).expect("in-memory write");
    for r in rows {
        w.write_record([r.suite.name().to_string(), r.n.to_string(), format!("{:.3}", r.median_ms), r.runs.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

pub fn table(rows: &[Row]) -> String {
    let mut out = format!("{:<8} {:>6} {:>12} {:>5}\n", "suite", "n", "median ms", "runs");
    for r in rows {
        out.push_str(&format!("{:<8} {:>6} {:>12.3} {:>5}\n", r.suite.name(), r.n, r.median_ms, r.runs));
    }
    out
}
