use normspec_cli::bench::{bench, check, combo_oracle, csv, execute, phrases, sieve, BenchError, Suite};
use normspec_cli::EngineOptions;

fn run(suite: Suite, n: usize) -> normspec::transition::Session {
    execute(&phrases(suite, n).unwrap(), EngineOptions::default()).unwrap()
}

#[test]
fn chain_8_holds_nine_instances() {
    let s = run(Suite::Chain, 8);
    assert_eq!(s.head().kb.true_instances(&normspec::Name::new("x")).len(), 9);
    check(Suite::Chain, 8, &s).unwrap();
}

#[test]
fn primes_100() {
    let s = run(Suite::Primes, 100);
    assert_eq!(sieve(100).len(), 25);
    check(Suite::Primes, 100, &s).unwrap();
}

#[test]
fn long_scenario_is_n_statements() {
    let ps = phrases(Suite::Long, 7).unwrap();
    let spec = normspec::syntax::parse_str(Suite::Long.spec()).unwrap().len();
    assert_eq!(ps.len() - spec, 7);
    assert!(ps[spec..].iter().all(|p| matches!(p, normspec::syntax::Phrase::Statement(..))));
    check(Suite::Long, 7, &execute(&ps, EngineOptions::default()).unwrap()).unwrap();
}

#[test]
fn every_suite_checks_at_small_sizes() {
    for suite in Suite::ALL {
        for &n in &suite.default_sizes()[..2] {
            check(suite, n, &run(suite, n)).unwrap_or_else(|e| panic!("{e}"));
        }
    }
}

#[test]
fn combo_oracle_by_hand() {
    let (xs, ys) = combo_oracle(1);
    assert_eq!(xs.into_iter().collect::<Vec<_>>(), [0, 1]);
    // (a,b,c) with b < 1 and (a == b || b != c), plus the diagonal
    let mut want = vec![(0, 0, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)];
    want.sort();
    assert_eq!(ys.into_iter().collect::<Vec<_>>(), want);
}

#[test]
fn wrong_answers_abort_timing() {
    let s = run(Suite::Chain, 4);
    assert!(matches!(check(Suite::Chain, 5, &s), Err(BenchError::CorrectnessFailure { .. })));
}

#[test]
fn csv_columns() {
    let rows = bench(Suite::Chain, &[8, 16], 3, EngineOptions::default()).unwrap();
    let text = csv(&rows);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("suite,n,median_ms,runs"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((first[0], first[1], first[3]), ("chain", "8", "3"));
    assert!(first[2].parse::<f64>().unwrap() >= 0.0);
}
