use normspec::syntax::*;
use normspec::Name;
use proptest::prelude::*;

fn name() -> impl Strategy<Value = Name> {
    prop::sample::select(vec!["bid", "min-price-of", "x'", "x1", "int", "[valid marriage]", "a-b'", "object"])
        .prop_map(|s| Name::new(s.trim_start_matches('[').trim_end_matches(']')))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-1000i64..1000).prop_map(Expr::Int),
        prop::sample::select(vec!["Alice", "two words", "q\"uote", "", "back\\slash", "lower"]).prop_map(|s| Expr::Str(s.into())),
        any::<bool>().prop_map(Expr::Bool),
        name().prop_map(Expr::Ref),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 40, 4, |inner| {
        let op = prop::sample::select(vec![
            BinOp::Or, BinOp::And, BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge,
            BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div,
        ]);
        let arg = prop_oneof![
            inner.clone().prop_map(Arg::Pos),
            (name(), inner.clone()).prop_map(|(n, e)| Arg::Named(n, e)),
        ];
        prop_oneof![
            (name(), prop::collection::vec(arg, 0..3)).prop_map(|(n, a)| Expr::App(n, a)),
            (inner.clone(), name()).prop_map(|(e, f)| Expr::Proj(Box::new(e), f)),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::bin(o, l, r)),
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (prop::sample::select(vec![Builtin::Holds, Builtin::Enabled, Builtin::Violated]), inner.clone())
                .prop_map(|(b, e)| Expr::Builtin(b, Box::new(e))),
            (
                prop::sample::select(vec![Quantifier::Foreach, Quantifier::Forall, Quantifier::Exists]),
                prop::collection::vec(name(), 1..3),
                inner.clone()
            )
                .prop_map(|(q, v, e)| Expr::Quant(q, v, Box::new(e))),
            (prop::sample::select(vec![Aggregate::Count, Aggregate::Sum, Aggregate::Max, Aggregate::Min]), inner.clone())
                .prop_map(|(a, e)| Expr::Agg(a, Box::new(e))),
            (inner.clone(), inner).prop_map(|(l, r)| Expr::When(Box::new(l), Box::new(r))),
        ]
    })
}

fn phrase() -> impl Strategy<Value = Phrase> {
    prop_oneof![
        (prop::sample::select(vec![StatementKind::Create, StatementKind::Terminate, StatementKind::Trigger]), expr())
            .prop_map(|(k, e)| Phrase::Statement(k, e)),
        expr().prop_map(Phrase::BoolQuery),
        expr().prop_map(Phrase::InstanceQuery),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn expressions_round_trip(e in expr()) {
        let text = print_expr(&e);
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn phrases_round_trip(ps in prop::collection::vec(phrase(), 1..4)) {
        let text = print_program(&ps);
        let back = parse_str(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, ps, "{}", text);
    }
}

#[test]
fn corpus_files_round_trip() {
    let mut pending = vec![std::path::PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))];
    let mut files = Vec::new();
    while let Some(dir) = pending.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                pending.push(path);
            } else {
                files.push(path);
            }
        }
    }
    assert!(files.len() > 30);
    for path in files {
        let src = std::fs::read_to_string(&path).unwrap();
        let parsed = parse_str(&src).unwrap();
        let printed = print_program(&parsed);
        assert_eq!(parse_str(&printed).unwrap(), parsed, "{}", path.display());
        assert_eq!(print_program(&parse_str(&printed).unwrap()), printed, "{}", path.display());
    }
}
