use normspec::asp::{AspError, emit_search, emit_specification, RootItem, SearchSpec};
use normspec::knowledge::{Instance, Literal};
use normspec::syntax::{parse_str, Phrase};
use normspec::types::Registry;
use normspec::Name;

fn registry(src: &str) -> Registry {
    let mut reg = Registry::new();
    for p in parse_str(src).unwrap() {
        if let Phrase::Declarations(ds) = p {
            reg = reg.apply_declarations(&ds).unwrap();
        }
    }
    reg
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const CONTROLS: &str = r#"
Fact user Identified by String.
Fact dataset Identified by String.
Fact controls Identified by user * dataset
  Derived from (Foreach dataset:
    controls(user("Admin"),dataset)
      Where Not(Exists user: user != user("Admin")
        && controls(user,dataset))).
"#;

#[test]
fn controls_rules_match_the_reference_encoding() {
    let text = squash(&emit_specification(&registry(CONTROLS)).unwrap());
    for expected in [
        r#"in((derived,controls(user("Admin"),dataset(A))),S) :- state(S) ; not 0 < #count{ user(B) : #true ,not user(B) = user("Admin") ,in((holds,controls(user(B),dataset(A))),S) ,in((enum,user(B)),S) } ; in((enum,dataset(A)),S)."#,
        "in((enum,controls(user(A),dataset(B))),S) :- state(S) ; in((holds,controls(user(A),dataset(B))),S).",
        "in((holds,I),S) :- in((derived,I),S) ; not in((suppressed,I),S) ; not in((terminated,I),S).",
    ] {
        assert!(text.contains(&squash(expected)), "missing {expected}\nin\n{text}");
    }
}

#[test]
fn emission_is_deterministic() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/chain.eflint")).unwrap();
    let reg = registry(&src);
    assert_eq!(emit_specification(&reg).unwrap(), emit_specification(&reg).unwrap());
}

#[test]
fn hyphenated_names_are_mangled_with_a_table() {
    let reg = registry("Fact object Identified by String. Fact min-price-of Identified by object * int.");
    let text = emit_specification(&reg).unwrap();
    assert!(text.contains("% name min_price_of = min-price-of"));
    assert!(text.contains("in((enum,min_price_of(object(A),int(B))),S)"));
    assert!(!text.lines().filter(|l| !l.starts_with('%')).any(|l| l.contains("min-price")));
}

#[test]
fn search_program_sections() {
    let reg = registry(
        "Fact bidder Identified by String. Fact object Identified by String. Fact price Identified by Int.
         Fact min-price-of Identified by object * price.
         Act raise-hand Actor bidder.",
    );
    let s = |t: &str, v: &str| Instance::atomic(Name::new(t), Literal::str(v));
    let spec = SearchSpec {
        breadth: vec![Name::new("raise-hand")],
        depth: 1000,
        root: vec![
            RootItem::Create(s("bidder", "Amy")),
            RootItem::Create(Instance::product(
                Name::new("min-price-of"),
                vec![s("object", "Vase"), Instance::atomic(Name::new("price"), Literal::Num(200))],
            )),
        ],
        criterion: vec![
            "counterexample :- in((holds, bid(X,Obj,Price)), _) ; X != Y ; in((holds, bid(Y,Obj,Price)), _).".into(),
        ],
    };
    let text = emit_search(&reg, &spec).unwrap();
    let squashed = squash(&text);
    for expected in [
        "1 = { choose(I,S) : in((enabled,I), S), I = raise_hand(Actor) } :- state(S); state(S + 1).",
        "in((trigger,I), S) :- choose(I,S).",
        "{ state(S) } :- S = 1..1000.",
        "state(S) :- 1 <= S ; state(S + 1).",
        r#"in((create,bidder("Amy")),1)."#,
        r#"in((create,min_price_of(object("Vase"),price(200))),1)."#,
        ":- counterexample.",
    ] {
        assert!(squashed.contains(&squash(expected)), "missing {expected}\nin\n{text}");
    }
    let order: Vec<usize> =
        ["% breadth", "% depth", "% root", "% criterion"].iter().map(|h| text.find(h).unwrap()).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn corpus_specifications_emit_or_report() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let mut names: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "eflint"))
        .collect();
    names.sort();
    for path in names {
        let src = std::fs::read_to_string(&path).unwrap();
        let reg = registry(&src);
        match emit_specification(&reg) {
            Ok(text) => assert!(text.contains("in((holds,I),S)")),
            Err(e) => {
                let file = path.file_name().unwrap().to_str().unwrap();
                match file {
                    "auction.eflint" => assert!(matches!(e, AspError::UnsupportedExpression(_)), "{e}"),
                    "open_types.eflint" => assert!(matches!(e, AspError::OpenInfiniteEnumeration(_)), "{e}"),
                    _ => panic!("{file}: {e}"),
                }
            }
        }
    }
}
