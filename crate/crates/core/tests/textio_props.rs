use deriver_core::document::new_document;
use deriver_core::term::Sort;
use deriver_core::textio::{parse_document, parse_judgment, parse_term, print_document, print_term};
use deriver_testkit::gen::{DocGen, TermGen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn doc_from_seed(seed: u64) -> deriver_core::document::DerivationDoc {
    DocGen::default().document(&mut StdRng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_print_on_documents(seed in any::<u64>()) {
        let doc = doc_from_seed(seed);
        let text = print_document(&doc);
        let back = parse_document(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(back.eq_up_to_ids(&doc), "{}", text);
        // printing is a function of the document, so reprinting is stable
        prop_assert_eq!(print_document(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_inverts_print_on_terms(seed in any::<u64>(), logic in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = TermGen::with_holes(logic, 0.1);
        let sorts: &[Sort] = if logic { &[Sort::Prop, Sort::Ctx] } else { &[Sort::Expr, Sort::Type, Sort::Ctx] };
        for &sort in sorts {
            let t = g.term(&mut rng, sort, 4);
            let text = print_term(&t);
            prop_assert_eq!(parse_term(sort, &text), Ok(t), "{}", text);
        }
    }

    #[test]
    fn equal_documents_print_identically(seed in any::<u64>()) {
        let a = doc_from_seed(seed);
        let b = a.renumbered();
        prop_assert_eq!(print_document(&a), print_document(&b));
    }

    #[test]
    fn parse_errors_lie_within_the_input(text in "[a-z0-9 +()\\[\\]:|\\-=>/\\\\~?$_,]{0,30}") {
        for kind in [None, Some(deriver_core::term::JudgmentKind::Typing)] {
            if let Err(e) = parse_judgment(&text, kind) {
                prop_assert!(!e.expected.is_empty());
                prop_assert_eq!(e.span.start.line, 1);
                prop_assert!(e.span.start.col >= 1);
                prop_assert!(e.span.start.col <= text.chars().count() + 1);
                prop_assert!(e.span.start <= e.span.end);
            }
        }
    }

    #[test]
    fn document_errors_lie_within_the_input(seed in any::<u64>(), cut in 0usize..400, junk in "[ a-z+#:?]{0,6}") {
        let text = print_document(&doc_from_seed(seed));
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let mutated = format!("{}{}{}", &text[..at], junk, &text[at..]);
        if let Err(e) = parse_document(&mutated) {
            let lines: Vec<&str> = mutated.lines().collect();
            let span = e.span();
            prop_assert!(span.start.line >= 1 && span.start.line <= lines.len() + 1, "{e}");
            if let Some(line) = lines.get(span.start.line - 1) {
                prop_assert!(span.start.col <= line.chars().count() + 1, "{e}");
            }
            if let deriver_core::textio::DocParseError::Syntax(p) = &e {
                prop_assert!(!p.expected.is_empty());
            }
        }
    }
}

#[test]
fn fmt_is_idempotent_on_golden_files() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden");
    let mut seen = 0;
    for sub in [dir.clone(), dir.join("prop-nd")] {
        for entry in std::fs::read_dir(sub).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_none_or(|x| x != "deriv") {
                continue;
            }
            let Ok(doc) = parse_document(&std::fs::read_to_string(&path).unwrap()) else {
                continue;
            };
            let once = print_document(&doc);
            let twice = print_document(&parse_document(&once).unwrap());
            assert_eq!(once, twice, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 17);
}

#[test]
fn fresh_document_text() {
    let doc = new_document("prop-nd").unwrap();
    assert_eq!(print_document(&doc), "system prop-nd\nderive:\n  ?  by ?\n");
}
