//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Runs without the test harness.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use deriver_core::document::{apply_edit, DerivationDoc, EditCommand, Feedback};
use deriver_core::rules::{builtin_system, Locus};
use deriver_core::term::{Judgment, Term};
use deriver_core::textio::{parse_document, print_document};
use deriver_core::verifier::{apply_and_verify, verify_document, TreeStatus};
use deriver_testkit::alfa::{eval, random_closed_term, typecheck, Expr};
use deriver_testkit::gen::{random_edit, DocGen};
use deriver_testkit::mutate::{mutate, punch_hole, Mutation};
use deriver_testkit::nd::{prove, Prop};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../golden")
}

fn deriv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "deriv"))
        .collect();
    v.sort();
    v
}

fn doc_of(system: &str, root: deriver_core::document::DerivNode) -> DerivationDoc {
    DerivationDoc::from_parts(builtin_system(system).unwrap(), Feedback::Full, vec![], vec![], root).unwrap()
}

/// The shared corpus: 200 closed well-typed terms of depth at most 5.
fn corpus() -> Vec<Expr> {
    let mut rng = StdRng::seed_from_u64(0xACCE);
    (0..200).map(|_| random_closed_term(&mut rng, 5).0).collect()
}

fn typing_oracle() -> Outcome {
    let start = Instant::now();
    let mut failures = 0;
    for e in corpus() {
        let (_, tree) = typecheck(&[], &e).ok_or("oracle rejected a generated term")?;
        if verify_document(&doc_of("alfa-typing", tree)).tree_status != TreeStatus::CompleteCorrect {
            failures += 1;
        }
    }
    let took = start.elapsed();
    if failures > 0 {
        return Err(format!("{failures}/200 derivations not CompleteCorrect"));
    }
    if took >= Duration::from_secs(5) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("200/200 CompleteCorrect in {took:?}"))
}

fn eval_oracle() -> Outcome {
    let mut failures = Vec::new();
    for (i, e) in corpus().into_iter().enumerate() {
        let (v, tree) = eval(&e).ok_or("interpreter got stuck")?;
        if verify_document(&doc_of("alfa-eval", tree.clone())).tree_status != TreeStatus::CompleteCorrect {
            failures.push(format!("#{i} not CompleteCorrect"));
            continue;
        }
        let wrong = match v {
            Expr::Num(n) => Term::num(n + 1),
            Expr::Bool(b) => Term::Bool(!b),
            // a closure has no successor; any number is wrong for it
            _ => Term::num(0),
        };
        let mut bad = tree;
        bad.judgment = Judgment::eval(e.to_term(), wrong);
        let d = doc_of("alfa-eval", bad);
        let r = verify_document(&d);
        let at_root = r.status(d.root.id).map(|s| s.errors().to_vec()).unwrap_or_default();
        if r.tree_status != TreeStatus::HasErrors
            || !at_root
                .iter()
                .any(|e| matches!(e.locus, Locus::SideCondition(_) | Locus::Conclusion))
        {
            failures.push(format!("#{i} mutation not caught at the root"));
        }
    }
    if failures.is_empty() {
        Ok("200/200 verify; 200/200 value mutations caught at the root".into())
    } else {
        Err(failures.join("; "))
    }
}

fn mutation_localization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x10CA1);
    let kinds = [Mutation::WrongRule, Mutation::ChangedType, Mutation::ChangedLiteral];
    let (mut tried, mut bad) = (0, Vec::new());
    for e in corpus() {
        let trees = [
            ("alfa-typing", typecheck(&[], &e).unwrap().1),
            ("alfa-eval", eval(&e).unwrap().1),
        ];
        for (sys, tree) in trees {
            let doc = doc_of(sys, tree);
            let first = rng.gen_range(0..kinds.len());
            let found = (0..kinds.len())
                .map(|k| kinds[(first + k) % kinds.len()])
                .find_map(|k| mutate(&mut rng, &doc, k).map(|m| (k, m)));
            let Some((kind, (mutated, node))) = found else { continue };
            tried += 1;
            let r = verify_document(&mutated);
            let allowed: BTreeSet<_> = std::iter::once(node).chain(mutated.parent_of(node)).collect();
            if r.tree_status != TreeStatus::HasErrors {
                bad.push(format!("{kind:?} at {node} not detected"));
            } else if let Some(e) = r.errors().find(|e| !allowed.contains(&e.node)) {
                bad.push(format!("{kind:?} at {node} reported at {}", e.node));
            }
        }
    }
    if bad.is_empty() {
        Ok(format!("{tried}/{tried} mutations detected and localized"))
    } else {
        Err(format!("{} of {tried}: {}", bad.len(), bad.join("; ")))
    }
}

fn message_reproduction() -> Outcome {
    const MESSAGE: &str = "Expected a function term, but found a let-expression.";
    let text = std::fs::read_to_string(golden_dir().join("let-app.deriv")).map_err(|e| e.to_string())?;
    let doc = parse_document(&text).map_err(|e| e.to_string())?;
    let r = verify_document(&doc);
    let found = r.errors().find(|e| e.message.contains(MESSAGE)).cloned();
    match found {
        Some(e) => Ok(format!("{} {}: {}", e.node, e.locus, e.message)),
        None => Err(format!("messages: {:?}", r.errors().map(|e| &e.message).collect::<Vec<_>>())),
    }
}

fn hole_monotonicity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x4015);
    let mut pairs = 0;
    while pairs < 1000 {
        let (e, _) = random_closed_term(&mut rng, 5);
        let doc = if rng.gen_bool(0.5) {
            doc_of("alfa-typing", typecheck(&[], &e).unwrap().1)
        } else {
            doc_of("alfa-eval", eval(&e).unwrap().1)
        };
        let Some((holed, node, path)) = punch_hole(&mut rng, &doc) else { continue };
        pairs += 1;
        let r = verify_document(&holed);
        if let Some((id, _)) = r.nodes.iter().find(|(_, n)| n.status.is_incorrect()) {
            return Err(format!("hole at {node} {path} made {id} incorrect"));
        }
    }
    Ok("1000 pairs, no node became Incorrect".into())
}

fn incremental_equals_batch() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x1BC4);
    let (mut pairs, mut rejected) = (0, 0);
    while pairs < 500 {
        let doc = DocGen::default().document(&mut rng);
        let report = verify_document(&doc);
        let cmd = random_edit(&mut rng, &doc);
        // only edits the document accepts form a pair
        let Ok(update) = apply_and_verify(&doc, &report, &cmd) else {
            rejected += 1;
            continue;
        };
        pairs += 1;
        if update.report != verify_document(&update.doc) {
            return Err(format!("differs after {cmd:?}"));
        }
    }
    Ok(format!("500 accepted edits agree node-for-node ({rejected} rejected edits skipped)"))
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7219);
    for i in 0..1000 {
        let doc = DocGen::default().document(&mut rng);
        let text = print_document(&doc);
        let back = parse_document(&text).map_err(|e| format!("#{i}: {e}"))?;
        if !back.eq_up_to_ids(&doc) {
            return Err(format!("#{i} differs:\n{text}"));
        }
        if print_document(&back) != text {
            return Err(format!("#{i} reprint differs"));
        }
    }
    let mut files = deriv_files(&golden_dir());
    files.extend(deriv_files(&golden_dir().join("prop-nd")));
    let mut formatted = 0;
    for f in files {
        let Ok(doc) = parse_document(&std::fs::read_to_string(&f).unwrap()) else { continue };
        let once = print_document(&doc);
        let twice = print_document(&parse_document(&once).map_err(|e| e.to_string())?);
        if once != twice {
            return Err(format!("fmt not idempotent on {}", f.display()));
        }
        formatted += 1;
    }
    Ok(format!("1000 documents round-trip; fmt idempotent on {formatted} golden files"))
}

fn sequent(doc: &DerivationDoc) -> Option<(Vec<Prop>, Prop)> {
    let Judgment::Entail { ctx, prop } = &doc.root.judgment else { return None };
    let ctx = ctx.children().into_iter().map(Prop::from_term).collect::<Option<Vec<_>>>()?;
    Some((ctx, Prop::from_term(prop)?))
}

fn prop_nd_suite() -> Outcome {
    let files = deriv_files(&golden_dir().join("prop-nd"));
    if files.len() != 15 {
        return Err(format!("{} files, expected 15", files.len()));
    }
    let (a, b, c) = (Prop::atom("A"), Prop::atom("B"), Prop::atom("C"));
    let mut required = vec![
        (vec![Prop::and(a.clone(), b.clone())], Prop::and(b.clone(), a.clone())),
        (vec![], Prop::imp(a.clone(), Prop::imp(b.clone(), a.clone()))),
        (
            vec![Prop::or(a.clone(), b.clone()), Prop::imp(a.clone(), c.clone()), Prop::imp(b.clone(), c.clone())],
            c.clone(),
        ),
    ];
    let mut swaps = 0;
    for f in &files {
        let name = f.file_name().unwrap().to_string_lossy();
        let doc = parse_document(&std::fs::read_to_string(f).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        if verify_document(&doc).tree_status != TreeStatus::CompleteCorrect {
            return Err(format!("{name} is not CompleteCorrect"));
        }
        let (ctx, goal) = sequent(&doc).ok_or(format!("{name}: not a closed sequent"))?;
        if prove(&ctx, &goal, 6).is_none() {
            return Err(format!("{name}: not derivable by search of depth 6"));
        }
        required.retain(|s| *s != (ctx.clone(), goal.clone()));
        for n in doc.nodes() {
            for r in &doc.system.rules {
                if n.rule == deriver_core::document::RuleRef::Rule(r.name.clone()) {
                    continue;
                }
                let cmd = EditCommand::SetRule { node: n.id, rule: r.name.clone() };
                let bad = apply_edit(&doc, &cmd).map_err(|e| e.to_string())?;
                swaps += 1;
                if verify_document(&bad).tree_status != TreeStatus::HasErrors {
                    return Err(format!("{name}: {} by {} not rejected", n.id, r.name));
                }
            }
        }
    }
    if !required.is_empty() {
        return Err(format!("missing sequents: {required:?}"));
    }
    Ok(format!("15/15 verify and are derivable; {swaps}/{swaps} rule swaps rejected"))
}

fn cli_exit_codes() -> Outcome {
    let mut files = deriv_files(&golden_dir());
    files.extend(deriv_files(&golden_dir().join("prop-nd")));
    let mut seen = BTreeSet::new();
    for f in &files {
        let expected = match parse_document(&std::fs::read_to_string(f).unwrap()) {
            Err(_) => 3,
            Ok(doc) => match verify_document(&doc).tree_status {
                TreeStatus::CompleteCorrect => 0,
                TreeStatus::Incomplete => 1,
                TreeStatus::HasErrors => 2,
            },
        };
        let code = Command::new(env!("CARGO_BIN_EXE_deriver"))
            .args(["check", f.to_str().unwrap()])
            .env("DERIVER_NO_COLOR", "1")
            .output()
            .map_err(|e| e.to_string())?
            .status
            .code();
        if code != Some(expected) {
            return Err(format!("{}: exit {code:?}, expected {expected}", f.display()));
        }
        seen.insert(expected);
    }
    let fixed = [("e-plus.deriv", 0), ("incomplete.deriv", 1), ("broken.deriv", 2), ("unparsable.deriv", 3)];
    for (name, want) in fixed {
        let code = Command::new(env!("CARGO_BIN_EXE_deriver"))
            .args(["check", golden_dir().join(name).to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?
            .status
            .code();
        if code != Some(want) {
            return Err(format!("{name}: exit {code:?}, expected {want}"));
        }
    }
    if seen.len() != 4 {
        return Err(format!("corpus only exercises codes {seen:?}"));
    }
    Ok(format!("{} golden files, codes 0/1/2/3 all exercised", files.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence (typing)", typing_oracle),
        ("oracle equivalence (evaluation)", eval_oracle),
        ("mutation localization", mutation_localization),
        ("let-expression message reproduction", message_reproduction),
        ("hole monotonicity", hole_monotonicity),
        ("incremental = batch", incremental_equals_batch),
        ("round-trip and fmt idempotence", round_trip),
        ("prop-nd spot suite", prop_nd_suite),
        ("cli exit-code contract", cli_exit_codes),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
