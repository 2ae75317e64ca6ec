//! The `deriver` command: batch checking, formatting, rule inspection and
//! the session server.
//!
//! Exit codes: 0 complete and correct, 1 incomplete (holes remain), 2 errors,
//! 3 parse or usage error. With several files the worst code wins.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use deriver_core::rules::{builtin_system, group_by_category, list_rules, rule_doc, RuleSystem, BUILTIN_IDS};
use deriver_core::textio::{
    human_parse_error, human_report, json_parse_error, json_report, parse_document, parse_document_with_spans,
    print_document,
};
use deriver_core::verifier::{verify_document, TreeStatus};
use serde_json::Value;

pub const EXIT_CORRECT: i32 = 0;
pub const EXIT_INCOMPLETE: i32 = 1;
pub const EXIT_ERRORS: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "deriver", version, about = "Check, format and edit derivation documents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify documents and report per-node errors.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Print the machine-readable report instead of text.
        #[arg(long)]
        json: bool,
        /// Treat remaining holes as failure (exit 2).
        #[arg(long)]
        strict: bool,
    },
    /// Print a document in canonical form.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
    /// List the rules of a system.
    Rules {
        system: String,
        #[arg(long, default_value = "")]
        query: String,
        #[arg(long)]
        category: Option<String>,
    },
    /// Show the documentation of one rule.
    Doc { system: String, rule: String },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// Whether human output may use ANSI colors.
pub fn color_enabled(is_terminal: bool) -> bool {
    is_terminal && std::env::var_os("DERIVER_NO_COLOR").is_none()
}

pub fn exit_code(status: TreeStatus, strict: bool) -> i32 {
    match status {
        TreeStatus::CompleteCorrect => EXIT_CORRECT,
        TreeStatus::Incomplete if strict => EXIT_ERRORS,
        TreeStatus::Incomplete => EXIT_INCOMPLETE,
        TreeStatus::HasErrors => EXIT_ERRORS,
    }
}

/// Output of checking one file.
struct Checked {
    code: i32,
    text: String,
    json: Value,
}

fn check_file(path: &PathBuf, strict: bool, color: bool) -> Checked {
    let name = path.display().to_string();
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            return Checked {
                code: EXIT_USAGE,
                text: format!("{name}: cannot read: {e}\n"),
                json: serde_json::json!({"file": name, "error": "IoError", "message": e.to_string()}),
            }
        }
    };
    match parse_document_with_spans(&source) {
        Ok((doc, spans)) => {
            let report = verify_document(&doc);
            Checked {
                code: exit_code(report.tree_status, strict),
                text: human_report(&name, &doc, &spans, &report, color),
                json: json_report(&name, &doc, &spans, &report),
            }
        }
        Err(e) => Checked {
            code: EXIT_USAGE,
            text: human_parse_error(&name, &e),
            json: json_parse_error(&name, &e),
        },
    }
}

fn system(id: &str, err: &mut dyn Write) -> Option<std::sync::Arc<RuleSystem>> {
    let sys = builtin_system(id);
    if sys.is_none() {
        let _ = writeln!(err, "unknown system `{id}`; known systems: {}", BUILTIN_IDS.join(", "));
    }
    sys
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. `color` enables ANSI colors in human-readable output.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_CORRECT
            } else {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            };
        }
    };
    match cli.command {
        Command::Check { files, json, strict } => {
            // check in parallel, print in argument order
            let results: Vec<Checked> = std::thread::scope(|s| {
                let handles: Vec<_> = files
                    .iter()
                    .map(|f| s.spawn(move || check_file(f, strict, color)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("checker panicked")).collect()
            });
            if json {
                let value = match results.as_slice() {
                    [one] => one.json.clone(),
                    many => Value::Array(many.iter().map(|r| r.json.clone()).collect()),
                };
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json"));
            } else {
                for r in &results {
                    let _ = write!(out, "{}", r.text);
                }
            }
            results.iter().map(|r| r.code).max().unwrap_or(EXIT_CORRECT)
        }
        Command::Fmt { file, write } => {
            let name = file.display().to_string();
            let source = match std::fs::read_to_string(&file) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "{name}: cannot read: {e}");
                    return EXIT_USAGE;
                }
            };
            let doc = match parse_document(&source) {
                Ok(d) => d,
                Err(e) => {
                    let _ = write!(err, "{}", human_parse_error(&name, &e));
                    return EXIT_USAGE;
                }
            };
            let text = print_document(&doc);
            if write {
                if text != source {
                    if let Err(e) = std::fs::write(&file, &text) {
                        let _ = writeln!(err, "{name}: cannot write: {e}");
                        return EXIT_USAGE;
                    }
                }
            } else {
                let _ = write!(out, "{text}");
            }
            EXIT_CORRECT
        }
        Command::Rules { system: id, query, category } => {
            let Some(sys) = system(&id, err) else {
                return EXIT_USAGE;
            };
            match list_rules(&sys, &query, category.as_deref()) {
                Ok(rules) => {
                    for (cat, rules) in group_by_category(&rules) {
                        let _ = writeln!(out, "{cat}:");
                        for r in rules {
                            let _ = writeln!(out, "  {:<10} {}", r.name, r.schema);
                        }
                    }
                    EXIT_CORRECT
                }
                Err(e) => {
                    let _ = writeln!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
        Command::Doc { system: id, rule } => {
            let Some(sys) = system(&id, err) else {
                return EXIT_USAGE;
            };
            match sys.rule(&rule) {
                Some(r) => {
                    let _ = write!(out, "{}", rule_doc(r, None).render(color));
                    EXIT_CORRECT
                }
                None => {
                    let names: Vec<&str> = sys.rules.iter().map(|r| r.name.as_str()).collect();
                    let _ = writeln!(err, "no rule `{rule}` in {id}; rules: {}", names.join(", "));
                    EXIT_USAGE
                }
            }
        }
        Command::Serve { port, host } => {
            let addr: SocketAddr = match format!("{host}:{port}").parse() {
                Ok(a) => a,
                Err(e) => {
                    let _ = writeln!(err, "bad address {host}:{port}: {e}");
                    return EXIT_USAGE;
                }
            };
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    let _ = writeln!(err, "cannot start runtime: {e}");
                    return EXIT_USAGE;
                }
            };
            let _ = writeln!(out, "listening on http://{addr}");
            let _ = out.flush();
            match rt.block_on(deriver_service::serve(addr)) {
                Ok(()) => EXIT_CORRECT,
                Err(e) => {
                    let _ = writeln!(err, "server error: {e}");
                    EXIT_USAGE
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("deriver").chain(args.iter().copied()), &mut out, &mut err, false);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn strict_turns_holes_into_failure() {
        assert_eq!(exit_code(TreeStatus::Incomplete, false), 1);
        assert_eq!(exit_code(TreeStatus::Incomplete, true), 2);
        assert_eq!(exit_code(TreeStatus::CompleteCorrect, true), 0);
        assert_eq!(exit_code(TreeStatus::HasErrors, false), 2);
    }

    #[test]
    fn usage_errors_exit_three() {
        let (code, _, err) = run_str(&["check"]);
        assert_eq!(code, 3);
        assert!(!err.is_empty());
        assert_eq!(run_str(&["frobnicate"]).0, 3);
        assert_eq!(run_str(&["rules", "bogus"]).0, 3);
        assert_eq!(run_str(&["doc", "prop-nd", "Nope"]).0, 3);
        assert_eq!(run_str(&["rules", "prop-nd", "--category", "Nope"]).0, 3);
        assert_eq!(run_str(&["serve", "--host", "not a host"]).0, 3);
    }

    #[test]
    fn help_is_not_an_error() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("check"));
    }

    #[test]
    fn rules_search_and_doc() {
        let (code, out, _) = run_str(&["rules", "prop-nd", "--query", "and"]);
        assert_eq!(code, 0);
        for r in ["AndI", "AndE1", "AndE2"] {
            assert!(out.contains(r), "{out}");
        }
        let (code, out, _) = run_str(&["doc", "alfa-eval", "E-Plus"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("E-Plus"), "{out}");
    }
}
