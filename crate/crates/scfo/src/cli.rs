//! Command line front end.
//!
//! Exit codes: 0 for a completed certifying run, 1 for usage or schema
//! errors, 2 when any solver outcome was indeterminate (the run proves
//! nothing), 3 when a verification finds a violation.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::boolfun::{catalog, class_labels, named_function, npn_classes, TruthTable};
use crate::report;
use crate::search::{run_table2, search_scfo, RunKind, SearchOptions, SearchRun};
use crate::verify;

#[derive(Parser)]
#[command(
    name = "scfo",
    version,
    about = "Search and certification for single-cut full-open card protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the canonical function classes for a given arity.
    Classes {
        /// Number of variables (1..=4).
        #[arg(default_value_t = 3)]
        n: usize,
    },
    /// Search all arrangements and shift vectors of a function for a
    /// protocol whose additional cards are all clubs.
    Search {
        /// Catalog name (e.g. eq3) or a raw truth table bitstring in row
        /// index order with x1 most significant (e.g. 0110).
        function: String,
        /// Expected variable count; checked against the parsed function.
        #[arg(long)]
        n: Option<usize>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Skip arrangements whose word classes repeat an earlier one up to
        /// rotation. Audited optimization; off by default.
        #[arg(long)]
        prune: bool,
        /// Stop at the first verified protocol instead of sweeping the
        /// whole space.
        #[arg(long)]
        first: bool,
        /// Additionally enumerate insertions this many clubs beyond each
        /// instance optimum (reported separately).
        #[arg(long, default_value_t = 0)]
        explore_delta: u32,
        /// Output document path (default: <function>.certificate.txt or
        /// <function>.report.txt in the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a per-instance audit trace next to the output document.
        #[arg(long)]
        trace: bool,
    },
    /// Verify a certificate or protocol template document.
    Verify { path: PathBuf },
    /// Reproduce the summary table over the standard two- and
    /// three-variable representatives.
    Table2 {
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        prune: bool,
        /// Also write the machine-readable table to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point used by `main`; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Classes { n } => cmd_classes(n),
        Command::Search {
            function,
            n,
            threads,
            prune,
            first,
            explore_delta,
            out,
            trace,
        } => cmd_search(function, n, threads, prune, first, explore_delta, out, trace),
        Command::Verify { path } => cmd_verify(path),
        Command::Table2 {
            threads,
            prune,
            out,
        } => cmd_table2(threads, prune, out),
    }
}

fn cmd_classes(n: usize) -> i32 {
    use std::io::Write;
    let classes = match npn_classes(n) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let labels = class_labels(n);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut emit = |line: String| writeln!(out, "{line}").is_ok();
    if !emit(format!(
        "{} canonical classes over {} variables (table text, x1 most significant):",
        classes.len(),
        n
    )) {
        return 0;
    }
    for (i, canon) in classes.iter().enumerate() {
        let label = labels.get(canon).cloned().unwrap_or_default();
        if !emit(format!("{:>3}  {}  {}", i + 1, canon.table_text(), label)) {
            // Reader went away (e.g. piped into head); that is not an error.
            return 0;
        }
    }
    0
}

/// Accepts a catalog name or a raw table bitstring.
fn parse_function(spec: &str, expect_n: Option<usize>) -> Result<(TruthTable, Option<String>), String> {
    let (table, name) = if catalog().iter().any(|e| e.name == spec) {
        (
            named_function(spec).expect("name just checked"),
            Some(spec.to_string()),
        )
    } else if spec.chars().all(|c| c == '0' || c == '1') {
        let table: TruthTable = spec
            .parse()
            .map_err(|e| format!("cannot parse truth table {spec:?}: {e}"))?;
        (table, None)
    } else {
        return Err(format!(
            "{spec:?} is neither a catalog name nor a 0/1 truth table; try one of: {}",
            catalog()
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", ")
        ));
    };
    if let Some(n) = expect_n {
        if n != table.vars() {
            return Err(format!(
                "--n {n} does not match the parsed function, which has {} variables",
                table.vars()
            ));
        }
    }
    Ok((table, name))
}

fn with_pool<R: Send>(threads: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => job(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(job),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    function: String,
    n: Option<usize>,
    threads: Option<usize>,
    prune: bool,
    first: bool,
    explore_delta: u32,
    out: Option<PathBuf>,
    trace: bool,
) -> i32 {
    let (table, name) = match parse_function(&function, n) {
        Ok(parsed) => parsed,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    println!(
        "function: {} over {} variables, truth table {}",
        name.as_deref().unwrap_or("(unnamed)"),
        table.vars(),
        table.table_text()
    );
    if table.vars() == 4 {
        eprintln!(
            "warning: a 4-variable search sweeps 40320 arrangements x 4^14 shift vectors; \
             expect it to be impractical on commodity hardware"
        );
    }
    let opts = SearchOptions {
        exhaustive: !first,
        prune,
        explore_delta,
        collect_trace: trace,
        ..SearchOptions::default()
    };
    let run = with_pool(threads, || search_scfo(&table, name.as_deref(), &opts));

    let stem = name.clone().unwrap_or_else(|| format!("fn-{}", table.table_text()));
    let (document, default_name) = match run.certificate() {
        Some(cert) => (
            report::render_certificate(&cert),
            format!("{stem}.certificate.txt"),
        ),
        None => {
            let rep = run
                .impossibility_report()
                .expect("a run without certificate has a report");
            (
                report::render_impossibility(&rep),
                format!("{stem}.report.txt"),
            )
        }
    };
    let path = out.unwrap_or_else(|| PathBuf::from(default_name));
    if let Err(e) = report::atomic_write(&path, &document) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return 1;
    }

    summarize_run(&run, &path);
    if trace {
        if let RunKind::Searched(result) = &run.kind {
            let trace_path = path.with_extension("trace.txt");
            let mut body = String::new();
            for line in &result.trace {
                body.push_str(line);
                body.push('\n');
            }
            if let Err(e) = report::atomic_write(&trace_path, &body) {
                eprintln!("error: cannot write {}: {e}", trace_path.display());
                return 1;
            }
            println!("trace: {} lines -> {}", result.trace.len(), trace_path.display());
        }
    }
    if run.is_certifying() {
        0
    } else {
        2
    }
}

fn summarize_run(run: &SearchRun, path: &std::path::Path) {
    match &run.kind {
        RunKind::TriviallyComputable { value } => {
            println!("outcome: trivially computable, constant {}", u8::from(*value));
            println!("report: {}", path.display());
        }
        RunKind::Searched(result) => {
            let s = &result.stats;
            println!(
                "space: {} arrangements x {} shift vectors = {} instances",
                s.permutations,
                s.shift_space,
                s.permutations * s.shift_space
            );
            if let Some(best) = result.entries.first() {
                println!(
                    "outcome: protocol found, minimal additional clubs {} ({} verified entries)",
                    best.additional_clubs,
                    result.entries.len()
                );
                println!("certificate: {}", path.display());
            } else if result.certifying && result.stats.correctness_failed == 0 {
                println!("outcome: no protocol exists for any number of additional clubs");
                println!("report: {}", path.display());
            } else if result.certifying {
                println!(
                    "outcome: no protocol at the instance optima; non-minimal insertions \
                     are not excluded (probe with --explore-delta)"
                );
                println!("report: {}", path.display());
            } else {
                println!(
                    "outcome: NON-CERTIFYING, {} indeterminate solver outcomes",
                    s.indeterminate
                );
                println!("report: {}", path.display());
            }
            if result.completed {
                println!(
                    "instances: {} infeasible, {} correctness-failed, {} accepted",
                    s.infeasible, s.correctness_failed, s.accepted_instances
                );
            } else {
                println!("instances: space not exhausted (first-hit mode)");
            }
            if s.exploratory_entries > 0 {
                println!(
                    "exploratory: {} beyond-optimal protocols (not part of the verdict)",
                    s.exploratory_entries
                );
            }
            println!("elapsed: {:.2?}", result.wall);
        }
    }
}

fn cmd_verify(path: PathBuf) -> i32 {
    let text = match std::fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 1;
        }
    };
    let doc = match report::parse_document(&text) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let verdict = match doc {
        report::Document::Certificate(cert) => {
            println!(
                "certificate: {} over {} variables, {} additional clubs",
                cert.function_name.as_deref().unwrap_or("(unnamed)"),
                cert.table.vars(),
                cert.additional_clubs
            );
            if !verify::certificate_is_consistent(&cert) {
                // Field-level inconsistency is reported through the
                // simulation verdict below when possible.
            }
            match verify::verify_certificate(&cert) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
        report::Document::Template {
            template,
            function,
            name,
        } => {
            println!(
                "template: {} slots over {} variables, function {}",
                template.slots().len(),
                template.n(),
                name.as_deref().unwrap_or("(unnamed)")
            );
            match verify::verify_protocol(&template, &function) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
    };
    println!("verdict: {verdict}");
    if verdict.is_valid() {
        0
    } else {
        3
    }
}

fn cmd_table2(threads: Option<usize>, prune: bool, out: Option<PathBuf>) -> i32 {
    let opts = SearchOptions {
        prune,
        ..SearchOptions::default()
    };
    let table = with_pool(threads, || run_table2(&opts));
    print!("{}", report::table2_text(&table));
    for row in &table.rows {
        if row.stats.instances_total > 0 {
            println!(
                "timing: {:<10} {:.2?} over {} instances",
                row.name, row.wall, row.stats.instances_total
            );
        }
    }
    if let Some(path) = out {
        let doc = report::render_table2(&table);
        if let Err(e) = report::atomic_write(&path, &doc) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
        println!("table: {}", path.display());
    }
    if table.certifying() {
        0
    } else {
        2
    }
}
