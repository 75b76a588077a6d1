//! Runs the reference checks of `floquet_qi::repro` and prints one
//! PASS/FAIL line per criterion. Lives in its own package so that cargo
//! runs it after every other test target of the workspace.

use floquet_qi::repro::{self, Outcome};

/// Parse `--criterion N` style filters (plain numbers also accepted).
pub fn selected(args: &[String]) -> Vec<u8> {
    let ids: Vec<u8> = args.iter().filter_map(|a| a.trim_start_matches("--criterion=").parse().ok()).collect();
    if ids.is_empty() {
        repro::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        ids
    }
}

/// Run the given criteria in order, printing as each finishes.
pub fn run_and_print(ids: &[u8], threads: Option<usize>) -> Vec<Outcome> {
    let mut out = Vec::new();
    for &id in ids {
        let o = repro::run(id, threads);
        println!("{}", o.summary_line());
        for d in &o.details {
            println!("{d}");
        }
        out.push(o);
    }
    out
}
