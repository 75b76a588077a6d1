// custom harness: every criterion prints its PASS/FAIL line, passing or not

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    // libtest flags passed through by cargo (e.g. --nocapture) are ignored
    let ids = floquet_qi_acceptance::selected(&args);
    let outcomes = floquet_qi_acceptance::run_and_print(&ids, None);
    println!();
    println!("summary:");
    for o in &outcomes {
        println!("{}", o.summary_line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!(
        "\n{} of {} criteria pass{}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
