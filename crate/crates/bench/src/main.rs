use clap::Parser;

fn main() {
    let cli = carbonflow_bench::cli::Cli::parse();
    if let Err(e) = carbonflow_bench::cli::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
