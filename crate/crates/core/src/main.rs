use clap::Parser;

fn main() {
    let args = chase_rd::cli::Args::parse();
    std::process::exit(chase_rd::cli::run(args));
}
