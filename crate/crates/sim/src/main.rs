use clap::Parser;

fn main() {
    let cli = rfs_fusion::cli::Cli::parse();
    if let Err(e) = rfs_fusion::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
