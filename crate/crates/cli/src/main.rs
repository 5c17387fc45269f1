use clap::Parser;

fn main() {
    let cli = sdcnn_cli::Cli::parse();
    std::process::exit(sdcnn_cli::run(cli));
}
