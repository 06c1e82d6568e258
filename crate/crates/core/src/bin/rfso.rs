use clap::Parser;
use rfso_core::cli::{execute, Args};

fn main() {
    let args = Args::parse();
    let (mut out, mut err) = (String::new(), String::new());
    let code = execute(&args, &mut out, &mut err);
    print!("{out}");
    eprint!("{err}");
    std::process::exit(code);
}
