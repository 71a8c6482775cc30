use std::io;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let code = gcr::cli::run_with_io(&args, &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
