fn main() {
    let result = dejean_cli::run(std::env::args_os());
    if result.exit_code == dejean_cli::USAGE_EXIT {
        eprintln!("{}", result.output);
    } else {
        println!("{}", result.output);
    }
    std::process::exit(result.exit_code);
}
