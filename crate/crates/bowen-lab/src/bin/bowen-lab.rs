fn main() {
    std::process::exit(bowen_lab::cli::run(std::env::args_os()));
}
