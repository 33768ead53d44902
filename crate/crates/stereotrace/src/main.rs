fn main() {
    std::process::exit(stereotrace::cli::run());
}
