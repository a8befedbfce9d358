fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = coalsense::cli::parse_and_run(std::env::args_os());
    std::process::exit(code);
}
