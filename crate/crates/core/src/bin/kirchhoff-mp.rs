fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    kirchhoff_mp::cli::init_threads();
    std::process::exit(kirchhoff_mp::cli::run(std::env::args_os()));
}
