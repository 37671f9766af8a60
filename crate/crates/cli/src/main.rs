fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONTACTFLOW_LOG", "warn")).init();
    std::process::exit(contactflow_cli::run(std::env::args_os()));
}
