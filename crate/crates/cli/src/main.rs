fn main() {
    std::process::exit(channel_lab_cli::dispatch(std::env::args_os()));
}
