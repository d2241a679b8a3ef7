use bsync::cli::{run, MAIN_STACK};

fn main() {
    let args: Vec<_> = std::env::args_os().collect();
    let code = std::thread::Builder::new()
        .stack_size(MAIN_STACK)
        .spawn(move || run(args))
        .expect("spawn main thread")
        .join()
        .unwrap_or(bsync::cli::EXIT_RESOURCE);
    std::process::exit(code);
}
