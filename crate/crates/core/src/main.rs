use std::io;

use o2onc::cli;

fn main() {
    let env_seed = std::env::var(cli::SEED_ENV).ok();
    let code = cli::run(
        std::env::args_os(),
        env_seed.as_deref(),
        io::stdout().lock(),
        io::stderr().lock(),
    );
    std::process::exit(code);
}
