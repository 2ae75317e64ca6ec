use std::io::IsTerminal;

fn main() {
    let color = deriver_cli::color_enabled(std::io::stdout().is_terminal());
    let code = deriver_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr(), color);
    std::process::exit(code);
}
