use std::io;
use std::process::ExitCode;

use nameguard_cli::cli::{main_with_args, Io};

fn main() -> ExitCode {
    let (mut out, mut err) = (io::stdout(), io::stderr());
    let code = main_with_args(std::env::args_os(), &mut Io { out: &mut out, err: &mut err });
    ExitCode::from(code)
}
