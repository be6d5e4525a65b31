use std::io;

use relphase_tools::cli::{run, Io};

fn main() {
    let (stdin, stdout, stderr) = (io::stdin(), io::stdout(), io::stderr());
    let mut io = Io { stdin: &mut stdin.lock(), stdout: &mut stdout.lock(), stderr: &mut stderr.lock() };
    std::process::exit(run(std::env::args_os(), &mut io));
}
