//! A gap sweep driven by a configuration file, as the `casimir` binary
//! runs it, printed as CSV.

use casimir::cli::{parse_config, run};

const CONFIG: &str = "\
mode = sweep
tol = 1e-3

[geometry]
l = 1e-6
T = 300

[plate1]
kind = drude
plasma = 1.37e16
damping = 5.3e13

[plate2]
kind = lorentz
strength = 2.5
resonance = 4e15
damping = 2e14

[static]
route = matsubara

[sweep]
variable = l
from = 1e-7
to = 1e-5
count = 5
spacing = log
compute = static
";

fn main() {
    let cfg = match parse_config(CONFIG) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let out = run(&cfg);
    print!("{}", out.text);
    for d in out.diagnostics {
        eprintln!("{d}");
    }
}
