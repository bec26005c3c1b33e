//! Print a built-in scenario as JSON, ready to edit and load with `--scenario`.
//!
//! cargo run --example export_builtin -- three_path > my_scenario.json

use weakpath::scenario::{builtin, serialize_scenario, BUILTIN_NAMES};

fn main() {
    let Some(name) = std::env::args().nth(1) else {
        eprintln!("usage: export_builtin <{}>", BUILTIN_NAMES.join("|"));
        std::process::exit(2);
    };
    match builtin(&name) {
        Ok(spec) => print!("{}", serialize_scenario(&spec)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    }
}
