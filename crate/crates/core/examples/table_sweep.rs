//! Continue the l = 1 family in n and print the (a0, T) table.
//!
//! ```text
//! cargo run --release --example table_sweep -- 4 50
//! ```

use rotspec::ivp::IntegratorConfig;
use rotspec::profile::table_sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u32>());
    let from = args.next().transpose()?.unwrap_or(4);
    let to = args.next().transpose()?.unwrap_or(50);

    let sweep = table_sweep(1, (from, to), &IntegratorConfig::default())?;
    println!("{:>4} {:>12} {:>12} {:>10}", "n", "a0", "T", "a0/aEq");
    for p in &sweep.profiles {
        println!(
            "{:4} {:12.8} {:12.8} {:10.4}",
            p.params.n(),
            p.a0,
            p.period,
            p.a0 / p.params.equilibrium_radius()
        );
    }
    for (n, err) in &sweep.failures {
        eprintln!("n = {n}: {err}");
    }
    Ok(())
}
