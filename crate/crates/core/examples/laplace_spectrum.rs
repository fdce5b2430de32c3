//! Every Laplace eigenvalue below 12 of the n = 5 example, grouped with
//! multiplicities and the modes contributing to each group.
//!
//! ```text
//! cargo run --release --example laplace_spectrum
//! ```

use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{solve_periodic, ShootingProblem};
use rotspec::spectrum::{assemble_spectrum, OperatorKind, ScanSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = RotationParams::new(3, 1)?;
    let profile = solve_periodic(&ShootingProblem::with_default_bracket(
        params,
        IntegratorConfig::default(),
    )?)?;
    let kind = OperatorKind::Laplace;
    let report = assemble_spectrum(&profile, kind, &ScanSettings::for_operator(kind))?;

    println!("{:>12} {:>5}  modes", "λ", "mult");
    for g in &report.groups {
        let modes: Vec<String> = g.members.iter().map(|r| r.mode.to_string()).collect();
        println!(
            "{:12.7} {:5}  {}",
            g.lambda,
            g.multiplicity,
            modes.join(" ")
        );
    }
    let pruned: Vec<String> = report.pruned.iter().map(|w| w.mode.to_string()).collect();
    println!("\npruned frontier: {}", pruned.join(" "));
    Ok(())
}
