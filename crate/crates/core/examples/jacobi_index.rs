//! Stability index and nullity of the two worked examples, followed by an
//! audit of the pruned modes.
//!
//! ```text
//! cargo run --release --example jacobi_index
//! ```

use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{solve_periodic, ShootingProblem};
use rotspec::spectrum::{assemble_spectrum, audit_pruned, OperatorKind, ScanSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kind = OperatorKind::Jacobi;
    for (k, l) in [(3, 1), (2, 2)] {
        let params = RotationParams::new(k, l)?;
        let profile = solve_periodic(&ShootingProblem::with_default_bracket(
            params,
            IntegratorConfig::default(),
        )?)?;
        let report = assemble_spectrum(&profile, kind, &ScanSettings::for_operator(kind))?;

        println!("k = {k}, l = {l}, a0 = {:.7}", profile.a0);
        for g in &report.groups {
            println!("  λ = {:10.5}  mult {}", g.lambda, g.multiplicity);
        }
        println!(
            "  stability index = {}, nullity = {}",
            report.stability_index.unwrap_or_default(),
            report.nullity.unwrap_or_default()
        );
        for audit in audit_pruned(&profile, &report)? {
            println!(
                "  audit {} at step {}: {}",
                audit.mode,
                audit.step,
                if audit.passed() {
                    "no root"
                } else {
                    "ROOT FOUND"
                }
            );
        }
        println!();
    }
    Ok(())
}
