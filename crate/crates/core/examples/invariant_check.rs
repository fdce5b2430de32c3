//! Run the invariant suite on a converged profile and on a slightly perturbed
//! start, which still solves the ODE but no longer closes.
//!
//! ```text
//! cargo run --release --example invariant_check
//! ```

use rotspec::checks::run_checks;
use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{profile_at, solve_periodic, ShootingProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    let params = RotationParams::new(3, 1)?;
    let closed = solve_periodic(&ShootingProblem::with_default_bracket(params, cfg)?)?;
    let perturbed = profile_at(&params, closed.a0 + 1e-3, &cfg)?;

    for (label, p) in [("converged", &closed), ("a0 + 1e-3", &perturbed)] {
        let suite = run_checks(p, &cfg);
        println!("{label} (a0 = {:.8}):", p.a0);
        for line in &suite.lines {
            println!("  {line}");
        }
        println!("  all passed: {}\n", suite.all_passed());
    }
    Ok(())
}
