//! Sample the Floquet discriminant of one mode and list its zeros.
//!
//! ```text
//! cargo run --release --example discriminant_curve -- laplace 0 1
//! cargo run --release --example discriminant_curve -- jacobi 1 1
//! ```

use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{solve_periodic, ShootingProblem};
use rotspec::spectrum::{scan_and_refine, ModeIndex, OperatorKind, ScanSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: OperatorKind = args
        .first()
        .map_or(Ok(OperatorKind::Laplace), |s| s.parse())?;
    let i = args.get(1).map_or(Ok(0), |s| s.parse())?;
    let j = args.get(2).map_or(Ok(1), |s| s.parse())?;

    let params = RotationParams::new(3, 1)?;
    let cfg = IntegratorConfig::default();
    let profile = solve_periodic(&ShootingProblem::with_default_bracket(params, cfg)?)?;
    let mode = ModeIndex::new(i, j, &params);

    let settings = ScanSettings::new(kind.default_range(), 0.25, cfg);
    let scan = scan_and_refine(&profile, &mode, kind, &settings)?;

    println!("{kind} mode {mode}: α = {}, β = {}", mode.alpha, mode.beta);
    for d in scan.samples.iter().step_by(4) {
        // a coarse bar chart of sign(δ0)·log10(1 + |δ0|)
        let v = d.delta0.signum() * d.delta0.abs().ln_1p() / std::f64::consts::LN_10;
        let bar = "#".repeat((v.abs() * 4.0).min(40.0) as usize);
        let side = if v < 0.0 { '-' } else { '+' };
        println!("{:9.3} {side} {bar}", d.lambda);
    }
    println!("\nroots:");
    for r in &scan.roots {
        println!(
            "  λ = {:.8}  periodic solutions = {}  multiplicity = {}",
            r.lambda, r.ode_multiplicity, r.total_multiplicity
        );
    }
    Ok(())
}
