//! Solve the symmetric shooting problem for one rotation pair and print the
//! closed profile.
//!
//! ```text
//! cargo run --release --example shoot -- 3 1
//! ```

use rotspec::geometry::RotationParams;
use rotspec::ivp::IntegratorConfig;
use rotspec::profile::{solve_periodic, ShootingProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u32>());
    let k = args.next().transpose()?.unwrap_or(3);
    let l = args.next().transpose()?.unwrap_or(1);

    let params = RotationParams::new(k, l)?;
    let cfg = IntegratorConfig::default();
    let problem = ShootingProblem::with_default_bracket(params, cfg)?;
    let p = solve_periodic(&problem)?;

    println!("k = {k}, l = {l}, n = {}", params.n());
    println!("a0         = {:.9}", p.a0);
    println!("T          = {:.9}", p.period);
    println!("|f1(T/2)|  = {:.2e}", p.residual_f1);
    println!("|θ(T/2)-π| = {:.2e}", p.residual_theta);
    println!("closure    = {:.2e}", p.full_period_closure(&cfg)?);

    println!("\n{:>8} {:>11} {:>11} {:>11}", "u", "f1", "f2", "theta");
    for t in 0..=16 {
        let u = p.period * t as f64 / 16.0;
        let s = p.state_at(u).expect("state on the closed curve");
        println!("{u:8.4} {:11.7} {:11.7} {:11.7}", s.f1, s.f2, s.theta);
    }
    Ok(())
}
