//! Residual checks of the equations, the boundary condition, probability
//! conservation and frame covariance, plus the mutation checks.

use multitime::initdata::{build_gaussian_product, GaussianProductSpec, DEFAULT_AMPLITUDE_SEED};
use multitime::solver::{Solver, SolverConfig};
use multitime::verify::{verify_all, VerifySettings};

fn main() -> multitime::Result<()> {
    let spec = GaussianProductSpec {
        amplitudes: GaussianProductSpec::random_amplitudes(DEFAULT_AMPLITUDE_SEED, 0.0),
        ..GaussianProductSpec::default()
    };
    let solver = Solver::new(build_gaussian_product(&spec)?, SolverConfig::default())?;
    // A lighter conservation check than the default keeps the example quick.
    let settings =
        VerifySettings { conservation_times: vec![0.0, 0.5], conservation_cells: 60, ..VerifySettings::default() };
    let summary = verify_all(&solver, &settings)?;
    for r in &summary.reports {
        println!(
            "{:<26} probes {:>4}  max_abs {:.2e}  max_rel {:.2e}  {}",
            r.equation_id,
            r.probe_count,
            r.max_abs,
            r.max_rel,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    for m in &summary.mutations {
        println!("mutation {:?}: residual {:.2e}, detected = {}", m.mutation, m.report.value(), m.detected);
    }
    println!("overall: {}", if summary.pass { "pass" } else { "FAIL" });
    Ok(())
}
