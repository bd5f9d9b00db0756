//! Fisher information about a scale parameter after adding pointer spread Δ:
//! the product I_Δ·Δ stays flat.

use retroloop::fisher::{fisher_numeric, fisher_scaling, gaussian_constants, registered_families, Method, ScaleParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let deltas = [1e-2, 1e-1, 1.0, 10.0, 1e2];
    for fam in registered_families() {
        println!("{} family, θ = 1", fam.name());
        for row in fisher_scaling(fam.as_ref(), 1.0, &deltas)? {
            println!(
                "  Δ = {:>7}  I = {:>12.6}  I·Δ = {:.8}",
                row.delta, row.fisher, row.fisher_times_delta
            );
        }
    }
    let mc = fisher_numeric(
        &retroloop::fisher::gaussian_family(),
        1.0,
        ScaleParam::new(1.0)?,
        Method::MonteCarlo {
            samples: 200_000,
            seed: 1,
        },
    )?;
    let c = gaussian_constants(1.0, 1.0);
    println!(
        "Gaussian Δ = 1: Monte Carlo {:.4} ± {:.4}, closed form {}, quoted {}",
        mc.value,
        mc.stderr.unwrap_or(0.0),
        c.derived,
        c.quoted
    );
    Ok(())
}
