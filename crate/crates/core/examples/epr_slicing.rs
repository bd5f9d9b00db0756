//! Runs an EPR experiment with weak readings and retrodicts them by slicing
//! on the later strong outcomes.

use retroloop::epr::{run_experiment, slice, ExperimentConfig, SliceSpec};
use retroloop::quantum::{Outcome, PointerModel, Side};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pointer = PointerModel::new(0.1, 1.0)?;
    let cfg = ExperimentConfig::new(50_000, pointer, 7);
    let records = run_experiment(&cfg)?;

    println!("side orientation outcome   count    mean reading   expected   sem");
    for side in [Side::A, Side::B] {
        for j in 0..3 {
            for v in [Outcome::Plus, Outcome::Minus] {
                let s = slice(&records, &SliceSpec::new(j, side, v), &pointer);
                println!(
                    "{side:?}    {j}           {:+}      {:6}   {:+.5}       {:+.3}     {:.5}",
                    v.value(),
                    s.count,
                    s.mean_reading.unwrap_or(f64::NAN),
                    -f64::from(v.value()) * pointer.coupling(),
                    s.sem.unwrap_or(f64::NAN)
                );
            }
        }
    }
    Ok(())
}
