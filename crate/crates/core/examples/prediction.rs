//! Tries to pick out the true outcome-slicing of a small run from the weak
//! readings alone, comparing it with every balanced alternative.

use retroloop::epr::{prediction_attempt, run_experiment, ExperimentConfig, SearchMode, Slicing};
use retroloop::quantum::{PointerModel, Side};
use retroloop::rng::RandomStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for coupling in [0.1, 5.0] {
        let pointer = PointerModel::new(coupling, 1.0)?;
        let records = run_experiment(&ExperimentConfig::new(12, pointer, 3))?;
        let truth = Slicing::from_outcomes(&records, Side::B);
        let mut rng = RandomStream::new(3);
        let rep = prediction_attempt(&records, &truth, SearchMode::Exhaustive, &pointer, &mut rng)?;
        println!(
            "λ/δ = {coupling}: compared {} slicings, true statistic {:.3}, quantile {:.3}, {:.1}% of alternatives within one sem",
            rep.compared,
            rep.true_statistic,
            rep.quantile,
            100.0 * rep.fraction_within_one_sem
        );
    }
    Ok(())
}
