//! Fixed points of every deterministic two-machine loop, and the stationary
//! distribution once noise is added to the paradoxical pair.

use retroloop::loops::{
    deterministic_fixed_points, stationary_distribution, BitMachine, LoopSystem, StochasticMachine,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for a in BitMachine::all() {
        for b in BitMachine::all() {
            let fixed = deterministic_fixed_points(&LoopSystem::new(a, b))?;
            println!("A={a} B={b}: consistent bits {fixed:?}");
        }
    }
    for noise in [0.0, 0.01, 0.2] {
        let sys = LoopSystem::new(
            StochasticMachine::noisy(BitMachine::IDENTITY, noise)?,
            StochasticMachine::noisy(BitMachine::NOT, noise)?,
        );
        let s = stationary_distribution(&sys, 0)?;
        println!(
            "identity/NOT with flip {noise}: p0 = {:.6}, p1 = {:.6}, {:?}",
            s.p0, s.p1, s.kind
        );
    }
    Ok(())
}
