//! Ranks the self-consistent histories of the two-agent loop, attributing
//! inconsistencies to rare fluctuations.

use retroloop::loops::{consistent_histories, Agent, FluctuationModel, PolicyPreset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for preset in [PolicyPreset::Paradox, PolicyPreset::Cooperative] {
        let (alice, bob) = preset.policies();
        for reference in [Agent::Alice, Agent::Bob] {
            let fm = FluctuationModel::new(0.01)?.with_reference(reference);
            println!("{preset:?}, {reference:?} runs forward:");
            for h in consistent_histories(alice, bob, &fm)? {
                println!(
                    "  {:?} fluctuations {:?} weight {:.4}",
                    h.events, h.fluctuations, h.weight
                );
            }
        }
    }
    Ok(())
}
