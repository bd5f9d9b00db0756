//! Weak values and ABL probabilities for a pre/post-selected singlet, then a
//! single weak measurement of σ_z on side A.

use retroloop::quantum::{
    abl_probability, spin_state, weak_measure, weak_value, Outcome, PointerModel, Side, SpinObservable, TwoQubitState,
    TwoStateVector,
};
use retroloop::rng::RandomStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pre = TwoQubitState::singlet();
    let x_up = spin_state([1.0, 0.0, 0.0], Outcome::Plus)?;
    let z_down = spin_state([0.0, 0.0, 1.0], Outcome::Minus)?;
    let post = TwoQubitState::product(x_up, z_down)?;
    let tsv = TwoStateVector::new(pre, post);

    for (name, obs) in [("σx", SpinObservable::x(Side::A)), ("σz", SpinObservable::z(Side::A))] {
        let w = weak_value(&tsv, &obs)?;
        let (p_plus, p_minus) = abl_probability(&tsv, &obs)?;
        println!(
            "A {name}: weak value {:.4}{:+.4}i, ABL p(+1) = {p_plus:.4}, p(-1) = {p_minus:.4}",
            w.re, w.im
        );
    }

    let pointer = PointerModel::new(0.1, 1.0)?;
    let mut rng = RandomStream::new(1);
    let (reading, after) = weak_measure(&pre, &SpinObservable::z(Side::A), &pointer, &mut rng)?;
    println!(
        "weak σz on A: reading {reading:.4}, fidelity with the singlet afterwards {:.6} (coherence factor {:.6})",
        after.fidelity(&pre),
        pointer.coherence_factor()
    );
    Ok(())
}
