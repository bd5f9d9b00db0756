//! Seals a prediction with a one-time pad, lets the choice happen, then
//! reveals the key. Ciphertext-only guessing gains nothing.

use retroloop::prophecy::{
    guess_advantage, post_reveal_advantage, run_prophecy_protocol, BitString, Eavesdropper, GuessStrategy, Prophecy,
};
use retroloop::rng::RandomStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RandomStream::new(2026);
    let prediction: BitString = "10110010".parse()?;
    let sealed = Prophecy::seal(&prediction, 200, Eavesdropper::None, &mut rng)?;
    println!("published ciphertext {}", sealed.ciphertext());
    let honest = sealed.reveal(&prediction);
    println!(
        "choice {prediction}: key {:?}, verification {:?}",
        honest.revealed_key().map(|k| k.to_string()),
        honest.verified()
    );

    let sealed = Prophecy::seal(&prediction, 200, Eavesdropper::None, &mut rng)?;
    let other: BitString = "01001101".parse()?;
    println!("choice {other}: verification {:?}", sealed.reveal(&other).verified());

    let transcripts = (0..2000)
        .map(|_| run_prophecy_protocol(8, 100, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    for s in GuessStrategy::ALL {
        println!(
            "{s:?}: advantage {:+.4}",
            guess_advantage(&transcripts, |c| s.guess(c))?
        );
    }
    println!(
        "with revealed keys: advantage {:+.4}",
        post_reveal_advantage(&transcripts)?
    );
    Ok(())
}
