//! BB84 key exchange with and without an intercept-resend eavesdropper.

use retroloop::prophecy::{bb84_exchange, Eavesdropper};
use retroloop::rng::RandomStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for eve in [Eavesdropper::None, Eavesdropper::InterceptResend] {
        let k = bb84_exchange(10_000, eve, 0.5, &mut RandomStream::new(84))?;
        println!(
            "{eve:?}: {} raw, {} sifted, {} sacrificed, QBER {:.4}, {} key bits ({} disagree)",
            k.raw,
            k.sifted,
            k.sacrificed,
            k.qber_estimate,
            k.bits.len(),
            k.bits.hamming(&k.receiver_bits)
        );
    }
    Ok(())
}
