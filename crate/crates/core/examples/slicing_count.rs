//! Exact number of balanced slicings against Stirling's estimate 2^N·√(2/πN). The
//! f64 estimate overflows past N ≈ 1020; its base-2 logarithm does not.

use retroloop::epr::count_slicings;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>6}  {:>8}  {:>14}  {:>12}  {:>10}",
        "N", "digits", "stirling", "log2 stirling", "ratio"
    );
    for n in [2, 12, 100, 1000, 10_000] {
        let c = count_slicings(n)?;
        let digits = c.exact.to_string().len();
        println!(
            "{n:>6}  {digits:>8}  {:>14.6e}  {:>12.4}  {:>10.8}",
            c.stirling, c.log2_stirling, c.ratio
        );
    }
    Ok(())
}
