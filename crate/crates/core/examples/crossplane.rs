//! Writes the two-line "crossplane" toy set: 65 points scattered around
//! `y = x` (class 1) and 65 around `y = 1 − x` (class −1), x uniform on [0, 1].
//!
//! ```text
//! cargo run -p trkm-core --example crossplane -- data/crossplane130.csv
//! ```

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const PER_CLASS: usize = 65;
const NOISE: f64 = 0.02;
const SEED: u64 = 130;

fn main() -> std::io::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crossplane130.csv".into());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let noise = Normal::new(0.0, NOISE).expect("valid deviation");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "x1,x2,class")?;
    for i in 0..2 * PER_CLASS {
        let positive = i % 2 == 0;
        let x: f64 = rng.random();
        let y = if positive { x } else { 1.0 - x } + noise.sample(&mut rng);
        writeln!(out, "{x:.6},{y:.6},{}", if positive { 1 } else { -1 })?;
    }
    out.flush()
}
