use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
fn main() {
    for seed in [1u64, 42] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        let vals: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        println!("seed {seed}: {vals:?}");
    }
}
