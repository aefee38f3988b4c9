use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Separates the random streams drawn for one disorder sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Couplings = 1,
    Replicas = 2,
    Tails = 3,
}

/// Counter-based stream keyed by `(seed, n_sites, purpose)` with the sample
/// index selecting the ChaCha stream, so draws never depend on the order in
/// which samples are processed.
pub fn stream(seed: u64, n_sites: usize, sample_index: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n_sites as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[24..].copy_from_slice(b"sk-clt\0\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample_index);
    rng
}
