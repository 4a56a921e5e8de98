//! Reproducible, scheduling-independent random streams.
//!
//! A [`SeedPath`] is a 64-bit root seed plus a list of stream indices. The
//! 256-bit ChaCha key for a path is derived one index at a time:
//!
//! ```text
//! key_0     = root.to_le_bytes() ‖ 0^24
//! key_{k+1} = first 32 bytes of ChaCha20(key = key_k, stream = path[k])
//! ```
//!
//! and draws come from `ChaCha8Rng::from_seed(key_len)`. Both ciphers are
//! specified bit-exactly by `rand_chacha`, so the noise is identical across
//! platforms and across any number of worker threads: replicate `k` of a Monte
//! Carlo average always reads stream `path ++ [k]`.

use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Environment variable consulted by the CLI when `--seed` is absent.
pub const SEED_ENV_VAR: &str = "PERTURBMAP_SEED";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedPath {
    pub root: u64,
    pub path: Vec<u64>,
}

impl SeedPath {
    pub fn new(root: u64) -> Self {
        SeedPath {
            root,
            path: Vec::new(),
        }
    }

    pub fn child(&self, index: u64) -> SeedPath {
        let mut path = self.path.clone();
        path.push(index);
        SeedPath {
            root: self.root,
            path,
        }
    }

    /// Appends several indices at once; `p.descend(&[a, b]) == p.child(a).child(b)`.
    pub fn descend(&self, indices: &[u64]) -> SeedPath {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        SeedPath {
            root: self.root,
            path,
        }
    }

    pub fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.root.to_le_bytes());
        for &index in &self.path {
            let mut cipher = ChaCha20Rng::from_seed(key);
            cipher.set_stream(index);
            cipher.fill_bytes(&mut key);
        }
        key
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

/// Runs `count` independent replicates, replicate `k` on stream
/// `seed.child(k)`, and returns their results in replicate order.
pub fn replicate<T, E, F>(seed: &SeedPath, count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T, E> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|k| f(k, &mut seed.child(k as u64).rng()))
        .collect()
}

impl std::fmt::Display for SeedPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.root)?;
        for p in &self.path {
            write!(f, "/{p}")?;
        }
        Ok(())
    }
}
