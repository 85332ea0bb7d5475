//! Deterministic random substreams.
//!
//! Every random draw is taken from a ChaCha stream keyed by the master seed
//! and a `(purpose, index, attempt)` triple, so the values a trial sees do
//! not depend on which worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose tag of a substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Layout = 1,
    Trial = 2,
    Oracle = 3,
    Diagnostic = 4,
}

const MAX_INDEX: u64 = 1 << 40;

/// Substream for `(purpose, index, attempt)` under `master`.
///
/// `index` must stay below 2^40 and `attempt` below 256.
pub fn substream(master: u64, purpose: Purpose, index: u64, attempt: u8) -> SimRng {
    assert!(index < MAX_INDEX, "substream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((purpose as u64) << 48) | (index << 8) | attempt as u64);
    rng
}
