//! Counter-based random streams.
//!
//! Every draw is `philox4x64_10(key, counter)`: a pure function of a 128-bit
//! key and a 64-bit counter, so a stream can be replayed from any position
//! and distinct keys give independent streams without coordination.

const PHILOX_M0: u64 = 0xD2E7_470E_E14C_6C93;
const PHILOX_M1: u64 = 0xCA5A_8263_9512_1157;
const PHILOX_W0: u64 = 0x9E37_79B9_7F4A_7C15;
const PHILOX_W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline(always)]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = (a as u128) * (b as u128);
    ((p >> 64) as u64, p as u64)
}

/// Philox4x64 with 10 rounds (Salmon et al. 2011 parameters).
#[inline]
pub fn philox4x64_10(counter: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let [mut c0, mut c1, mut c2, mut c3] = counter;
    let [mut k0, mut k1] = key;
    for round in 0..10 {
        if round > 0 {
            k0 = k0.wrapping_add(PHILOX_W0);
            k1 = k1.wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c0);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c2);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
    }
    [c0, c1, c2, c3]
}

/// Maps 64 random bits to a double in (0, 1].
#[inline]
pub fn unit_open_closed(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps 64 random bits to a double in (0, 1), symmetric about 1/2.
/// Uses 52 bits so the half-offset stays exact.
#[inline]
pub fn unit_open(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// What a stream is used for. The tag is the low byte of the second key word,
/// which keeps landscape, walk and hold randomness separable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Purpose {
    Landscape = 1,
    Walk = 2,
    Hold = 3,
    Cloud = 4,
    Extremal = 5,
    Sigma = 6,
    Uniform = 7,
}

/// A keyed counter stream. One call to [`RngStream::next_block`] is one
/// draw-event and advances the counter by exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: [u64; 2],
    counter: u64,
}

impl RngStream {
    pub fn new(key: [u64; 2]) -> Self {
        Self { key, counter: 0 }
    }

    pub fn at(key: [u64; 2], counter: u64) -> Self {
        Self { key, counter }
    }

    pub fn key(&self) -> [u64; 2] {
        self.key
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_block(&mut self) -> [u64; 4] {
        let out = philox4x64_10([self.counter, 0, 0, 0], self.key);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.next_block()[0]
    }

    /// Uniform in (0, 1].
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        unit_open_closed(self.next_u64())
    }

    /// Uniform on `0..n` using Lemire's multiply-and-reject. The rejection
    /// consumes further words of the same block, so the call is still a
    /// single draw-event except with probability below `(n / 2^64)^4`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            for word in self.next_block() {
                let (hi, lo) = mulhilo(word, n);
                if lo >= threshold {
                    return hi;
                }
            }
        }
    }
}

/// Builds the stream for `(seed, replica, purpose)`.
///
/// Key layout: word 0 is the campaign seed, word 1 is `replica << 8 | purpose`.
/// The mapping is injective for replica indices below 2^56.
pub fn derive_stream(seed: u64, replica: u64, purpose: Purpose) -> RngStream {
    assert!(replica < (1 << 56), "replica index {replica} exceeds 2^56");
    RngStream::new([seed, (replica << 8) | purpose as u64])
}
