//! Textbook RSA over arbitrary-precision integers.
//!
//! Key generation draws random probable primes (trial division plus
//! Miller-Rabin), the private exponent comes from the extended Euclidean
//! algorithm, and messages are encrypted group-by-group: the plaintext bit
//! stream is cut into groups one bit narrower than the modulus, each group is
//! read as a big-endian integer `m` and mapped to `m^e mod n`.
//!
//! This is raw RSA without padding. It is deterministic and offers none of
//! the security properties of a modern padded scheme; the point here is the
//! covert channel, not the cryptography.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Miller-Rabin rounds used by key generation.
pub const MILLER_RABIN_ROUNDS: u32 = 40;
/// Default bit length per prime.
pub const DEFAULT_PRIME_BITS: u32 = 256;
/// Candidates drawn per screening batch during the prime search.
const PRIME_BATCH: usize = 16;
/// Trial division covers all primes below this bound.
const TRIAL_DIVISION_BOUND: u32 = 1000;

/// How the public exponent is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentPolicy {
    /// 65537 when it is valid for the key size, otherwise the smallest odd
    /// exponent coprime to phi.
    #[default]
    Fixed,
    /// Drawn uniformly from the odd integers in (1, phi) until coprime.
    Random,
}

/// Public half of a key: the pair (e, n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaPublicKey {
    e: BigUint,
    n: BigUint,
}

impl RsaPublicKey {
    pub fn new(e: BigUint, n: BigUint) -> Result<Self> {
        if n < BigUint::from(6u8) {
            return Err(Error::InvalidKey("modulus below 6"));
        }
        if e <= BigUint::one() || e >= n {
            return Err(Error::InvalidKey("public exponent outside (1, n)"));
        }
        Ok(RsaPublicKey { e, n })
    }

    pub fn e(&self) -> &BigUint {
        &self.e
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    /// Bit length of the modulus, |n|.
    pub fn modulus_bits(&self) -> u32 {
        self.n.bits() as u32
    }
}

/// Private half of a key: the pair (d, n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaPrivateKey {
    d: BigUint,
    n: BigUint,
}

impl RsaPrivateKey {
    pub fn new(d: BigUint, n: BigUint) -> Result<Self> {
        if n < BigUint::from(6u8) {
            return Err(Error::InvalidKey("modulus below 6"));
        }
        if d <= BigUint::one() || d >= n {
            return Err(Error::InvalidKey("private exponent outside (1, n)"));
        }
        Ok(RsaPrivateKey { d, n })
    }

    pub fn d(&self) -> &BigUint {
        &self.d
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn modulus_bits(&self) -> u32 {
        self.n.bits() as u32
    }
}

/// A full key pair with the factors it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaKeyPair {
    pub public: RsaPublicKey,
    pub private: RsaPrivateKey,
    pub p: BigUint,
    pub q: BigUint,
    pub phi: BigUint,
}

impl RsaKeyPair {
    /// Build a key pair from chosen primes and public exponent.
    ///
    /// Validates that `p` and `q` are distinct probable primes, that
    /// `1 < e < phi` and `gcd(e, phi) = 1`, then derives `d` as the least
    /// positive inverse of `e` modulo `phi`.
    pub fn from_primes(p: BigUint, q: BigUint, e: BigUint) -> Result<Self> {
        if !is_probable_prime(&p, MILLER_RABIN_ROUNDS) || !is_probable_prime(&q, MILLER_RABIN_ROUNDS)
        {
            return Err(Error::InvalidKey("p and q must be prime"));
        }
        if p == q {
            return Err(Error::InvalidKey("p and q must be distinct"));
        }
        let n = &p * &q;
        let phi = (&p - 1u8) * (&q - 1u8);
        if e <= BigUint::one() || e >= phi {
            return Err(Error::InvalidKey("exponent outside (1, phi)"));
        }
        if e.gcd(&phi) != BigUint::one() {
            return Err(Error::InvalidKey("exponent not coprime to phi"));
        }
        let d = mod_inverse(&e, &phi).expect("coprime exponent is invertible");
        Ok(RsaKeyPair {
            public: RsaPublicKey::new(e, n.clone())?,
            private: RsaPrivateKey::new(d, n)?,
            p,
            q,
            phi,
        })
    }
}

/// Ciphertext as an ordered list of block values plus the geometry needed to
/// serialize and to undo the final group's zero padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherBlockSeq {
    /// One integer per plaintext group, each strictly below the modulus.
    pub blocks: Vec<BigUint>,
    /// Bit length of the modulus used, |n|.
    pub modulus_bits: u32,
    /// Exact bit length of the message before padding (8 x byte count).
    pub plaintext_bit_len: u64,
}

fn rng_from_seed(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_rng(rand::thread_rng()).expect("system entropy"),
    }
}

/// Square-and-multiply modular exponentiation.
pub fn modpow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    assert!(!modulus.is_zero(), "modulus must be positive");
    if modulus.is_one() {
        return BigUint::zero();
    }
    let mut result = BigUint::one();
    let mut base = base % modulus;
    let mut exp = exp.clone();
    while !exp.is_zero() {
        if exp.is_odd() {
            result = result * &base % modulus;
        }
        base = &base * &base % modulus;
        exp >>= 1;
    }
    result
}

/// Sequential batch exponentiation: `modpow` over each base in order.
pub fn modpow_batch_seq(bases: &[BigUint], exp: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    bases.iter().map(|b| modpow(b, exp, modulus)).collect()
}

/// Rayon-parallel batch exponentiation. Output order matches input order.
#[cfg(feature = "parallel")]
pub fn modpow_batch_par(bases: &[BigUint], exp: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    bases.par_iter().map(|b| modpow(b, exp, modulus)).collect()
}

/// Batch exponentiation, parallel when the `parallel` feature is enabled.
pub fn modpow_batch(bases: &[BigUint], exp: &BigUint, modulus: &BigUint) -> Vec<BigUint> {
    #[cfg(feature = "parallel")]
    {
        modpow_batch_par(bases, exp, modulus)
    }
    #[cfg(not(feature = "parallel"))]
    {
        modpow_batch_seq(bases, exp, modulus)
    }
}

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; TRIAL_DIVISION_BOUND as usize];
        let mut primes = Vec::new();
        for n in 2..TRIAL_DIVISION_BOUND as usize {
            if sieve[n] {
                primes.push(n as u32);
                for multiple in (n * n..TRIAL_DIVISION_BOUND as usize).step_by(n) {
                    sieve[multiple] = false;
                }
            }
        }
        primes
    })
}

/// Probabilistic primality test: trial division by every prime below 1000,
/// then `rounds` of Miller-Rabin.
///
/// Witnesses are drawn from an RNG seeded by the candidate itself, so the
/// test is a pure function of its arguments and safe to run on candidates in
/// parallel without disturbing the caller's RNG stream.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    if *n < BigUint::from(2u8) {
        return false;
    }
    for &p in small_primes() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    // A composite with no factor below 1000 is at least 1000^2.
    if *n < BigUint::from(1_000_000u32) {
        return true;
    }
    miller_rabin(n, rounds)
}

fn miller_rabin(n: &BigUint, rounds: u32) -> bool {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0u64;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }

    let mut seed = 0u64;
    for digit in n.iter_u64_digits() {
        seed = seed.rotate_left(17) ^ digit.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&BigUint::from(2u8), &n_minus_one);
        let mut x = modpow(&a, &d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 0..s - 1 {
            x = &x * &x % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn random_candidate(bit_len: u32, rng: &mut impl RngCore) -> BigUint {
    let mut candidate = rng.gen_biguint(bit_len as u64);
    candidate.set_bit(bit_len as u64 - 1, true);
    candidate.set_bit(0, true);
    candidate
}

/// First probable prime in a batch of candidates, searched in draw order so
/// the result is identical with and without the `parallel` feature.
fn first_prime_in_batch(candidates: &[BigUint]) -> Option<BigUint> {
    #[cfg(feature = "parallel")]
    {
        candidates
            .par_iter()
            .find_first(|c| is_probable_prime(c, MILLER_RABIN_ROUNDS))
            .cloned()
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates
            .iter()
            .find(|c| is_probable_prime(c, MILLER_RABIN_ROUNDS))
            .cloned()
    }
}

fn random_prime(bit_len: u32, rng: &mut impl RngCore) -> BigUint {
    loop {
        let batch: Vec<BigUint> = (0..PRIME_BATCH)
            .map(|_| random_candidate(bit_len, rng))
            .collect();
        if let Some(prime) = first_prime_in_batch(&batch) {
            return prime;
        }
    }
}

/// Generate two distinct probable primes of exactly `bit_len` bits each
/// (top bit set). Deterministic for a given seed.
pub fn generate_primes(bit_len: u32, seed: Option<u64>) -> (BigUint, BigUint) {
    assert!(bit_len >= 8, "prime bit length must be at least 8");
    let mut rng = rng_from_seed(seed);
    let p = random_prime(bit_len, &mut rng);
    let q = loop {
        let q = random_prime(bit_len, &mut rng);
        if q != p {
            break q;
        }
    };
    (p, q)
}

/// Extended Euclidean algorithm: returns (g, x, y) with a*x + b*y = g.
fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if b.is_zero() {
        return (a.clone(), BigInt::one(), BigInt::zero());
    }
    let (g, x, y) = extended_gcd(b, &(a % b));
    let quotient = a / b;
    (g, y.clone(), x - quotient * y)
}

/// Least positive inverse of `a` modulo `m`, when it exists.
fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a.clone());
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    let (g, x, _) = extended_gcd(&a, &m);
    if !g.is_one() {
        return None;
    }
    let least = ((x % &m) + &m) % &m;
    Some(least.to_biguint().expect("residue is non-negative"))
}

fn choose_exponent(phi: &BigUint, policy: ExponentPolicy, rng: &mut impl RngCore) -> BigUint {
    match policy {
        ExponentPolicy::Fixed => {
            let f4 = BigUint::from(65537u32);
            if f4 < *phi && f4.gcd(phi).is_one() {
                return f4;
            }
            // Smallest odd exponent above 2 that is coprime to phi.
            let mut e = BigUint::from(3u8);
            while !e.gcd(phi).is_one() {
                e += 2u8;
            }
            e
        }
        ExponentPolicy::Random => loop {
            let mut e = rng.gen_biguint_range(&BigUint::from(2u8), phi);
            e.set_bit(0, true);
            if e < *phi && e.gcd(phi).is_one() {
                break e;
            }
        },
    }
}

/// Generate a key pair with primes of `bit_len_per_prime` bits each.
/// Deterministic for a given seed.
pub fn generate_keypair(
    bit_len_per_prime: u32,
    policy: ExponentPolicy,
    seed: Option<u64>,
) -> RsaKeyPair {
    assert!(bit_len_per_prime >= 8, "prime bit length must be at least 8");
    let mut rng = rng_from_seed(seed);
    let p = random_prime(bit_len_per_prime, &mut rng);
    let q = loop {
        let q = random_prime(bit_len_per_prime, &mut rng);
        if q != p {
            break q;
        }
    };
    let n = &p * &q;
    let phi = (&p - 1u8) * (&q - 1u8);
    let e = choose_exponent(&phi, policy, &mut rng);
    let d = mod_inverse(&e, &phi).expect("coprime exponent is invertible");
    RsaKeyPair {
        public: RsaPublicKey { e, n: n.clone() },
        private: RsaPrivateKey { d, n },
        p,
        q,
        phi,
    }
}

/// Width in bits of one plaintext group for a given modulus: |n| - 1, so
/// every group value is strictly below n.
fn group_bits(modulus_bits: u32) -> Result<usize> {
    if modulus_bits < 9 {
        return Err(Error::KeyTooSmall { modulus_bits });
    }
    Ok(modulus_bits as usize - 1)
}

/// Encrypt a message: cut its bits (MSB-first per byte) into groups of
/// |n| - 1 bits, zero-pad the final group on the right, and raise each group
/// to the public exponent modulo n.
pub fn encrypt(message: &[u8], key: &RsaPublicKey) -> Result<CipherBlockSeq> {
    let modulus_bits = key.modulus_bits();
    let group = group_bits(modulus_bits)?;
    let plaintext_bit_len = message.len() as u64 * 8;

    let mut bits = crate::bits::BitString::with_capacity(message.len() * 8);
    bits.push_bytes(message);
    while bits.len() % group != 0 {
        bits.push(false);
    }
    let groups: Vec<BigUint> = (0..bits.len() / group)
        .map(|i| bits.read_uint(i * group, group).unwrap())
        .collect();
    debug_assert!(groups.iter().all(|m| m < key.n()));

    Ok(CipherBlockSeq {
        blocks: modpow_batch(&groups, key.e(), key.n()),
        modulus_bits,
        plaintext_bit_len,
    })
}

/// Decrypt ciphertext blocks and reassemble the original bytes: each block is
/// raised to the private exponent, rendered as an |n| - 1 bit group, and the
/// concatenation is truncated to the recorded plaintext length.
pub fn decrypt(cipher: &CipherBlockSeq, key: &RsaPrivateKey) -> Result<Vec<u8>> {
    let group = group_bits(key.modulus_bits())?;
    if let Some(index) = cipher.blocks.iter().position(|b| b >= key.n()) {
        return Err(Error::BlockOutOfRange { index });
    }
    let max = cipher.blocks.len() as u64 * group as u64;
    if cipher.plaintext_bit_len > max {
        return Err(Error::LengthMismatch {
            claimed: cipher.plaintext_bit_len,
            max,
        });
    }

    let groups = modpow_batch(&cipher.blocks, key.d(), key.n());
    let mut bits = crate::bits::BitString::with_capacity(groups.len() * group);
    let mask = (BigUint::one() << group) - 1u8;
    for value in &groups {
        // A wrong key can decrypt to a value wider than one group; keep the
        // low bits so the result degrades to garbage instead of a panic.
        bits.push_uint(&(value & &mask), group);
    }
    let keep = cipher.plaintext_bit_len as usize;
    Ok(bits.slice(0, keep.min(bits.len())).to_bytes_padded())
}
