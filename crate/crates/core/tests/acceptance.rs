//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with its timing. Oracles here are deliberately naive and independent
//! of the library's own arithmetic.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

use css_stego::css::{self, StegoParams};
use css_stego::keyfile;
use css_stego::pipeline::{embed_message, extract_message, max_message_bytes};
use css_stego::rsa::{self, ExponentPolicy, RsaKeyPair};

const FIGURE8: &[u8] = include_bytes!("fixtures/figure8.css");

/// Repeated-multiplication oracle over u64, for small operands.
fn naive_modpow_u64(base: u64, exp: u64, modulus: u64) -> u64 {
    let mut result = 1 % modulus;
    for _ in 0..exp {
        result = result * base % modulus;
    }
    result
}

/// Repeated-multiplication oracle over big integers.
fn naive_modpow_big(base: &BigUint, exp: u32, modulus: &BigUint) -> BigUint {
    let mut result = BigUint::from(1u8) % modulus;
    for _ in 0..exp {
        result = result * base % modulus;
    }
    result
}

fn report(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "{name} took {elapsed:?}, budget is {budget:?}"
    );
    println!("[acceptance] {name}: PASS ({elapsed:?})");
}

#[test]
fn criterion_1_rsa_textbook_vector() {
    let started = Instant::now();

    let pair = RsaKeyPair::from_primes(
        BigUint::from(61u8),
        BigUint::from(53u8),
        BigUint::from(17u8),
    )
    .unwrap();
    assert_eq!(pair.private.d(), &BigUint::from(2753u32));

    let m = BigUint::from(65u8);
    let n = BigUint::from(3233u32);
    let expected = naive_modpow_big(&m, 17, &n);
    assert_eq!(expected, BigUint::from(2790u32));
    assert_eq!(rsa::modpow(&m, &BigUint::from(17u8), &n), expected);

    report("rsa textbook vector", started, Duration::from_secs(1));
}

#[test]
fn criterion_2_rsa_round_trip_500_messages() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC2);

    for (prime_bits, runs, seed) in [(32u32, 200usize, 21u64), (64, 200, 22), (256, 100, 23)] {
        let pair = rsa::generate_keypair(prime_bits, ExponentPolicy::Fixed, Some(seed));
        for _ in 0..runs {
            let len = rng.gen_range(0..=256);
            let mut message = vec![0u8; len];
            rng.fill_bytes(&mut message);
            let cipher = rsa::encrypt(&message, &pair.public).unwrap();
            assert_eq!(rsa::decrypt(&cipher, &pair.private).unwrap(), message);
        }
    }

    report("rsa round trip x500", started, Duration::from_secs(60));
}

#[test]
fn criterion_3_modpow_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC3);

    let small_primes: Vec<u64> = (2..64).filter(|&n| (2..n).all(|d| n % d != 0)).collect();
    let mut cases = 0usize;
    while cases < 10_000 {
        let p = small_primes[rng.gen_range(0..small_primes.len())];
        let q = small_primes[rng.gen_range(0..small_primes.len())];
        let n = p * q;
        if n >= 1 << 12 {
            continue;
        }
        let m = rng.gen_range(0..n);
        let e = rng.gen_range(0..64u64);
        let expected = naive_modpow_u64(m, e, n);
        let got = rsa::modpow(&BigUint::from(m), &BigUint::from(e), &BigUint::from(n));
        assert_eq!(got, BigUint::from(expected), "m={m} e={e} n={n}");
        cases += 1;
    }

    report(
        "modpow oracle equivalence x10000",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_4_figure8_visual_equivalence() {
    let started = Instant::now();

    let pair =
        RsaKeyPair::from_primes(BigUint::from(19u8), BigUint::from(29u8), BigUint::from(17u8))
            .unwrap();
    let params = StegoParams::default();
    let canonical = css::canonicalize(&css::scan(FIGURE8));
    let channel = canonical.anchors().len() as u64 * 8;
    let max = max_message_bytes(channel, pair.public.modulus_bits()) as usize;
    assert!(max >= 1);

    for message in [&b"A"[..], b"hi", &vec![0xFF; max][..]] {
        let (stego, _) = embed_message(FIGURE8, message, &pair.public, &params).unwrap();

        // Stripping every anchor run recovers the canonicalized original.
        let stego_doc = css::scan(&stego);
        assert_eq!(css::canonicalize(&stego_doc).bytes(), canonical.bytes());

        // Everything inserted is a space or a tab next to an anchor semicolon.
        let inserted: usize = stego_doc.anchors().iter().map(|a| a.existing_trailing).sum();
        assert_eq!(stego.len(), canonical.bytes().len() + inserted);
        for anchor in stego_doc.anchors() {
            let start = anchor.semicolon_offset + 1;
            let run = &stego[start..start + anchor.existing_trailing];
            assert!(run.iter().all(|b| matches!(b, 0x20 | 0x09)));
        }
    }

    report("figure 8 visual equivalence", started, Duration::from_secs(1));
}

#[test]
fn criterion_5_figure8_capacity() {
    let started = Instant::now();

    let doc = css::canonicalize(&css::scan(FIGURE8));
    assert_eq!(doc.anchors().len(), 14);
    assert_eq!(css::capacity(&doc, &StegoParams::default()), 80);

    report("figure 8 capacity formula", started, Duration::from_secs(1));
}

/// Deterministic CSS-ish cover with `lines` declaration lines.
fn synthetic_cover(rng: &mut StdRng, lines: usize) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("body {\n");
    for i in 0..lines {
        match rng.gen_range(0..5) {
            0 => out.push_str(&format!("margin-{i}: 0; padding-{i}: 0;\n")),
            1 => out.push_str(&format!("/* note {i}; */\n")),
            2 => out.push_str(&format!("content-{i}: \"x;{i}\";\n")),
            3 => out.push_str(&format!("background-{i}: url(data:a;b{i});\n")),
            _ => out.push_str(&format!("prop-{i}: value{i};\n")),
        }
    }
    out.push_str("}\n");
    out.into_bytes()
}

#[test]
fn criterion_6_full_protocol_identity_200_pairs() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC6);
    let pair = rsa::generate_keypair(32, ExponentPolicy::Fixed, Some(6));
    let params = StegoParams::default();

    for _ in 0..200 {
        // Keep drawing covers until one can hold at least the length fields.
        let (cover, doc) = loop {
            let lines = rng.gen_range(12..60);
            let cover = synthetic_cover(&mut rng, lines);
            let doc = css::canonicalize(&css::scan(&cover));
            if doc.anchors().len() * 8 >= 64 {
                break (cover, doc);
            }
        };
        let channel = doc.anchors().len() as u64 * 8;
        let max = max_message_bytes(channel, pair.public.modulus_bits()) as usize;
        let mut message = vec![0u8; rng.gen_range(0..=max)];
        rng.fill_bytes(&mut message);

        let (stego, _) = embed_message(&cover, &message, &pair.public, &params).unwrap();
        assert_eq!(
            extract_message(&stego, &pair.private, &params).unwrap(),
            message
        );
    }

    report("full protocol identity x200", started, Duration::from_secs(60));
}

#[test]
fn criterion_7_robustness_1000_mutations() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xC7);
    let pair = rsa::generate_keypair(16, ExponentPolicy::Fixed, Some(7));
    let params = StegoParams::default();

    let cover = synthetic_cover(&mut rng, 40);
    let (stego, _) = embed_message(&cover, b"fragile channel", &pair.public, &params).unwrap();

    let mut structured_errors = 0usize;
    let mut decoded = 0usize;
    for _ in 0..1000 {
        let mut mutated = stego.clone();
        match rng.gen_range(0..5) {
            // Flip one whitespace character.
            0 => {
                let runs: Vec<usize> = mutated
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| matches!(b, 0x20 | 0x09))
                    .map(|(i, _)| i)
                    .collect();
                let i = runs[rng.gen_range(0..runs.len())];
                mutated[i] = if mutated[i] == 0x20 { 0x09 } else { 0x20 };
            }
            // Truncate.
            1 => mutated.truncate(rng.gen_range(0..=mutated.len())),
            // Foreign byte spliced in.
            2 => {
                let pos = rng.gen_range(0..=mutated.len());
                mutated.insert(pos, rng.gen());
            }
            // Arbitrary byte overwritten.
            3 => {
                let pos = rng.gen_range(0..mutated.len());
                mutated[pos] = rng.gen();
            }
            // Byte deleted.
            _ => {
                let pos = rng.gen_range(0..mutated.len());
                mutated.remove(pos);
            }
        }

        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            extract_message(&mutated, &pair.private, &params)
        }));
        match outcome {
            Ok(Ok(_)) => decoded += 1,
            Ok(Err(_)) => structured_errors += 1,
            Err(_) => panic!("unstructured failure on mutated stego input"),
        }
    }
    assert_eq!(structured_errors + decoded, 1000);

    report("robustness fuzz x1000", started, Duration::from_secs(60));
}

#[test]
fn criterion_8_determinism() {
    let started = Instant::now();

    let a = rsa::generate_keypair(64, ExponentPolicy::Fixed, Some(77));
    let b = rsa::generate_keypair(64, ExponentPolicy::Fixed, Some(77));
    assert_eq!(a, b);
    assert_eq!(keyfile::encode_public(&a.public), keyfile::encode_public(&b.public));
    assert_eq!(keyfile::encode_private(&a.private), keyfile::encode_private(&b.private));

    // A 128-bit modulus block needs 16 bits per anchor to fit in Figure 8.
    let params = StegoParams::new(16).unwrap();
    let (stego_a, _) = embed_message(FIGURE8, b"same", &a.public, &params).unwrap();
    let (stego_b, _) = embed_message(FIGURE8, b"same", &b.public, &params).unwrap();
    assert_eq!(stego_a, stego_b);

    report("determinism", started, Duration::from_secs(60));
}
