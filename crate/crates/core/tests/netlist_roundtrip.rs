//! Round-trip identity over the golden corpus plus random-byte parser fuzz.

use std::fs;
use std::path::PathBuf;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noncausal_core::factoring::{build_factoring_circuit, DomainMode};
use noncausal_core::netlist::{parse, serialize};

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden_documents() -> Vec<(String, String)> {
    let mut docs: Vec<(String, String)> = fs::read_dir(golden_dir())
        .expect("the golden corpus directory exists")
        .map(|entry| entry.expect("directory entries are readable").path())
        .filter(|p| p.extension().is_some_and(|e| e == "nl"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(&p).expect("corpus files are readable");
            (name, text)
        })
        .collect();
    docs.sort();
    assert!(docs.len() >= 10, "the corpus should stay populated");
    docs
}

#[test]
fn golden_corpus_round_trips_to_structural_identity() {
    for (name, text) in golden_documents() {
        let first = parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canon = serialize(&first);
        let second = parse(&canon).unwrap_or_else(|e| panic!("{name} reparse: {e}"));
        assert_eq!(first, second, "{name}: round trip changed the circuit");
        assert_eq!(canon, serialize(&second), "{name}: canonical form is not a fixed point");
    }
}

#[test]
fn generated_circuits_round_trip() {
    for n in [7u64, 12, 30] {
        let closed = build_factoring_circuit(n, DomainMode::Extended).unwrap();
        let circuit = closed.inner().clone();
        let canon = serialize(&circuit);
        let reparsed = parse(&canon).unwrap_or_else(|e| panic!("factoring {n}: {e}"));
        assert_eq!(circuit, reparsed);
        // The lowered form replaces tables with pure gates and must survive
        // the same trip.
        let lowered = circuit.lower();
        let canon = serialize(&lowered);
        assert_eq!(lowered, parse(&canon).unwrap());
    }
}

#[test]
fn random_bytes_never_panic_the_parser() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e65746c);
    for _ in 0..100_000 {
        let len = rng.gen_range(0..200);
        let mut bytes = vec![0u8; len];
        rng.fill_bytes(&mut bytes);
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse(&text);
    }
}

#[test]
fn random_token_soup_never_panics_the_parser() {
    // Biased toward near-valid documents so deep parser states get hit.
    const WORDS: [&str; 18] = [
        "version", "inputs", "outputs", "AND", "OR", "NOT", "CONST0", "CONST1",
        "TABLE", ":", "=", "in0", "in1", "g0", "g1", "0", "1", "2",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x736f7570);
    for _ in 0..20_000 {
        let tokens = rng.gen_range(0..40);
        let mut text = String::new();
        for _ in 0..tokens {
            text.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
            text.push(if rng.gen_bool(0.2) { '\n' } else { ' ' });
        }
        let _ = parse(&text);
    }
}
