//! Compression ratios on natural-text pools, pinned against an independent
//! gzip implementation (level 6, zero mtime).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use valuescope_core::attributes::{canonical_concatenation, compression_ratio, gzip_len, PooledText};
use valuescope_core::io::read_jsonl;

#[derive(Deserialize)]
struct Row {
    response_id: String,
    index: u32,
    text: String,
}

fn pool(name: &str) -> Vec<PooledText> {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    read_jsonl::<Row>(&path)
        .unwrap()
        .records
        .into_iter()
        .map(|r| PooledText::new(r.response_id, r.index, r.text))
        .collect()
}

#[test]
fn diverse_pool_ratio() {
    let items = pool("pool_diverse.jsonl");
    let joined = canonical_concatenation(&items);
    assert!(joined.len() >= 4096);
    assert_eq!(joined.len(), 4272);
    assert_eq!(gzip_len(joined.as_bytes(), 6), 2130);
    assert_eq!(compression_ratio(&items, 6).unwrap(), 2.0056338028169014);
}

#[test]
fn repetitive_pool_ratio() {
    let items = pool("pool_repetitive.jsonl");
    let joined = canonical_concatenation(&items);
    assert_eq!(joined.len(), 5270);
    assert_eq!(gzip_len(joined.as_bytes(), 6), 383);
    assert_eq!(compression_ratio(&items, 6).unwrap(), 13.759791122715404);
}

#[test]
fn repetition_compresses_further() {
    let diverse = compression_ratio(&pool("pool_diverse.jsonl"), 6).unwrap();
    let repetitive = compression_ratio(&pool("pool_repetitive.jsonl"), 6).unwrap();
    assert!(repetitive > 5.0 * diverse);
}

#[test]
fn level_out_of_range() {
    assert!(compression_ratio(&pool("pool_diverse.jsonl"), 10).is_err());
}

#[test]
fn repeated_byte_beats_random_text() {
    let mut rng = valuescope_core::synth::SplitMix64::new(42);
    let random: String = (0..2000).map(|_| (b' ' + rng.below(95) as u8) as char).collect();
    let a = compression_ratio(&[PooledText::new("r", 1, "a".repeat(2000))], 6).unwrap();
    let b = compression_ratio(&[PooledText::new("r", 1, random)], 6).unwrap();
    assert!(a > b);
    assert!(b < 1.3);
}

#[test]
fn duplicating_every_argument_raises_ratio() {
    for name in ["pool_diverse.jsonl", "pool_repetitive.jsonl"] {
        let items = pool(name);
        let single = compression_ratio(&items, 6).unwrap();
        assert!(single > 1.0);
        let doubled: Vec<PooledText> = items
            .iter()
            .flat_map(|p| [p.clone(), PooledText::new(format!("{}~", p.response_id), p.index, p.text.clone())])
            .collect();
        assert!(compression_ratio(&doubled, 6).unwrap() > single, "{name}");
    }
}
