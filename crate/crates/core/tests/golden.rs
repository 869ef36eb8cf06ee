//! Pinned hashes of experiment CSVs. A change here means the numbers an
//! experiment produces have changed; update the constants only on purpose.

use std::path::Path;

use gtl_core::harness::{run_and_write, ExperimentConfig};
use sha2::{Digest, Sha256};

fn csv_hash(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let mut cfg = ExperimentConfig::from_file(&path).unwrap();
    cfg.output = None;
    let (_, bytes) = run_and_write(&cfg).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn smoke_config_hash() {
    assert_eq!(csv_hash("smoke.cfg"), "6cd1b99b211e235a839217dff30201fb51a243e62b5283722b26a273881de9a2");
}

#[test]
fn a5_config_hash() {
    assert_eq!(csv_hash("a5.cfg"), "beb84e627de0d906cf8e299dc0b4e64d324bc2e452532571d1b8a08d07da298d");
}
