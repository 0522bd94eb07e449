//! Shared inputs for the benchmark targets.

use std::path::PathBuf;

use qtemplate_core::image::parse_pbm;
use qtemplate_core::BinaryImage;

/// Loads one of the shipped PBM fixtures by file name.
pub fn fixture(name: &str) -> BinaryImage {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_pbm(&bytes).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
