//! Replays the checked-in fuzz corpus through the parsers.

use std::path::{Path, PathBuf};

fn seeds(target: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for path in seeds("config_parse") {
        let text = std::fs::read_to_string(&path).unwrap();
        accepted += tailwave::config::parse_config_text(&text).is_ok() as usize;
    }
    assert!(accepted >= 4);
}

#[test]
fn series_seeds() {
    let results: Vec<bool> = seeds("series_csv")
        .iter()
        .map(|p| tailwave_core::io::read_series(std::fs::File::open(p).unwrap()).is_ok())
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn table_seeds() {
    let results: Vec<bool> = seeds("custom_table")
        .iter()
        .map(|p| tailwave_core::io::read_custom_table(std::fs::File::open(p).unwrap()).is_ok())
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}
