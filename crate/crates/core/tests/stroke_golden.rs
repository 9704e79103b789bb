//! Golden stroke fixtures shared with browser clients.
//!
//! Each `assets/golden/strokes/<name>.json` holds a canvas size and a stroke
//! script; `<name>.png` is the mask this crate produces for it. Set
//! `XAI_REGENERATE_GOLDEN=1` to rewrite the PNGs.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;
use xai_core::{Mask, Stroke};

#[derive(Deserialize)]
struct Fixture {
    width: u32,
    height: u32,
    strokes: Vec<Stroke>,
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets/golden/strokes")
}

#[test]
fn stroke_scripts_match_golden_masks() {
    let regenerate = std::env::var_os("XAI_REGENERATE_GOLDEN").is_some();
    let mut scripts: Vec<PathBuf> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    scripts.sort();
    assert!(scripts.len() >= 4, "expected stroke fixtures in {}", golden_dir().display());

    for script in scripts {
        let fixture: Fixture = serde_json::from_slice(&fs::read(&script).unwrap()).unwrap();
        let mut mask = Mask::new(fixture.width, fixture.height).unwrap();
        for stroke in &fixture.strokes {
            mask.apply_stroke(stroke).unwrap();
        }
        let png = script.with_extension("png");
        if regenerate {
            fs::write(&png, mask.encode()).unwrap();
            continue;
        }
        let golden = fs::read(&png).unwrap_or_else(|e| panic!("{}: {e}", png.display()));
        assert_eq!(mask.encode(), golden, "{} drifted", script.display());
        assert_eq!(Mask::decode(&golden).unwrap(), mask);
    }
}
