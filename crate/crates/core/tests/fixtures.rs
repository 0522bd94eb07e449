use std::path::PathBuf;

use qtemplate_core::circuit::prepare_point_state;
use qtemplate_core::glyphs::{quadrant, render_glyph};
use qtemplate_core::image::{parse_pbm, write_pbm};
use qtemplate_core::{Label, PnmEncoding};

fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn shipped_letters_match_rasterizer() {
    for label in Label::BOTH {
        for size in [32, 64, 512] {
            let name = format!("{}_{size}.pbm", label.as_str());
            let encoding = if size > 64 { PnmEncoding::Raw } else { PnmEncoding::Plain };
            let expected = render_glyph(label, size).unwrap();
            let bytes = fixture(&name);
            assert_eq!(bytes, write_pbm(&expected, encoding), "{name}");
            assert_eq!(parse_pbm(&bytes).unwrap(), expected, "{name}");
        }
    }
}

#[test]
fn shipped_quadrant_fills_a_quarter() {
    let q = parse_pbm(&fixture("quadrant_16.pbm")).unwrap();
    assert_eq!(q, quadrant(16).unwrap());
    assert_eq!(q.point_count() * 4, q.pixel_count());
    let (p, _) = prepare_point_state(&q).unwrap();
    assert_eq!(p, 0.25);
}
