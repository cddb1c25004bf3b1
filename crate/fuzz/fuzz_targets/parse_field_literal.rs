#![no_main]

use couple_stress::poly_fields::{parse_poly, parse_poly_vec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = parse_poly(text) {
            assert_eq!(parse_poly(&p.to_string()).ok(), Some(p));
        }
        let _ = parse_poly_vec(text);
    }
});
