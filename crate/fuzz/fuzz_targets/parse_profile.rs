#![no_main]

use libfuzzer_sys::fuzz_target;
use rankgame::io::{parse_profile, write_profile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = parse_profile(text) {
        assert_eq!(parse_profile(&write_profile(&profile)).unwrap(), profile);
    }
});
