#![no_main]

use libfuzzer_sys::fuzz_target;
use rankgame::Rat;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = text.parse::<Rat>() {
        assert_eq!(x.to_string().parse::<Rat>().unwrap(), x);
    }
});
