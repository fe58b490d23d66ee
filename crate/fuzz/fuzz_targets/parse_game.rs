#![no_main]

use libfuzzer_sys::fuzz_target;
use rankgame::io::{parse_game, write_game};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(game) = parse_game(text) {
        let _ = rankgame::validate(&game);
        let again = parse_game(&write_game(&game)).expect("written game must parse");
        assert_eq!(again, game);
    }
});
