#![no_main]

use erlab_cli::input::parse_partitioned_line;
use erlab_core::constructions::normalize_h0;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(pg) = parse_partitioned_line(line) {
        if let Ok(normalized) = normalize_h0(&pg) {
            assert_eq!(normalized.graph().edge_count(), pg.graph().edge_count());
        }
    }
});
