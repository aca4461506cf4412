#![no_main]

use erlab_core::graph6;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = graph6::decode(text) {
        let again = graph6::decode(&graph6::encode(&g)).expect("encoded graph decodes");
        assert_eq!(g, again);
    }
});
