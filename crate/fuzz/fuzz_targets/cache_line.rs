#![no_main]

use std::io::Write;

use erlab_core::oracle::{Cache, CacheHeader, OracleCell};
use erlab_core::Caps;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cell) = serde_json::from_slice::<OracleCell>(data) {
        let _ = cell.check_integrity();
    }
    let caps = Caps::default();
    let mut file = tempfile::NamedTempFile::new().unwrap();
    let header = serde_json::to_string(&CacheHeader::current(&caps)).unwrap();
    writeln!(file, "{header}").unwrap();
    file.write_all(data).unwrap();
    file.flush().unwrap();
    if let Ok(cache) = Cache::open(file.path(), &caps) {
        for cell in cache.cells() {
            cell.check_integrity().expect("loaded cells are consistent");
        }
    }
});
