#![no_main]

use libfuzzer_sys::fuzz_target;
use rdqn_core::qfunc::{decode_snapshot, encode_snapshot};

fuzz_target!(|data: &[u8]| {
    if let Ok(q) = decode_snapshot(data) {
        // Anything that decodes must re-encode to the same bytes.
        assert_eq!(encode_snapshot(&q), data);
    }
});
