#![no_main]

use libfuzzer_sys::fuzz_target;
use rdqn_core::replay::{read_dump, write_dump};

fuzz_target!(|data: &[u8]| {
    if let Ok(transitions) = read_dump(data) {
        let mut out = Vec::new();
        write_dump(&mut out, &transitions).expect("writing to memory");
        let again = read_dump(&out[..]).expect("re-reading a written dump");
        assert_eq!(again, transitions);
    }
});
