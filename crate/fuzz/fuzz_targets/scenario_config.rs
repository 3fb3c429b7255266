#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| fanning_lab::fuzzing::scenario_config(data));
