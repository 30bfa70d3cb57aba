#![no_main]
use libfuzzer_sys::fuzz_target;

use metriplectic::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = s.parse::<RunConfig>() {
        let _ = cfg.build_system();
    }
});
