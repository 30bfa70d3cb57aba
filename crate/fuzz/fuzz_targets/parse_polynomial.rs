#![no_main]
use libfuzzer_sys::fuzz_target;

use metriplectic::ScalarField;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = s.parse::<ScalarField>() {
        // printing is lossless, so a parsed field must read back unchanged
        let again: ScalarField = f.to_string().parse().expect("display output must parse");
        assert_eq!(again, f);
        let _ = f.grad(metriplectic::Vec3::new(0.5, -1.0, 2.0));
    }
});
