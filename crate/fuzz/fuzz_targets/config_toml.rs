#![no_main]

use libfuzzer_sys::fuzz_target;
use lj_halfline::config::parse_toml;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(raw) = parse_toml(text) else { return };
    if let Ok(config) = raw.resolve() {
        assert!(config.alpha > 0.0 && config.beta > 0.0);
        assert!(config.grid.eps >= 0.0 && config.grid.l > config.grid.eps);
        assert!(config.grid.n >= 16);
        assert_eq!(config.canonical_json(), config.canonical_json());
    }
});
