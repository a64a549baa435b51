//! Shared inputs for the engine benchmarks.

use z2cover::config;
use z2cover::cover::CoverModel;

/// Fixture documents bundled at compile time, keyed by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("p42", include_str!("../../core/tests/fixtures/p42.cfg")),
    ("p44", include_str!("../../core/tests/fixtures/p44.cfg")),
    ("p46", include_str!("../../core/tests/fixtures/p46.cfg")),
    ("p48", include_str!("../../core/tests/fixtures/p48.cfg")),
    ("p410", include_str!("../../core/tests/fixtures/p410.cfg")),
    ("p412", include_str!("../../core/tests/fixtures/p412.cfg")),
    ("p51", include_str!("../../core/tests/fixtures/p51.cfg")),
    ("p53", include_str!("../../core/tests/fixtures/p53.cfg")),
    ("p55", include_str!("../../core/tests/fixtures/p55.cfg")),
    ("p57", include_str!("../../core/tests/fixtures/p57.cfg")),
    ("p59", include_str!("../../core/tests/fixtures/p59.cfg")),
];

pub fn models() -> Vec<(&'static str, CoverModel)> {
    FIXTURES
        .iter()
        .map(|(name, text)| (*name, config::parse(text).expect("bundled fixture parses")))
        .collect()
}
