//! The four shipped example configurations, embedded at build time so
//! `--seed-preset` works from any directory. The same files live under
//! `configs/` at the repository root.

pub const PRESETS: &[(&str, &str)] = &[
    ("example71", include_str!("../../../configs/example71.toml")),
    (
        "example71-modified",
        include_str!("../../../configs/example71_modified.toml"),
    ),
    ("example72", include_str!("../../../configs/example72.toml")),
    (
        "example72-modified",
        include_str!("../../../configs/example72_modified.toml"),
    ),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
