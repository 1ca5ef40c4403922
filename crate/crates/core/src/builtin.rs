//! Constraint specs shipped with the crate, resolvable by file name.

/// `(file name, contents)` of every built-in `.flc` spec.
pub const SPECS: &[(&str, &str)] = &[
    ("dithering-1d.flc", include_str!("../constraints/dithering-1d.flc")),
    ("dithering-2d.flc", include_str!("../constraints/dithering-2d.flc")),
    ("overactuation-1d.flc", include_str!("../constraints/overactuation-1d.flc")),
    ("overactuation-2d.flc", include_str!("../constraints/overactuation-2d.flc")),
    ("successive-identical.flc", include_str!("../constraints/successive-identical.flc")),
    ("sum-threshold.flc", include_str!("../constraints/sum-threshold.flc")),
    ("proximity.flc", include_str!("../constraints/proximity.flc")),
    ("proximity-levels.flc", include_str!("../constraints/proximity-levels.flc")),
    ("dangerzone.flc", include_str!("../constraints/dangerzone.flc")),
];

/// Looks up a built-in by file name, with or without the `.flc` suffix.
pub fn find(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".flc").unwrap_or(name);
    SPECS
        .iter()
        .find(|(file, _)| file.strip_suffix(".flc") == Some(stem))
        .map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SPECS.iter().map(|(file, _)| *file)
}
