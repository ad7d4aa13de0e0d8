//! Small example systems bundled with the crate.

use crate::tpdb::parse_trs;
use crate::trs::Trs;

/// `(file name, TPDB source)` for every bundled system.
pub const SOURCES: &[(&str, &str)] = &[
    ("size.trs", include_str!("../fixtures/size.trs")),
    ("doubles.trs", include_str!("../fixtures/doubles.trs")),
    ("mod.trs", include_str!("../fixtures/mod.trs")),
    ("max.trs", include_str!("../fixtures/max.trs")),
    ("no_confluence.trs", include_str!("../fixtures/no_confluence.trs")),
    ("critical_pairs.trs", include_str!("../fixtures/critical_pairs.trs")),
    ("plus_only.trs", include_str!("../fixtures/plus_only.trs")),
    ("recursion_1.trs", include_str!("../fixtures/recursion_1.trs")),
    ("recursion_2.trs", include_str!("../fixtures/recursion_2.trs")),
    ("recursion_3.trs", include_str!("../fixtures/recursion_3.trs")),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn load(name: &str) -> Trs {
    parse_trs(source(name).expect("bundled fixture")).expect("bundled fixture parses")
}

/// Tree size with a linear-time `plus`.
pub fn size() -> Trs {
    load("size.trs")
}

/// `doubles(n)` builds the list `[2n, 2(n-1), ..., 2]`.
pub fn doubles() -> Trs {
    load("doubles.trs")
}

/// Natural-number modulo via repeated subtraction.
pub fn modulo() -> Trs {
    load("mod.trs")
}

pub fn max() -> Trs {
    load("max.trs")
}

/// `a` splits into two `⇉`-cycles with no common term.
pub fn no_confluence() -> Trs {
    load("no_confluence.trs")
}

pub fn critical_pairs() -> Trs {
    load("critical_pairs.trs")
}

pub fn plus_only() -> Trs {
    load("plus_only.trs")
}

/// `f_i` spawns a chain of `g_i` calls, each calling `f_{i-1}`.
pub fn recursion(i: usize) -> Trs {
    load(&format!("recursion_{i}.trs"))
}

pub fn all() -> Vec<(&'static str, Trs)> {
    SOURCES
        .iter()
        .map(|(n, s)| (*n, parse_trs(s).expect("bundled fixture parses")))
        .collect()
}
