//! Parser checks shared by the golden tests and the acceptance target.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use pivp::parser::{parse_system, ParseErrorKind, SystemFile};
use pivp_core::numeric::{rat, rat_int};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// The expected `.out` text for a system file: its canonical form, or the
/// error with position.
pub fn render(text: &str) -> String {
    match parse_system(text) {
        Ok(s) => s.to_string(),
        Err(e) => format!("error {e}\n"),
    }
}

fn class(kind: &ParseErrorKind) -> &'static str {
    match kind {
        ParseErrorKind::Lexical(_) => "lexical",
        ParseErrorKind::UnknownVariable { .. } => "unknown-variable",
        ParseErrorKind::NegativeExponent => "negative-exponent",
        ParseErrorKind::FractionalExponent => "fractional-exponent",
        ParseErrorKind::DimensionMismatch { .. } => "dimension-mismatch",
        ParseErrorKind::Syntax(_) => "syntax",
    }
}

pub fn golden_inputs() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(golden_dir())
        .expect("golden directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "pivp"))
        .collect();
    files.sort();
    files
}

/// Compares every `.pivp` file with its `.out`; with `bless`, rewrites the
/// `.out` files instead.
pub fn golden_suite(bless: bool) -> Check {
    let files = golden_inputs();
    let mut classes = BTreeSet::new();
    let mut failures = Vec::new();
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let got = render(&text);
        if let Err(e) = parse_system(&text) {
            classes.insert(class(&e.kind));
        }
        let out = path.with_extension("out");
        if bless {
            std::fs::write(&out, &got).map_err(|e| e.to_string())?;
            continue;
        }
        match std::fs::read_to_string(&out) {
            Ok(want) if want == got => {}
            Ok(want) => failures.push(format!("{}: expected {want:?}, got {got:?}", path.display())),
            Err(_) => failures.push(format!("{}: missing {}", path.display(), out.display())),
        }
    }
    let all =
        ["lexical", "unknown-variable", "negative-exponent", "fractional-exponent", "dimension-mismatch", "syntax"];
    let missing: Vec<&str> = all.iter().copied().filter(|c| !classes.contains(c)).collect();
    if !failures.is_empty() {
        return Err(failures.join("\n"));
    }
    if files.len() < 15 {
        return Err(format!("only {} golden files", files.len()));
    }
    if !missing.is_empty() {
        return Err(format!("no golden file for error classes {missing:?}"));
    }
    Ok(format!("{} golden files, {} error classes", files.len(), classes.len()))
}

fn random_atom(rng: &mut impl Rng, d: usize) -> String {
    match rng.gen_range(0..4) {
        0 => format!("{}", rng.gen_range(0..10)),
        1 => format!("{}/{}", rng.gen_range(0..10), rng.gen_range(1..8)),
        _ => format!("y{}", rng.gen_range(1..=d)),
    }
}

/// Random non-canonical expression text over `y1..yd`.
pub fn random_expr(rng: &mut impl Rng, d: usize, depth: u32) -> String {
    if depth == 0 {
        return random_atom(rng, d);
    }
    match rng.gen_range(0..7) {
        0 => format!("{} + {}", random_expr(rng, d, depth - 1), random_expr(rng, d, depth - 1)),
        1 => format!("{} - {}", random_expr(rng, d, depth - 1), random_expr(rng, d, depth - 1)),
        2 | 3 => format!("{}*{}", random_factor(rng, d, depth - 1), random_factor(rng, d, depth - 1)),
        4 => format!("-{}", random_factor(rng, d, depth - 1)),
        5 => format!("({})^{}", random_expr(rng, d, depth - 1), rng.gen_range(0..3)),
        _ => random_atom(rng, d),
    }
}

fn random_factor(rng: &mut impl Rng, d: usize, depth: u32) -> String {
    let e = random_expr(rng, d, depth);
    if e.contains(' ') || e.starts_with('-') {
        format!("({e})")
    } else {
        e
    }
}

pub fn random_system_text(rng: &mut impl Rng) -> String {
    let d = rng.gen_range(1..=3);
    let mut text = format!("dim {d}\n");
    for i in 1..=d {
        text += &format!("eq y{i}' = {}\n", random_expr(rng, d, 3));
    }
    let y0: Vec<String> = (0..d).map(|_| rat(rng.gen_range(-9..=9), rng.gen_range(1..=9)).to_string()).collect();
    text += &format!("y0 = {}\n", y0.join(" "));
    text += &format!("t0 = {}\n", rat_int(rng.gen_range(-3..=3)));
    text
}

/// parse, print, parse gives the same system, and printing is a fixed point.
pub fn round_trip(count: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let text = random_system_text(&mut rng);
        let first: SystemFile = parse_system(&text).map_err(|e| format!("system {i}: {e}\n{text}"))?;
        let canon = first.to_string();
        let second = parse_system(&canon).map_err(|e| format!("system {i}: canonical text rejected: {e}\n{canon}"))?;
        if second != first {
            return Err(format!("system {i}: reparse differs\n{text}\n{canon}"));
        }
        if second.to_string() != canon {
            return Err(format!("system {i}: printing is not a fixed point\n{canon}"));
        }
    }
    Ok(format!("{count} random systems round-trip"))
}
