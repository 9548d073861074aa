//! The `.tt` truth-table text format: line 1 is `n` in decimal, line 2 is the
//! `2ⁿ` table characters from `{0,1}` in index order. The trailing newline is
//! optional.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::BoolFn;

pub fn parse(text: &str) -> Result<BoolFn> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::TruthTable("empty input".into()))?;
    let n: u32 = header.trim().parse().map_err(|_| Error::TruthTable(format!("first line must be the dimension, found {header:?}")))?;
    let body = lines.next().ok_or_else(|| Error::TruthTable("missing table line".into()))?.trim_end_matches('\r');
    if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
        return Err(Error::TruthTable(format!("unexpected content after table: {extra:?}")));
    }
    BoolFn::from_bit_str(n, body)
}

pub fn render(f: &BoolFn) -> String {
    format!("{}\n{}\n", f.dim(), f.to_bit_string())
}

pub fn read(path: impl AsRef<Path>) -> Result<BoolFn> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write(path: impl AsRef<Path>, f: &BoolFn) -> Result<()> {
    std::fs::write(path, render(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_with_and_without_trailing_newline() {
        let f = parse("2\n0001\n").unwrap();
        assert_eq!(f, parse("2\n0001").unwrap());
        assert_eq!(f.to_bit_string(), "0001");
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse("").is_err());
        assert!(parse("2\n").is_err());
        assert!(parse("x\n0001").is_err());
        assert!(parse("2\n001").is_err());
        assert!(parse("2\n0021").is_err());
        assert!(parse("2\n0001\n1111").is_err());
        assert!(parse("0\n1").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.tt");
        let f = BoolFn::from_fn(5, |x| x.count_ones() == 2).unwrap();
        write(&path, &f).unwrap();
        assert_eq!(read(&path).unwrap(), f);
    }

    proptest! {
        #[test]
        fn render_parse_identity(n in 1u32..=9, seed in any::<u64>()) {
            let f = BoolFn::from_fn(n, |x| (seed.rotate_left(x % 64) ^ u64::from(x)) & 1 == 1).unwrap();
            prop_assert_eq!(parse(&render(&f)).unwrap(), f);
        }
    }
}
