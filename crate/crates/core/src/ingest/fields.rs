//! Line-oriented record syntax shared by every data file.
//!
//! A record is a tag followed by tab-separated fields. Field elements are
//! written `s[u,v]` for `u + v sqrt d` or `w[u,v]` for `u + v w_d`, where
//! `w_d` is a root of `x^2 - x - (d-1)/4`; `u, v` are integers or `n/m`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;

use crate::arith::{QuadRat, Rat};
use crate::{Error, Result};

/// One tab-separated field with its 1-based starting column.
#[derive(Clone, Debug)]
pub struct Field<'a> {
    pub text: &'a str,
    pub column: usize,
}

/// A parsed record line: tag, positional fields, then `key=value` pairs.
#[derive(Clone, Debug)]
pub struct RecordLine<'a> {
    pub line: usize,
    pub tag: &'a str,
    pub fields: Vec<Field<'a>>,
}

impl<'a> RecordLine<'a> {
    pub fn parse(text: &'a str, line: usize) -> Result<Self> {
        let mut fields = Vec::new();
        let mut column = 1;
        for part in text.split('\t') {
            fields.push(Field { text: part, column });
            column += part.chars().count() + 1;
        }
        let tag = fields.remove(0);
        if tag.text.is_empty() {
            return Err(Error::Parse { line, column: 1, msg: "missing record tag".into() });
        }
        Ok(RecordLine { line, tag: tag.text, fields })
    }

    pub fn error(&self, column: usize, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, column, msg: msg.into() }
    }

    pub fn positional(&self, i: usize) -> Result<&Field<'a>> {
        self.fields.get(i).ok_or_else(|| self.error(1, format!("{} record needs field {}", self.tag, i + 1)))
    }

    /// The value of `key=...` and the column where the value starts.
    pub fn get(&self, key: &str) -> Option<(&'a str, usize)> {
        self.fields.iter().find_map(|f| {
            let (k, v) = f.text.split_once('=')?;
            (k == key).then_some((v, f.column + k.len() + 1))
        })
    }

    pub fn require(&self, key: &str) -> Result<(&'a str, usize)> {
        self.get(key).ok_or_else(|| self.error(1, format!("missing field {key}")))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<T> {
        let (v, col) = self.require(key)?;
        v.parse().map_err(|_| self.error(col, format!("bad value for {key}: {v:?}")))
    }

    /// Every `key=value` pair whose key is `prefix` followed by a number.
    pub fn indexed(&self, prefix: &str) -> Vec<(u64, &'a str, usize)> {
        self.fields
            .iter()
            .filter_map(|f| {
                let (k, v) = f.text.split_once('=')?;
                let n = k.strip_prefix(prefix)?.parse().ok()?;
                Some((n, v, f.column + k.len() + 1))
            })
            .collect()
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (BigInt::from_str(n).ok()?, BigInt::from_str(d).ok()?);
            (d > BigInt::from(0)).then(|| Rat::new(n, d))
        }
        None => BigInt::from_str(s).ok().map(Rat::from_integer),
    }
}

pub fn format_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decodes `s[u,v]` or `w[u,v]` in `Q(sqrt d)`.
pub fn parse_element(s: &str, d: i64) -> std::result::Result<QuadRat, String> {
    let (tag, rest) = s.split_at(s.find('[').ok_or("expected s[u,v] or w[u,v]")?);
    let body = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or("unbalanced brackets")?;
    let (u, v) = body.split_once(',').ok_or("expected two coordinates")?;
    let u = parse_rat(u.trim()).ok_or_else(|| format!("bad coordinate {u:?}"))?;
    let v = parse_rat(v.trim()).ok_or_else(|| format!("bad coordinate {v:?}"))?;
    let r = match tag {
        "s" => QuadRat::new(d, u, v),
        "w" if d.rem_euclid(4) == 1 => QuadRat::from_w(d, u, v),
        "w" => return Err(format!("w-basis used with d = {d}, which is not 1 mod 4")),
        _ => return Err(format!("unknown basis tag {tag:?}")),
    };
    r.map_err(|e| e.to_string())
}

/// Encodes in the `w` basis when `d = 1 mod 4`, otherwise in the `s` basis.
pub fn format_element(a: &QuadRat, d: i64) -> String {
    if d.rem_euclid(4) == 1 {
        let (u, v) = a.to_w();
        format!("w[{},{}]", format_rat(&u), format_rat(&v))
    } else {
        format!("s[{},{}]", format_rat(a.a()), format_rat(a.b()))
    }
}

pub fn parse_int_list(s: &str) -> Option<Vec<BigInt>> {
    s.split(',').map(|t| BigInt::from_str(t.trim()).ok()).collect()
}

pub fn format_int_list(v: &[BigInt]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Lines that carry records: comments (`#`) and blank lines are skipped.
pub fn record_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
