//! Newform coefficient lists, certificates, conductor and dimension data.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::fields::{format_element, format_int_list, parse_element, parse_int_list, RecordLine};
use super::tables::{resolve_newform, ResolvedNewform};
use crate::arith::QuadRat;
use crate::curvefit::{Certificate, Verdict};
use crate::{Error, Result};

/// Prime coefficients of one newform, as served by a coefficient source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformRecord {
    pub label: String,
    pub level: u64,
    pub eps: String,
    pub d: i64,
    pub cm: bool,
    pub ap: BTreeMap<u64, QuadRat>,
}

impl NewformRecord {
    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let r = RecordLine::parse(text, line)?;
        if r.tag != "newform" {
            return Err(r.error(1, format!("expected a newform record, found {:?}", r.tag)));
        }
        let d: i64 = r.parse_value("d")?;
        let cm = match r.get("cm") {
            None | Some(("0", _)) => false,
            Some(("1", _)) => true,
            Some((_, col)) => return Err(r.error(col, "cm must be 0 or 1")),
        };
        let mut ap = BTreeMap::new();
        for (p, v, col) in r.indexed("a") {
            ap.insert(p, parse_element(v, d).map_err(|m| r.error(col, m))?);
        }
        Ok(NewformRecord {
            label: r.positional(0)?.text.to_string(),
            level: r.parse_value("N")?,
            eps: r.require("eps")?.0.to_string(),
            d,
            cm,
            ap,
        })
    }

    pub fn newform(&self) -> Result<ResolvedNewform> {
        let mut nf = resolve_newform(&self.label, self.level, &self.eps, self.d, &self.ap)?;
        nf.spec.cm = self.cm;
        Ok(nf)
    }

    /// Resolves the character and checks every coefficient bound at the level.
    pub fn validate(&self) -> Result<ResolvedNewform> {
        let nf = self.newform()?;
        if let Some(v) = nf.spec.check_bounds(Some(self.level)).first() {
            return Err(Error::Validation { label: self.label.clone(), msg: format!("coefficient bound violated: {v}") });
        }
        Ok(nf)
    }

    /// Keeps the coefficients `a_p` with `p <= bound`.
    pub fn truncate(&mut self, bound: u64) {
        self.ap.retain(|&p, _| p <= bound);
    }
}

impl fmt::Display for NewformRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "newform\t{}\tN={}\teps={}\td={}\tcm={}", self.label, self.level, self.eps, self.d, u8::from(self.cm))?;
        for (p, a) in &self.ap {
            write!(f, "\ta{p}={}", format_element(a, self.d))?;
        }
        Ok(())
    }
}

pub fn format_certificate(c: &Certificate) -> String {
    let verdict = match &c.verdict {
        Verdict::Verified => "verified".to_string(),
        Verdict::Failed { order } => format!("failed:b_{order}"),
        Verdict::Indeterminate => "indeterminate".to_string(),
    };
    format!(
        "certificate\t{}\tN={}\teps={}\tgenus={}\tbudget={}\tverdict={verdict}\tavailable={}\tchecked={}",
        c.label, c.level, c.character, c.genus, c.budget, c.coefficients_available, c.checked_through
    )
}

pub fn parse_certificate(text: &str, line: usize) -> Result<Certificate> {
    let r = RecordLine::parse(text, line)?;
    if r.tag != "certificate" {
        return Err(r.error(1, format!("expected a certificate record, found {:?}", r.tag)));
    }
    let (v, col) = r.require("verdict")?;
    let verdict = match v {
        "verified" => Verdict::Verified,
        "indeterminate" => Verdict::Indeterminate,
        _ => match v.strip_prefix("failed:b_").and_then(|o| o.parse().ok()) {
            Some(order) => Verdict::Failed { order },
            None => return Err(r.error(col, format!("bad verdict {v:?}"))),
        },
    };
    Ok(Certificate {
        label: r.positional(0)?.text.to_string(),
        level: r.parse_value("N")?,
        character: r.require("eps")?.0.to_string(),
        genus: r.parse_value("genus")?,
        budget: r.parse_value("budget")?,
        verdict,
        coefficients_available: r.parse_value("available")?,
        checked_through: r.parse_value("checked")?,
    })
}

/// Odd part of the conductor of the jacobian of `y^2 = P(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConductorRecord {
    pub poly: Vec<BigInt>,
    pub odd: BigInt,
}

impl ConductorRecord {
    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let r = RecordLine::parse(text, line)?;
        if r.tag != "conductor" {
            return Err(r.error(1, format!("expected a conductor record, found {:?}", r.tag)));
        }
        let (ptext, pcol) = r.require("P")?;
        let poly = parse_int_list(ptext).ok_or_else(|| r.error(pcol, "P needs integers"))?;
        Ok(ConductorRecord { poly, odd: r.parse_value("odd")? })
    }
}

impl fmt::Display for ConductorRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "conductor\tP={}\todd={}", format_int_list(&self.poly), self.odd)
    }
}

/// `dim S_2(N, eps^k)` for `k = 1, ..., ord(eps) - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimsRecord {
    pub level: u64,
    pub eps: String,
    pub dims: Vec<u64>,
}

impl DimsRecord {
    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let r = RecordLine::parse(text, line)?;
        if r.tag != "dims" {
            return Err(r.error(1, format!("expected a dims record, found {:?}", r.tag)));
        }
        let (dtext, dcol) = r.require("dims")?;
        let dims = dtext
            .split(',')
            .map(str::parse)
            .collect::<std::result::Result<Vec<u64>, _>>()
            .map_err(|_| r.error(dcol, format!("bad dimension list {dtext:?}")))?;
        Ok(DimsRecord { level: r.parse_value("N")?, eps: r.require("eps")?.0.to_string(), dims })
    }
}

impl fmt::Display for DimsRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(u64::to_string).collect();
        write!(f, "dims\tN={}\teps={}\tdims={}", self.level, self.eps, dims.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::fields::record_lines;

    const F63: &str = "newform\tf_63\tN=63\teps=1\td=3\tcm=0\ta2=s[0,1]\ta3=s[0,0]\ta5=s[0,-2]\ta7=s[1,0]";

    #[test]
    fn newform_round_trip() {
        let r = NewformRecord::parse(F63, 1).unwrap();
        assert_eq!(r.to_string(), F63);
        assert!(r.validate().unwrap().spec.character.is_trivial());
    }

    #[test]
    fn weil_violation_names_prime() {
        let bad = F63.replace("a2=s[0,1]", "a2=s[0,2]");
        match NewformRecord::parse(&bad, 1).unwrap().validate() {
            Err(Error::Validation { msg, .. }) => assert!(msg.contains("p = 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certificate_round_trip() {
        for line in [
            "certificate\tC_63\tN=63\teps=1\tgenus=5\tbudget=49\tverdict=verified\tavailable=60\tchecked=48",
            "certificate\tX\tN=36\teps=[1,3]\tgenus=17\tbudget=193\tverdict=failed:b_7\tavailable=196\tchecked=6",
            "certificate\tY\tN=36\teps=[1,3]\tgenus=17\tbudget=193\tverdict=indeterminate\tavailable=16\tchecked=10",
        ] {
            assert_eq!(format_certificate(&parse_certificate(line, 1).unwrap()), line);
        }
    }

    #[test]
    fn small_records_round_trip() {
        let text = "# comment\nconductor\tP=-27,0,0,-26,0,0,1\todd=3969\n\ndims\tN=36\teps=[1,3]\tdims=1,1\n";
        let lines: Vec<_> = record_lines(text).collect();
        assert_eq!(ConductorRecord::parse(lines[0].1, lines[0].0).unwrap().to_string(), lines[0].1);
        assert_eq!(DimsRecord::parse(lines[1].1, lines[1].0).unwrap().to_string(), lines[1].1);
        assert!(matches!(DimsRecord::parse("dims\tN=36\teps=1\tdims=1,x", 3), Err(Error::Parse { line: 3, column: 22, .. })));
    }
}
