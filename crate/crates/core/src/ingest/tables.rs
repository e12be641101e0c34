//! The bundled curve/newform tables.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;

use super::fields::{format_element, format_int_list, parse_element, parse_int_list, record_lines, RecordLine};
use crate::arith::{QPoly, QuadRat};
use crate::characters::{parse_degree_list, DirichletCharacter};
use crate::curvefit::{fit_newform, BasisChange, FitResult};
use crate::hyperelliptic::GenusTwoCurve;
use crate::newform::{Nebentypus, NewformSpec};
use crate::{Error, Result};

pub const BUNDLED_TABLES: &str = include_str!("../../data/tables.tsv");

/// One curve with the newform attached to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub label: String,
    /// 1 when the jacobian splits over the algebraic closure, 2 otherwise.
    pub table: u8,
    pub level: u64,
    /// Degree-list text of the Nebentypus, `1` when trivial.
    pub eps: String,
    pub d: i64,
    pub cm: bool,
    /// Coefficients of `P`, constant term first.
    pub poly: Vec<BigInt>,
    pub ap: BTreeMap<u64, QuadRat>,
    pub flags: Vec<String>,
}

/// A row's newform with its character pinned down.
#[derive(Clone, Debug)]
pub struct ResolvedNewform {
    pub spec: NewformSpec,
    /// Which reading of the degree list matched, when there was a choice.
    pub reading: Option<String>,
}

impl TableRow {
    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let r = RecordLine::parse(text, line)?;
        if r.tag != "row" {
            return Err(r.error(1, format!("expected a row record, found {:?}", r.tag)));
        }
        let label = r.positional(0)?.text.to_string();
        let table: u8 = r.parse_value("table")?;
        if table != 1 && table != 2 {
            let (_, col) = r.require("table")?;
            return Err(r.error(col, "table must be 1 or 2"));
        }
        let level: u64 = r.parse_value("N")?;
        let d: i64 = r.parse_value("d")?;
        let cm = match r.require("cm")? {
            ("0", _) => false,
            ("1", _) => true,
            (_, col) => return Err(r.error(col, "cm must be 0 or 1")),
        };
        let eps = r.require("eps")?.0.to_string();
        let (ptext, pcol) = r.require("P")?;
        let poly = parse_int_list(ptext).filter(|v| v.len() == 7).ok_or_else(|| r.error(pcol, "P needs 7 integers"))?;
        let mut ap = BTreeMap::new();
        for (p, v, col) in r.indexed("a") {
            let a = parse_element(v, d).map_err(|m| r.error(col, m))?;
            ap.insert(p, a);
        }
        let flags = r.get("flag").map(|(v, _)| v.split(',').map(String::from).collect()).unwrap_or_default();
        Ok(TableRow { label, table, level, eps, d, cm, poly, ap, flags })
    }

    pub fn curve(&self) -> Result<GenusTwoCurve> {
        GenusTwoCurve::new(&self.poly).map_err(|e| self.invalid(e.to_string()))
    }

    pub fn poly(&self) -> QPoly {
        QPoly::from_bigints(&self.poly)
    }

    fn invalid(&self, msg: impl Into<String>) -> Error {
        Error::Validation { label: self.label.clone(), msg: msg.into() }
    }

    /// Order of the extra-twist character: `ord eps` for nontrivial `eps`, 2
    /// for trivial `eps`; `None` for rows of the second table.
    pub fn twist_order(&self) -> Option<u32> {
        if self.table == 2 {
            return None;
        }
        match self.eps.as_str() {
            "1" => Some(2),
            _ => self.newform().ok().and_then(|n| n.spec.character.order()),
        }
    }

    /// The newform with its character resolved by `eps(p) = a_p / sigma(a_p)`.
    pub fn newform(&self) -> Result<ResolvedNewform> {
        let mut nf = resolve_newform(&self.label, self.level, &self.eps, self.d, &self.ap)?;
        nf.spec.cm = self.cm;
        nf.spec.twist = match self.table {
            1 => nf.spec.character.order().map(|k| if k == 1 { 2 } else { k }),
            _ => None,
        };
        Ok(nf)
    }

    /// The fit from the row's coefficients in the bundled model's basis.
    pub fn fit(&self, m: u64) -> Result<FitResult> {
        let nf = self.newform()?;
        fit_newform(&nf.spec, m, &BasisChange::for_field(self.d))?
            .curve()
            .ok_or_else(|| self.invalid("the coefficients do not give a curve"))
    }

    /// Squarefree `P`, coefficient bounds at the level and the degree/`n0`
    /// dichotomy.
    pub fn validate(&self) -> Result<()> {
        let curve = self.curve()?;
        let nf = self.newform()?;
        let v = nf.spec.check_bounds(Some(self.level));
        if let Some(first) = v.first() {
            return Err(self.invalid(format!("coefficient bound violated: {first}")));
        }
        let n0 = nf.spec.n0().map_err(|e| self.invalid(e.to_string()))?;
        let expected = if curve.degree() == 6 { 2 } else { 3 };
        if n0 != expected {
            return Err(self.invalid(format!("n0 = {n0} but deg P = {}", curve.degree())));
        }
        Ok(())
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row\t{}\ttable={}\tN={}\teps={}\td={}\tcm={}\tP={}",
            self.label,
            self.table,
            self.level,
            self.eps,
            self.d,
            u8::from(self.cm),
            format_int_list(&self.poly)
        )?;
        for (p, a) in &self.ap {
            write!(f, "\ta{p}={}", format_element(a, self.d))?;
        }
        if !self.flags.is_empty() {
            write!(f, "\tflag={}", self.flags.join(","))?;
        }
        Ok(())
    }
}

/// Builds the newform of level `level` whose Nebentypus has degree list
/// `eps`, choosing the character in the list's classes that satisfies
/// `chi(p) = a_p / sigma(a_p)` at every good prime with `a_p != 0`.
pub fn resolve_newform(label: &str, level: u64, eps: &str, d: i64, ap: &BTreeMap<u64, QuadRat>) -> Result<ResolvedNewform> {
    let invalid = |msg: String| Error::Validation { label: label.to_string(), msg };
    let mut spec = NewformSpec::new(d, Nebentypus::Trivial, ap.clone()).with_level(level);
    let mut reading = None;
    if eps != "1" {
        let readings = parse_degree_list(eps, level).map_err(|e| invalid(e.to_string()))?;
        let ambiguous = readings.len() > 1;
        let matches = |chi: &DirichletCharacter| {
            ap.iter().filter(|(&p, a)| level % p != 0 && !a.is_zero()).all(|(&p, a)| {
                a.checked_div(&a.conjugate()).map(|e| e == chi.eval(p)).unwrap_or(false)
            })
        };
        let found = readings
            .iter()
            .find_map(|rd| rd.classes.iter().flatten().find(|chi| matches(chi)).map(|chi| (rd.description.clone(), chi.clone())));
        let (desc, chi) = found.ok_or_else(|| invalid(format!("no character {eps} matches the coefficients")))?;
        if ambiguous {
            reading = Some(desc);
        }
        spec.character = Nebentypus::Character(chi);
    }
    Ok(ResolvedNewform { spec, reading })
}

pub fn parse_tables(text: &str) -> Result<Vec<TableRow>> {
    record_lines(text).map(|(n, l)| TableRow::parse(l, n)).collect()
}

/// Reads and validates a table file.
pub fn load_tables(path: &Path) -> Result<Vec<TableRow>> {
    let rows = parse_tables(&std::fs::read_to_string(path)?)?;
    for r in &rows {
        r.validate()?;
    }
    Ok(rows)
}

pub fn bundled_tables() -> Vec<TableRow> {
    parse_tables(BUNDLED_TABLES).expect("bundled tables parse")
}

pub fn find_row<'a>(rows: &'a [TableRow], label: &str) -> Option<&'a TableRow> {
    rows.iter().find(|r| r.label == label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use num_traits::Zero;

    #[test]
    fn bundled_rows() {
        let rows = bundled_tables();
        assert_eq!(rows.len(), 149);
        assert_eq!(rows.iter().filter(|r| r.table == 1).count(), 53);
        let c23 = find_row(&rows, "C_23").unwrap();
        assert_eq!(c23.ap[&2], QuadRat::from_w(5, rat(-1), rat(1)).unwrap());
        let c63 = find_row(&rows, "C_63").unwrap();
        assert_eq!(c63.curve().unwrap().to_string(), "y^2 = x^6 - 26*x^3 - 27");
        assert_eq!(c63.ap[&2], QuadRat::sqrt(3).unwrap());
    }

    #[test]
    fn lines_round_trip() {
        for (n, line) in record_lines(BUNDLED_TABLES) {
            assert_eq!(TableRow::parse(line, n).unwrap().to_string(), line);
        }
    }

    #[test]
    fn parse_errors_carry_columns() {
        let bad = "row\tC_13\ttable=1\tN=13\teps=[6]\td=-3\tcm=0\tP=1,2,1\ta2=w[-1,-1]";
        match TableRow::parse(bad, 7) {
            Err(Error::Parse { line: 7, column, .. }) => assert_eq!(column, 43),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_row_validates_and_refits() {
        for row in bundled_tables() {
            row.validate().unwrap();
            let fit = row.fit(16).unwrap();
            assert_eq!(fit.p, row.poly(), "{}", row.label);
            assert!(crate::curvefit::all_residuals(&fit).iter().all(|b| b.is_zero()), "{}", row.label);
        }
    }

    #[test]
    fn level_18_reading() {
        let rows = bundled_tables();
        let r = find_row(&rows, "C_18").unwrap().newform().unwrap();
        assert!(r.reading.is_some());
        assert_eq!(r.spec.character.order(), Some(3));
    }

    #[test]
    fn corrupt_row_names_label() {
        let rows = bundled_tables();
        let mut r = find_row(&rows, "C_63").unwrap().clone();
        r.ap.insert(2, QuadRat::from_int(5));
        match r.validate() {
            Err(Error::Validation { label, .. }) => assert_eq!(label, "C_63"),
            other => panic!("{other:?}"),
        }
    }
}
