//! The bounded search over newform coefficient data.
//!
//! A cell fixes `d`, `n0`, the program (with or without an extra twist) and
//! the values `eps(2)`, `eps(3)`. Within a cell the prime coefficients are
//! enumerated inside their Weil boxes and the equations `b_m = 0` are solved
//! forward; see [`engine`].

mod engine;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::arith::{common_denominator, modp, rat, rat_frac, QPoly, QuadRat, Rat};
use crate::characters::zeta12;
use crate::curvefit::{fit_newform, residuals, BasisChange, FitResult};
use crate::hyperelliptic::GenusTwoCurve;
use crate::ingest::fields::{format_element, format_rat, parse_element, parse_rat, RecordLine};
use crate::ingest::TableRow;
use crate::newform::{Nebentypus, NewformSpec};
use crate::{Error, Result};
use engine::{Engine, Pair, Problem};

/// `d` for forms without extra twist, `n0 = 2`.
pub const NO_TWIST_N0_2: [i64; 9] = [2, 3, 5, 6, 7, 13, 17, 21, 29];
/// `d` for forms without extra twist, `n0 = 3`.
pub const NO_TWIST_N0_3: [i64; 14] = [2, 3, 5, 6, 7, 10, 11, 13, 17, 21, 29, 33, 37, 41];

/// Which of the two search programs a cell belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Twist {
    /// Trivial Nebentypus, no extra twist assumed.
    None,
    /// Extra twist, Nebentypus of the given order (1 for trivial).
    Order(u32),
}

impl Twist {
    /// `ord eps`.
    pub fn k(self) -> u32 {
        match self {
            Twist::None => 1,
            Twist::Order(k) => k,
        }
    }

    /// The fields `Q(sqrt d)` the program allows for this twist, by `n0`.
    pub fn fields(self, n0: u32) -> Vec<i64> {
        let big = n0 == 3;
        match self {
            Twist::None if big => NO_TWIST_N0_3.to_vec(),
            Twist::None => NO_TWIST_N0_2.to_vec(),
            Twist::Order(1) if big => vec![2, 3, 5, 6, 7, 10, 11],
            Twist::Order(1) => vec![2, 3, 5, 6, 7],
            Twist::Order(2) if big => vec![-1, -2, -3, -5, -6, -7, -10, -11],
            Twist::Order(2) => vec![-1, -2, -3, -5, -6, -7],
            Twist::Order(3) | Twist::Order(6) => vec![-3],
            Twist::Order(4) => vec![-1],
            Twist::Order(_) => vec![],
        }
    }

    /// Possible nonzero values of `eps(p)`.
    pub fn eps_values(self) -> Vec<QuadRat> {
        let k = self.k();
        (0..12).filter(|j| (j * k) % 12 == 0).filter_map(zeta12).collect()
    }
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Twist::None => write!(f, "none"),
            Twist::Order(k) => write!(f, "{k}"),
        }
    }
}

impl std::str::FromStr for Twist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Twist::None),
            _ => match s.parse::<u32>() {
                Ok(k) if [1, 2, 3, 4, 6].contains(&k) => Ok(Twist::Order(k)),
                _ => Err(Error::Invalid(format!("twist must be none, 1, 2, 3, 4 or 6, not {s:?}"))),
            },
        }
    }
}

/// One unit of search work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchCell {
    pub d: i64,
    pub n0: u32,
    pub twist: Twist,
    pub eps2: QuadRat,
    pub eps3: QuadRat,
}

impl SearchCell {
    pub fn degree(&self) -> usize {
        if self.n0 == 2 {
            6
        } else {
            5
        }
    }

    /// `M`: 16 for sextics, 22 for quintics.
    pub fn default_m(&self) -> u64 {
        if self.n0 == 2 {
            16
        } else {
            22
        }
    }

    /// `M'`, the number of residuals imposed.
    pub fn m_prime(&self, m: u64) -> i64 {
        m as i64 - if self.n0 == 2 { 8 } else { 14 }
    }

    fn eps(&self, p: u64) -> Option<&QuadRat> {
        match p {
            2 => Some(&self.eps2),
            3 => Some(&self.eps3),
            _ => None,
        }
    }

    /// Whether `a` is a possible value of `a_p`.
    pub fn admissible(&self, p: u64, a: &QuadRat) -> bool {
        if !a.is_algebraic_integer() || (!a.is_rational() && a.d() != self.d) {
            return false;
        }
        let (x, y) = (a.a(), a.b());
        let pn = p as u32;
        if pn < self.n0 && !y.is_zero() || pn == self.n0 && y.is_zero() {
            return false;
        }
        let ramified = if self.twist.k() == 1 {
            a.is_zero() || (y.is_zero() && x.abs() == rat(1))
        } else {
            [0, 1, p as i64].iter().any(|&t| abs_sq(a) == rat(t))
        };
        let weil = a.embeddings_bounded(&rat(4 * p as i64));
        match self.eps(p) {
            Some(e) if e.is_zero() => ramified,
            Some(e) => weil && self.shape(a, Some(e)),
            None => ramified || (weil && self.shape(a, None)),
        }
    }

    fn shape(&self, a: &QuadRat, eps: Option<&QuadRat>) -> bool {
        match self.twist {
            Twist::None => true,
            Twist::Order(1) => a.a().is_zero() || a.b().is_zero(),
            Twist::Order(k) => {
                a.is_zero()
                    || match eps {
                        Some(e) => *a == e * &a.conjugate(),
                        None => (a / &a.conjugate()).pow(k) == QuadRat::one(),
                    }
            }
        }
    }

    fn allowed_pairs(&self, p: u64) -> Vec<Pair> {
        let bx = (16.0 * p as f64).sqrt().floor() as i64 + 1;
        let by = (16.0 * p as f64 / self.d.unsigned_abs() as f64).sqrt().floor() as i64 + 1;
        let half_lattice = self.d.rem_euclid(4) == 1;
        let mut out = Vec::new();
        for x in -bx..=bx {
            for y in -by..=by {
                let ok_lattice = if half_lattice { (x - y) % 2 == 0 } else { x % 2 == 0 && y % 2 == 0 };
                if !ok_lattice {
                    continue;
                }
                let a = QuadRat::new(self.d, rat_frac(x, 2), rat_frac(y, 2)).expect("squarefree d");
                if self.admissible(p, &a) {
                    out.push(Pair { x, y });
                }
            }
        }
        out
    }
}

impl fmt::Display for SearchCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d={} twist={} n0={} eps2={} eps3={}",
            self.d,
            self.twist,
            self.n0,
            format_element(&self.eps2, self.d),
            format_element(&self.eps3, self.d)
        )
    }
}

fn abs_sq(a: &QuadRat) -> Rat {
    if a.d() < 0 {
        a.norm()
    } else {
        a.a() * a.a()
    }
}

/// The cells of one program, field and `n0`, one per pair `(eps(2), eps(3))`.
pub fn cells_for(d: i64, twist: Twist, n0: u32) -> Vec<SearchCell> {
    let mut vals = vec![QuadRat::zero()];
    vals.extend(twist.eps_values());
    let mut out = Vec::new();
    for e2 in &vals {
        for e3 in &vals {
            out.push(SearchCell { d, n0, twist, eps2: e2.clone(), eps3: e3.clone() });
        }
    }
    out
}

/// Every cell of both programs.
pub fn enumerate_cells() -> Vec<SearchCell> {
    let mut out = Vec::new();
    for twist in [Twist::None, Twist::Order(1), Twist::Order(2), Twist::Order(3), Twist::Order(4), Twist::Order(6)] {
        for n0 in [2, 3] {
            for d in twist.fields(n0) {
                out.extend(cells_for(d, twist, n0));
            }
        }
    }
    out
}

/// Output of the search: the fitted polynomial and the coefficient data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub d: i64,
    pub twist: Twist,
    pub n0: u32,
    pub eps2: QuadRat,
    pub eps3: QuadRat,
    /// `P` in the basis `BasisChange::for_field(d)`.
    pub p: QPoly,
    /// `a_p` for the primes the search assigned.
    pub ap: BTreeMap<u64, QuadRat>,
}

impl Solution {
    pub fn k(&self) -> u32 {
        self.twist.k()
    }

    /// `M''`: 7 for sextics, 11 for quintics.
    pub fn m_double_prime(&self) -> u64 {
        if self.n0 == 2 {
            7
        } else {
            11
        }
    }

    pub fn newform_spec(&self) -> NewformSpec {
        let eps = BTreeMap::from([(2, self.eps2.clone()), (3, self.eps3.clone())]);
        let mut spec = NewformSpec::new(self.d, Nebentypus::Values(eps), self.ap.clone());
        spec.twist = match self.twist {
            Twist::None => None,
            Twist::Order(1) => Some(2),
            Twist::Order(k) => Some(k),
        };
        spec
    }

    /// The solution a table row stands for.
    pub fn from_row(row: &TableRow) -> Result<Solution> {
        let spec = row.newform()?.spec.with_level(row.level);
        let n0 = spec.n0()? as u32;
        let twist = match (row.table, spec.character.order()) {
            (2, _) => Twist::None,
            (_, Some(k)) => Twist::Order(k),
            (_, None) => return Err(Error::Invalid(format!("{}: unresolved character", row.label))),
        };
        let eps = |p| spec.eps(p).ok_or_else(|| Error::Invalid(format!("{}: eps({p}) unknown", row.label)));
        Ok(Solution { d: row.d, twist, n0, eps2: eps(2)?, eps3: eps(3)?, p: row.poly(), ap: row.ap.clone() })
    }

    /// `a_2, ..., a_{M''}`.
    pub fn coefficients(&self) -> Vec<QuadRat> {
        let a = self.newform_spec().coefficients(self.m_double_prime()).expect("solution data covers M''");
        a[2..].to_vec()
    }

    pub fn fit(&self) -> Result<FitResult> {
        let spec = self.newform_spec();
        fit_newform(&spec, spec.prime_bound(), &BasisChange::for_field(self.d))?
            .curve()
            .ok_or_else(|| Error::Invalid("the solution data no longer fits a curve".into()))
    }

    /// The solution of `sigma f`, with `P` refitted.
    pub fn conjugate(&self) -> Result<Solution> {
        let mut s = self.clone();
        s.ap = self.ap.iter().map(|(&p, a)| (p, a.conjugate())).collect();
        s.eps2 = self.eps2.conjugate();
        s.eps3 = self.eps3.conjugate();
        s.p = s.fit()?.p;
        Ok(s)
    }

    /// `y^2 = D^2 P(x)` with `D` the least common denominator of `P`.
    pub fn curve(&self) -> Result<GenusTwoCurve> {
        let den = Rat::from_integer(common_denominator(self.p.coeffs()));
        GenusTwoCurve::from_poly(&self.p.scale(&(&den * &den)))
    }

    /// The truncated data `(d, program, P, a_2..a_{M''})` compared by dedup.
    pub fn key(&self) -> Vec<String> {
        let mut k = vec![self.d.to_string(), self.twist.to_string(), self.n0.to_string()];
        k.extend(self.p.coeffs().iter().map(format_rat));
        k.extend(self.coefficients().iter().map(|a| format_element(a, self.d)));
        k
    }

    pub fn parse(text: &str, line: usize) -> Result<Self> {
        let r = RecordLine::parse(text, line)?;
        if r.tag != "solution" {
            return Err(r.error(1, format!("expected a solution record, found {:?}", r.tag)));
        }
        let d: i64 = r.parse_value("d")?;
        let (t, tcol) = r.require("twist")?;
        let twist = t.parse().map_err(|e: Error| r.error(tcol, e.to_string()))?;
        let n0: u32 = r.parse_value("n0")?;
        let elt = |key: &str| -> Result<QuadRat> {
            let (v, col) = r.require(key)?;
            parse_element(v, d).map_err(|m| r.error(col, m))
        };
        let (eps2, eps3) = (elt("e2")?, elt("e3")?);
        let (ptext, pcol) = r.require("P")?;
        let coeffs = ptext.split(',').map(parse_rat).collect::<Option<Vec<_>>>().ok_or_else(|| r.error(pcol, "bad polynomial"))?;
        let mut ap = BTreeMap::new();
        for (p, v, col) in r.indexed("a") {
            ap.insert(p, parse_element(v, d).map_err(|m| r.error(col, m))?);
        }
        Ok(Solution { d, twist, n0, eps2, eps3, p: QPoly::new(coeffs), ap })
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.p.coeffs().iter().map(format_rat).collect();
        write!(
            f,
            "solution\td={}\ttwist={}\tn0={}\te2={}\te3={}\tP={}",
            self.d,
            self.twist,
            self.n0,
            format_element(&self.eps2, self.d),
            format_element(&self.eps3, self.d),
            p.join(",")
        )?;
        for (p, a) in &self.ap {
            write!(f, "\ta{p}={}", format_element(a, self.d))?;
        }
        Ok(())
    }
}

/// Runs the search program on one cell with precision `M`.
pub fn search(cell: &SearchCell, m: u64) -> Vec<Solution> {
    let last = cell.m_prime(m);
    if last < 1 {
        return Vec::new();
    }
    let n0 = cell.n0 as usize;
    let nmax = (last + 5 * n0 as i64 - 2) as u64;
    let primes = modp::primes_up_to(nmax);
    let allowed: Vec<Vec<Pair>> = primes.iter().map(|&p| cell.allowed_pairs(p)).collect();
    let to_mod = |e: &QuadRat| {
        let u = modp::from_rat(e.a(), modp::P61).expect("small denominators");
        let v = modp::from_rat(e.b(), modp::P61).expect("small denominators");
        (u, v)
    };
    let pb = Problem { d: cell.d, n0, primes: primes.clone(), allowed, eps2: to_mod(&cell.eps2), eps3: to_mod(&cell.eps3), last };
    let engine = Engine::new(&pb);
    let top = &pb.allowed[engine.first_prime()];
    let leaves: Vec<Vec<Pair>> = top.par_iter().flat_map_iter(|&p| engine.run(p)).collect();
    leaves
        .into_iter()
        .filter_map(|vals| {
            let ap: BTreeMap<u64, QuadRat> = primes
                .iter()
                .zip(&vals)
                .map(|(&p, v)| (p, QuadRat::new(cell.d, rat_frac(v.x, 2), rat_frac(v.y, 2)).expect("squarefree d")))
                .collect();
            verify(cell, ap, nmax, last)
        })
        .collect()
}

/// Exact refit of a candidate found modulo `P61`.
fn verify(cell: &SearchCell, ap: BTreeMap<u64, QuadRat>, nmax: u64, last: i64) -> Option<Solution> {
    let mut s = Solution { d: cell.d, twist: cell.twist, n0: cell.n0, eps2: cell.eps2.clone(), eps3: cell.eps3.clone(), p: QPoly::zero(), ap };
    let spec = s.newform_spec();
    let fit = fit_newform(&spec, nmax, &BasisChange::for_field(cell.d)).ok()?.curve()?;
    if fit.n0 != Some(cell.n0) || fit.p.deg() != cell.degree() as i64 {
        return None;
    }
    if !residuals(&fit, last).ok()?.iter().all(|b| b == &Rat::from_integer(BigInt::from(0))) {
        return None;
    }
    s.p = fit.p;
    Some(s)
}

/// One representative per conjugate pair, after collapsing solutions with
/// equal truncated data. The representative has the smaller key.
pub fn dedup_conjugates(solutions: Vec<Solution>) -> Vec<Solution> {
    let mut seen = BTreeSet::new();
    let mut uniq = Vec::new();
    for s in solutions {
        let k = s.key();
        if seen.insert(k.clone()) {
            uniq.push((k, s));
        }
    }
    let conj_keys: Vec<Option<Vec<String>>> = uniq.par_iter().map(|(_, s)| s.conjugate().ok().map(|c| c.key())).collect();
    uniq.into_iter()
        .zip(conj_keys)
        .filter(|((k, _), ck)| match ck {
            Some(ck) => !(seen.contains(ck) && ck < k),
            None => true,
        })
        .map(|((_, s), _)| s)
        .collect()
}

/// Searches every cell of a program with the default `M` of each cell and
/// deduplicates the union.
pub fn collect(cells: &[SearchCell]) -> Vec<Solution> {
    let all: Vec<Solution> = cells.iter().flat_map(|c| search(c, c.default_m())).collect();
    dedup_conjugates(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_list() {
        let cells = enumerate_cells();
        let has = |d: i64, t: Twist, n0: u32| cells.iter().any(|c| c.d == d && c.twist == t && c.n0 == n0);
        assert!(has(29, Twist::None, 2));
        assert!(has(-3, Twist::Order(6), 2));
        assert!(!has(41, Twist::None, 2));
        assert!(has(41, Twist::None, 3));
        assert!(!has(-10, Twist::Order(2), 2));
        assert_eq!(cells_for(-3, Twist::Order(6), 2).len(), 49);
        assert_eq!(cells_for(5, Twist::None, 3).len(), 4);
    }

    #[test]
    fn admissible_values() {
        let cell = cells_for(-3, Twist::Order(6), 2).into_iter().find(|c| c.eps2 == zeta12(2).unwrap()).unwrap();
        let z = zeta12(2).unwrap();
        // a = eps(2) conj(a) with eps(2) = zeta_6
        let a = QuadRat::new(-3, rat_frac(3, 2), rat_frac(1, 2)).unwrap();
        assert_eq!(a, &z * &a.conjugate());
        assert!(cell.admissible(2, &a));
        assert!(!cell.admissible(2, &QuadRat::sqrt(-3).unwrap()));
        let none = &cells_for(2, Twist::None, 3)[3];
        assert!(none.admissible(5, &QuadRat::from_int(4)));
        assert!(!none.admissible(5, &QuadRat::from_int(5)));
        assert!(!none.admissible(2, &QuadRat::sqrt(2).unwrap()));
    }

    #[test]
    fn solution_round_trip() {
        let line = "solution\td=5\ttwist=none\tn0=2\te2=w[1,0]\te3=w[1,0]\tP=-7,10,-11,2,2,-8,1\ta2=w[-1,1]\ta3=w[1,-2]";
        assert_eq!(Solution::parse(line, 1).unwrap().to_string(), line);
    }
}
