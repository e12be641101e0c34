//! Weight-2 newforms with quadratic coefficient field: Hecke expansion, the
//! rational basis `(h1, h2)`, the index `n0` and coefficient bound checks.

use std::collections::BTreeMap;
use std::fmt;

use crate::arith::{modp, rat, QuadRat, Rat, TruncSeries};
use crate::characters::DirichletCharacter;
use crate::{Error, Result};

/// The Nebentypus of a newform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nebentypus {
    Trivial,
    Character(DirichletCharacter),
    /// Known values `eps(p)` at some primes, used while the level is unknown.
    Values(BTreeMap<u64, QuadRat>),
}

impl Nebentypus {
    pub fn order(&self) -> Option<u32> {
        match self {
            Nebentypus::Trivial => Some(1),
            Nebentypus::Character(chi) => Some(chi.order()),
            Nebentypus::Values(_) => None,
        }
    }

    pub fn conductor(&self) -> Option<u64> {
        match self {
            Nebentypus::Trivial => Some(1),
            Nebentypus::Character(chi) => Some(chi.conductor()),
            Nebentypus::Values(_) => None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            Nebentypus::Trivial => true,
            Nebentypus::Character(chi) => chi.is_trivial(),
            Nebentypus::Values(v) => v.values().all(|e| *e == QuadRat::one()),
        }
    }

    pub fn conjugate(&self) -> Nebentypus {
        match self {
            Nebentypus::Trivial => Nebentypus::Trivial,
            Nebentypus::Character(chi) => Nebentypus::Character(chi.galois_conjugate()),
            Nebentypus::Values(v) => Nebentypus::Values(v.iter().map(|(&p, e)| (p, e.conjugate())).collect()),
        }
    }
}

/// A weight-2 newform described by its prime coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformSpec {
    pub level: Option<u64>,
    pub character: Nebentypus,
    /// `K_f = Q(sqrt d)`.
    pub d: i64,
    pub ap: BTreeMap<u64, QuadRat>,
    pub cm: bool,
    /// Order of the character of an extra twist, when the form has one.
    pub twist: Option<u32>,
}

/// A rule broken by a prime coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Field,
    Integrality,
    Weil,
    Ramified,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub prime: u64,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p = {}: {:?} ({})", self.prime, self.rule, self.detail)
    }
}

/// `|a|^2` as a field element: the norm for imaginary fields, `a^2` for real ones.
fn abs_sq(a: &QuadRat) -> QuadRat {
    if a.d() < 0 {
        QuadRat::rational(a.norm())
    } else {
        a * a
    }
}

impl NewformSpec {
    pub fn new(d: i64, character: Nebentypus, ap: BTreeMap<u64, QuadRat>) -> Self {
        NewformSpec { level: None, character, d, ap, cm: false, twist: None }
    }

    pub fn with_level(mut self, level: u64) -> Self {
        self.level = Some(level);
        self
    }

    /// Largest `B` such that every prime `p <= B` has a known coefficient.
    pub fn prime_bound(&self) -> u64 {
        let mut b = 1;
        for p in modp::primes_up_to(self.ap.keys().copied().max().unwrap_or(1)) {
            if !self.ap.contains_key(&p) {
                break;
            }
            b = p;
        }
        let next = (b + 1..).find(|&n| modp::is_prime(n)).unwrap();
        next - 1
    }

    /// `eps(p)`, or `None` when it is not determined by the data.
    pub fn eps(&self, p: u64) -> Option<QuadRat> {
        if self.level.is_some_and(|n| n % p == 0) {
            return Some(QuadRat::zero());
        }
        match &self.character {
            Nebentypus::Trivial => Some(QuadRat::one()),
            Nebentypus::Character(chi) => Some(chi.eval(p)),
            Nebentypus::Values(v) => v.get(&p).cloned(),
        }
    }

    /// `a_1, ..., a_m` (index 0 holds zero).
    pub fn coefficients(&self, m: u64) -> Result<Vec<QuadRat>> {
        let mut a = vec![QuadRat::zero(); m as usize + 1];
        if m == 0 {
            return Ok(a);
        }
        a[1] = QuadRat::one();
        for n in 2..=m {
            let f = modp::factor(n);
            let (p, e) = f[0];
            let q = p.pow(e);
            if q != n {
                a[n as usize] = a[q as usize].checked_mul(&a[(n / q) as usize])?;
                continue;
            }
            let ap = self.ap.get(&p).ok_or(Error::MissingCoefficient(p))?;
            a[n as usize] = if e == 1 {
                ap.clone()
            } else {
                let prev = &a[(n / p) as usize];
                let prev2 = &a[(n / p / p) as usize];
                let mut v = prev.checked_mul(ap)?;
                if !prev2.is_zero() {
                    let eps = self.eps(p).ok_or(Error::Character(format!("eps({p}) is unknown")))?;
                    if !eps.is_zero() {
                        v = v.checked_sub(&eps.scale(&rat(p as i64)).checked_mul(prev2)?)?;
                    }
                }
                v
            };
        }
        Ok(a)
    }

    /// `q + sum_{2 <= n <= m} a_n q^n + O(q^{m+1})`.
    pub fn hecke_expand(&self, m: u64) -> Result<TruncSeries> {
        let a = self.coefficients(m)?;
        Ok(TruncSeries::with_prec(0, a, m as i64 + 1))
    }

    /// `h1 = (f + sigma f)/2` and `h2 = (f - sigma f)/(2 sqrt d)` to `O(q^{m+1})`.
    pub fn basis_h1_h2(&self, m: u64) -> Result<(TruncSeries, TruncSeries)> {
        if self.d == 0 {
            return Err(Error::BadDiscriminant(0));
        }
        let a = self.coefficients(m)?;
        let mut h1 = Vec::with_capacity(a.len());
        let mut h2 = Vec::with_capacity(a.len());
        for c in &a {
            if c.d() != 0 && c.d() != self.d {
                return Err(Error::FieldMismatch(c.d(), self.d));
            }
            h1.push(c.a().clone());
            h2.push(c.b().clone());
        }
        let prec = m as i64 + 1;
        Ok((
            TruncSeries::with_prec(0, h1.into_iter().map(QuadRat::rational).collect(), prec),
            TruncSeries::with_prec(0, h2.into_iter().map(QuadRat::rational).collect(), prec),
        ))
    }

    /// Smallest `n` with `a_n` irrational.
    pub fn n0(&self) -> Result<u64> {
        let a = self.coefficients(self.prime_bound())?;
        a.iter()
            .position(|c| !c.is_rational())
            .map(|n| n as u64)
            .ok_or_else(|| Error::Precision(format!("all a_n with n <= {} are rational", a.len() - 1)))
    }

    /// `a_p / sigma(a_p)`, the value `eps(p)` forced by an extra twist with
    /// `chi = eps^{-1}`; `None` when `a_p = 0` or unknown.
    pub fn epsilon_from_twist(&self, p: u64) -> Option<QuadRat> {
        let a = self.ap.get(&p)?;
        if a.is_zero() {
            return None;
        }
        a.checked_div(&a.conjugate()).ok()
    }

    /// All broken coefficient rules; empty when the data is consistent.
    pub fn check_bounds(&self, level: Option<u64>) -> Vec<Violation> {
        let level = level.or(self.level);
        let conductor = self.character.conductor();
        let mut out = Vec::new();
        for (&p, a) in &self.ap {
            let v = |rule, detail: String| Violation { prime: p, rule, detail };
            if a.d() != 0 && a.d() != self.d {
                out.push(v(Rule::Field, format!("{a} is not in Q(sqrt {})", self.d)));
                continue;
            }
            if !a.is_algebraic_integer() {
                out.push(v(Rule::Integrality, format!("{a} is not an algebraic integer")));
            }
            let ramified = level.filter(|n| n % p == 0);
            match ramified {
                None => {
                    if !a.embeddings_bounded(&rat(4 * p as i64)) {
                        out.push(v(Rule::Weil, format!("|{a}| exceeds 2 sqrt {p}")));
                    }
                }
                Some(n) => {
                    let s = abs_sq(a);
                    let allowed: Vec<i64> = match conductor {
                        Some(f) => {
                            if (n / p) % f != 0 {
                                vec![p as i64]
                            } else if n % (p * p) == 0 {
                                vec![0]
                            } else {
                                vec![1]
                            }
                        }
                        None => vec![0, 1, p as i64],
                    };
                    if !allowed.iter().any(|&t| s == QuadRat::from_int(t)) {
                        out.push(v(Rule::Ramified, format!("|a_p|^2 = {s}, expected one of {allowed:?}")));
                    }
                }
            }
        }
        out
    }

    /// The Galois conjugate form `sigma f` with its character.
    pub fn conjugate(&self) -> NewformSpec {
        let mut g = self.clone();
        g.ap = self.ap.iter().map(|(&p, a)| (p, a.conjugate())).collect();
        g.character = self.character.conjugate();
        g
    }
}

/// `(x, y)` with `a = x + y sqrt d`.
pub fn coordinates(a: &QuadRat) -> (Rat, Rat) {
    (a.a().clone(), a.b().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_frac;

    fn spec(d: i64, ch: Nebentypus, ap: &[(u64, QuadRat)]) -> NewformSpec {
        NewformSpec::new(d, ch, ap.iter().cloned().collect())
    }

    fn s(d: i64, a: i64, b: i64) -> QuadRat {
        QuadRat::new(d, rat(a), rat(b)).unwrap()
    }

    fn w(d: i64, u: i64, v: i64) -> QuadRat {
        QuadRat::from_w(d, rat(u), rat(v)).unwrap()
    }

    fn f63() -> NewformSpec {
        spec(
            3,
            Nebentypus::Trivial,
            &[(2, s(3, 0, 1)), (3, s(3, 0, 0)), (5, s(3, 0, -2)), (7, s(3, -1, 0)), (11, s(3, 0, 2)), (13, s(3, 2, 0))],
        )
        .with_level(63)
    }

    #[test]
    fn a4_of_f63() {
        let a = f63().coefficients(16).unwrap();
        assert_eq!(a[4], QuadRat::from_int(1));
        assert_eq!(a[6], &a[2] * &a[3]);
        assert_eq!(a[10], &a[2] * &a[5]);
    }

    #[test]
    fn a4_with_ramified_two() {
        let f = spec(-1, Nebentypus::Trivial, &[(2, s(-1, -1, -1)), (3, s(-1, -1, 1))]).with_level(16);
        let a = f.coefficients(4).unwrap();
        assert_eq!(a[4], s(-1, 0, 2));
    }

    #[test]
    fn basis_and_n0() {
        let f = f63();
        let (h1, h2) = f.basis_h1_h2(16).unwrap();
        assert_eq!(h1.coeff(1), Some(QuadRat::one()));
        assert_eq!(h2.coeff(1), Some(QuadRat::zero()));
        assert_eq!(h2.coeff(2), Some(QuadRat::one()));
        assert_eq!(f.n0().unwrap(), 2);
        let f13 = spec(-3, Nebentypus::Values(BTreeMap::new()), &[(2, w(-3, -1, -1))]);
        let (_, h2) = f13.basis_h1_h2(2).unwrap();
        assert_eq!(h2.coeff(2), Some(QuadRat::rational(rat_frac(-1, 2))));
    }

    #[test]
    fn n0_five() {
        let f = spec(2, Nebentypus::Trivial, &[(2, s(2, 1, 0)), (3, s(2, 0, 0)), (5, s(2, 0, 1))]);
        assert_eq!(f.n0().unwrap(), 5);
        let g = spec(2, Nebentypus::Trivial, &[(2, s(2, 1, 0))]);
        assert!(g.n0().is_err());
    }

    #[test]
    fn twist_epsilon() {
        let f13 = spec(-3, Nebentypus::Values(BTreeMap::new()), &[(5, w(-3, 1, -2)), (7, QuadRat::zero())]);
        assert_eq!(f13.epsilon_from_twist(5), Some(QuadRat::from_int(-1)));
        assert_eq!(f13.epsilon_from_twist(7), None);
        assert_eq!(f63().epsilon_from_twist(7), Some(QuadRat::one()));
    }

    #[test]
    fn bounds() {
        assert!(f63().check_bounds(None).is_empty());
        let bad = spec(2, Nebentypus::Trivial, &[(2, s(2, 3, 0))]);
        let v = bad.check_bounds(None);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].prime, v[0].rule.clone()), (2, Rule::Weil));
        let half = spec(5, Nebentypus::Trivial, &[(2, QuadRat::rational(rat_frac(1, 2)))]);
        assert_eq!(half.check_bounds(None)[0].rule, Rule::Integrality);
    }

    #[test]
    fn missing_prime() {
        let f = spec(3, Nebentypus::Trivial, &[(2, s(3, 0, 1))]);
        assert_eq!(f.coefficients(3), Err(Error::MissingCoefficient(3)));
    }
}
