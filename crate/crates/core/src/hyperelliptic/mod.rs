//! Genus-two curves `y^2 = P(x)` over the rationals: reduction, point
//! counts, Frobenius polynomials, Clebsch invariants, involutions and
//! isomorphisms.

mod clebsch;
mod frobenius;
mod involution;
mod isomorphism;
mod points;

pub use clebsch::{act, clebsch_invariants, clebsch_of_form, clebsch_r, same_weighted_class, transvectant, BinForm, ClebschInvariants};
pub use frobenius::{
    endo_field_check, frobenius_poly, frobenius_power, frobenius_power_by_power_sums, sieve1_check, splits_over_field,
    FrobeniusData, SieveOutcome,
};
pub use involution::{has_extra_involution, ExtraInvolution, Involution};
pub use isomorphism::{qbar_isomorphic, q_isomorphism, Isomorphism};
pub use points::{count_points, count_points_scan, Fp2};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::{modp, QPoly, Rat};
use crate::{Error, Result};

/// `y^2 = P(x)` with `P` an integer polynomial of degree 5 or 6 without
/// repeated roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenusTwoCurve {
    coeffs: [BigInt; 7],
    disc: BigInt,
}

impl GenusTwoCurve {
    /// Coefficients constant term first.
    pub fn new(coeffs: &[BigInt]) -> Result<Self> {
        if coeffs.len() > 7 && coeffs[7..].iter().any(|c| !c.is_zero()) {
            return Err(Error::Invalid("degree above 6".into()));
        }
        let mut c: [BigInt; 7] = Default::default();
        for (i, v) in coeffs.iter().take(7).enumerate() {
            c[i] = v.clone();
        }
        let p = QPoly::from_bigints(&c);
        if p.deg() < 5 {
            return Err(Error::Invalid(format!("degree {} is not 5 or 6", p.deg())));
        }
        let disc = sextic_discriminant(&p);
        if disc.is_zero() {
            return Err(Error::Invalid(format!("{p} has a repeated root")));
        }
        Ok(GenusTwoCurve { coeffs: c, disc })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::new(&coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>())
    }

    /// Requires integer coefficients.
    pub fn from_poly(p: &QPoly) -> Result<Self> {
        if p.coeffs().iter().any(|c| !c.is_integer()) {
            return Err(Error::Invalid(format!("{p} has non-integral coefficients")));
        }
        Self::new(&p.coeffs().iter().map(|c| c.to_integer()).collect::<Vec<_>>())
    }

    pub fn coeffs(&self) -> &[BigInt; 7] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        if self.coeffs[6].is_zero() {
            5
        } else {
            6
        }
    }

    pub fn poly(&self) -> QPoly {
        QPoly::from_bigints(&self.coeffs)
    }

    /// Discriminant of the binary sextic `Z^6 P(X/Z)`; for degree 5 this is
    /// `lc^2 disc(P)`.
    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        p > 2 && modp::is_prime(p) && modp::from_bigint(&self.disc, p) != 0
    }

    pub fn coeffs_mod(&self, p: u64) -> [u64; 7] {
        let mut out = [0; 7];
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = modp::from_bigint(c, p);
        }
        out
    }

    /// The binary sextic `Z^6 P(X/Z)`.
    pub fn form(&self) -> BinForm {
        BinForm::new(6, self.coeffs.iter().map(|c| Rat::from_integer(c.clone())).collect())
    }

    /// Largest absolute coefficient, as a rough size measure.
    pub fn height(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn coeffs_i64(&self) -> Option<[i64; 7]> {
        let mut out = [0i64; 7];
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c.to_i64()?;
        }
        Some(out)
    }
}

fn sextic_discriminant(p: &QPoly) -> BigInt {
    let d = p.discriminant();
    let d = if p.deg() == 5 { d * p.lc() * p.lc() } else { d };
    d.to_integer()
}

impl fmt::Display for GenusTwoCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = {}", format_poly(&self.coeffs, "x"))
    }
}

/// `x^6 - 26*x^3 - 27` style text, highest degree first.
pub fn format_poly(coeffs: &[BigInt], var: &str) -> String {
    let mut s = String::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let one = a == BigInt::from(1);
        match i {
            0 => s.push_str(&a.to_string()),
            _ => {
                if !one {
                    s.push_str(&format!("{a}*"));
                }
                s.push_str(var);
                if i > 1 {
                    s.push_str(&format!("^{i}"));
                }
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Parses an integer polynomial in `x` such as `x^6-26*x^3-27` or
/// `x^5 - 4x^4 - x`; an optional leading `y^2 =` is ignored.
pub fn parse_poly(text: &str) -> Result<Vec<BigInt>> {
    let err = |column: usize, msg: &str| Error::Parse { line: 1, column, msg: msg.to_string() };
    let body = match text.find('=') {
        Some(i) => &text[i + 1..],
        None => text,
    };
    let offset = text.len() - body.len();
    let chars: Vec<(usize, char)> = body.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut i = 0;
    if chars.is_empty() {
        return Err(err(offset + 1, "empty polynomial"));
    }
    while i < chars.len() {
        let col = offset + chars[i].0 + 1;
        let mut sign = BigInt::from(1);
        if chars[i].1 == '+' || chars[i].1 == '-' {
            if chars[i].1 == '-' {
                sign = BigInt::from(-1);
            }
            i += 1;
        } else if !coeffs.is_empty() || i > 0 {
            return Err(err(col, "expected + or -"));
        }
        let start = i;
        while i < chars.len() && chars[i].1.is_ascii_digit() {
            i += 1;
        }
        let digits: String = chars[start..i].iter().map(|c| c.1).collect();
        let mut coef = if digits.is_empty() { BigInt::from(1) } else { BigInt::from_str(&digits).unwrap() };
        if i < chars.len() && chars[i].1 == '*' {
            if digits.is_empty() {
                return Err(err(offset + chars[i].0 + 1, "'*' without a coefficient"));
            }
            i += 1;
        }
        let mut power = 0usize;
        if i < chars.len() && (chars[i].1 == 'x' || chars[i].1 == 'X') {
            i += 1;
            power = 1;
            if i < chars.len() && chars[i].1 == '^' {
                i += 1;
                let s = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let e: String = chars[s..i].iter().map(|c| c.1).collect();
                power = e.parse().map_err(|_| err(offset + chars[s.min(chars.len() - 1)].0 + 1, "bad exponent"))?;
            }
        } else if digits.is_empty() {
            return Err(err(col, "expected a coefficient or x"));
        }
        if power > 6 {
            return Err(err(col, "degree above 6"));
        }
        if coeffs.len() <= power {
            coeffs.resize(power + 1, BigInt::zero());
        }
        coef *= sign;
        coeffs[power] += coef;
    }
    Ok(coeffs)
}

impl FromStr for GenusTwoCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GenusTwoCurve::new(&parse_poly(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let c: GenusTwoCurve = "x^6-26*x^3-27".parse().unwrap();
        assert_eq!(c.to_string(), "y^2 = x^6 - 26*x^3 - 27");
        let d: GenusTwoCurve = "y^2 = x^5 - 4x^4 - 13*x^3 - 9*x^2 - x".parse().unwrap();
        assert_eq!(d.degree(), 5);
        assert_eq!(d.coeffs()[1], BigInt::from(-1));
        assert!("x^6 - 2*x^3 + 1".parse::<GenusTwoCurve>().is_err());
        assert!("x^6 + + 1".parse::<GenusTwoCurve>().is_err());
    }

    #[test]
    fn discriminant_degree_five() {
        // x^5 - x: roots 0, +-1, +-i
        let c = GenusTwoCurve::from_ints(&[0, -1, 0, 0, 0, 1]).unwrap();
        assert!(!c.has_good_reduction(2));
        assert!(c.has_good_reduction(3));
        let lc2 = GenusTwoCurve::from_ints(&[0, -1, 0, 0, 0, 3]).unwrap();
        assert!(!lc2.has_good_reduction(3));
    }
}
