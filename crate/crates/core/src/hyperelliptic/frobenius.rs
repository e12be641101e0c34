use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::linalg::{interpolate, resultant_bigint};
use crate::arith::{is_d_times_square, modp, rat, rat_sqrt, Rat};
use crate::Result;

use super::{count_points, GenusTwoCurve};

/// Point counts over `F_p`, `F_{p^2}` and the Frobenius quartic
/// `t^4 - s1 t^3 + s2 t^2 - p s1 t + p^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusData {
    pub p: u64,
    pub counts: (u64, u64),
    pub s1: i64,
    pub s2: i64,
}

impl FrobeniusData {
    pub fn from_counts(p: u64, n1: u64, n2: u64) -> Self {
        let (p_, n1_, n2_) = (p as i64, n1 as i64, n2 as i64);
        let s1 = p_ + 1 - n1_;
        let twice = s1 * s1 + n2_ - p_ * p_ - 1;
        debug_assert!(twice % 2 == 0);
        FrobeniusData { p, counts: (n1, n2), s1, s2: twice / 2 }
    }

    /// Coefficients constant term first.
    pub fn quartic(&self) -> Vec<BigInt> {
        let p = BigInt::from(self.p);
        let s1 = BigInt::from(self.s1);
        vec![&p * &p, -(&p * &s1), BigInt::from(self.s2), -s1, BigInt::one()]
    }

    /// `|s1| <= 4 sqrt p` and `|s2| <= 6p`.
    pub fn within_weil_bounds(&self) -> bool {
        let p = self.p as i64;
        self.s1 * self.s1 <= 16 * p && self.s2.abs() <= 6 * p
    }

    /// Ordinary reduction: the middle coefficient is prime to `p`.
    pub fn is_ordinary(&self) -> bool {
        self.s2.rem_euclid(self.p as i64) != 0
    }
}

pub fn frobenius_poly(curve: &GenusTwoCurve, p: u64) -> Result<FrobeniusData> {
    let n1 = count_points(curve, p, 1)?;
    let n2 = count_points(curve, p, 2)?;
    Ok(FrobeniusData::from_counts(p, n1, n2))
}

/// Characteristic polynomial of the `n`-th power of a root set: for monic
/// `q` (constant term first), `Res_s(q(s), t - s^n)`, made monic.
pub fn frobenius_power(q: &[BigInt], n: u32) -> Vec<BigInt> {
    let k = q.len() - 1;
    let n = n as usize;
    let pts: Vec<(Rat, Rat)> = (0..=k)
        .map(|t| {
            let mut g = vec![BigInt::zero(); n + 1];
            g[0] = BigInt::from(t);
            g[n] = -BigInt::one();
            (rat(t as i64), Rat::from_integer(resultant_bigint(q, k, &g, n)))
        })
        .collect();
    let r = interpolate(&pts);
    let r = if r.lc() < Rat::zero() { r.neg() } else { r };
    (0..=k).map(|i| r.coeff(i).to_integer()).collect()
}

/// The same polynomial through Newton's identities on power sums.
pub fn frobenius_power_by_power_sums(q: &[BigInt], n: u32) -> Vec<BigInt> {
    let k = q.len() - 1;
    let n = n as usize;
    // elementary symmetric functions e_1..e_k of the roots
    let e: Vec<BigInt> = (0..=k).map(|j| if j % 2 == 0 { q[k - j].clone() } else { -q[k - j].clone() }).collect();
    let top = k * n;
    let mut ps = vec![BigInt::zero(); top + 1];
    for m in 1..=top {
        let mut s = BigInt::zero();
        for i in 1..m.min(k + 1) {
            let term = &e[i] * &ps[m - i];
            s += if i % 2 == 1 { term } else { -term };
        }
        if m <= k {
            let term = &e[m] * BigInt::from(m);
            s += if m % 2 == 1 { term } else { -term };
        }
        ps[m] = s;
    }
    let big_p: Vec<BigInt> = (0..=k).map(|j| ps[j * n].clone()).collect();
    let mut big_e = vec![BigInt::one(); k + 1];
    for m in 1..=k {
        let mut s = BigInt::zero();
        for i in 1..=m {
            let term = &big_e[m - i] * &big_p[i];
            s += if i % 2 == 1 { term } else { -term };
        }
        big_e[m] = s / BigInt::from(m);
    }
    (0..=k).map(|i| if (k - i) % 2 == 0 { big_e[k - i].clone() } else { -big_e[k - i].clone() }).collect()
}

/// Verdict of a sieve run over a range of primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SieveOutcome {
    Pass,
    Fail { p: u64 },
}

impl SieveOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, SieveOutcome::Pass)
    }
}

/// Passes when, at every good prime `p < bound`, the characteristic
/// polynomial of `Frob^n` is `(t^2 - a t + p^n)^2` with `a` an integer.
pub fn sieve1_check(curve: &GenusTwoCurve, n: u32, bound: u64) -> SieveOutcome {
    for p in modp::primes_up_to(bound.saturating_sub(1)) {
        if !curve.has_good_reduction(p) {
            continue;
        }
        let data = frobenius_poly(curve, p).expect("good reduction");
        let qn = frobenius_power(&data.quartic(), n);
        if !is_square_shape(&qn, &BigInt::from(p).pow(n)) {
            return SieveOutcome::Fail { p };
        }
    }
    SieveOutcome::Pass
}

fn is_square_shape(qn: &[BigInt], pn: &BigInt) -> bool {
    let two = BigInt::from(2);
    if !(&qn[3] % &two).is_zero() {
        return false;
    }
    let a = -&qn[3] / &two;
    let want = [pn * pn, -(&two * &a * pn), &a * &a + &two * pn, -(&two * &a), BigInt::one()];
    qn == want
}

/// Whether `t^4 - s1 t^3 + s2 t^2 - p s1 t + p^2` is `G * sigma(G)` for a
/// monic quadratic `G` over `Q(sqrt d)`.
pub fn splits_over_field(s1: i64, s2: i64, p: u64, d: i64) -> bool {
    let (s1, s2, p) = (rat(s1), rat(s2), rat(p as i64));
    let two_p = &p * rat(2);
    let quarter = Rat::new(1.into(), 4.into());
    // G = t^2 - g1 t + g0 with Tr g1 = s1 and Tr g0 = phi.
    // phi = 2p, g0 = p: need (Tr g1)^2/4 - N g1 = 2p + s1^2/4 - s2 in d Q^2.
    if is_d_times_square(&(&two_p + &s1 * &s1 * &quarter - &s2), d) {
        return true;
    }
    // phi = -2p, g0 = -p: forces s1 = 0.
    if s1.is_zero() && is_d_times_square(&(-&two_p - &s2), d) {
        return true;
    }
    // g0 irrational: phi^2 - (s2 - 2p) phi + p s1^2 - 2 p s2 = 0.
    let b = &s2 - &two_p;
    let disc = &b * &b - rat(4) * (&p * &s1 * &s1 - &two_p * &s2);
    if let Some(r) = rat_sqrt(&disc) {
        for phi in [(&b + &r) / rat(2), (&b - &r) / rat(2)] {
            if phi == two_p || phi == -&two_p {
                continue;
            }
            let dz2 = &phi * &phi * &quarter - &p * &p;
            if is_d_times_square(&dz2, d) {
                return true;
            }
        }
    }
    false
}

/// Passes when `Q(sqrt d)` embeds in the endomorphism algebra at every good
/// `p <= bound`, tested as a splitting of the Frobenius quartic over
/// `Q(sqrt d)`. A failed splitting at a non-ordinary prime is not used as a
/// witness since the endomorphism algebra can be larger there.
pub fn endo_field_check(curve: &GenusTwoCurve, d: i64, bound: u64) -> SieveOutcome {
    for p in modp::primes_up_to(bound) {
        if !curve.has_good_reduction(p) {
            continue;
        }
        let data = frobenius_poly(curve, p).expect("good reduction");
        if !splits_over_field(data.s1, data.s2, p, d) && data.is_ordinary() {
            return SieveOutcome::Fail { p };
        }
    }
    SieveOutcome::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn c63() -> GenusTwoCurve {
        GenusTwoCurve::from_ints(&[-27, 0, 0, -26, 0, 0, 1]).unwrap()
    }

    #[test]
    fn c63_at_five() {
        let f = frobenius_poly(&c63(), 5).unwrap();
        assert_eq!(f.quartic(), bi(&[25, 0, -2, 0, 1]));
        assert!(f.within_weil_bounds());
        assert_eq!(frobenius_power(&f.quartic(), 1), f.quartic());
        // (t^2 - 2t + 25)^2
        assert_eq!(frobenius_power(&f.quartic(), 2), bi(&[625, -100, 54, -4, 1]));
    }

    #[test]
    fn split_square_power() {
        let (a, p) = (3i64, 7i64);
        let q = bi(&[p * p, -2 * a * p, a * a + 2 * p, -2 * a, 1]);
        let b = a * a - 2 * p;
        let want = bi(&[p.pow(4), -2 * b * p * p, b * b + 2 * p * p, -2 * b, 1]);
        assert_eq!(frobenius_power(&q, 2), want);
        assert_eq!(frobenius_power_by_power_sums(&q, 2), want);
    }

    #[test]
    fn endo_field_examples() {
        assert!(splits_over_field(0, -2, 5, 3));
        assert!(!splits_over_field(0, -2, 5, 7));
        assert!(splits_over_field(0, -2, 5, -2));
        // (t^2 + p)^2 splits over every field
        assert!(splits_over_field(0, 2 * 5, 5, 7));
        assert!(endo_field_check(&c63(), 3, 29).passed());
        assert!(!endo_field_check(&c63(), 7, 29).passed());
    }

    #[test]
    fn c63_sieve1() {
        assert!(sieve1_check(&c63(), 2, 100).passed());
    }
}
