//! Isomorphisms `y^2 = P1(x)` to `y^2 = P2(x)`.
//!
//! Over Q̄ two curves are isomorphic iff their Clebsch invariants agree up
//! to weight. Over Q we look for `M = [[m, n], [p, q]]` rational with
//! `F1(mX + nZ, pX + qZ) = lambda F2(X, Z)` and `lambda` a rational square.
//! Solutions are found modulo a small prime, lifted by Newton iteration to a
//! large prime power, rationally reconstructed and then checked exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::modp::{self, rational_reconstruct};
use crate::arith::{is_rat_square, Rat};

use super::{act, clebsch_invariants, same_weighted_class, GenusTwoCurve};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    /// `[[m, n], [p, q]]`: `x1 = (m x2 + n)/(p x2 + q)`.
    pub matrix: [[Rat; 2]; 2],
    pub lambda: Rat,
}

impl Isomorphism {
    pub fn verify(&self, c1: &GenusTwoCurve, c2: &GenusTwoCurve) -> bool {
        let m = &self.matrix;
        let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
        !det.is_zero()
            && is_rat_square(&self.lambda)
            && act(&c1.form(), m) == c2.form().scale(&self.lambda)
    }
}

pub fn qbar_isomorphic(c1: &GenusTwoCurve, c2: &GenusTwoCurve) -> bool {
    same_weighted_class(&clebsch_invariants(c1), &clebsch_invariants(c2))
}

/// Integer polynomial in up to three variables.
#[derive(Clone, Debug, Default, PartialEq)]
struct MPoly(BTreeMap<[u32; 3], BigInt>);

impl MPoly {
    fn constant(c: BigInt) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert([0; 3], c);
        }
        MPoly(m)
    }

    fn var(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        MPoly(BTreeMap::from([(e, BigInt::one())]))
    }

    fn add(&self, o: &MPoly) -> MPoly {
        let mut m = self.0.clone();
        for (e, c) in &o.0 {
            let v = m.entry(*e).or_default();
            *v += c;
            if v.is_zero() {
                m.remove(e);
            }
        }
        MPoly(m)
    }

    fn mul(&self, o: &MPoly) -> MPoly {
        let mut out: BTreeMap<[u32; 3], BigInt> = BTreeMap::new();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &o.0 {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                *out.entry(e).or_default() += c1 * c2;
            }
        }
        out.retain(|_, c| !c.is_zero());
        MPoly(out)
    }

    fn scale(&self, k: &BigInt) -> MPoly {
        MPoly(self.0.iter().map(|(e, c)| (*e, c * k)).filter(|(_, c)| !c.is_zero()).collect())
    }

    fn diff(&self, i: usize) -> MPoly {
        let mut out = BTreeMap::new();
        for (e, c) in &self.0 {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.insert(f, c * BigInt::from(e[i]));
            }
        }
        MPoly(out)
    }

    fn eval_mod(&self, x: &[BigInt], modulus: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.0 {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                t = t * xi.modpow(&BigInt::from(k), modulus) % modulus;
            }
            acc += t;
        }
        acc.mod_floor(modulus)
    }
}

/// One chart of the unknown matrix: entries as polynomials in the unknowns.
struct Chart {
    nvars: usize,
    entries: [MPoly; 4],
}

fn charts() -> [Chart; 2] {
    let one = MPoly::constant(BigInt::one());
    [
        Chart { nvars: 3, entries: [one.clone(), MPoly::var(0), MPoly::var(1), MPoly::var(2)] },
        Chart { nvars: 2, entries: [MPoly::default(), one, MPoly::var(0), MPoly::var(1)] },
    ]
}

struct System {
    eqs: Vec<MPoly>,
    jac: Vec<Vec<MPoly>>,
    det: MPoly,
    nvars: usize,
}

fn system(f1: &[BigInt; 7], f2: &[BigInt; 7], chart: &Chart) -> System {
    let [m, n, p, q] = &chart.entries;
    let i0 = (0..7).find(|&i| !f2[i].is_zero()).unwrap();
    // G = F1(mX + nZ, pX + qZ), stored by powers of X
    let lin = |x: &MPoly, z: &MPoly| vec![z.clone(), x.clone()];
    let form_mul = |a: &Vec<MPoly>, b: &Vec<MPoly>| {
        let mut out = vec![MPoly::default(); a.len() + b.len() - 1];
        for (i, u) in a.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&u.mul(v));
            }
        }
        out
    };
    let form_pow = |a: &Vec<MPoly>, k: usize| {
        (0..k).fold(vec![MPoly::constant(BigInt::one())], |acc, _| form_mul(&acc, a))
    };
    let (l1, l2) = (lin(m, n), lin(p, q));
    let mut g = vec![MPoly::default(); 7];
    for (i, c) in f1.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let t = form_mul(&form_pow(&l1, i), &form_pow(&l2, 6 - i));
        for (k, e) in t.iter().enumerate() {
            g[k] = g[k].add(&e.scale(c));
        }
    }
    let eqs: Vec<MPoly> = (0..7)
        .filter(|&k| k != i0)
        .map(|k| g[k].scale(&f2[i0]).add(&g[i0].scale(&-f2[k].clone())))
        .filter(|e| !e.0.is_empty())
        .collect();
    let jac = eqs.iter().map(|e| (0..chart.nvars).map(|i| e.diff(i)).collect()).collect();
    let det = m.mul(q).add(&n.mul(p).scale(&BigInt::from(-1)));
    System { eqs, jac, det, nvars: chart.nvars }
}

/// Inverse of a square matrix modulo `modulus`, pivoting on units.
fn inverse_mod(mut a: Vec<Vec<BigInt>>, modulus: &BigInt) -> Option<Vec<Vec<BigInt>>> {
    let n = a.len();
    let mut inv: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    for col in 0..n {
        let (row, pinv) = (col..n).find_map(|r| modp::inv_bigint(&a[r][col], modulus).map(|v| (r, v)))?;
        a.swap(col, row);
        inv.swap(col, row);
        for j in 0..n {
            a[col][j] = (&a[col][j] * &pinv).mod_floor(modulus);
            inv[col][j] = (&inv[col][j] * &pinv).mod_floor(modulus);
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = (&a[r][j] - &f * &a[col][j]).mod_floor(modulus);
                    inv[r][j] = (&inv[r][j] - &f * &inv[col][j]).mod_floor(modulus);
                }
            }
        }
    }
    Some(inv)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

impl System {
    fn roots_mod(&self, l: u64) -> Vec<Vec<BigInt>> {
        let reduce = |e: &MPoly| -> Vec<([u32; 3], u64)> {
            e.0.iter().map(|(k, c)| (*k, modp::from_bigint(c, l))).filter(|(_, c)| *c != 0).collect()
        };
        let eqs: Vec<_> = self.eqs.iter().map(reduce).collect();
        let det = reduce(&self.det);
        let mut pw = vec![[0u64; 7]; 3];
        let eval = |e: &[([u32; 3], u64)], pw: &[[u64; 7]]| {
            e.iter().fold(0, |acc, (k, c)| {
                let t = (0..3).fold(*c, |t, i| modp::mul(t, pw[i][k[i] as usize], l));
                modp::add(acc, t, l)
            })
        };
        let mut out = Vec::new();
        for idx in 0..l.pow(self.nvars as u32) {
            let x: Vec<u64> = (0..self.nvars).map(|i| idx / l.pow(i as u32) % l).collect();
            for (i, row) in pw.iter_mut().enumerate() {
                let v = x.get(i).copied().unwrap_or(0);
                row[0] = 1;
                for k in 1..7 {
                    row[k] = modp::mul(row[k - 1], v, l);
                }
            }
            if eval(&det, &pw) != 0 && eqs.iter().all(|e| eval(e, &pw) == 0) {
                out.push(x.into_iter().map(BigInt::from).collect());
            }
        }
        out
    }

    /// Equations whose Jacobian is invertible at `x` modulo `l`.
    fn square_subsystem(&self, x: &[BigInt], l: &BigInt) -> Option<Vec<usize>> {
        subsets(self.eqs.len(), self.nvars).into_iter().find(|rows| {
            let j: Vec<Vec<BigInt>> = rows.iter().map(|&r| self.jac[r].iter().map(|d| d.eval_mod(x, l)).collect()).collect();
            inverse_mod(j, l).is_some()
        })
    }

    fn newton_step(&self, x: &[BigInt], rows: &[usize], modulus: &BigInt) -> Option<Vec<BigInt>> {
        let j: Vec<Vec<BigInt>> =
            rows.iter().map(|&r| self.jac[r].iter().map(|d| d.eval_mod(x, modulus)).collect()).collect();
        let jinv = inverse_mod(j, modulus)?;
        let fx: Vec<BigInt> = rows.iter().map(|&r| self.eqs[r].eval_mod(x, modulus)).collect();
        Some(
            (0..self.nvars)
                .map(|i| {
                    let d: BigInt = jinv[i].iter().zip(&fx).map(|(a, b)| a * b).sum();
                    (&x[i] - d).mod_floor(modulus)
                })
                .collect(),
        )
    }
}

/// More solutions than this modulo a prime means the reduction is degenerate.
const MAX_ROOTS: usize = 48;

const LIFT_PRIMES: [u64; 8] = [13, 17, 19, 23, 29, 31, 37, 41];

/// Upper limit on the size of the lifted modulus, in bits.
const MAX_BITS: u64 = 1200;

fn candidate(chart: &Chart, x: &[Rat]) -> [[Rat; 2]; 2] {
    let e: Vec<Rat> = chart
        .entries
        .iter()
        .map(|p| {
            p.0.iter().fold(Rat::zero(), |acc, (ex, c)| {
                let mut t = Rat::from_integer(c.clone());
                for (xi, &k) in x.iter().zip(ex) {
                    t *= xi.pow(k as i32);
                }
                acc + t
            })
        })
        .collect();
    [[e[0].clone(), e[1].clone()], [e[2].clone(), e[3].clone()]]
}

fn exact(c1: &GenusTwoCurve, c2: &GenusTwoCurve, m: [[Rat; 2]; 2]) -> Option<Isomorphism> {
    let g = act(&c1.form(), &m);
    let f2 = c2.form();
    let i0 = f2.c.iter().position(|c| !c.is_zero())?;
    let lambda = &g.c[i0] / &f2.c[i0];
    let iso = Isomorphism { matrix: m, lambda };
    iso.verify(c1, c2).then_some(iso)
}

/// A rational isomorphism, if one is found. Solutions that reduce badly at
/// every prime in the search list are missed.
pub fn q_isomorphism(c1: &GenusTwoCurve, c2: &GenusTwoCurve) -> Option<Isomorphism> {
    if !qbar_isomorphic(c1, c2) {
        return None;
    }
    let i0 = c2.coeffs().iter().position(|c| !c.is_zero())?;
    let bad = c1.disc() * c2.disc() * &c2.coeffs()[i0];
    for chart in charts() {
        let sys = system(c1.coeffs(), c2.coeffs(), &chart);
        for &l in &LIFT_PRIMES {
            if modp::from_bigint(&bad, l) == 0 {
                continue;
            }
            let lb = BigInt::from(l);
            let roots = sys.roots_mod(l);
            if roots.len() > MAX_ROOTS {
                continue;
            }
            for x0 in roots {
                let Some(rows) = sys.square_subsystem(&x0, &lb) else { continue };
                let mut x = x0;
                let mut modulus = lb.clone();
                while modulus.bits() < MAX_BITS {
                    modulus = &modulus * &modulus;
                    let Some(next) = sys.newton_step(&x, &rows, &modulus) else { break };
                    x = next;
                    let q: Option<Vec<Rat>> = x.iter().map(|v| rational_reconstruct(v, &modulus)).collect();
                    if let Some(q) = q {
                        if let Some(iso) = exact(c1, c2, candidate(&chart, &q)) {
                            return Some(iso);
                        }
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn recovers_a_transform() {
        let c1 = GenusTwoCurve::from_ints(&[1, 2, 1, 2, 6, 4, 1]).unwrap();
        let m = [[rat(2), rat(1)], [rat(1), rat(1)]];
        let g = act(&c1.form(), &m);
        let c2 = GenusTwoCurve::new(&g.c.iter().map(|c| c.to_integer()).collect::<Vec<_>>()).unwrap();
        let iso = q_isomorphism(&c1, &c2).expect("isomorphism");
        assert!(iso.verify(&c1, &c2));
    }

    #[test]
    fn quadratic_twist_is_not_rational() {
        let c1 = GenusTwoCurve::from_ints(&[1, 2, 1, 2, 6, 4, 1]).unwrap();
        let c2 = GenusTwoCurve::from_ints(&[3, 6, 3, 6, 18, 12, 3]).unwrap();
        assert!(qbar_isomorphic(&c1, &c2));
        assert!(q_isomorphism(&c1, &c2).is_none());
        let c3 = GenusTwoCurve::from_ints(&[4, 8, 4, 8, 24, 16, 4]).unwrap();
        assert!(q_isomorphism(&c1, &c3).is_some());
    }
}
