//! Dirichlet characters whose values lie in a quadratic field, and the
//! degree-list notation used by the bundled tables.
//!
//! Values are stored as exponents of `zeta = exp(2 pi i / 12)`; only the
//! character orders 1, 2, 3, 4 and 6 are representable, so every value is a
//! root of unity in `Q`, `Q(i)` or `Q(sqrt -3)`.

use std::fmt;

use num_integer::Integer;

use crate::arith::modp::{self, euler_phi, factor};
use crate::arith::{rat, rat_frac, QuadRat};
use crate::{Error, Result};

/// `zeta^j` for `zeta` a primitive 12th root of unity, restricted to the
/// exponents whose value lies in a quadratic field.
pub fn zeta12(j: u32) -> Option<QuadRat> {
    let h = rat_frac(1, 2);
    let v = match j % 12 {
        0 => QuadRat::one(),
        2 => QuadRat::new(-3, h.clone(), h).ok()?,
        3 => QuadRat::sqrt(-1).ok()?,
        4 => QuadRat::new(-3, -h.clone(), h).ok()?,
        6 => QuadRat::from_int(-1),
        8 => QuadRat::new(-3, -h.clone(), -h).ok()?,
        9 => QuadRat::new(-1, rat(0), rat(-1)).ok()?,
        10 => QuadRat::new(-3, h.clone(), -h).ok()?,
        _ => return None,
    };
    Some(v)
}

fn order_of_exponent(j: u32) -> u32 {
    12 / (j % 12).gcd(&12)
}

/// One cyclic factor of `(Z/NZ)^*`: odd prime powers have a single factor
/// generated by the least primitive root; `2^e` has the factor generated by
/// `-1` (e >= 2) and the factor generated by `5` (e >= 3).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub prime: u64,
    pub exponent: u32,
    /// Generator as a residue modulo `prime^exponent`.
    pub generator: u64,
    /// Order of the generator.
    pub group_order: u64,
    /// The generator maps to `zeta^image`.
    pub image: u32,
}

impl Component {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    pub fn order(&self) -> u32 {
        order_of_exponent(self.image)
    }

    /// Discrete logarithm of `n` (a unit) with respect to this factor.
    fn log(&self, n: u64) -> u64 {
        let q = self.modulus();
        let n = n % q;
        if self.prime == 2 {
            let minus = n % 4 == 3;
            if self.generator == q - 1 {
                return u64::from(minus);
            }
            let target = if minus { q - n } else { n };
            let mut x = 1;
            for k in 0..self.group_order {
                if x == target {
                    return k;
                }
                x = x * 5 % q;
            }
            unreachable!("5 generates the classes of 1 mod 4")
        } else {
            let mut x = 1;
            for k in 0..self.group_order {
                if x == n {
                    return k;
                }
                x = modp::mul(x, self.generator, q);
            }
            unreachable!("primitive root generates the unit group")
        }
    }
}

/// Least primitive root modulo an odd prime power.
pub fn primitive_root(p: u64, e: u32) -> u64 {
    let q = p.pow(e);
    let phi = euler_phi(q);
    let fs = factor(phi);
    (2..q)
        .find(|&g| g % p != 0 && fs.iter().all(|&(r, _)| modp::pow(g, phi / r, q) != 1))
        .expect("odd prime powers have primitive roots")
}

/// The cyclic factors of `(Z/NZ)^*` with trivial images.
pub fn unit_group_factors(modulus: u64) -> Vec<Component> {
    let mut out = Vec::new();
    for (p, e) in factor(modulus) {
        let q = p.pow(e);
        if p == 2 {
            if e >= 2 {
                out.push(Component { prime: 2, exponent: e, generator: q - 1, group_order: 2, image: 0 });
            }
            if e >= 3 {
                out.push(Component { prime: 2, exponent: e, generator: 5, group_order: q / 4, image: 0 });
            }
        } else {
            out.push(Component { prime: p, exponent: e, generator: primitive_root(p, e), group_order: euler_phi(q), image: 0 });
        }
    }
    out
}

/// A Dirichlet character of order 1, 2, 3, 4 or 6.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirichletCharacter {
    modulus: u64,
    components: Vec<Component>,
}

impl DirichletCharacter {
    pub fn trivial(modulus: u64) -> Self {
        DirichletCharacter { modulus, components: unit_group_factors(modulus) }
    }

    /// Character with the given generator images, one per factor of
    /// [`unit_group_factors`].
    pub fn from_images(modulus: u64, images: &[u32]) -> Result<Self> {
        let mut components = unit_group_factors(modulus);
        if components.len() != images.len() {
            return Err(Error::Character(format!(
                "modulus {modulus} has {} cyclic factors, got {} images",
                components.len(),
                images.len()
            )));
        }
        for (c, &j) in components.iter_mut().zip(images) {
            c.image = j % 12;
            if c.group_order % u64::from(c.order()) != 0 {
                return Err(Error::Character(format!(
                    "order {} is impossible on the factor generated by {} mod {}",
                    c.order(),
                    c.generator,
                    c.modulus()
                )));
            }
        }
        let chi = DirichletCharacter { modulus, components };
        if ![1, 2, 3, 4, 6].contains(&chi.order()) {
            return Err(Error::Character(format!("order {} has values outside a quadratic field", chi.order())));
        }
        Ok(chi)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn images(&self) -> Vec<u32> {
        self.components.iter().map(|c| c.image).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.components.iter().all(|c| c.image == 0)
    }

    pub fn order(&self) -> u32 {
        self.components.iter().fold(1, |acc, c| acc.lcm(&c.order()))
    }

    /// Degree of the field cut out by the kernel, which is the order.
    pub fn fixed_field_degree(&self) -> u32 {
        self.order()
    }

    /// Value at `n`, zero when `n` shares a factor with the modulus.
    pub fn eval(&self, n: u64) -> QuadRat {
        if n.gcd(&self.modulus) != 1 {
            return QuadRat::zero();
        }
        let t: u64 = self.components.iter().filter(|c| c.image != 0).map(|c| c.log(n) * u64::from(c.image)).sum();
        zeta12((t % 12) as u32).expect("order restricted to quadratic values")
    }

    pub fn galois_conjugate(&self) -> Self {
        let mut c = self.clone();
        for comp in &mut c.components {
            comp.image = (12 - comp.image) % 12;
        }
        c
    }

    pub fn conductor(&self) -> u64 {
        let mut f = 1;
        for c in &self.components {
            let m = u64::from(c.order());
            if m == 1 {
                continue;
            }
            if c.prime == 2 {
                continue;
            }
            f *= c.prime.pow(1 + modp::valuation(&m.into(), c.prime));
        }
        let two: Vec<&Component> = self.components.iter().filter(|c| c.prime == 2).collect();
        let five = two.iter().find(|c| c.generator == 5 && c.image != 0);
        let minus = two.iter().any(|c| c.generator != 5 && c.image != 0);
        if let Some(c) = five {
            let j = u64::from(c.order()).trailing_zeros();
            f *= 1 << (j + 2);
        } else if minus {
            f *= 4;
        }
        f
    }

    /// The conjugacy class `{chi, conj(chi)}` in a fixed order.
    pub fn class(&self) -> Vec<DirichletCharacter> {
        let c = self.galois_conjugate();
        let mut v = vec![self.clone()];
        if c != *self {
            v.push(c);
        }
        v.sort();
        v
    }

    /// Component orders in degree-list order (2-part first, then odd primes).
    pub fn degree_list(&self) -> Vec<u32> {
        self.components.iter().map(Component::order).collect()
    }

    /// The degree-list text of this character at its modulus.
    pub fn to_degree_list(&self) -> String {
        if self.is_trivial() {
            return "1".into();
        }
        let v: Vec<String> = self.degree_list().iter().map(u32::to_string).collect();
        format!("[{}]", v.join(","))
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi mod {} images", self.modulus)?;
        for c in &self.components {
            write!(f, " {}->z12^{}", c.generator, c.image)?;
        }
        Ok(())
    }
}

/// Every character modulo `modulus` whose factors have exactly the given orders.
pub fn characters_with_orders(modulus: u64, orders: &[u32]) -> Result<Vec<DirichletCharacter>> {
    let factors = unit_group_factors(modulus);
    if factors.len() != orders.len() {
        return Err(Error::Character(format!("expected {} degrees for modulus {modulus}, got {}", factors.len(), orders.len())));
    }
    let mut choices: Vec<Vec<u32>> = Vec::new();
    for (c, &m) in factors.iter().zip(orders) {
        if ![1, 2, 3, 4, 6].contains(&m) || c.group_order % u64::from(m) != 0 {
            return Err(Error::Character(format!("no factor of order {m} on the factor generated by {} mod {}", c.generator, c.modulus())));
        }
        choices.push((0..12).filter(|&j| order_of_exponent(j) == m).collect());
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let images: Vec<u32> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        if let Ok(chi) = DirichletCharacter::from_images(modulus, &images) {
            out.push(chi);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Characters grouped into Galois conjugacy classes, each class sorted.
pub fn group_classes(chars: Vec<DirichletCharacter>) -> Vec<Vec<DirichletCharacter>> {
    let mut classes: Vec<Vec<DirichletCharacter>> = Vec::new();
    for chi in chars {
        let cls = chi.class();
        if !classes.contains(&cls) {
            classes.push(cls);
        }
    }
    classes.sort();
    classes
}

/// One way of reading a degree list against a level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReading {
    pub description: String,
    /// Component orders in the canonical factor order.
    pub orders: Vec<u32>,
    pub classes: Vec<Vec<DirichletCharacter>>,
}

fn expected_two_entries(level: u64) -> usize {
    match level.trailing_zeros() {
        0 | 1 => 0,
        2 => 1,
        _ => 2,
    }
}

/// Parses the degree-list notation: `1` for the trivial character, or a
/// bracketed list of component orders, with no entry for 2 when `2 || N`,
/// one entry when `4 || N` and two (factors of -1 and 5) when `8 | N`,
/// followed by one entry per odd prime in increasing order.
///
/// A list with one surplus leading entry at a level exactly divisible by 2
/// is accepted with two readings: the leading entry refers to 2 (and must
/// be 1), or the trailing entry is surplus.
pub fn parse_degree_list(text: &str, level: u64) -> Result<Vec<DegreeReading>> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if level == 0 {
        return Err(Error::Character("level must be positive".into()));
    }
    if t == "1" {
        let chi = DirichletCharacter::trivial(level);
        let orders = chi.degree_list();
        return Ok(vec![DegreeReading { description: "trivial".into(), orders, classes: vec![vec![chi]] }]);
    }
    let inner = t
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Character(format!("malformed degree list {text:?}")))?;
    let entries: Vec<u32> = inner
        .split(',')
        .map(|s| s.parse::<u32>().map_err(|_| Error::Character(format!("malformed entry {s:?} in {text:?}"))))
        .collect::<Result<_>>()?;
    let odd = factor(level).iter().filter(|(p, _)| *p != 2).count();
    let want = expected_two_entries(level) + odd;
    let mut readings = Vec::new();
    if entries.len() == want {
        readings.push(("one entry per factor".to_string(), entries.clone()));
    } else if level.trailing_zeros() == 1 && entries.len() == want + 1 {
        if entries[0] == 1 {
            readings.push(("leading entry refers to 2".to_string(), entries[1..].to_vec()));
        }
        readings.push(("trailing entry is surplus".to_string(), entries[..want].to_vec()));
    } else {
        return Err(Error::Character(format!("{text} has {} entries, level {level} needs {want}", entries.len())));
    }
    let mut out = Vec::new();
    let mut last_err = None;
    for (description, orders) in readings {
        match characters_with_orders(level, &orders) {
            Ok(chars) => out.push(DegreeReading { description, orders, classes: group_classes(chars) }),
            Err(e) => last_err = Some(e),
        }
    }
    if out.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Character(format!("no reading of {text}"))));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        // least f | N such that chi is trivial on units congruent to 1 mod f
        let n = chi.modulus();
        modp::divisors(n)
            .into_iter()
            .find(|&f| (1..n).filter(|&a| a.gcd(&n) == 1 && a % f == 1 % f).all(|a| chi.eval(a) == QuadRat::one()))
            .unwrap()
    }

    #[test]
    fn order_six_mod_13() {
        let chi = DirichletCharacter::from_images(13, &[2]).unwrap();
        assert_eq!(chi.order(), 6);
        assert_eq!(chi.eval(2), QuadRat::new(-3, rat_frac(1, 2), rat_frac(1, 2)).unwrap());
        assert_eq!(chi.conductor(), 13);
        assert_eq!(brute_conductor(&chi), 13);
    }

    #[test]
    fn trivial_values() {
        let chi = DirichletCharacter::trivial(63);
        assert_eq!(chi.eval(5), QuadRat::one());
        assert_eq!(chi.eval(21), QuadRat::zero());
        assert_eq!(chi.conductor(), 1);
        assert_eq!(chi.order(), 1);
    }

    #[test]
    fn gcd_kills_value() {
        for chi in characters_with_orders(40, &[1, 1, 2]).unwrap() {
            assert_eq!(chi.eval(10), QuadRat::zero());
        }
    }

    #[test]
    fn conjugation_is_an_involution() {
        for chi in characters_with_orders(16, &[1, 4]).unwrap() {
            assert_eq!(chi.galois_conjugate().galois_conjugate(), chi);
            assert_ne!(chi.galois_conjugate(), chi);
        }
    }

    #[test]
    fn conductors_match_brute_force() {
        for n in [8u64, 9, 12, 16, 20, 28, 36, 40, 45, 48, 52, 63, 64, 80, 112] {
            for m in [1u32, 2, 3, 4, 6] {
                let factors = unit_group_factors(n);
                // all single-factor assignments of order m
                for i in 0..factors.len() {
                    let mut orders = vec![1; factors.len()];
                    orders[i] = m;
                    if let Ok(chars) = characters_with_orders(n, &orders) {
                        for chi in chars {
                            assert_eq!(chi.conductor(), brute_conductor(&chi), "{chi}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn degree_list_examples() {
        let r = parse_degree_list("[6]", 13).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].classes.len(), 1);
        assert_eq!(r[0].classes[0].len(), 2);
        let r = parse_degree_list("[1, 2]", 45).unwrap();
        let chi = &r[0].classes[0][0];
        assert_eq!(chi.degree_list(), vec![1, 2]);
        assert_eq!(chi.conductor(), 5);
        let r = parse_degree_list("1", 77).unwrap();
        assert!(r[0].classes[0][0].is_trivial());
    }

    #[test]
    fn level_18_has_two_readings() {
        let r = parse_degree_list("[1,3]", 18).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].orders, vec![3]);
        assert_eq!(r[1].orders, vec![1]);
    }

    #[test]
    fn malformed_lists() {
        assert!(parse_degree_list("[1,2", 45).is_err());
        assert!(parse_degree_list("[1,2,2]", 45).is_err());
        // order 4 is impossible modulo 9
        assert!(parse_degree_list("[4]", 9).is_err());
    }

    #[test]
    fn reserialization() {
        for text in ["[1,1,2]", "[2,1,4]", "[1,6]", "[2,1,6]"] {
            let level = match text {
                "[1,1,2]" => 40,
                "[2,1,4]" => 160,
                "[1,6]" => 52,
                _ => 112,
            };
            for reading in parse_degree_list(text, level).unwrap() {
                for cls in reading.classes {
                    for chi in cls {
                        assert_eq!(chi.to_degree_list(), text);
                    }
                }
            }
        }
    }
}
