//! Sieving of collector output, the level search and newform matching.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{modp, QuadRat, Rat};
use crate::characters::{group_classes, unit_group_factors, DirichletCharacter};
use crate::collector::{Solution, Twist};
use crate::hyperelliptic::{
    clebsch_invariants, clebsch_r, endo_field_check, frobenius_poly, has_extra_involution, q_isomorphism, same_weighted_class, sieve1_check,
    ExtraInvolution, GenusTwoCurve, SieveOutcome,
};
use crate::ingest::fields::record_lines;
use crate::ingest::{fetch_coefficients, CoefficientSource, ConductorRecord, NewformRecord};
use crate::newform::Nebentypus;
use crate::{Error, Result};

pub const BUNDLED_CONDUCTORS: &str = include_str!("../data/conductors.tsv");

/// Primes below this bound are tried in the first sieve.
pub const SIEVE1_BOUND: u64 = 100;
/// Primes up to this bound are tried in the second sieve.
pub const SIEVE2_BOUND: u64 = 29;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Twist,
    NoTwist,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Twist => "twist",
            Branch::NoTwist => "no_twist",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twist" => Ok(Branch::Twist),
            "no_twist" => Ok(Branch::NoTwist),
            _ => Err(Error::Invalid(format!("unknown branch {s:?}, expected twist or no_twist"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Rejects curves with any nonhyperelliptic involution.
    QbarSimple,
    /// `Frob^n` has characteristic polynomial `(t^2 - a t + p^n)^2`.
    Sieve1,
    /// `Q(sqrt d)` embeds in every Frobenius algebra.
    Sieve2,
    /// Keeps curves with a nonhyperelliptic involution.
    Involution,
    /// Rejects curves with a rational nonhyperelliptic involution.
    Sieve3,
    /// Eichler-Shimura at the primes `p <= M''`.
    Sieve4,
    /// The odd part of the conductor is a square.
    Sieve5,
    /// One curve per rational isomorphism class.
    Sieve6,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::QbarSimple => "qbar-simple",
            Stage::Sieve1 => "sieve1",
            Stage::Sieve2 => "sieve2",
            Stage::Involution => "involution",
            Stage::Sieve3 => "sieve3",
            Stage::Sieve4 => "sieve4",
            Stage::Sieve5 => "sieve5",
            Stage::Sieve6 => "sieve6",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The stages of a branch in the order they run.
pub fn stages(branch: Branch) -> Vec<Stage> {
    match branch {
        Branch::Twist => {
            vec![Stage::Sieve1, Stage::Sieve2, Stage::Involution, Stage::Sieve3, Stage::Sieve4, Stage::Sieve5, Stage::Sieve6]
        }
        Branch::NoTwist => vec![Stage::QbarSimple, Stage::Sieve2, Stage::Sieve4, Stage::Sieve6],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditVerdict {
    Rejected,
    /// Passed without the data the stage needs.
    Flagged,
}

/// One decision about one candidate. Candidates are numbered by their
/// position in the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditLine {
    pub candidate: usize,
    pub stage: Stage,
    pub verdict: AuditVerdict,
    pub witness: Option<u64>,
    pub note: String,
}

impl fmt::Display for AuditLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.verdict {
            AuditVerdict::Rejected => "rejected",
            AuditVerdict::Flagged => "flagged",
        };
        write!(f, "audit\t{}\t{}\t{v}", self.candidate, self.stage)?;
        if let Some(p) = self.witness {
            write!(f, "\tp={p}")?;
        }
        if !self.note.is_empty() {
            write!(f, "\tnote={}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveReport {
    pub branch: Branch,
    pub input: usize,
    /// Survivors after each stage.
    pub counts: Vec<(Stage, usize)>,
    pub audit: Vec<AuditLine>,
}

impl SieveReport {
    pub fn survivors_after(&self, stage: Stage) -> Option<usize> {
        self.counts.iter().find(|(s, _)| *s == stage).map(|&(_, n)| n)
    }

    /// `input` followed by the survivor count of every stage.
    pub fn trajectory(&self) -> Vec<usize> {
        std::iter::once(self.input).chain(self.counts.iter().map(|&(_, n)| n)).collect()
    }

    /// Machine-readable form: a `stage` line per stage, then the audit lines.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("report\tbranch={}\tinput={}\n", self.branch, self.input);
        for (s, n) in &self.counts {
            out.push_str(&format!("stage\t{s}\tsurvivors={n}\n"));
        }
        for a in &self.audit {
            out.push_str(&format!("{a}\n"));
        }
        out
    }
}

impl fmt::Display for SieveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} branch: {} candidates", self.branch, self.input)?;
        for (s, n) in &self.counts {
            let rejected = self.audit.iter().filter(|a| a.stage == *s && a.verdict == AuditVerdict::Rejected).count();
            let flagged = self.audit.iter().filter(|a| a.stage == *s && a.verdict == AuditVerdict::Flagged).count();
            write!(f, "  {:<12} {:>6} left, {:>6} rejected", s.name(), n, rejected)?;
            if flagged > 0 {
                write!(f, ", {flagged} flagged")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Odd parts of conductors keyed by the integral model `P`.
#[derive(Clone, Debug, Default)]
pub struct ConductorTable(HashMap<Vec<BigInt>, BigInt>);

impl ConductorTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, line) in record_lines(text) {
            let r = ConductorRecord::parse(line, n)?;
            map.insert(trim(r.poly), r.odd);
        }
        Ok(ConductorTable(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_CONDUCTORS).expect("bundled conductors parse")
    }

    pub fn get(&self, poly: &[BigInt]) -> Option<&BigInt> {
        self.0.get(&trim(poly.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The odd conductor part for a solution's curve, looked up under the
    /// solution's model and under that of its conjugate.
    pub fn lookup(&self, s: &Solution) -> Option<BigInt> {
        let own = s.curve().ok().and_then(|c| self.get(c.coeffs()).cloned());
        own.or_else(|| {
            let c = s.conjugate().ok()?.curve().ok()?;
            self.get(c.coeffs()).cloned()
        })
    }
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

/// `(t^2 - a t + e p)(t^2 - sigma(a) t + sigma(e) p)`, constant term first,
/// when it has rational integer coefficients.
pub fn eichler_shimura_quartic(a: &QuadRat, e: &QuadRat, p: u64) -> Option<Vec<BigInt>> {
    let pr = Rat::from_integer(BigInt::from(p));
    let ae = a.checked_mul(&e.conjugate()).ok()?;
    let c = [
        &pr * &pr * e.norm(),
        -(&pr * ae.trace()),
        a.norm() + &pr * e.trace(),
        -a.trace(),
        Rat::one(),
    ];
    c.iter().map(|q| q.is_integer().then(|| q.to_integer())).collect()
}

/// `eps(p)` as the sieves use it: from the cell at 2 and 3, trivial for
/// trivial Nebentypus, and `a_p / sigma(a_p)` otherwise.
pub fn sieve_eps(s: &Solution, p: u64) -> Option<QuadRat> {
    match p {
        2 => Some(s.eps2.clone()),
        3 => Some(s.eps3.clone()),
        _ => match s.twist {
            Twist::None | Twist::Order(1) => Some(QuadRat::one()),
            _ => {
                let a = s.ap.get(&p)?;
                if a.is_zero() {
                    return None;
                }
                a.checked_div(&a.conjugate()).ok()
            }
        },
    }
}

/// Eichler-Shimura at every good `p <= M''` with `eps(p)` known and nonzero.
pub fn sieve4_check(s: &Solution, curve: &GenusTwoCurve) -> SieveOutcome {
    for p in modp::primes_up_to(s.m_double_prime()) {
        if !curve.has_good_reduction(p) {
            continue;
        }
        let Some(a) = s.ap.get(&p) else {
            continue;
        };
        let Some(e) = sieve_eps(s, p).filter(|e| !e.is_zero()) else {
            continue;
        };
        let Ok(data) = frobenius_poly(curve, p) else {
            continue;
        };
        if eichler_shimura_quartic(a, &e, p).as_deref() != Some(&data.quartic()[..]) {
            return SieveOutcome::Fail { p };
        }
    }
    SieveOutcome::Pass
}

struct Candidate<'a> {
    index: usize,
    sol: &'a Solution,
    curve: Option<GenusTwoCurve>,
    involution: OnceLock<ExtraInvolution>,
}

impl Candidate<'_> {
    fn involution(&self) -> &ExtraInvolution {
        self.involution.get_or_init(|| has_extra_involution(self.curve.as_ref().expect("checked before")))
    }
}

/// The verdict of one stage on one candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Keep,
    Flag(String),
    Reject(Option<u64>, String),
}

fn outcome(o: SieveOutcome) -> Decision {
    match o {
        SieveOutcome::Pass => Decision::Keep,
        SieveOutcome::Fail { p } => Decision::Reject(Some(p), String::new()),
    }
}

fn decide(stage: Stage, c: &Candidate, conductors: &ConductorTable) -> Decision {
    let Some(curve) = &c.curve else {
        return Decision::Reject(None, "no genus-two curve".into());
    };
    let s = c.sol;
    match stage {
        // R = 0 exactly when a nonhyperelliptic involution exists over Qbar
        Stage::QbarSimple if clebsch_r(curve).is_zero() => Decision::Reject(None, "Clebsch R vanishes".into()),
        Stage::QbarSimple => Decision::Keep,
        Stage::Sieve1 => {
            let n = match s.k() {
                1 => 2,
                k => k,
            };
            outcome(sieve1_check(curve, n, SIEVE1_BOUND))
        }
        Stage::Sieve2 => outcome(endo_field_check(curve, s.d, SIEVE2_BOUND)),
        Stage::Involution if clebsch_r(curve).is_zero() => Decision::Keep,
        Stage::Involution => Decision::Reject(None, "no nonhyperelliptic involution".into()),
        Stage::Sieve3 => match c.involution().over_q() {
            Some(i) => Decision::Reject(None, format!("rational involution {i}")),
            None => Decision::Keep,
        },
        Stage::Sieve4 => outcome(sieve4_check(s, curve)),
        Stage::Sieve5 => match conductors.lookup(s) {
            None => Decision::Flag("no conductor data".into()),
            Some(odd) if is_square(&odd) => Decision::Keep,
            Some(odd) => Decision::Reject(None, format!("odd conductor part {odd}")),
        },
        Stage::Sieve6 => unreachable!("set-level stage"),
    }
}

/// Applies a per-candidate stage to one solution.
pub fn check_stage(stage: Stage, s: &Solution, conductors: &ConductorTable) -> Decision {
    if stage == Stage::Sieve6 {
        return Decision::Keep;
    }
    let c = Candidate { index: 0, sol: s, curve: s.curve().ok(), involution: OnceLock::new() };
    decide(stage, &c, conductors)
}

fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

/// Runs the stages of `branch` over `solutions`, returning the report and
/// the survivors in input order.
pub fn run_sieves(solutions: &[Solution], branch: Branch, conductors: &ConductorTable) -> (SieveReport, Vec<Solution>) {
    let mut alive: Vec<Candidate> = solutions
        .iter()
        .enumerate()
        .map(|(index, sol)| Candidate { index, sol, curve: sol.curve().ok(), involution: OnceLock::new() })
        .collect();
    let mut report = SieveReport { branch, input: solutions.len(), counts: Vec::new(), audit: Vec::new() };
    for stage in stages(branch) {
        if stage == Stage::Sieve6 {
            let (keep, lines) = sieve6(&alive);
            report.audit.extend(lines);
            let mut it = keep.into_iter();
            alive.retain(|_| it.next().expect("one flag per candidate"));
        } else {
            let decisions: Vec<Decision> = alive.par_iter().map(|c| decide(stage, c, conductors)).collect();
            let mut keep = Vec::with_capacity(alive.len());
            for (c, dcs) in alive.iter().zip(decisions) {
                match dcs {
                    Decision::Keep => keep.push(true),
                    Decision::Flag(note) => {
                        report.audit.push(AuditLine { candidate: c.index, stage, verdict: AuditVerdict::Flagged, witness: None, note });
                        keep.push(true);
                    }
                    Decision::Reject(witness, note) => {
                        report.audit.push(AuditLine { candidate: c.index, stage, verdict: AuditVerdict::Rejected, witness, note });
                        keep.push(false);
                    }
                }
            }
            let mut it = keep.into_iter();
            alive.retain(|_| it.next().expect("one flag per candidate"));
        }
        report.counts.push((stage, alive.len()));
    }
    let survivors = alive.iter().map(|c| c.sol.clone()).collect();
    (report, survivors)
}

/// Keeps the first curve of every rational isomorphism class.
fn sieve6(alive: &[Candidate]) -> (Vec<bool>, Vec<AuditLine>) {
    let inv: Vec<_> = alive.par_iter().map(|c| c.curve.as_ref().map(clebsch_invariants)).collect();
    let mut keep = vec![true; alive.len()];
    let mut lines = Vec::new();
    for j in 0..alive.len() {
        let Some(ij) = &inv[j] else { continue };
        let dup = (0..j).find(|&i| {
            keep[i]
                && inv[i].as_ref().is_some_and(|ii| same_weighted_class(ii, ij))
                && q_isomorphism(alive[i].curve.as_ref().unwrap(), alive[j].curve.as_ref().unwrap()).is_some()
        });
        if let Some(i) = dup {
            keep[j] = false;
            lines.push(AuditLine {
                candidate: alive[j].index,
                stage: Stage::Sieve6,
                verdict: AuditVerdict::Rejected,
                witness: None,
                note: format!("isomorphic to candidate {}", alive[i].index),
            });
        }
    }
    (keep, lines)
}

/// Largest `k` with `Q(eps, zeta^2)` inside `K_f = Q(sqrt d)`, where `zeta`
/// is a primitive `2^m`-th root of unity and `m = ceil(k/2 - 2)`. `None`
/// when the values of a character of order `eps_order` do not lie in `K_f`.
pub fn brumer_k_bound(d: i64, eps_order: u32) -> Option<u32> {
    let fits = match eps_order {
        1 | 2 => true,
        3 | 6 => d == -3,
        4 => d == -1,
        _ => false,
    };
    if !fits {
        return None;
    }
    // zeta^2 has order 2^(m-1): rational for m <= 2, i for m = 3
    let m = if d == -1 { 3 } else { 2 };
    Some(2 * m + 4)
}

/// A level with the characters modulo it that fit a solution's data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelCandidate {
    pub level: u64,
    pub characters: Vec<Nebentypus>,
}

impl LevelCandidate {
    /// One character per Galois conjugacy class.
    pub fn classes(&self) -> Vec<Vec<DirichletCharacter>> {
        let chars = self
            .characters
            .iter()
            .filter_map(|c| match c {
                Nebentypus::Character(chi) => Some(chi.clone()),
                _ => None,
            })
            .collect();
        group_classes(chars)
    }
}

/// Every character modulo `n` with values in a quadratic field.
pub fn all_characters(n: u64) -> Vec<DirichletCharacter> {
    let comps = unit_group_factors(n);
    let mut out = Vec::new();
    let mut idx = vec![0u32; comps.len()];
    loop {
        if let Ok(chi) = DirichletCharacter::from_images(n, &idx) {
            if !out.contains(&chi) {
                out.push(chi);
            }
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < 12 {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Whether `chi` agrees with the solution's `eps(2)`, `eps(3)` and, when
/// nontrivial, with `a_p / sigma(a_p)` at the other good primes with
/// `a_p != 0`.
fn fits_data(chi: &DirichletCharacter, s: &Solution) -> bool {
    if chi.eval(2) != s.eps2 || chi.eval(3) != s.eps3 {
        return false;
    }
    if chi.is_trivial() {
        return true;
    }
    s.ap.iter().filter(|(&p, a)| p > 3 && chi.modulus() % p != 0 && !a.is_zero()).all(|(&p, a)| {
        a.checked_div(&a.conjugate()).is_ok_and(|e| e == chi.eval(p))
    })
}

/// Candidate levels `2^k M` for `k` up to the Brumer bound, each with the
/// even characters of the solution's order that fit its data.
pub fn level_search(s: &Solution, odd_m: u64) -> Result<Vec<LevelCandidate>> {
    if odd_m % 2 == 0 || odd_m == 0 {
        return Err(Error::Invalid(format!("odd conductor part expected, got {odd_m}")));
    }
    let order = match s.twist {
        Twist::None | Twist::Order(1) => 1,
        Twist::Order(k) => k,
    };
    let Some(kmax) = brumer_k_bound(s.d, order) else {
        return Ok(Vec::new());
    };
    // eps(2) = 0 exactly when 2 divides the level
    let ks: Vec<u32> = if !s.eps2.is_zero() {
        vec![0]
    } else if s.twist == Twist::None && s.n0 == 2 {
        Vec::new()
    } else {
        (1..=kmax).collect()
    };
    let mut out = Vec::new();
    for k in ks {
        let level = (1u64 << k) * odd_m;
        let characters: Vec<Nebentypus> = if order == 1 {
            let t = DirichletCharacter::trivial(level);
            if fits_data(&t, s) {
                vec![Nebentypus::Trivial]
            } else {
                Vec::new()
            }
        } else {
            all_characters(level)
                .into_iter()
                .filter(|chi| chi.order() == order && chi.eval(level - 1) == QuadRat::one() && fits_data(chi, s))
                .map(Nebentypus::Character)
                .collect()
        };
        if !characters.is_empty() {
            out.push(LevelCandidate { level, characters });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewformMatch {
    pub level: u64,
    pub record: NewformRecord,
    /// Whether the solution carries the conjugate data of the record.
    pub conjugated: bool,
}

/// Looks for a newform at the candidate levels whose `a_p`, `p <= M''`, and
/// `eps(2)`, `eps(3)` agree with the solution's, up to conjugating both.
/// Levels the source cannot supply are returned with their errors.
pub fn match_newform(s: &Solution, candidates: &[LevelCandidate], source: &CoefficientSource) -> (Option<NewformMatch>, Vec<(u64, Error)>) {
    let mut errors = Vec::new();
    let bound = s.m_double_prime();
    for cand in candidates {
        let recs = match fetch_coefficients(source, cand.level, None, bound) {
            Ok(r) => r,
            Err(e) => {
                errors.push((cand.level, e));
                continue;
            }
        };
        for rec in recs {
            if rec.d != s.d {
                continue;
            }
            let Ok(nf) = rec.newform() else { continue };
            let spec = nf.spec;
            for conjugated in [false, true] {
                let fix = |a: &QuadRat| if conjugated { a.conjugate() } else { a.clone() };
                let coeffs = modp::primes_up_to(bound).into_iter().all(|p| match (s.ap.get(&p), rec.ap.get(&p)) {
                    (Some(a), Some(b)) => *a == fix(b),
                    _ => false,
                });
                let eps_ok = [(2, &s.eps2), (3, &s.eps3)].into_iter().all(|(p, e)| spec.eps(p).is_some_and(|x| fix(&x) == *e));
                let chi = if conjugated { spec.character.conjugate() } else { spec.character.clone() };
                if coeffs && eps_ok && cand.characters.contains(&chi) {
                    return (Some(NewformMatch { level: cand.level, record: rec.clone(), conjugated }), errors);
                }
            }
        }
    }
    (None, errors)
}

/// Parses a solution stream, skipping comments and blank lines.
pub fn parse_solutions(text: &str) -> Result<Vec<Solution>> {
    record_lines(text).map(|(n, l)| Solution::parse(l, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn brumer_bounds() {
        assert_eq!(brumer_k_bound(-1, 1), Some(10));
        assert_eq!(brumer_k_bound(5, 1), Some(8));
        assert_eq!(brumer_k_bound(3, 2), Some(8));
        assert_eq!(brumer_k_bound(5, 3), None);
        assert_eq!(brumer_k_bound(-3, 6), Some(8));
    }

    #[test]
    fn eichler_shimura_for_sqrt3() {
        // a_5 = -2 sqrt 3, trivial character
        let a = QuadRat::new(3, rat(0), rat(-2)).unwrap();
        let q = eichler_shimura_quartic(&a, &QuadRat::one(), 5).unwrap();
        let want: Vec<BigInt> = [25, 0, -2, 0, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(q, want);
    }

    #[test]
    fn stage_lists() {
        assert_eq!(stages(Branch::Twist).len(), 7);
        assert_eq!(stages(Branch::NoTwist)[0], Stage::QbarSimple);
        assert_eq!("no_twist".parse::<Branch>().unwrap(), Branch::NoTwist);
    }

    #[test]
    fn bundled_conductors_are_squares() {
        let t = ConductorTable::bundled();
        assert_eq!(t.len(), 149);
        assert!(t.0.values().all(is_square));
    }

    #[test]
    fn characters_modulo_36() {
        let all = all_characters(36);
        // (Z/36)^* = Z/2 x Z/6
        assert_eq!(all.len(), 12);
        assert_eq!(all.iter().filter(|c| c.order() == 3).count(), 2);
    }
}
