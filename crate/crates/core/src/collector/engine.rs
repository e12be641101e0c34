//! The forward solver behind `search`. Coefficient data is evaluated modulo
//! `P61`; each coordinate of a prime coefficient is found where it first
//! enters, jointly with its neighbours when the constraints are affine in
//! them. Every leaf is refitted exactly by the caller.

use std::collections::HashSet;

use crate::arith::modp::P61;

/// Reduction modulo the Mersenne prime `2^61 - 1`.
#[inline]
fn red(z: u128) -> u64 {
    let lo = (z as u64) & P61;
    let hi = (z >> 61) as u64;
    let mut s = lo + (hi & P61) + ((hi >> 61) as u64);
    while s >= P61 {
        s -= P61;
    }
    s
}

#[inline]
fn mulp(a: u64, b: u64) -> u64 {
    red(a as u128 * b as u128)
}

#[inline]
fn addp(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= P61 {
        s - P61
    } else {
        s
    }
}

#[inline]
fn subp(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P61 - b
    }
}

fn powp(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulp(r, a);
        }
        a = mulp(a, a);
        e >>= 1;
    }
    r
}

fn invp(a: u64) -> Option<u64> {
    (a != 0).then(|| powp(a, P61 - 2))
}

pub(crate) fn from_i64(x: i64) -> u64 {
    x.rem_euclid(P61 as i64) as u64
}

/// `t / 2` for a small integer `t`.
fn half(t: i64) -> u64 {
    mulp(from_i64(t), (P61 + 1) / 2)
}

/// The small integer `t` with `t = 2 v mod P61`, if there is one.
fn doubled(v: u64) -> Option<i64> {
    let t = mulp(v, 2);
    let c = if t > P61 / 2 { -((P61 - t) as i64) } else { t as i64 };
    (c.unsigned_abs() < 1 << 20).then_some(c)
}

/// `u + v sqrt d` modulo `P61`.
type Elt = (u64, u64);

/// A prime coefficient in doubled coordinates: `a = (x + y sqrt d) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pair {
    pub x: i64,
    pub y: i64,
}

/// One equation: the coefficient of `q^order` in `y^2 - P(x)`.
#[derive(Clone, Debug)]
struct Constraint {
    order: i64,
    /// Largest `n` whose `a_n` may enter.
    nmax: usize,
}

/// A coordinate of a prime coefficient: `(prime index, 0 for x or 1 for y)`.
type Var = (usize, usize);

/// How the unknowns left at a constraint are found: jointly from the
/// constraints `from..=to` when they enter affinely there, else by
/// enumerating the first one.
#[derive(Clone, Debug)]
struct Plan {
    to: usize,
    vars: Vec<Var>,
}

pub(crate) struct Problem {
    pub d: i64,
    pub n0: usize,
    pub primes: Vec<u64>,
    /// Admissible values of each prime coefficient, in search order.
    pub allowed: Vec<Vec<Pair>>,
    /// `eps(2)`, `eps(3)` modulo `P61`.
    pub eps2: Elt,
    pub eps3: Elt,
    /// Residual orders `1..=last` are imposed.
    pub last: i64,
}

pub(crate) struct Engine<'a> {
    pb: &'a Problem,
    dm: u64,
    constraints: Vec<Constraint>,
    /// Coordinates entering constraint `i` for the first time.
    fresh: Vec<Vec<Var>>,
    /// `plans[i][k]`: the joint solve once `fresh[i][..k]` is assigned.
    plans: Vec<Vec<Option<Plan>>>,
    allowed_set: Vec<HashSet<Pair>>,
    /// Projections of the admissible values to each coordinate.
    proj: Vec<[Vec<i64>; 2]>,
    /// Hecke data for `n <= nmax`: `(p index, exponent, p^exponent)` of the
    /// least prime dividing `n`.
    shape: Vec<(usize, u32, usize)>,
}

/// Largest number of coordinates solved jointly.
const MAX_BLOCK: usize = 8;

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 3) % P61
    }
}

struct State {
    vals: Vec<[Option<i64>; 2]>,
    ap: Vec<Elt>,
}

impl State {
    fn set(&mut self, (q, c): Var, v: i64) {
        self.vals[q][c] = Some(v);
        if c == 0 {
            self.ap[q].0 = half(v);
        } else {
            self.ap[q].1 = half(v);
        }
    }

    fn clear(&mut self, (q, c): Var) {
        self.vals[q][c] = None;
        if c == 0 {
            self.ap[q].0 = 0;
        } else {
            self.ap[q].1 = 0;
        }
    }
}

fn set_raw(ap: &mut [Elt], (q, c): Var, v: u64) {
    if c == 0 {
        ap[q].0 = v;
    } else {
        ap[q].1 = v;
    }
}

impl<'a> Engine<'a> {
    pub fn new(pb: &'a Problem) -> Self {
        let n0 = pb.n0 as i64;
        let mut orders: Vec<i64> = Vec::new();
        let vx = 1 - n0;
        let lo = 2 * (1 - 2 * n0);
        for o in lo..=0 {
            if o % vx != 0 {
                orders.push(o);
            }
        }
        orders.extend(1..=pb.last);
        let constraints: Vec<Constraint> =
            orders.into_iter().map(|order| Constraint { order, nmax: (order + 5 * n0 - 2) as usize }).collect();
        let top = constraints.last().map_or(1, |c| c.nmax);
        let shape = (0..=top)
            .map(|n| {
                if n < 2 {
                    return (0, 0, 1);
                }
                let (i, p) = pb
                    .primes
                    .iter()
                    .enumerate()
                    .find(|(_, &p)| n as u64 % p == 0)
                    .map(|(i, &p)| (i, p as usize))
                    .expect("prime list covers n");
                let mut e = 0;
                let mut q = 1;
                while n % (q * p) == 0 {
                    q *= p;
                    e += 1;
                }
                (i, e, q)
            })
            .collect();
        let allowed_set = pb.allowed.iter().map(|v| v.iter().copied().collect()).collect();
        let proj = pb
            .allowed
            .iter()
            .map(|v| {
                let mut xs: Vec<i64> = v.iter().map(|p| p.x).collect();
                let mut ys: Vec<i64> = v.iter().map(|p| p.y).collect();
                xs.sort_unstable();
                xs.dedup();
                ys.sort_unstable();
                ys.dedup();
                [xs, ys]
            })
            .collect();
        let mut e = Engine {
            pb,
            dm: from_i64(pb.d),
            constraints,
            fresh: Vec::new(),
            plans: Vec::new(),
            allowed_set,
            proj,
            shape,
        };
        e.analyse();
        e
    }

    /// Finds which coordinates each constraint depends on, and where they
    /// can be solved for jointly, by evaluating at random points.
    fn analyse(&mut self) {
        let n = self.constraints.len();
        let np = self.pb.primes.len();
        let mut rng = Lcg(0x5eed_0123_4567);
        let base: Vec<Elt> = (0..np).map(|_| (rng.next(), rng.next())).collect();
        let f0 = self.eval(&base, 0, n - 1).expect("generic point");
                let mut fresh = vec![Vec::new(); n];
        for q in 0..np {
            for c in 0..2 {
                let mut ap = base.clone();
                let v = rng.next();
                set_raw(&mut ap, (q, c), v);
                let f = self.eval(&ap, 0, n - 1).expect("generic point");
                if let Some(i) = (0..n).find(|&i| f[i] != f0[i]) {
                    fresh[i].push((q, c));
                }
            }
        }
        for f in &mut fresh {
            f.sort_unstable();
        }
        // both coordinates of the split prime are assigned up front
        let q0 = fresh[0][0].0;
        for f in &mut fresh {
            f.retain(|v| v.0 != q0);
        }
        fresh[0].splice(0..0, [(q0, 0), (q0, 1)]);
        self.fresh = fresh;
        let plans = (0..n)
            .map(|i| (0..self.fresh[i].len()).map(|k| self.plan(i, k, &base, &mut rng)).collect())
            .collect();
        self.plans = plans;
    }

    fn plan(&self, i: usize, k: usize, base: &[Elt], rng: &mut Lcg) -> Option<Plan> {
        let n = self.constraints.len();
        let mut vars: Vec<Var> = self.fresh[i][k..].to_vec();
        let mut to = i;
        while to + 1 - i < vars.len() {
            to += 1;
            if to == n || vars.len() > MAX_BLOCK {
                return None;
            }
            vars.extend(&self.fresh[to]);
        }
        if vars.len() > MAX_BLOCK {
            return None;
        }
        // affine in `vars` at a random point, with full rank
        let mut ap = base.to_vec();
        let f0 = self.eval(&ap, i, to)?;
        let mut cols = Vec::new();
        let mut comb = f0.clone();
        for &v in &vars {
            let old = ap[v.0];
            set_raw(&mut ap, v, addp(if v.1 == 0 { old.0 } else { old.1 }, 1));
            let f = self.eval(&ap, i, to)?;
            ap[v.0] = old;
            let col: Vec<u64> = f.iter().zip(&f0).map(|(a, b)| subp(*a, *b)).collect();
            cols.push(col);
        }
        let mut ap = base.to_vec();
        for (j, &v) in vars.iter().enumerate() {
            let r = rng.next();
            let old = if v.1 == 0 { ap[v.0].0 } else { ap[v.0].1 };
            set_raw(&mut ap, v, addp(old, r));
            for (c, x) in comb.iter_mut().zip(&cols[j]) {
                *c = addp(*c, mulp(r, *x));
            }
        }
        if self.eval(&ap, i, to)? != comb {
            return None;
        }
        let rhs = vec![0; to + 1 - i];
        match solve_linear(&cols, &rhs) {
            Solve::Solved(r) if r.pivots.len() == vars.len() => Some(Plan { to, vars }),
            _ => None,
        }
    }

    fn mul(&self, a: Elt, b: Elt) -> Elt {
        let u = addp(mulp(a.0, b.0), mulp(self.dm, mulp(a.1, b.1)));
        let v = addp(mulp(a.0, b.1), mulp(a.1, b.0));
        (u, v)
    }

    fn coefficients(&self, ap: &[Elt], nmax: usize) -> Vec<Elt> {
        let mut a = vec![(0, 0); nmax + 1];
        a[1] = (1, 0);
        for n in 2..=nmax {
            let (i, e, q) = self.shape[n];
            if q != n {
                a[n] = self.mul(a[q], a[n / q]);
                continue;
            }
            let p = self.pb.primes[i];
            a[n] = if e == 1 {
                ap[i]
            } else {
                let eps = match p {
                    2 => self.pb.eps2,
                    3 => self.pb.eps3,
                    _ => unreachable!("prime squares above the precision"),
                };
                let p = p as usize;
                let t = self.mul(eps, a[n / p / p]);
                let pm = from_i64(p as i64);
                let t = (mulp(t.0, pm), mulp(t.1, pm));
                let s = self.mul(ap[i], a[n / p]);
                (subp(s.0, t.0), subp(s.1, t.1))
            };
        }
        a
    }

    /// Values of the constraints `from..=to`, or `None` when `a_{n0}` is
    /// rational modulo `P61`.
    fn eval(&self, ap: &[Elt], from: usize, to: usize) -> Option<Vec<u64>> {
        let n0 = self.pb.n0;
        let nmax = self.constraints[to].nmax;
        let a = self.coefficients(ap, nmax);
        let c = a[n0].1;
        let ci = invp(c)?;
        let len = nmax - n0 + 1;
        let vmul: Vec<u64> = (0..len).map(|j| mulp(a[n0 + j].1, ci)).collect();
        // x = U / V with V(0) = 1
        let mut x = vec![0u64; len];
        for j in 0..len {
            let mut s = a[j + 1].0;
            for i in 1..=j {
                s = subp(s, mulp(vmul[i], x[j - i]));
            }
            x[j] = s;
        }
        let vx = 1 - n0 as i64;
        let k = invp(from_i64(vx)).expect("n0 > 1");
        let dx: Vec<u64> = (0..len).map(|j| mulp(mulp(from_i64(vx + j as i64), x[j]), k)).collect();
        let mut y = vec![0u64; len];
        for j in 0..len {
            let mut s = dx[j];
            for i in 1..=j {
                s = subp(s, mulp(vmul[i], y[j - i]));
            }
            y[j] = s;
        }
        let y2 = sq(&y);
        let deg = if n0 == 2 { 6 } else { 5 };
        let mut pw = vec![vec![0u64; len]; deg + 1];
        pw[0][0] = 1;
        pw[1] = x.clone();
        for e in 2..=deg {
            pw[e] = mul_series(&pw[e - 1], &x);
        }
        let vy = vx - n0 as i64;
        let omax = self.constraints[to].order;
        let mut coef: Vec<Option<u64>> = vec![None; deg + 1];
        let mut out = Vec::with_capacity(to + 1 - from);
        let mut next = 0;
        for o in 2 * vy..=omax {
            let idx = (o - 2 * vy) as usize;
            let mut cur = y2[idx];
            for (e, ce) in coef.iter().enumerate() {
                if let Some(ce) = ce {
                    let j = o - e as i64 * vx;
                    if j >= 0 {
                        cur = subp(cur, mulp(*ce, pw[e][j as usize]));
                    }
                }
            }
            if o <= 0 && o % vx == 0 {
                coef[(o / vx) as usize] = Some(cur);
                continue;
            }
            while next < self.constraints.len() && self.constraints[next].order < o {
                next += 1;
            }
            if next >= from && next <= to && self.constraints[next].order == o {
                out.push(cur);
            }
        }
        Some(out)
    }

    /// Index of the prime whose values are split among workers.
    pub fn first_prime(&self) -> usize {
        self.fresh[0][0].0
    }

    /// All assignments passing every constraint with the first prime fixed to
    /// `top`.
    pub fn run(&self, top: Pair) -> Vec<Vec<Pair>> {
        let np = self.pb.primes.len();
        let mut st = State { vals: vec![[None; 2]; np], ap: vec![(0, 0); np] };
        let q = self.first_prime();
        st.set((q, 0), top.x);
        st.set((q, 1), top.y);
        let mut out = Vec::new();
        self.step(0, 2, &mut st, &mut out);
        out
    }

    /// Values the coordinate `v` may take given what is assigned.
    fn candidates(&self, st: &State, (q, c): Var) -> Vec<i64> {
        match st.vals[q][1 - c] {
            Some(o) => self.pb.allowed[q]
                .iter()
                .filter(|p| if c == 0 { p.y == o } else { p.x == o })
                .map(|p| if c == 0 { p.x } else { p.y })
                .collect(),
            None => self.proj[q][c].clone(),
        }
    }

    fn admissible(&self, st: &State, (q, c): Var) -> bool {
        match st.vals[q] {
            [Some(x), Some(y)] => self.allowed_set[q].contains(&Pair { x, y }),
            v => v[c].is_some_and(|t| self.proj[q][c].binary_search(&t).is_ok()),
        }
    }

    /// Continues at constraint `i` with `fresh[i][..k]` assigned.
    fn step(&self, i: usize, k: usize, st: &mut State, out: &mut Vec<Vec<Pair>>) {
        let n = self.constraints.len();
        if i == n {
            self.leaf(0, st, out);
            return;
        }
        if k == self.fresh[i].len() {
            if self.eval(&st.ap, i, i).is_some_and(|v| v[0] == 0) {
                self.step(i + 1, 0, st, out);
            }
            return;
        }
        if let Some(plan) = &self.plans[i][k] {
            match self.block_solve(i, plan, st) {
                Solve::Solved(r) => {
                    let free: Vec<usize> = (0..plan.vars.len()).filter(|j| !r.pivots.contains(j)).collect();
                    self.assign_free(plan, &r, &free, st, out);
                    return;
                }
                Solve::Inconsistent => return,
                Solve::Failed => {}
            }
        }
        let v = self.fresh[i][k];
        for t in self.candidates(st, v) {
            st.set(v, t);
            if self.admissible(st, v) {
                self.step(i, k + 1, st, out);
            }
        }
        st.clear(v);
    }

    /// Coordinates entering no constraint are free; every admissible value
    /// is reported.
    fn leaf(&self, q: usize, st: &mut State, out: &mut Vec<Vec<Pair>>) {
        if q == self.pb.primes.len() {
            out.push(st.vals.iter().map(|v| Pair { x: v[0].expect("assigned"), y: v[1].expect("assigned") }).collect());
            return;
        }
        let saved = st.vals[q];
        for c in 0..2 {
            if saved[c].is_none() {
                for t in self.candidates(st, (q, c)) {
                    st.set((q, c), t);
                    self.leaf(q, st, out);
                }
                st.clear((q, c));
                return;
            }
        }
        self.leaf(q + 1, st, out);
    }

    /// Enumerates the coordinates left free by a rank-deficient block, then
    /// sets the others from the reduced system.
    fn assign_free(&self, plan: &Plan, r: &Rref, free: &[usize], st: &mut State, out: &mut Vec<Vec<Pair>>) {
        if let Some((&j, rest)) = free.split_first() {
            let v = plan.vars[j];
            for t in self.candidates(st, v) {
                st.set(v, t);
                if self.admissible(st, v) {
                    self.assign_free(plan, r, rest, st, out);
                }
            }
            st.clear(v);
            return;
        }
        let nv = plan.vars.len();
        let mut ok = true;
        for (row, &pc) in r.rows.iter().zip(&r.pivots) {
            let mut z = row[nv];
            for j in (0..nv).filter(|j| !r.pivots.contains(j)) {
                let v = plan.vars[j];
                let zj = if v.1 == 0 { st.ap[v.0].0 } else { st.ap[v.0].1 };
                z = subp(z, mulp(row[j], zj));
            }
            match doubled(z) {
                Some(t) => st.set(plan.vars[pc], t),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && r.pivots.iter().all(|&pc| self.admissible(st, plan.vars[pc])) {
            self.step(plan.to + 1, 0, st, out);
        }
        for &pc in &r.pivots {
            st.clear(plan.vars[pc]);
        }
    }

    fn block_solve(&self, i: usize, plan: &Plan, st: &mut State) -> Solve {
        let mut ap = st.ap.clone();
        for &v in &plan.vars {
            set_raw(&mut ap, v, 0);
        }
        let Some(f0) = self.eval(&ap, i, plan.to) else {
            return Solve::Failed;
        };
        let mut cols = Vec::with_capacity(plan.vars.len());
        for &v in &plan.vars {
            set_raw(&mut ap, v, 1);
            let Some(f) = self.eval(&ap, i, plan.to) else {
                return Solve::Failed;
            };
            set_raw(&mut ap, v, 0);
            cols.push(f.iter().zip(&f0).map(|(a, b)| subp(*a, *b)).collect());
        }
        let rhs: Vec<u64> = f0.iter().map(|&b| subp(0, b)).collect();
        solve_linear(&cols, &rhs)
    }
}

enum Solve {
    Solved(Rref),
    Inconsistent,
    /// The constraints could not be evaluated.
    Failed,
}

/// A consistent linear system in reduced row echelon form: row `r` reads
/// `z[pivots[r]] + sum_j rows[r][j] z[j] = rows[r][nv]` over the non-pivot `j`.
struct Rref {
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

/// Solves `sum_j z_j cols[j] = rhs` modulo `P61`.
fn solve_linear(cols: &[Vec<u64>], rhs: &[u64]) -> Solve {
    let nv = cols.len();
    let ne = rhs.len();
    let mut m: Vec<Vec<u64>> = (0..ne).map(|r| cols.iter().map(|c| c[r]).chain([rhs[r]]).collect()).collect();
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..nv {
        let Some(pr) = (row..ne).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = invp(m[row][col]).expect("nonzero pivot");
        for e in m[row].iter_mut() {
            *e = mulp(*e, inv);
        }
        for r in 0..ne {
            if r != row && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..=nv {
                    let t = mulp(f, m[row][c]);
                    m[r][c] = subp(m[r][c], t);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| r[nv] != 0) {
        return Solve::Inconsistent;
    }
    m.truncate(row);
    Solve::Solved(Rref { pivots, rows: m })
}

fn mul_series(a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().min(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..n - i {
            out[i + j] = addp(out[i + j], mulp(a[i], b[j]));
        }
    }
    out
}

fn sq(a: &[u64]) -> Vec<u64> {
    mul_series(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mersenne_reduction() {
        let a = P61 - 3;
        let b = P61 - 5;
        assert_eq!(mulp(a, b), ((a as u128 * b as u128) % P61 as u128) as u64);
        assert_eq!(mulp(invp(12345).unwrap(), 12345), 1);
        assert_eq!(doubled(half(-7)), Some(-7));
    }

    #[test]
    fn linear_systems() {
        let f = from_i64;
        // x + 2y = 5, 3x - y = 1
        let cols = vec![vec![1, 3], vec![2, f(-1)]];
        match solve_linear(&cols, &[5, 1]) {
            Solve::Solved(r) => {
                assert_eq!(r.pivots, vec![0, 1]);
                assert_eq!((r.rows[0][2], r.rows[1][2]), (1, 2));
            }
            _ => panic!("expected a unique solution"),
        }
        let cols = vec![vec![1, 2], vec![2, 4]];
        assert!(matches!(solve_linear(&cols, &[1, 3]), Solve::Inconsistent));
        match solve_linear(&cols, &[1, 2]) {
            Solve::Solved(r) => assert_eq!(r.pivots, vec![0]),
            _ => panic!("expected a line of solutions"),
        }
    }
}
