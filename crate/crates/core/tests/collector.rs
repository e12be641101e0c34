use modcurves::collector::*;
use modcurves::ingest::{bundled_tables, find_row};
use modcurves::arith::QPoly;

fn sextics(d: i64) -> Vec<Solution> {
    collect(&cells_for(d, Twist::None, 2))
}

#[test]
fn sextic_counts_without_twist() {
    let s3 = sextics(3);
    assert_eq!(s3.len(), 7);
    let c63 = QPoly::from_ints(&[-27, 0, 0, -26, 0, 0, 1]);
    assert!(s3.iter().any(|s| s.p == c63), "x^6 - 26x^3 - 27 missing");
    assert_eq!(sextics(5).len(), 28);
}

#[test]
fn empty_cells() {
    for d in [10, 33, 37, 41] {
        let n: usize = cells_for(d, Twist::None, 3).iter().map(|c| search(c, c.default_m()).len()).sum();
        assert_eq!(n, 0, "d = {d}");
    }
}

#[test]
fn rows_are_found_in_their_cells() {
    let rows = bundled_tables();
    for label in ["C_63", "C_28", "C_40", "C_23"] {
        let row = find_row(&rows, label).unwrap();
        let nf = row.newform().unwrap().spec.with_level(row.level);
        let twist = match (row.table, row.eps.as_str()) {
            (2, _) => Twist::None,
            (_, "1") => Twist::Order(1),
            _ => Twist::Order(nf.character.order().unwrap()),
        };
        let n0 = nf.n0().unwrap() as u32;
        let e2 = nf.eps(2).unwrap();
        let e3 = nf.eps(3).unwrap();
        let hit = cells_for(row.d, twist, n0)
            .iter()
            .filter(|c| (c.eps2 == e2 && c.eps3 == e3) || (c.eps2 == e2.conjugate() && c.eps3 == e3.conjugate()))
            .flat_map(|c| search(c, c.default_m()))
            .any(|s| {
                let same = row.ap.iter().all(|(p, a)| s.ap.get(p) == Some(a));
                let conj = row.ap.iter().all(|(p, a)| s.ap.get(p) == Some(&a.conjugate()));
                same || conj
            });
        assert!(hit, "{label} not re-emitted");
    }
}

#[test]
fn solutions_refit_and_round_trip() {
    for s in sextics(3) {
        assert_eq!(s.fit().unwrap().p, s.p);
        let line = s.to_string();
        let back = Solution::parse(&line, 1).unwrap();
        assert_eq!(back.to_string(), line);
        let c = s.conjugate().unwrap();
        assert_eq!(c.conjugate().unwrap().key(), s.key());
    }
}
