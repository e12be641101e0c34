use num_traits::Zero;
use modcurves::arith::{QPoly, QuadRat};
use modcurves::collector::Solution;
use modcurves::hyperelliptic::{clebsch_r, has_extra_involution, GenusTwoCurve};
use modcurves::ingest::{bundled_tables, find_row, CoefficientSource};
use modcurves::pipeline::*;

fn row_solution(label: &str) -> Solution {
    let rows = bundled_tables();
    Solution::from_row(find_row(&rows, label).unwrap()).unwrap()
}

#[test]
fn rational_involution_is_caught_by_sieve3() {
    let mut s = row_solution("C_63");
    s.p = QPoly::from_ints(&[-1, 0, 0, 0, 0, 0, 1]);
    match check_stage(Stage::Sieve3, &s, &ConductorTable::default()) {
        Decision::Reject(_, note) => assert!(note.contains("rational involution"), "{note}"),
        d => panic!("expected a rejection, got {d:?}"),
    }
}

#[test]
fn table_rows_survive_their_branch() {
    let conductors = ConductorTable::bundled();
    let twist: Vec<Solution> = ["C_63", "C_28", "C_40"].iter().map(|l| row_solution(l)).collect();
    let (report, survivors) = run_sieves(&twist, Branch::Twist, &conductors);
    assert_eq!(survivors.len(), 3, "{}", report.to_tsv());
    assert_eq!(report.trajectory(), vec![3; 8]);
    let plain = vec![row_solution("C_23")];
    let (report, survivors) = run_sieves(&plain, Branch::NoTwist, &conductors);
    assert_eq!(survivors.len(), 1, "{}", report.to_tsv());
}

#[test]
fn missing_conductor_is_flagged() {
    let s = row_solution("C_63");
    let (report, survivors) = run_sieves(&[s], Branch::Twist, &ConductorTable::default());
    assert_eq!(survivors.len(), 1);
    assert_eq!(report.audit.len(), 1);
    assert_eq!(report.audit[0].stage, Stage::Sieve5);
    assert!(report.to_tsv().contains("audit\t0\tsieve5\tflagged"));
}

#[test]
fn duplicates_collapse_in_sieve6() {
    let s = row_solution("C_63");
    let (report, survivors) = run_sieves(&[s.clone(), s], Branch::Twist, &ConductorTable::bundled());
    assert_eq!(survivors.len(), 1);
    assert_eq!(report.survivors_after(Stage::Sieve5), Some(2));
}

#[test]
fn wrong_frobenius_fails_sieve4() {
    let mut s = row_solution("C_63");
    let a5 = s.ap[&5].clone();
    s.ap.insert(5, -a5.clone() + QuadRat::from_int(1));
    assert!(matches!(check_stage(Stage::Sieve4, &s, &ConductorTable::default()), Decision::Reject(Some(5), _)));
}

#[test]
fn levels_from_odd_conductor() {
    let c63 = level_search(&row_solution("C_63"), 63).unwrap();
    assert_eq!(c63.iter().map(|c| c.level).collect::<Vec<_>>(), vec![63]);
    let c40 = level_search(&row_solution("C_40"), 5).unwrap();
    assert!(c40.iter().any(|c| c.level == 40));
    assert!(level_search(&row_solution("C_63"), 64).is_err());
}

#[test]
fn newforms_are_matched() {
    let src = CoefficientSource::Bundled;
    for (label, m, want) in [("C_63", 63, "f_63"), ("C_7424,A", 29, "f_7424,A"), ("C_23", 23, "f_23")] {
        let s = row_solution(label);
        let cands = level_search(&s, m).unwrap();
        let (hit, _) = match_newform(&s, &cands, &src);
        assert_eq!(hit.expect(label).record.label, want);
        let c = s.conjugate().unwrap();
        let (hit, _) = match_newform(&c, &level_search(&c, m).unwrap(), &src);
        assert!(hit.expect(label).conjugated);
    }
    let mut bad = row_solution("C_63");
    bad.ap.insert(7, QuadRat::from_int(-1));
    let cands = level_search(&bad, 63).unwrap();
    assert!(match_newform(&bad, &cands, &src).0.is_none());
}

#[test]
fn clebsch_r_detects_involutions() {
    let mut curves: Vec<GenusTwoCurve> = bundled_tables().iter().map(|r| r.curve().unwrap()).collect();
    curves.push(GenusTwoCurve::from_ints(&[1, 0, 3, 0, -2, 0, 1]).unwrap());
    curves.push(GenusTwoCurve::from_ints(&[1, 1, 0, 0, 0, 1]).unwrap());
    curves.push(GenusTwoCurve::from_ints(&[0, -1, 3, 2, -3, 1]).unwrap());
    for c in &curves {
        assert_eq!(clebsch_r(c).is_zero(), has_extra_involution(c).exists(), "{:?}", c.coeffs());
    }
}
