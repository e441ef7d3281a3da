mod common;

use common::displays::*;

use std::sync::{Arc, OnceLock};

use multiscale::coeff::{CoeffElement, CoeffField, FieldExt, ModelParams};
use multiscale::compat::{problem_from_report, solve_compatibility, verdict, Level, LinearForm, Verdict};
use multiscale::diffpoly::FieldSymbol;
use multiscale::reduction::{run_reduction, ReductionReport};

fn report(s: u8) -> &'static ReductionReport {
    static R: [OnceLock<ReductionReport>; 2] = [OnceLock::new(), OnceLock::new()];
    R[s as usize].get_or_init(|| run_reduction(ModelParams::new(s), 9).unwrap())
}

fn coeffs(form: &LinearForm, names: &[String], f: &Arc<CoeffField>) -> Vec<CoeffElement> {
    names.iter().map(|n| form.terms.iter().find(|(m, _)| m == n).map_or_else(|| f.zero(), |(_, c)| c.clone())).collect()
}

#[test]
fn order_seven_relations_match_the_published_system() {
    for s in [0, 1] {
        let r = report(s);
        let k = known(r);
        let f = &k.f;
        let p = problem_from_report(r, Level::Seven, true).unwrap();
        let rep = solve_compatibility(&p).unwrap();
        assert!(rep.constraints.is_empty(), "s={s}: {:?}", rep.constraints);
        assert!(rep.undetermined.is_empty());
        assert_eq!(rep.solved.len(), 6);

        let expected = order_seven_relations(&k);
        let names: Vec<String> = ["a1", "a2", "a3"].map(String::from).to_vec();
        for (i, want) in expected.iter().enumerate() {
            let name = format!("b{}", i + 1);
            let form = rep.solved.iter().find(|g| g.name == name).unwrap();
            assert_eq!(&coeffs(form, &names, f), want, "s={s} {name}");
        }

        let (v, w) = verdict(r, Level::Seven).unwrap();
        assert_eq!(v, Verdict::Pass);
        assert!(w.is_none());
    }
}

#[test]
fn order_nine_potential_constraints_match_the_display() {
    let r = report(1);
    let k = known(r);
    let problem = problem_from_report(r, Level::Nine, true).unwrap();
    let rep = solve_compatibility(&problem).unwrap();
    assert_eq!(rep.solved.len(), 24);
    assert!(rep.undetermined.is_empty());
    assert_eq!(rep.constraints.len(), 3);
    let names: Vec<String> = problem.known.iter().map(|l| l.name.clone()).collect();

    let paper = potential_relations(&names, &k);
    let (a2, i2) = (&k.a2, k.al2.inv().unwrap());
    let c7 = &rep.constraints.iter().find(|c| c.name == "c7").unwrap().terms;
    assert_eq!(c7.len(), 1);
    assert_eq!(c7[0], ("c11".to_string(), a2 * &i2));
    same_relations(rep.constraint_rows.clone(), paper, &[5, 6, 9]).unwrap();
}

#[test]
fn order_nine_density_constraints_match_the_display() {
    let r = report(0);
    assert!(r.nonlocal.is_some());
    let k = known(r);
    let problem = problem_from_report(r, Level::Nine, true).unwrap();
    let rep = solve_compatibility(&problem).unwrap();
    assert_eq!(rep.solved.len(), 31);
    assert!(rep.undetermined.is_empty());
    assert_eq!(rep.constraints.len(), 5);
    let names: Vec<String> = problem.known.iter().map(|l| l.name.clone()).collect();

    let paper = density_relations(&names, &k);
    let (a1, i2) = (&k.a1, k.al2.inv().unwrap());
    let d13 = &rep.constraints.iter().find(|c| c.name == "d13").unwrap().terms;
    assert_eq!(d13, &vec![("d14".to_string(), &(&k.f.int(3) * a1) * &i2)]);
    same_relations(rep.constraint_rows.clone(), paper, &[6, 7, 10, 11, 12]).unwrap();
}

#[test]
fn order_nine_verdicts() {
    let (v1, w1) = verdict(report(1), Level::Nine).unwrap();
    assert_eq!(v1, Verdict::Pass);
    assert!(w1.is_none());
    let (v0, w0) = verdict(report(0), Level::Nine).unwrap();
    assert_eq!(v0, Verdict::Fail);
    let w = w0.unwrap();
    assert_eq!(w.constraint, "d7");
    assert_ne!(w.lhs, w.rhs);
}

#[test]
fn solved_ansatz_cancels_the_residual() {
    let r = report(1);
    let problem = problem_from_report(r, Level::Nine, false).unwrap();
    let rep = solve_compatibility(&problem).unwrap();
    let vals = problem.known_values.clone().unwrap();
    let ansatz = rep.evaluate_solved(&problem, &vals).unwrap();
    assert!(problem.residual(&vals, &ansatz).unwrap().is_zero());

    let p7 = problem_from_report(r, Level::Seven, false).unwrap();
    let rep7 = solve_compatibility(&p7).unwrap();
    let vals7 = p7.known_values.clone().unwrap();
    let b = rep7.evaluate_solved(&p7, &vals7).unwrap();
    assert!(p7.residual(&vals7, &b).unwrap().is_zero());
    let fb = r.forcing(FieldSymbol::phi(2), 3).unwrap();
    assert_eq!(b, fb.values);
}

#[test]
fn failing_system_leaves_a_residual() {
    let r = report(0);
    let problem = problem_from_report(r, Level::Nine, false).unwrap();
    let rep = solve_compatibility(&problem).unwrap();
    let vals = problem.known_values.clone().unwrap();
    let ansatz = rep.evaluate_solved(&problem, &vals).unwrap();
    assert!(!problem.residual(&vals, &ansatz).unwrap().is_zero());
}

#[test]
fn perturbed_coefficient_flips_the_verdict() {
    let r = report(1);
    let mut problem = problem_from_report(r, Level::Nine, false).unwrap();
    let f = r.field.clone();
    let vals = problem.known_values.as_mut().unwrap();
    vals[9] = &vals[9] + &f.rational(1, 1000);
    let rep = solve_compatibility(&problem).unwrap();
    assert_eq!(rep.verdict, Some(Verdict::Fail));
    assert_eq!(rep.witness.unwrap().constraint, "c10");
}

#[test]
fn unsupported_level() {
    assert!(Level::from_order(8).is_err());
    assert_eq!(Level::from_order(9).unwrap().order(), 9);
}
