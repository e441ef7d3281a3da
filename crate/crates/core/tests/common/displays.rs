//! Published displays rebuilt term by term from the closed-form coefficients.

use std::sync::Arc;

use multiscale::coeff::{CoeffElement, CoeffField, FieldExt};
use multiscale::diffpoly::{DiffPolynomial, FieldSymbol, Grading};
use multiscale::hierarchy::HierarchyContext;
use multiscale::linsolve::rref;
use multiscale::reduction::ReductionReport;

use super::{alpha1, alpha2, alpha6, field, phi, poly, varphi};

pub fn ctx(s: u8) -> HierarchyContext {
    let f = field(s);
    HierarchyContext::new(alpha1(&f), alpha2(&f), Grading::Potential)
        .unwrap()
        .with_beta(3, alpha6(&f))
        .with_beta(4, &f.h() + &f.rational(2, 7))
}

/// `k = alpha2 / (3 alpha1)`.
pub fn k_of(ctx: &HierarchyContext) -> CoeffElement {
    ctx.alpha2.checked_div(&(&ctx.alpha1 * &ctx.alpha1.field().int(3))).unwrap()
}

pub fn k2(c: &HierarchyContext) -> DiffPolynomial {
    poly(&[(c.alpha1.clone(), &[phi(1, 3)]), (c.alpha2.clone(), &[phi(1, 1), phi(1, 1)])])
}

/// `beta3 { d5 + 5k [ 2k (d phi)^3 + (d2 phi)^2 + 2 dphi d3phi ] }`.
pub fn k3(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    let b = c.betas[&3].clone();
    let kp = k_of(c);
    let five_kp = &f.int(5) * &kp;
    poly(&[
        (b.clone(), &[phi(1, 5)]),
        (&b * &(&five_kp * &(&f.int(2) * &kp)), &[phi(1, 1), phi(1, 1), phi(1, 1)]),
        (&b * &five_kp, &[phi(1, 2), phi(1, 2)]),
        (&b * &(&five_kp * &f.int(2)), &[phi(1, 1), phi(1, 3)]),
    ])
}

pub fn k2_lin(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    poly(&[(c.alpha1.clone(), &[phi(2, 3)]), (&c.alpha2 * &f.int(2), &[phi(1, 1), phi(2, 1)])])
}

pub fn k3_lin(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    let b = c.betas[&3].clone();
    let ten_k = &f.int(10) * &k_of(c);
    let three_k = &f.int(3) * &k_of(c);
    poly(&[
        (b.clone(), &[phi(2, 5)]),
        (&b * &ten_k, &[phi(1, 1), phi(2, 3)]),
        (&b * &ten_k, &[phi(1, 2), phi(2, 2)]),
        (&b * &(&ten_k * &three_k), &[phi(1, 1), phi(1, 1), phi(2, 1)]),
        (&b * &ten_k, &[phi(1, 3), phi(2, 1)]),
    ])
}

pub fn h2(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    poly(&[(c.alpha1.clone(), &[varphi(1, 3)]), (&c.alpha2 * &f.int(2), &[varphi(1, 0), varphi(1, 1)])])
}

pub fn h3(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    let b = c.betas[&3].clone();
    let ten_k = &f.int(10) * &k_of(c);
    let three_k = &f.int(3) * &k_of(c);
    poly(&[
        (b.clone(), &[varphi(1, 5)]),
        (&b * &(&ten_k * &three_k), &[varphi(1, 0), varphi(1, 0), varphi(1, 1)]),
        (&b * &(&ten_k * &f.int(2)), &[varphi(1, 1), varphi(1, 2)]),
        (&b * &ten_k, &[varphi(1, 0), varphi(1, 3)]),
    ])
}

pub fn h2_lin(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    poly(&[
        (c.alpha1.clone(), &[varphi(2, 3)]),
        (&c.alpha2 * &f.int(2), &[varphi(2, 0), varphi(1, 1)]),
        (&c.alpha2 * &f.int(2), &[varphi(1, 0), varphi(2, 1)]),
    ])
}

pub fn h3_lin(c: &HierarchyContext) -> DiffPolynomial {
    let f = c.alpha1.field().clone();
    let b = c.betas[&3].clone();
    let ten_k = &f.int(10) * &k_of(c);
    let three_k = &f.int(3) * &k_of(c);
    poly(&[
        (b.clone(), &[varphi(2, 5)]),
        (&b * &ten_k, &[varphi(1, 0), varphi(2, 3)]),
        (&b * &(&ten_k * &f.int(2)), &[varphi(1, 1), varphi(2, 2)]),
        (&b * &(&ten_k * &f.int(2)), &[varphi(1, 2), varphi(2, 1)]),
        (&b * &(&ten_k * &three_k), &[varphi(1, 0), varphi(1, 0), varphi(2, 1)]),
        (&b * &(&ten_k * &(&three_k * &f.int(2))), &[varphi(1, 0), varphi(1, 1), varphi(2, 0)]),
        (&b * &ten_k, &[varphi(1, 3), varphi(2, 0)]),
    ])
}

pub fn unit_field(f: &Arc<CoeffField>, symbol: FieldSymbol) -> DiffPolynomial {
    DiffPolynomial::atom(f.one(), symbol, 0)
}

/// Engine-side quantities the published relations are written in.
pub struct Known {
    pub f: Arc<CoeffField>,
    pub a1: CoeffElement,
    pub a2: CoeffElement,
    pub a3: CoeffElement,
    pub al1: CoeffElement,
    pub al2: CoeffElement,
    pub b3: CoeffElement,
}

pub fn known(r: &ReductionReport) -> Known {
    let f2 = r.forcing(FieldSymbol::phi(2), 2).unwrap();
    Known {
        f: r.field.clone(),
        a1: f2.value("a1").unwrap().clone(),
        a2: f2.value("a2").unwrap().clone(),
        a3: f2.value("a3").unwrap().clone(),
        al1: r.alphas[&1].clone(),
        al2: r.alphas[&2].clone(),
        b3: r.betas[&3].clone(),
    }
}

fn q(f: &Arc<CoeffField>, n: i64, d: i64) -> CoeffElement {
    f.rational(n, d)
}

/// Coefficients of `a1, a2, a3` in `b1 ... b6`.
pub fn order_seven_relations(k: &Known) -> Vec<Vec<CoeffElement>> {
    let f = &k.f;
    let (a1, a2, b3) = (&k.al1, &k.al2, &k.b3);
    let five_b3 = &q(f, 5, 1) * b3;
    let x = &five_b3 * &a1.inv().unwrap();
    let y = &(&five_b3 * a2) * &a1.pow(2).inv().unwrap();
    let z = &(&(&five_b3 * a2) * a2) * &a1.pow(3).inv().unwrap();
    let zero = f.zero();
    vec![
        vec![x.clone(), &y * &q(f, 2, 9), &y * &q(f, 6, 9)],
        vec![zero.clone(), &x * &q(f, 1, 3), zero.clone()],
        vec![zero.clone(), &x * &q(f, 1, 3), &x * &q(f, 2, 3)],
        vec![&y * &q(f, 1, 2), -(&z * &q(f, 1, 54)), zero.clone()],
        vec![x.clone(), &y * &q(f, 5, 9), zero.clone()],
        vec![zero.clone(), &x * &q(f, 1, 3), &x * &q(f, 1, 3)],
    ]
}

/// Row `pivot - sum coeff * other` over `names`.
pub fn row(names: &[String], f: &Arc<CoeffField>, pivot: &str, rhs: &[(&str, CoeffElement)]) -> Vec<CoeffElement> {
    let mut out = vec![f.zero(); names.len()];
    out[names.iter().position(|n| n == pivot).unwrap()] = f.one();
    for (n, c) in rhs {
        let i = names.iter().position(|m| m == n).unwrap();
        out[i] = &out[i] - c;
    }
    out
}

pub fn potential_relations(names: &[String], k: &Known) -> Vec<Vec<CoeffElement>> {
    let f = &k.f;
    let (a1, a2, a3, al1, al2) = (&k.a1, &k.a2, &k.a3, &k.al1, &k.al2);
    let i1 = al1.inv().unwrap();
    let i12 = i1.pow(2);
    let i2 = al2.inv().unwrap();
    let i = |n: i64| f.int(n);
    let c11 = &(&(&(&(&i(27) * a1) * &(a2 + &(&i(4) * a3))) * al1)
        - &(&(&(&(&i(37) * &a2.pow(2)) + &(&(&i(46) * a2) * a3)) + &(&i(12) * &a3.pow(2))) * al2))
        * &(&(&i12 * &i2) * &q(f, 1, 108));
    let c8 = &(&(&(&(&i(17) * a2) + &(&i(18) * a3)) * al2) - &(&(&i(27) * a1) * al1)) * &(&i12 * &q(f, 1, 108));
    let c9 = &(&(&(&(&i(3) * a2) - &(&i(8) * a3)) * al2) - &(&(&i(3) * a1) * al1)) * &(&i12 * &q(f, 1, 36));
    let sq = &(&al2.pow(2) * &i12) * &q(f, 1, 54);
    let lin = &(al2 * &i1) * &q(f, 1, 18);
    vec![
        row(
            names,
            f,
            "c6",
            &[
                ("c11", c11),
                ("c8", c8),
                ("c9", c9),
                ("c2", &i(18) * &sq),
                ("c1", &i(-24) * &sq),
                ("c3", &i(-55) * &sq),
                ("c5", &i(13) * &lin),
                ("c4", &i(-3) * &lin),
            ],
        ),
        row(names, f, "c7", &[("c11", a2 * &i2)]),
        row(names, f, "c10", &[("c11", &(&i(3) * a1) * &i2)]),
    ]
}

pub fn density_relations(names: &[String], k: &Known) -> Vec<Vec<CoeffElement>> {
    let f = &k.f;
    let (a1, a2, a3, al1, al2) = (&k.a1, &k.a2, &k.a3, &k.al1, &k.al2);
    let i1 = al1.inv().unwrap();
    let i12 = i1.pow(2);
    let i2 = al2.inv().unwrap();
    let i = |n: i64| f.int(n);
    let d14 = &(&(&(&(&i(9) * a1) * &(&(&i(12) * a3) + &(&i(5) * a2))) * al1)
        - &(&(&(&(&i(45) * &a2.pow(2)) + &(&(&i(88) * a2) * a3)) + &(&i(12) * &a3.pow(2))) * al2))
        * &(&(&i12 * &i2) * &q(f, 1, 54));
    let d10 = &(&(&(&(&i(3) * a2) - &(&i(8) * a3)) * al2) - &(&(&i(3) * a1) * al1)) * &(&i12 * &q(f, 1, 9));
    let d9 = &(&(&(&(&i(21) * a3) + &(&i(4) * a2)) * al2) - &(&(&i(9) * a1) * al1)) * &(&i12 * &q(f, 2, 27));
    let lin = &(al2 * &i1) * &q(f, 1, 9);
    let sq = &(&al2.pow(2) * &i12) * &q(f, -2, 27);
    let half = &(a2 * &i2) * &q(f, 1, 2);
    vec![
        row(
            names,
            f,
            "d7",
            &[
                ("d14", d14),
                ("d10", d10),
                ("d9", d9),
                ("d5", &i(9) * &lin),
                ("d6", &i(8) * &lin),
                ("d4", &i(-24) * &lin),
                ("d1", &i(12) * &sq),
                ("d2", &i(-30) * &sq),
                ("d3", &i(85) * &sq),
            ],
        ),
        row(names, f, "d8", &[("d14", half.clone())]),
        row(names, f, "d11", &[("d10", f.one()), ("d9", -f.one()), ("d14", half)]),
        row(names, f, "d12", &[("d14", &(&q(f, 3, 2) * a1) * &i2)]),
        row(names, f, "d13", &[("d14", &(&i(3) * a1) * &i2)]),
    ]
}

/// Compare two relation systems after bringing both to the same reduced echelon form.
pub fn same_relations(engine: Vec<Vec<CoeffElement>>, paper: Vec<Vec<CoeffElement>>, pivots: &[usize]) -> Result<(), String> {
    let n = engine[0].len();
    let mut order = pivots.to_vec();
    order.extend((0..n).rev().filter(|i| !pivots.contains(i)));
    let (e, ep) = rref(engine, &order).map_err(|e| e.to_string())?;
    let (p, pp) = rref(paper, &order).map_err(|e| e.to_string())?;
    if ep != pp {
        return Err(format!("pivots differ: {ep:?} vs {pp:?}"));
    }
    for (i, (a, b)) in e.iter().zip(&p).enumerate() {
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            if x != y {
                return Err(format!("relation {i}, column {j}: engine {x} vs display {y}"));
            }
        }
    }
    Ok(())
}
