//! Jet kernel verification: every partial to order 3 against
//! Richardson-extrapolated finite differences on random composed
//! expressions, exact symmetry of mixed partials, and the order-slice
//! property.

use frg_core::fdcheck;
use frg_core::jet::{Jet, JetSpace};
use frg_core::scalar::Scalar;
use frg_core::{DomainError, FrError};
use proptest::prelude::*;

fn seed_all(space: JetSpace, v: &[f64]) -> Vec<Jet<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| space.seed(x, i).unwrap())
        .collect()
}

/// A random smooth composed expression over n inputs, guaranteed
/// domain-safe on [-2, 2]^n (arguments of sqrt/log are shifted positive).
fn random_program(seed: u64, n: usize) -> impl Fn(&[Jet<f64>]) -> Jet<f64> + Clone {
    #[derive(Clone, Copy)]
    enum Node {
        Add(usize, usize),
        Mul(usize, usize),
        Sub(usize, usize),
        Sin(usize),
        Cos(usize),
        Exp(usize),
        Tanh(usize),
        SqrtShift(usize),
        LogShift(usize),
        DivShift(usize, usize),
        Scale(usize, f64),
    }
    let mut state = seed.max(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let len = 10 + (next() % 8) as usize;
    let mut nodes = Vec::with_capacity(len);
    for k in 0..len {
        let avail = n + k;
        let a = (next() as usize) % avail;
        let b = (next() as usize) % avail;
        let pick = next() % 10;
        nodes.push(match pick {
            0 => Node::Add(a, b),
            1 => Node::Mul(a, b),
            2 => Node::Sub(a, b),
            3 => Node::Sin(a),
            4 => Node::Cos(a),
            5 => Node::Exp(a),
            6 => Node::Tanh(a),
            7 => Node::SqrtShift(a),
            8 => Node::LogShift(a),
            _ => {
                if pick == 9 && k % 2 == 0 {
                    Node::DivShift(a, b)
                } else {
                    Node::Scale(a, ((next() % 17) as f64 - 8.0) / 4.0)
                }
            }
        });
    }
    move |inputs: &[Jet<f64>]| {
        let mut vals: Vec<Jet<f64>> = inputs.to_vec();
        for node in &nodes {
            // keep magnitudes tame so exp stays well-conditioned
            let squash = |j: Jet<f64>| j.tanh();
            let v = match *node {
                Node::Add(a, b) => vals[a].clone() + vals[b].clone(),
                Node::Mul(a, b) => squash(vals[a].clone()) * squash(vals[b].clone()),
                Node::Sub(a, b) => vals[a].clone() - vals[b].clone(),
                Node::Sin(a) => vals[a].sin(),
                Node::Cos(a) => vals[a].cos(),
                Node::Exp(a) => squash(vals[a].clone()).exp(),
                Node::Tanh(a) => vals[a].tanh(),
                Node::SqrtShift(a) => {
                    let t = vals[a].tanh();
                    (t.clone() * t + Jet::constant(1.5)).try_sqrt().unwrap()
                }
                Node::LogShift(a) => {
                    let t = vals[a].tanh();
                    (t.clone() * t + Jet::constant(1.5)).try_ln().unwrap()
                }
                Node::DivShift(a, b) => {
                    let t = vals[b].tanh();
                    vals[a].try_div(&(t.clone() * t + Jet::constant(1.5))).unwrap()
                }
                Node::Scale(a, k) => vals[a].scale(k),
            };
            vals.push(v);
        }
        vals.last().unwrap().clone()
    }
}

#[test]
fn seed_definitions() {
    let space = JetSpace::new(4, 2).unwrap();
    let j = space.seed(3.0, 0).unwrap();
    assert_eq!(j.value(), 3.0);
    assert_eq!(j.d1(0), 1.0);
    assert_eq!(j.d2(0, 0), 0.0);

    let space1 = JetSpace::new(2, 1).unwrap();
    let j = space1.seed(0.0, 1).unwrap();
    assert_eq!(j.value(), 0.0);
    assert_eq!(j.d1(1), 1.0);

    assert!(matches!(
        space1.seed(1.0, 5),
        Err(FrError::DirectionOutOfRange { .. })
    ));
    assert!(matches!(JetSpace::new(9, 1), Err(FrError::JetConfig { .. })));
    assert!(matches!(JetSpace::new(4, 4), Err(FrError::JetConfig { .. })));
}

#[test]
fn cubic_third_derivative() {
    // p(x) = x^3 at x = 2: d3 = 6
    let space = JetSpace::new(1, 3).unwrap();
    let x = space.seed(2.0, 0).unwrap();
    let p = x.clone() * x.clone() * x;
    assert_eq!(p.value(), 8.0);
    assert_eq!(p.d1(0), 12.0);
    assert_eq!(p.d2(0, 0), 12.0);
    assert_eq!(p.d3(0, 0, 0), 6.0);
}

#[test]
fn bilinear_and_sqrt_primitives() {
    let space = JetSpace::new(2, 2).unwrap();
    let x = space.seed(2.0, 0).unwrap();
    let y = space.seed(5.0, 1).unwrap();
    let m = x.clone() * y.clone();
    assert_eq!(m.d2(0, 1), 1.0);

    let space1 = JetSpace::new(1, 1).unwrap();
    let s = space1.seed(4.0, 0).unwrap().try_sqrt().unwrap();
    assert_eq!(s.value(), 2.0);
    assert_eq!(s.d1(0), 0.25);
}

#[test]
fn sin_of_square_matches_finite_differences() {
    let space = JetSpace::new(1, 3).unwrap();
    let x = space.seed(0.7, 0).unwrap();
    let f = (x.clone() * x).sin();
    let scalar = |v: &[f64]| (v[0] * v[0]).sin();
    let x0 = [0.7];
    let d1 = fdcheck::d1(&scalar, &x0, 0, 1e-5);
    let d2 = fdcheck::d2(&scalar, &x0, 0, 0, 1e-4);
    let d3 = fdcheck::d3(&scalar, &x0, 0, 0, 0, 1e-3);
    assert!(fdcheck::rel_err(f.d1(0), d1, d1) < 1e-7);
    assert!(fdcheck::rel_err(f.d2(0, 0), d2, d2) < 1e-7);
    assert!(fdcheck::rel_err(f.d3(0, 0, 0), d3, d3) < 1e-6);
}

#[test]
fn domain_errors() {
    let space = JetSpace::new(1, 1).unwrap();
    let neg = space.seed(-1.0, 0).unwrap();
    assert!(matches!(neg.try_sqrt(), Err(DomainError::SqrtNonPositive(_))));
    assert!(matches!(neg.try_ln(), Err(DomainError::LogNonPositive(_))));
    let zero = space.seed(0.0, 0).unwrap();
    assert!(matches!(zero.try_abs(), Err(DomainError::AbsAtZero)));
    assert!(matches!(
        Jet::<f64>::constant(1.0).try_div(&zero),
        Err(DomainError::DivByZero)
    ));
    // abs away from zero follows the sign
    let a = space.seed(-2.5, 0).unwrap().try_abs().unwrap();
    assert_eq!(a.value(), 2.5);
    assert_eq!(a.d1(0), -1.0);
}

#[test]
fn random_programs_match_finite_differences() {
    // the order-3 kernel against Richardson-extrapolated central
    // differences on random composed expressions at random points
    let n = 3;
    let mut failures = Vec::new();
    for seed in 1..=60u64 {
        let prog = random_program(seed * 7919, n);
        let mut state = seed * 104729 + 17;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let x0: Vec<f64> = (0..n).map(|_| next()).collect();
        let space = JetSpace::new(n, 3).unwrap();
        let jets = seed_all(space, &x0);
        let out = prog(&jets);
        let scalar = |v: &[f64]| {
            let consts: Vec<Jet<f64>> = v.iter().map(|&x| Jet::constant(x)).collect();
            prog(&consts).value()
        };
        let scale = out
            .d1(0)
            .abs()
            .max(out.d1(1).abs())
            .max(out.d1(2).abs())
            .max(1.0);
        for i in 0..n {
            let fd = fdcheck::d1(&scalar, &x0, i, 1e-5);
            let got = out.d1(i);
            if (got - fd).abs() / scale > 1e-6 {
                failures.push(format!("seed {seed} d1[{i}]: {got} vs {fd}"));
            }
        }
        for i in 0..n {
            for j in i..n {
                let fd = fdcheck::d2(&scalar, &x0, i, j, 1e-4);
                let got = out.d2(i, j);
                if (got - fd).abs() / scale.max(fd.abs()) > 1e-6 {
                    failures.push(format!("seed {seed} d2[{i}{j}]: {got} vs {fd}"));
                }
            }
        }
        let fd3 = fdcheck::d3(&scalar, &x0, 0, 1.min(n - 1), 2.min(n - 1), 2e-3);
        let got3 = out.d3(0, 1.min(n - 1), 2.min(n - 1));
        if (got3 - fd3).abs() / scale.max(fd3.abs()).max(10.0) > 1e-5 {
            failures.push(format!("seed {seed} d3: {got3} vs {fd3}"));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn clairaut_symmetry_bit_identical() {
    let space = JetSpace::new(4, 3).unwrap();
    for seed in 1..=20u64 {
        let prog = random_program(seed * 31, 4);
        let jets = seed_all(space, &[0.3, -0.8, 1.2, 0.5]);
        let out = prog(&jets);
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    out.d2(i, j) == out.d2(j, i),
                    "mixed partial order changed bits"
                );
                for k in 0..4 {
                    assert!(out.d3(i, j, k) == out.d3(k, j, i));
                    assert!(out.d3(i, j, k) == out.d3(j, i, k));
                }
            }
        }
    }
}

#[test]
fn order_one_equals_order_three_slice() {
    for seed in 1..=20u64 {
        let prog = random_program(seed * 131, 3);
        let x0 = [0.4, -0.9, 1.1];
        let s1 = JetSpace::new(3, 1).unwrap();
        let s3 = JetSpace::new(3, 3).unwrap();
        let o1 = prog(&seed_all(s1, &x0));
        let o3 = prog(&seed_all(s3, &x0));
        assert!(o1.value() == o3.value(), "values differ");
        for i in 0..3 {
            assert!(
                o1.d1(i) == o3.d1(i),
                "degree-1 slice differs at {i}: {} vs {}",
                o1.d1(i),
                o3.d1(i)
            );
        }
    }
}

#[test]
fn constant_jets_match_plain_floats_bitwise() {
    for seed in 1..=30u64 {
        let prog = random_program(seed * 977, 3);
        let x0 = [1.7, -0.2, 0.9];
        let consts: Vec<Jet<f64>> = x0.iter().map(|&x| Jet::constant(x)).collect();
        let via_jets = prog(&consts).value();
        // seeded jets carry derivatives but the value slot must do the
        // exact same float operations
        let space = JetSpace::new(3, 2).unwrap();
        let via_series = prog(&seed_all(space, &x0)).value();
        assert!(via_jets == via_series, "value slot diverged from plain path");
    }
}

#[test]
fn powi_and_powf_consistency() {
    let space = JetSpace::new(1, 3).unwrap();
    let x = space.seed(1.7, 0).unwrap();
    let p3 = x.try_powi(3).unwrap();
    assert!((p3.d1(0) - 3.0 * 1.7_f64.powi(2)).abs() < 1e-13);
    assert!((p3.d3(0, 0, 0) - 6.0).abs() < 1e-12);
    let pneg = x.try_powi(-2).unwrap();
    assert!((pneg.value() - 1.7_f64.powi(-2)).abs() < 1e-15);
    assert!((pneg.d1(0) - (-2.0) * 1.7_f64.powi(-3)).abs() < 1e-13);
    let ph = x.try_powf(0.5).unwrap();
    let sq = x.try_sqrt().unwrap();
    assert!((ph.value() - sq.value()).abs() < 1e-15);
    assert!((ph.d1(0) - sq.d1(0)).abs() < 1e-13);
    // integer-valued float exponent takes the integer route: negative base ok
    let neg = space.seed(-1.3, 0).unwrap();
    let cube = neg.try_powf(3.0).unwrap();
    assert!((cube.value() - (-1.3_f64).powi(3)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn product_rule_pointwise(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let space = JetSpace::new(2, 2).unwrap();
        let x = space.seed(a, 0).unwrap();
        let y = space.seed(b, 1).unwrap();
        let f = (x.clone().sin() * y.clone().cos()) + x.clone() * y.clone() * y.clone();
        // d/dx = cos(a)cos(b) + b^2 ; d/dy = -sin(a)sin(b) + 2ab
        prop_assert!((f.d1(0) - (a.cos()*b.cos() + b*b)).abs() < 1e-12);
        prop_assert!((f.d1(1) - (-a.sin()*b.sin() + 2.0*a*b)).abs() < 1e-12);
        prop_assert!((f.d2(0,1) - (-a.cos()*b.sin() + 2.0*b)).abs() < 1e-12);
    }

    #[test]
    fn division_inverts_multiplication(a in 0.1..2.0f64, b in 0.1..2.0f64) {
        let space = JetSpace::new(2, 3).unwrap();
        let x = space.seed(a, 0).unwrap();
        let y = space.seed(b, 1).unwrap();
        let prod = x.clone() * y.clone();
        let back = prod.try_div(&y).unwrap();
        prop_assert!((back.value() - a).abs() < 1e-13);
        prop_assert!((back.d1(0) - 1.0).abs() < 1e-12);
        prop_assert!(back.d1(1).abs() < 1e-12);
        prop_assert!(back.d2(0, 0).abs() < 1e-12);
    }
}
