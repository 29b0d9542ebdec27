use hessquot::oracle::{
    fd_derivative, quotient_by_minors, random_gamma_k, random_symmetric, random_with_spectrum,
    sigma_bruteforce, sigma_partial_bruteforce, FdOrder,
};
use hessquot::symfunc::{
    check_fl2, check_maclaurin, check_prop1, f_grad, f_hess_form, f_value, in_gamma_k,
    offdiag_second_coefficient, sigma, sigma_partial, t_coeffs, trace_lower_bound,
};
use hessquot::{Error, Lambda, QuotientSpec, SymMat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(n: usize, k: usize, l: usize) -> QuotientSpec {
    QuotientSpec::new(n, k, l, 1.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Unit-scale sample with `lambda - 0.05` still in the cone, so centered
/// differences never approach the cone boundary.
fn well_inside(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<f64> {
    loop {
        let lam = random_gamma_k(rng, n, k);
        let top = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lam: Vec<f64> = lam.iter().map(|x| x / top).collect();
        let shifted: Vec<f64> = lam.iter().map(|x| x - 0.05).collect();
        if (1..=k).all(|j| sigma_bruteforce(&shifted, j) > 0.0) {
            return lam;
        }
    }
}

fn cone_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SymMat {
    let lam = random_gamma_k(rng, n, k);
    random_with_spectrum(rng, &lam)
}

#[test]
fn sigma_values() {
    assert_eq!(sigma(&[1.0, 1.0, 1.0], 2), 3.0);
    let expected = sigma_bruteforce(&[1.0, 2.0, 3.0], 2);
    assert_eq!(expected, 11.0);
    assert_eq!(sigma(&[1.0, 2.0, 3.0], 2), expected);
    for lam in [vec![0.3, -2.0], vec![1.0, 2.0, 3.0, -4.0, 5.0]] {
        let n = lam.len() as i32;
        assert_eq!(sigma(&lam, 0), 1.0);
        assert_eq!(sigma(&lam, n + 1), 0.0);
        assert_eq!(sigma(&lam, -1), 0.0);
    }
}

#[test]
fn sigma_partial_values() {
    let expected = sigma_partial_bruteforce(&[1.0, 2.0, 3.0], 1, 0);
    assert_eq!(expected, 5.0);
    assert_eq!(sigma_partial(&[1.0, 2.0, 3.0], 2, 0).unwrap(), expected);
    assert_eq!(sigma_partial(&[1.0, 1.0, 1.0], 3, 1).unwrap(), 1.0);
    assert_eq!(sigma_partial(&[4.0, -1.0], 1, 0).unwrap(), 1.0);
    assert!(matches!(
        sigma_partial(&[1.0, 2.0], 1, 2),
        Err(Error::IndexOutOfRange { index: 2, n: 2 })
    ));
}

#[test]
fn cone_membership() {
    assert!(in_gamma_k(&[1.0, 1.0, 1.0], 3));
    // sigma_1 = 3, sigma_2 = 4 - 2 - 2 = 0
    assert_eq!(sigma_bruteforce(&[2.0, 2.0, -1.0], 2), 0.0);
    assert!(in_gamma_k(&[2.0, 2.0, -1.0], 1));
    assert!(!in_gamma_k(&[2.0, 2.0, -1.0], 2));
    assert!(!in_gamma_k(&[-1.0, -1.0], 1));
}

#[test]
fn input_validation() {
    assert!(Lambda::new(vec![1.0]).is_err());
    assert!(Lambda::new(vec![1.0; 9]).is_err());
    assert!(Lambda::new(vec![1.0, f64::NAN]).is_err());
    assert_eq!(&*Lambda::new(vec![1.0, 2.0]).unwrap(), &[1.0, 2.0]);

    assert!(QuotientSpec::new(3, 2, 2, 1.0).is_err());
    assert!(QuotientSpec::new(3, 4, 0, 1.0).is_err());
    assert!(QuotientSpec::new(3, 2, 0, 0.5).is_err());
    assert!(QuotientSpec::new(3, 2, 0, f64::INFINITY).is_err());
    assert!(spec(3, 2, 0).theorem_regime());
    assert!(!spec(3, 2, 1).theorem_regime());
}

#[test]
fn quotient_values() {
    let i3 = SymMat::identity(3);
    assert!(close(f_value(&i3, &spec(3, 2, 0)).unwrap(), 3f64.sqrt(), 1e-14));
    assert!(close(f_value(&i3, &spec(3, 3, 1)).unwrap(), (1.0f64 / 3.0).sqrt(), 1e-14));
    let d = SymMat::from_diag(&[1.0, 2.0, 3.0]);
    assert!(close(f_value(&d, &spec(3, 2, 0)).unwrap(), 11f64.sqrt(), 1e-13));

    let outside = SymMat::from_diag(&[2.0, 2.0, -1.0]);
    for r in [
        f_value(&outside, &spec(3, 2, 0)).map(|_| ()),
        f_grad(&outside, &spec(3, 2, 0)).map(|_| ()),
        t_coeffs(&outside, &spec(3, 2, 0)).map(|_| ()),
        trace_lower_bound(&outside, &spec(3, 2, 0)).map(|_| ()),
        f_hess_form(&outside, &i3, &spec(3, 2, 0)).map(|_| ()),
    ] {
        assert!(matches!(r, Err(Error::ConeViolation { k: 2, .. })));
    }
}

#[test]
fn gradient_at_identity() {
    let s = spec(3, 2, 0);
    let i3 = SymMat::identity(3);
    let g = f_grad(&i3, &s).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!(close(g.get(i, j), want, 1e-14));
        }
    }
    // centered difference with step 1e-6 along each diagonal direction
    for i in 0..3 {
        let mut e = SymMat::zeros(3);
        e.set(i, i, 1e-6);
        let fd = (quotient_by_minors(&i3.axpy(1.0, &e), &s).unwrap()
            - quotient_by_minors(&i3.axpy(-1.0, &e), &s).unwrap())
            / 2e-6;
        assert!(close(fd, g.get(i, i), 1e-8), "{fd} vs {}", g.get(i, i));
    }
}

#[test]
fn gradient_of_diagonal_is_diagonal() {
    for (d, s) in [
        (vec![3.0, 2.0, 1.0], spec(3, 2, 0)),
        (vec![0.5, 4.0, 1.5, 2.0], spec(4, 3, 1)),
        (vec![1.0, -0.2], spec(2, 1, 0)),
    ] {
        let g = f_grad(&SymMat::from_diag(&d), &s).unwrap();
        for i in 0..d.len() {
            for j in 0..i {
                assert!(g.get(i, j).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let s = spec(3, 3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let lam = well_inside(&mut rng, 3, 3);
        let u = random_with_spectrum(&mut rng, &lam);
        let v = random_symmetric(&mut rng, 3);
        let v = v.scaled(1.0 / v.frobenius());
        let g = f_grad(&u, &s).unwrap();
        let fd = fd_derivative(|m| quotient_by_minors(m, &s), &u, &v, FdOrder::First).unwrap();
        let rel = (g.contract(&v) - fd).abs() / g.frobenius();
        assert!(rel <= 1e-7, "relative error {rel:e}");
    }
}

#[test]
fn hessian_form() {
    let s = spec(3, 2, 0);
    let i3 = SymMat::identity(3);
    assert_eq!(f_hess_form(&i3, &SymMat::zeros(3), &s).unwrap(), 0.0);

    let v = SymMat::from_diag(&[1.0, -1.0, 0.0]);
    let t: f64 = 1e-4;
    let f = |m: &SymMat| quotient_by_minors(m, &s).unwrap();
    let fd = (f(&i3.axpy(t, &v)) + f(&i3.axpy(-t, &v)) - 2.0 * f(&i3)) / (t * t);
    let exact = f_hess_form(&i3, &v, &s).unwrap();
    assert!(close(exact, fd, 1e-6), "{exact} vs {fd}");
    assert!(exact < 0.0);

    let s = spec(4, 4, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let u = cone_matrix(&mut rng, 4, 4);
        let v = random_symmetric(&mut rng, 4);
        assert!(f_hess_form(&u, &v, &s).unwrap() <= 1e-10);
    }
}

#[test]
fn hessian_form_at_repeated_eigenvalues() {
    // the confluent branch must agree with the divided difference just off it
    let s = spec(3, 2, 0);
    let mut v = SymMat::zeros(3);
    v.set(0, 1, 1.0);
    v.set(2, 2, 0.3);
    let on = f_hess_form(&SymMat::from_diag(&[2.0, 2.0, 1.0]), &v, &s).unwrap();
    let off = f_hess_form(&SymMat::from_diag(&[2.0 + 1e-6, 2.0, 1.0]), &v, &s).unwrap();
    assert!(close(on, off, 1e-5), "{on} vs {off}");
    let f = |m: &SymMat| quotient_by_minors(m, &s);
    let fd = fd_derivative(f, &SymMat::from_diag(&[2.0, 2.0, 1.0]), &v, FdOrder::Second).unwrap();
    assert!(close(on, fd, 1e-5), "{on} vs {fd}");
}

#[test]
fn t_coefficients() {
    let s = spec(3, 2, 0);
    let t = t_coeffs(&SymMat::identity(3), &s).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 2.0 / 3f64.sqrt() } else { 0.0 };
            assert!(close(t.get(i, j), want, 1e-14));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, k, l, tau) in [(3, 2, 0, 1.0), (4, 3, 1, 1.5), (3, 3, 1, 1.5), (5, 3, 0, 2.0)] {
        let s = QuotientSpec::new(n, k, l, tau).unwrap();
        for _ in 0..100 {
            let u = cone_matrix(&mut rng, n, k);
            let g = f_grad(&u, &s).unwrap();
            let t = t_coeffs(&u, &s).unwrap();
            let want = (tau * n as f64 - 1.0) * g.trace();
            assert!((t.trace() - want).abs() <= 1e-12 * want.abs());
            if tau > 1.0 {
                assert!(t.eigen().eigenvalues[0] > 0.0);
            }
        }
    }
}

#[test]
fn prop1_identities() {
    let r = check_prop1(&[1.0, 2.0, 3.0], 2);
    assert_eq!(r.splitting_residual, 0.0);
    for n in 2..=6 {
        let ones = vec![1.0; n];
        for k in 1..=n {
            let sum: f64 = (0..n).map(|i| sigma_partial(&ones, k as i32, i).unwrap()).sum();
            let want = (n - k + 1) as f64 * sigma_bruteforce(&ones, k - 1);
            assert!(close(sum, want, 1e-12 * want));
            assert!(check_prop1(&ones, k).holds(1e-12));
        }
    }
    let lam = [5.0, 1.0, 0.1];
    assert!(in_gamma_k(&lam, 2));
    let p: Vec<f64> = (0..3).map(|i| sigma_partial(&lam, 2, i).unwrap()).collect();
    assert!(p[0] <= p[1] && p[1] <= p[2], "{p:?}");
    assert_eq!(check_prop1(&lam, 2).monotonicity_violation, 0.0);
}

#[test]
fn maclaurin_inequalities() {
    for n in 2..=5 {
        let ones = vec![1.0; n];
        let r = check_maclaurin(&ones, &spec(n, n, n - 1), n, 0).unwrap();
        assert!(r.quotient_slack.abs() <= 1e-14 * r.quotient_scale);
    }
    let r = check_maclaurin(&[1.0, 2.0, 3.0], &spec(3, 2, 1), 2, 0).unwrap();
    assert!(r.quotient_slack >= 0.0 && r.product_slack >= 0.0);
    assert!(check_maclaurin(&[1.0, 2.0, 3.0], &spec(3, 2, 1), 3, 0).is_err());
    assert!(check_maclaurin(&[2.0, 2.0, -1.0], &spec(3, 2, 1), 2, 0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    for i in 0..10_000 {
        let n = 2 + i % 5;
        let k = 1 + (i / 5) % n;
        let l = (i / 7) % k;
        let s = (i / 3) % (l + 1);
        let r = s + 1 + (i / 11) % (k - s);
        let lam = random_gamma_k(&mut rng, n, k);
        if !check_maclaurin(&lam, &spec(n, k, l), r, s).unwrap().holds(1e-12) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn trace_bound() {
    assert!(trace_lower_bound(&SymMat::identity(3), &spec(3, 2, 0)).unwrap().abs() <= 1e-14);
    assert!(trace_lower_bound(&SymMat::from_diag(&[1.0, 1.0, 10.0]), &spec(3, 2, 0)).unwrap() > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..10_000 {
        let n = 2 + i % 4;
        let k = 1 + (i / 4) % n;
        let l = (i / 3) % k;
        let u = cone_matrix(&mut rng, n, k);
        assert!(trace_lower_bound(&u, &spec(n, k, l)).unwrap() >= -1e-10);
    }
}

#[test]
fn gradient_ordering() {
    assert!(check_fl2(&SymMat::from_diag(&[3.0, 2.0, 1.0]), &spec(3, 2, 0)).unwrap());
    let g = f_grad(&SymMat::from_diag(&[3.0, 2.0, 1.0]), &spec(3, 2, 0)).unwrap().diag();
    assert!(g[0] < g[1] && g[1] < g[2]);
    let g = f_grad(&SymMat::identity(3).scaled(2.5), &spec(3, 2, 0)).unwrap().diag();
    assert!(g.iter().all(|x| close(*x, g[0], 1e-15)));
    assert!(check_fl2(&SymMat::from_diag(&[1.0, 2.0, 3.0]), &spec(3, 2, 0)).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (n, k, l) in [(3, 2, 0), (3, 3, 1), (4, 4, 2)] {
        for _ in 0..1_000 {
            let mut d = random_gamma_k(&mut rng, n, k);
            d.sort_by(|a, b| b.total_cmp(a));
            assert!(check_fl2(&SymMat::from_diag(&d), &spec(n, k, l)).unwrap());
        }
    }
}

#[test]
fn offdiagonal_coefficient_is_gradient_quotient() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (n, k, l) in [(3, 2, 0), (3, 3, 1), (4, 4, 2)] {
        let s = spec(n, k, l);
        let mut checked = 0;
        while checked < 200 {
            let mut d = random_gamma_k(&mut rng, n, k);
            d.sort_by(|a, b| b.total_cmp(a));
            let top = d[0].abs().max(d[n - 1].abs());
            if d.windows(2).any(|w| w[0] - w[1] < 1e-2 * top) {
                continue;
            }
            let u = SymMat::from_diag(&d);
            let g = f_grad(&u, &s).unwrap().diag();
            for i in 1..n {
                let want = (g[i] - g[0]) / (d[0] - d[i]);
                let got = offdiag_second_coefficient(&u, &s, 0, i).unwrap();
                assert!((got - want).abs() <= 1e-8 * want.abs(), "{got} vs {want}");
            }
            checked += 1;
        }
    }
}

fn sample_lambda() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=6).prop_flat_map(|n| prop::collection::vec(-3.0f64..3.0, n))
}

fn cone_sample() -> impl Strategy<Value = (Vec<f64>, usize, usize)> {
    (2usize..=5, any::<u64>()).prop_flat_map(|(n, seed)| {
        (1..=n).prop_flat_map(move |k| {
            (0..k).prop_map(move |l| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (random_gamma_k(&mut rng, n, k), k, l)
            })
        })
    })
}

proptest! {
    #[test]
    fn sigma_matches_enumeration(lam in sample_lambda()) {
        let abs: Vec<f64> = lam.iter().map(|x| x.abs()).collect();
        for k in 0..=lam.len() {
            let scale = sigma_bruteforce(&abs, k).max(f64::MIN_POSITIVE);
            let err = (sigma(&lam, k as i32) - sigma_bruteforce(&lam, k)).abs();
            prop_assert!(err <= 1e-12 * scale);
        }
    }

    #[test]
    fn euler_identity(lam in sample_lambda()) {
        let abs: Vec<f64> = lam.iter().map(|x| x.abs()).collect();
        for k in 1..=lam.len() {
            let lhs: f64 = (0..lam.len())
                .map(|i| lam[i] * sigma_partial(&lam, k as i32, i).unwrap())
                .sum();
            let scale = k as f64 * sigma(&abs, k as i32);
            prop_assert!((lhs - k as f64 * sigma(&lam, k as i32)).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn cones_are_nested(lam in sample_lambda()) {
        for k in 1..=lam.len() {
            if in_gamma_k(&lam, k) {
                prop_assert!((1..k).all(|j| in_gamma_k(&lam, j)));
            }
        }
    }

    #[test]
    fn prop1_holds_in_the_cone((lam, k, _l) in cone_sample()) {
        prop_assert!(check_prop1(&lam, k).holds(1e-10));
    }

    #[test]
    fn degree_one_homogeneity((lam, k, l) in cone_sample(), t in 0.01f64..100.0, seed in any::<u64>()) {
        let s = spec(lam.len(), k, l);
        let u = random_with_spectrum(&mut ChaCha8Rng::seed_from_u64(seed), &lam);
        let f = f_value(&u, &s).unwrap();
        prop_assert!((f_value(&u.scaled(t), &s).unwrap() - t * f).abs() <= 1e-12 * t * f);
    }

    #[test]
    fn midpoint_concavity((a, k, l) in cone_sample(), seed in any::<u64>()) {
        let n = a.len();
        let s = spec(n, k, l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_with_spectrum(&mut rng, &a);
        let w = cone_matrix(&mut rng, n, k);
        let mid = u.axpy(1.0, &w).scaled(0.5);
        let gap = f_value(&mid, &s).unwrap()
            - 0.5 * (f_value(&u, &s).unwrap() + f_value(&w, &s).unwrap());
        prop_assert!(gap >= -1e-10);
    }
}
