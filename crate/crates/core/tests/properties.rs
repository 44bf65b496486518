use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use sardkit::expr::PolynomialMap;
use sardkit::rabier::{nu, nu_kernel, OperatorMatrix};
use sardkit::rcf::{Exponent, PuiseuxSeries};
use sardkit::thin::{self, PointCloud};

const VARS: [&str; 3] = ["x", "y", "w"];

fn polynomial(n: usize) -> impl Strategy<Value = String> {
    let term = (-5i32..=5, 1u32..=4, prop::collection::vec(0u32..=3, n)).prop_map(move |(c, d, pows)| {
        let mut s = if d == 1 { format!("{c}") } else { format!("({c}/{d})") };
        for (v, p) in VARS.iter().zip(&pows) {
            match p {
                0 => {}
                1 => s.push_str(&format!("*{v}")),
                _ => s.push_str(&format!("*{v}^{p}")),
            }
        }
        s
    });
    prop::collection::vec(term, 1..5).prop_map(|ts| ts.join(" + "))
}

fn texts_strategy() -> impl Strategy<Value = (Vec<String>, usize, Vec<f64>)> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, k)| {
        (prop::collection::vec(polynomial(n), k), Just(n), prop::collection::vec(-2.0f64..2.0, n))
    })
}

fn map_strategy() -> impl Strategy<Value = (PolynomialMap, Vec<f64>)> {
    texts_strategy().prop_map(|(cs, n, x)| (PolynomialMap::parse(&cs.join(";"), &VARS[..n]).unwrap(), x))
}

fn from_json(text: &str) -> Result<PolynomialMap, sardkit::expr::ExprError> {
    let file: sardkit::expr::MapFile = serde_json::from_str(text).unwrap();
    PolynomialMap::from_file(&file)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jacobian_matches_central_differences((map, x) in map_strategy()) {
        let j = map.jacobian().eval_f64(&x).unwrap();
        let h = 1e-5;
        for col in 0..map.n() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += h;
            xm[col] -= h;
            let fp = map.eval_f64(&xp).unwrap();
            let fm = map.eval_f64(&xm).unwrap();
            for row in 0..map.k() {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let exact = j.row(row)[col];
                prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "d f{row}/d x{col}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn display_round_trips((map, x) in map_strategy()) {
        let again = from_json(&serde_json::to_string(&map.to_file()).unwrap()).unwrap();
        let a = map.eval_f64(&x).unwrap();
        let b = again.eval_f64(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn rational_and_real_evaluation_agree((cs, n, x) in texts_strategy(), scale in 1.0f64..1e3) {
        // Error is measured against the magnitude of the terms: the same
        // polynomial with absolute coefficients at |x|. Relative to the
        // result itself no floating evaluation can survive cancellation.
        let map = PolynomialMap::parse(&cs.join(";"), &VARS[..n]).unwrap();
        let magnitude = PolynomialMap::parse(&cs.join(";").replace('-', ""), &VARS[..n]).unwrap();
        let x: Vec<f64> = x.iter().map(|v| v * scale / 2.0).collect();
        let abs_x: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let exact: Vec<BigRational> = x.iter().map(|v| BigRational::from_f64(*v).unwrap()).collect();
        let r = map.eval(&exact).unwrap();
        let f = map.eval_f64(&x).unwrap();
        let m = magnitude.eval_f64(&abs_x).unwrap();
        for ((e, a), m) in r.iter().zip(&f).zip(&m) {
            let e = e.to_f64().unwrap();
            prop_assert!((e - a).abs() <= 1e-12 * m.max(1.0), "{e} vs {a}");
            if *m <= 2.0 * e.abs() {
                prop_assert!((e - a).abs() <= 1e-12 * e.abs().max(1.0), "{e} vs {a} without cancellation");
            }
        }
    }
}

fn gaussian_matrix(k: usize, n: usize, entries: &[f64]) -> OperatorMatrix {
    OperatorMatrix::from_row_major(k, n, entries[..k * n].to_vec())
}

fn matrix_strategy() -> impl Strategy<Value = OperatorMatrix> {
    (1usize..=8, 1usize..=8, prop::collection::vec(-3.0f64..3.0, 64))
        .prop_map(|(a, b, e)| gaussian_matrix(a.min(b), a.max(b), &e))
}

/// Largest singular value by power iteration on `A^T A`.
fn operator_norm(a: &OperatorMatrix) -> f64 {
    let g = a.transpose().matmul(a);
    let mut v = vec![1.0; a.cols()];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..g.rows()).map(|i| g.row(i).iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.iter().map(|x| x / norm).collect();
    }
    lambda.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn nu_is_orthogonally_invariant(a in matrix_strategy(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (k, n) = (a.rows(), a.cols());
        let q = thin::random_projection(k, k, s1).unwrap();
        let v = thin::random_projection(n, n, s2).unwrap();
        let base = nu(&a).unwrap();
        let tol = 1e-8 * (1.0 + a.frobenius());
        prop_assert!((nu(&q.matmul(&a)).unwrap() - base).abs() <= tol);
        prop_assert!((nu(&a.matmul(&v)).unwrap() - base).abs() <= tol);
    }

    #[test]
    fn nu_is_homogeneous(a in matrix_strategy(), c in -10.0f64..10.0) {
        let tol = 1e-8 * (1.0 + a.frobenius() * c.abs().max(1.0));
        prop_assert!((nu(&a.scale(c)).unwrap() - c.abs() * nu(&a).unwrap()).abs() <= tol);
    }

    #[test]
    fn wide_adjoint_has_kernel(e in prop::collection::vec(-3.0f64..3.0, 64), n in 1usize..=6, extra in 1usize..=2) {
        let a = gaussian_matrix(n + extra, n, &e);
        prop_assert_eq!(nu(&a).unwrap(), 0.0);
    }

    #[test]
    fn kernel_form_agrees_on_full_rank(a in matrix_strategy()) {
        // Uniform entries give full row rank with probability one.
        let tol = 1e-8 * (1.0 + a.frobenius());
        prop_assert!((nu(&a).unwrap() - nu_kernel(&a).unwrap()).abs() <= tol);
    }

    #[test]
    fn nu_is_one_lipschitz(a in matrix_strategy(), e in prop::collection::vec(-0.5f64..0.5, 64)) {
        let b = a.sub(&gaussian_matrix(a.rows(), a.cols(), &e));
        let gap = (nu(&a).unwrap() - nu(&b).unwrap()).abs();
        let dist = operator_norm(&a.sub(&b));
        prop_assert!(gap <= dist * (1.0 + 1e-9) + 1e-9, "{gap} > {dist}");
        prop_assert!(dist <= a.sub(&b).frobenius() * (1.0 + 1e-12));
    }
}

fn series_strategy() -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec((-6i64..12, prop::sample::select(vec![1i64, 2, 3]), -9i64..=9), 0..5).prop_map(|terms| {
        let terms =
            terms.into_iter().map(|(p, q, c)| (Exponent::new(p, q), BigRational::from_integer(BigInt::from(c))));
        PuiseuxSeries::from_terms(terms, Exponent::from_integer(16))
    })
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn series_invariants_hold(a in series_strategy(), b in series_strategy()) {
        for s in [&a + &b, &a - &b, &a * &b] {
            let terms = s.terms();
            prop_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(terms.iter().all(|(q, c)| !c.is_zero() && *q < s.trunc_order()));
        }
    }

    #[test]
    fn infinitesimal_matches_rational_comparisons(a in series_strategy()) {
        let below_all = [rational(1, 1), rational(1, 2), rational(1, 10), rational(1, 100)]
            .into_iter()
            .all(|q| a.abs().compare(&PuiseuxSeries::from_rational(q, a.trunc_order())) == Ordering::Less);
        prop_assert_eq!(a.is_infinitesimal(), below_all);
    }

    #[test]
    fn addition_commutes_and_cancels(a in series_strategy(), b in series_strategy()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&a - &a.clone()).is_zero());
        prop_assert_eq!(&(&a + &b) - &b, a.truncate((&a + &b).trunc_order()));
    }

    #[test]
    fn sign_of_absolute_value(a in series_strategy()) {
        prop_assert!(a.abs().signum() >= 0);
        prop_assert_eq!(a.abs().signum() == 0, a.is_zero());
        let lead_sign = a.leading_coefficient().map_or(0, |c| if c.is_positive() { 1 } else { -1 });
        prop_assert_eq!(a.signum(), lead_sign);
    }
}

#[test]
fn subgroup_is_convex_on_samples() {
    use sardkit::rcf::{ConvexSubgroup, SubgroupMode};
    let g = ConvexSubgroup::new(Exponent::from_integer(1), SubgroupMode::ValGt);
    let trunc = Exponent::from_integer(16);
    let members: Vec<PuiseuxSeries> = [(2, 1, 3), (3, 2, -5), (5, 1, 1), (7, 3, 2)]
        .iter()
        .map(|&(p, q, c)| {
            PuiseuxSeries::monomial(BigRational::from_integer(BigInt::from(c)), Exponent::new(p, q), trunc)
        })
        .collect();
    for a in &members {
        for b in &members {
            for (tn, td) in [(0, 1), (1, 3), (1, 2), (1, 1)] {
                let t = PuiseuxSeries::from_rational(rational(tn, td), trunc);
                let s = PuiseuxSeries::from_rational(rational(td - tn, td), trunc);
                let mix = &(&t * a) + &(&s * b);
                assert!(g.contains(&mix), "{mix} left the subgroup");
            }
        }
    }
}

fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
    let d = points[0].len();
    PointCloud::from_points(d, points).unwrap()
}

fn segment(n: usize) -> PointCloud {
    cloud((0..n).map(|i| vec![i as f64 / (n - 1) as f64, 0.5 * i as f64 / (n - 1) as f64]).collect())
}

fn square(n: usize) -> PointCloud {
    cloud((0..n * n).map(|i| vec![(i % n) as f64 / (n - 1) as f64, (i / n) as f64 / (n - 1) as f64]).collect())
}

#[test]
fn projection_stability_over_seeds() {
    let delta = 0.02;
    for (name, c) in [("segment", segment(200)), ("square", square(30))] {
        let scores: Vec<f64> = (0..16u64).map(|s| thin::thinness_score(&c, 2, delta, 8, s).unwrap().score).collect();
        let lo = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo <= 2.0 * delta, "{name}: spread {} over seeds {scores:?}", hi - lo);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_points_never_shrinks_radii(
        pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 2), 20..120),
        keep in prop::collection::vec(any::<bool>(), 120),
        seed in any::<u64>(),
    ) {
        let sub: Vec<Vec<f64>> = pts.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| p.clone()).collect();
        prop_assume!(!sub.is_empty());
        let small = thin::thinness_score(&cloud(sub), 2, 0.05, 4, seed).unwrap();
        let large = thin::thinness_score(&cloud(pts), 2, 0.05, 4, seed).unwrap();
        for (s, l) in small.per_projection_radius.iter().zip(&large.per_projection_radius) {
            prop_assert!(l >= s, "{l} < {s}");
        }
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..30),
        b in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..30),
        c in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..30),
    ) {
        let (a, b, c) = (cloud(a), cloud(b), cloud(c));
        let ab = thin::hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, thin::hausdorff(&b, &a).unwrap());
        prop_assert_eq!(thin::hausdorff(&a, &a).unwrap(), 0.0);
        let bc = thin::hausdorff(&b, &c).unwrap();
        let ac = thin::hausdorff(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn report_contract(
        pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..60),
        k in 1usize..=3,
        n_projections in 1usize..=5,
    ) {
        let r = thin::thinness_score(&cloud(pts), k, 0.05, n_projections, 7).unwrap();
        prop_assert_eq!(r.per_projection_radius.len(), n_projections);
        prop_assert!(0.0 <= r.score && r.score <= r.max_radius);
    }
}

#[test]
fn family_sweep_of_shrinking_segments() {
    let family: Vec<(f64, PointCloud)> = [0.1, 0.2, 0.3, 0.4]
        .iter()
        .map(|&t| (t, cloud((0..100).map(|i| vec![i as f64 / 99.0, t * i as f64 / 99.0]).collect())))
        .collect();
    let report = thin::family_sweep(&family, 2, 0.02, 8, 3, |_| 0.2).unwrap();
    assert_eq!(report.fibers.len(), 4);
    for f in &report.fibers {
        assert!(f.thin && f.report.score < f.z, "t = {}: {:?}", f.t, f.report);
    }
    assert!(report.limit.box_dimension < 1.5, "{:?}", report.limit);
}
