use affine_osserman::classifier::{classify_structure, is_projective_affine_osserman, SampleConfig};
use affine_osserman::geometry::{curvature, nabla_r, PolyConnection};
use affine_osserman::poly::{parse_polynomial, Polynomial};
use affine_osserman::spectral::{projectively_equal, spectrum, Eigenvalue, Spectrum};
use affine_osserman::structure::{feasible_cases, listed_cases, realize, realize_as, CaseLabel, StructureSpec};
use affine_osserman::tensor::{check_affine_symmetries, jacobi, reduced_jacobi, CurvatureTensor};
use affine_osserman::Rational;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn direction(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, m).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2).prop_map(unit)
}

// Well-separated parameters: reals from a lattice, complex values with distinct moduli.
fn spec_for(case: CaseLabel, m: usize, seed: u64) -> StructureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = case.pattern(m);
    let mut reals: Vec<f64> = Vec::new();
    while reals.len() < p.real.len() {
        let v = rng.random_range(-8i32..=8) as f64 * 0.5;
        if v != 0.0 && !reals.contains(&v) {
            reals.push(v);
        }
    }
    let mut nu: Vec<Complex64> = Vec::new();
    while nu.len() < p.pairs.len() {
        let z = Complex64::new(rng.random_range(-4i32..=4) as f64 * 0.5, rng.random_range(1i32..=6) as f64 * 0.5);
        if !nu.contains(&z) {
            nu.push(z);
        }
    }
    StructureSpec::new(case, m, reals, nu)
}

fn case_and_dim() -> impl Strategy<Value = (CaseLabel, usize)> {
    prop::sample::select(vec![3usize, 5, 6, 7, 10, 12]).prop_flat_map(|m| {
        let cases: Vec<CaseLabel> = listed_cases(m).into_iter().filter(|c| feasible_cases(m).contains(c)).collect();
        (prop::sample::select(cases), Just(m))
    })
}

fn random_poly(rng: &mut ChaCha8Rng, m: usize) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..rng.random_range(0..3) {
        let mut term = Polynomial::constant(q(rng.random_range(-3..=3), rng.random_range(1..=2)));
        for _ in 0..rng.random_range(0..=2) {
            term = &term * &Polynomial::var(rng.random_range(0..m));
        }
        p = &p + &term;
    }
    p
}

fn random_connection(seed: u64, m: usize) -> PolyConnection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym = vec![Polynomial::zero(); m * m * m];
    for i in 0..m {
        for j in i..m {
            for k in 0..m {
                let p = random_poly(&mut rng, m);
                sym[(i * m + j) * m + k] = p.clone();
                sym[(j * m + i) * m + k] = p;
            }
        }
    }
    PolyConnection::from_fn(m, |i, j, k| sym[(i * m + j) * m + k].clone()).unwrap()
}

fn poly_strategy() -> impl Strategy<Value = Polynomial> {
    any::<u64>().prop_map(|s| random_poly(&mut ChaCha8Rng::seed_from_u64(s), 3))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn realized_models_are_exact_curvature((case, m) in case_and_dim(), seed in any::<u64>()) {
        let spec = spec_for(case, m, seed);
        let t = realize_as::<Rational>(&spec).unwrap();
        let rep = check_affine_symmetries(&t, 0.0);
        prop_assert!(rep.pass, "{case} m={m}: {rep:?}");
    }

    #[test]
    fn jacobi_is_quadratic(seed in any::<u64>(), x in direction(6), t in -3.0f64..3.0) {
        let a = realize(&spec_for(CaseLabel::TwoC, 6, seed)).unwrap();
        let j1 = jacobi(&a, &x).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
        let jt = jacobi(&a, &tx).unwrap();
        prop_assert!((jt - j1.clone() * (t * t)).amax() <= 1e-12 * (1.0 + j1.amax()) * (1.0 + t * t));
        let kills: f64 = (j1 * DMatrix::from_column_slice(6, 1, &x)).amax();
        prop_assert!(kills < 1e-12);
    }

    #[test]
    fn full_spectrum_is_reduced_plus_zero((case, m) in case_and_dim(), seed in any::<u64>(), xs in any::<u64>()) {
        let a = realize(&spec_for(case, m, seed)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(xs);
        let x = unit((0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
        let full = spectrum(&jacobi(&a, &x).unwrap(), 1e-8).unwrap();
        let reduced = spectrum(&reduced_jacobi(&a, &x).unwrap(), 1e-8).unwrap();
        prop_assert_eq!(full.size(), m);
        let with_zero = reduced.with_extra_zero();
        prop_assert_eq!(full.items().len(), with_zero.items().len());
        for (u, v) in full.items().iter().zip(with_zero.items()) {
            prop_assert_eq!(u.mult, v.mult);
            prop_assert!((u.value - v.value).norm() < 1e-8 * (1.0 + u.value.norm()));
        }
    }

    #[test]
    fn realized_spectrum_is_constant_up_to_scale((case, m) in case_and_dim(), seed in any::<u64>(), x in any::<u64>()) {
        let spec = spec_for(case, m, seed);
        let a = realize(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(x);
        let v = unit((0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
        let got = spectrum(&jacobi(&a, &v).unwrap(), 1e-8).unwrap();
        let want = spec.reduced_spectrum(1e-8).unwrap().with_extra_zero();
        prop_assert!(projectively_equal(&got, &want, 1e-8).unwrap().is_some(), "{case} m={m}: {:?} vs {:?}", got.items(), want.items());
    }

    #[test]
    fn classify_inverts_realize((case, m) in case_and_dim(), seed in any::<u64>()) {
        let spec = spec_for(case, m, seed);
        let a = realize(&spec).unwrap();
        let cls = classify_structure(&a, &SampleConfig { n_samples: 8, seed, tol: 1e-8 }).unwrap();
        prop_assert_eq!(cls.case(), Some(case));
        prop_assert_eq!(cls.slot_mu(), Some(spec.slot_mu()));
    }

    #[test]
    fn verdict_is_scale_invariant((case, m) in case_and_dim(), seed in any::<u64>(), c in prop::sample::select(vec![0.25, 3.0, -2.0])) {
        let a = realize(&spec_for(case, m, seed)).unwrap();
        let cfg = SampleConfig { n_samples: 8, seed, tol: 1e-8 };
        let base = classify_structure(&a, &cfg).unwrap();
        let scaled = classify_structure(&a.scaled(&c), &cfg).unwrap();
        prop_assert_eq!(base.verdict.status, scaled.verdict.status);
        prop_assert_eq!(base.case(), scaled.case());
        prop_assert_eq!(base.slot_mu(), scaled.slot_mu());
    }

    #[test]
    fn projective_equality_is_reflexive_and_symmetric(vals in prop::collection::vec((-5i32..=5, 1usize..4), 1..5), s in 0.1f64..10.0) {
        // full Jacobi spectra: the kernel direction plus at least one nonzero value
        let mut items: Vec<Eigenvalue> = vec![Eigenvalue::real(0.0, 1), Eigenvalue::real(7.0, 1)];
        for (v, k) in vals {
            let v = v as f64;
            if !items.iter().any(|e| e.value.re == v) {
                items.push(Eigenvalue::real(v, k));
            }
        }
        let a = Spectrum::from_items(items, 1e-8).unwrap();
        prop_assert!(projectively_equal(&a, &a, 1e-8).unwrap().is_some());
        let b = a.scaled(s);
        let ab = projectively_equal(&a, &b, 1e-8).unwrap();
        let ba = projectively_equal(&b, &a, 1e-8).unwrap();
        prop_assert_eq!(ab.is_some(), ba.is_some());
        prop_assert!((ab.unwrap() * ba.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_similarity_invariant(diag in prop::collection::vec(-3i32..=3, 2..7), seed in any::<u64>()) {
        let n = diag.len();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, diag.iter().map(|&v| v as f64)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { rng.random_range(-0.5..0.5) });
        let pinv = p.clone().try_inverse().unwrap();
        let a = spectrum(&d, 1e-8).unwrap();
        let b = spectrum(&(&p * &d * pinv), 1e-8).unwrap();
        prop_assert_eq!(a.items().len(), b.items().len());
        for (u, v) in a.items().iter().zip(b.items()) {
            prop_assert_eq!(u.mult, v.mult);
            prop_assert!((u.value - v.value).norm() < 1e-7);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn polynomial_ring_laws(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!((&a * &b).derivative(0), &(&a.derivative(0) * &b) + &(&a * &b.derivative(0)));
    }

    #[test]
    fn polynomial_display_parses_back(a in poly_strategy()) {
        prop_assert_eq!(parse_polynomial(&a.to_string(), None).unwrap(), a);
    }

    #[test]
    fn polynomial_evaluation_is_a_homomorphism(a in poly_strategy(), b in poly_strategy(), p in prop::collection::vec(-4i64..=4, 3)) {
        let pt: Vec<Rational> = p.iter().map(|&v| q(v, 3)).collect();
        prop_assert_eq!((&a * &b).eval(&pt), a.eval(&pt) * b.eval(&pt));
        prop_assert_eq!((&a + &b).eval(&pt), a.eval(&pt) + b.eval(&pt));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn pointwise_curvature_matches_evaluation(seed in any::<u64>(), m in 2usize..4, p in prop::collection::vec(-3i64..=3, 3)) {
        let c = random_connection(seed, m);
        let pt: Vec<Rational> = p[..m].iter().map(|&v| q(v, 2)).collect();
        let at = curvature(&c).unwrap().at::<Rational>(&pt);
        // R_{ijk}^l = d_i G_{jk}^l - d_j G_{ik}^l + G_{in}^l G_{jk}^n - G_{jn}^l G_{ik}^n from pointwise values
        let g = |i: usize, j: usize, k: usize| c.gamma(i, j, k).eval(&pt);
        let dg = |d: usize, i: usize, j: usize, k: usize| c.gamma(i, j, k).derivative(d).eval(&pt);
        let oracle = CurvatureTensor::<Rational>::from_fn(m, |i, j, k, l| {
            let mut v = dg(i, j, k, l) - dg(j, i, k, l);
            for n in 0..m {
                v += g(i, n, l) * g(j, k, n) - g(j, n, l) * g(i, k, n);
            }
            v
        });
        prop_assert_eq!(at, oracle);
    }

    #[test]
    fn second_bianchi_identity(seed in any::<u64>(), m in 2usize..4) {
        let c = random_connection(seed, m);
        let r = curvature(&c).unwrap();
        let nr = nabla_r(&c, &r).unwrap();
        for i in 0..m {
            for j in 0..m {
                for n in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let s = &(nr.get(i, j, k, n, l) + nr.get(j, n, k, i, l)) + nr.get(n, i, k, j, l);
                            prop_assert!(s.is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_verdict_is_seed_independent_for_realized_models((case, m) in case_and_dim(), seed in any::<u64>(), s2 in any::<u64>()) {
        let a = realize(&spec_for(case, m, seed)).unwrap();
        let v1 = is_projective_affine_osserman(&a, &SampleConfig { n_samples: 8, seed, tol: 1e-8 }).unwrap();
        let v2 = is_projective_affine_osserman(&a, &SampleConfig { n_samples: 8, seed: s2, tol: 1e-8 }).unwrap();
        prop_assert_eq!(v1.status, v2.status);
        prop_assert_eq!(v1.mu, v2.mu);
    }
}
