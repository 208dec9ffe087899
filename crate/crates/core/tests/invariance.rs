use affine_osserman::constructors::{
    build_complex_family, build_quaternionic_family, standard_complex_structure, standard_quaternion_structure, QuaternionicCoefficients,
};
use affine_osserman::extension::{deformed_extension, levi_civita_block, modified_extension};
use affine_osserman::geometry::{curvature, deformed_constant_curvature, nabla_r, plane_wave_base, PolyConnection};
use affine_osserman::poly::Polynomial;
use affine_osserman::tensor::{evaluate, jacobi, CurvatureTensor};
use affine_osserman::Rational;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

// exp of a random skew matrix averaged over conjugation by the given complex structures,
// so the result is orthogonal and commutes with each of them
fn commuting_orthogonal(rng: &mut ChaCha8Rng, js: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = js[0].nrows();
    let raw = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let skew = (&raw - raw.transpose()) * 0.5;
    let mut group = vec![DMatrix::identity(m, m)];
    group.extend(js.iter().cloned());
    if js.len() == 2 {
        group.push(&js[0] * &js[1]);
    }
    let mut avg = DMatrix::zeros(m, m);
    for g in &group {
        avg += g.transpose() * &skew * g;
    }
    (avg / group.len() as f64).exp()
}

fn assert_invariant(a: &CurvatureTensor<f64>, js: &[DMatrix<f64>], seed: u64) {
    let m = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let g = commuting_orthogonal(&mut rng, js);
        assert!((g.transpose() * &g - DMatrix::identity(m, m)).amax() < 1e-12);
        for j in js {
            assert!((&g * j - j * &g).amax() < 1e-12);
        }
        let (x, y, z) = (gaussian(&mut rng, m), gaussian(&mut rng, m), gaussian(&mut rng, m));
        let act = |v: &[f64]| (&g * DVector::from_column_slice(v)).as_slice().to_vec();
        let lhs = evaluate(a, &act(&x), &act(&y), &act(&z)).unwrap();
        let rhs = &g * evaluate(a, &x, &y, &z).unwrap();
        assert!((lhs - rhs).amax() < 1e-10);
    }
}

#[test]
fn complex_family_is_unitary_invariant() {
    for m in [2, 6, 10] {
        let j = standard_complex_structure::<f64>(m).unwrap();
        let a = build_complex_family(1.5, -0.75, 2.0, &j).unwrap();
        assert_invariant(&a, &[j.matrix().clone()], m as u64);
    }
}

#[test]
fn quaternionic_family_is_invariant() {
    for m in [4, 8, 12] {
        let q = standard_quaternion_structure::<f64>(m).unwrap();
        let coef = QuaternionicCoefficients { c: [1.0, -2.0, 0.5, 3.0], a1: 0.25, a2: -1.5 };
        let model = build_quaternionic_family(&coef, &q).unwrap();
        assert_invariant(&model.tensor, &[q.j1().matrix().clone(), q.j2().matrix().clone()], m as u64);
    }
}

#[test]
fn nabla_r_second_component_vanishes_on_hyperplane() {
    let sum = &Polynomial::var(0) + &Polynomial::var(1);
    for (m, eps) in [(3, 1), (4, 2), (5, -1)] {
        let c = deformed_constant_curvature(m, &Rational::from_integer(eps.into())).unwrap();
        let r = curvature(&c).unwrap();
        let nr = nabla_r(&c, &r).unwrap();
        let p = nr.get(1, 0, 0, 0, 1);
        let mut at = vec![Rational::from_integer(0.into()); m];
        at[0] = Rational::from_integer(1.into());
        let coef = p.eval(&at);
        assert!(coef != Rational::from_integer(0.into()));
        assert_eq!(p, &(&sum * &Polynomial::constant(coef)));
    }
}

#[test]
fn plane_wave_jacobi_squares_to_zero() {
    let r = curvature(&plane_wave_base()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rat = || Rational::new(rng.random_range(-9i64..=9).into(), rng.random_range(1i64..=5).into());
    for _ in 0..30 {
        let point: Vec<Rational> = (0..r.dim()).map(|_| rat()).collect();
        let x: Vec<Rational> = (0..r.dim()).map(|_| rat()).collect();
        let j = jacobi(&r.at::<Rational>(&point), &x).unwrap();
        assert!((&j * &j).iter().all(|v| *v == Rational::from_integer(0.into())));
    }
}

fn random_base(seed: u64, m: usize) -> PolyConnection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym = vec![Polynomial::zero(); m * m * m];
    for i in 0..m {
        for j in i..m {
            for k in 0..m {
                let mut p = Polynomial::zero();
                if rng.random_bool(0.4) {
                    p = Polynomial::constant(Rational::new(rng.random_range(-3i64..=3).into(), 2.into()));
                    if rng.random_bool(0.5) {
                        p = &p * &Polynomial::var(rng.random_range(0..m));
                    }
                }
                sym[(i * m + j) * m + k] = p.clone();
                sym[(j * m + i) * m + k] = p;
            }
        }
    }
    PolyConnection::from_fn(m, |i, j, k| sym[(i * m + j) * m + k].clone()).unwrap()
}

#[test]
fn extension_metrics_invert_and_curvature_is_algebraic() {
    for seed in 0..6 {
        let m = 2 + (seed as usize % 2);
        let base = random_base(seed, m);
        for metric in [deformed_extension(&base, None).unwrap(), modified_extension(&base).unwrap()] {
            let n = metric.dim();
            // g g^{-1} = Id as polynomials
            for a in 0..n {
                for c in 0..n {
                    let mut s = Polynomial::zero();
                    for b in 0..n {
                        s = &s + &(&metric.component(a, b) * &metric.inverse_component(b, c));
                    }
                    let expect = if a == c { Polynomial::constant(Rational::from_integer(1.into())) } else { Polynomial::zero() };
                    assert_eq!(s, expect);
                }
            }
            let conn = levi_civita_block(&metric).unwrap();
            assert!(curvature(&conn).unwrap().satisfies_identities());
        }
    }
}
