//! Oracle and property tests that cut across modules: jet arithmetic laws,
//! Wirtinger extraction against symbolic polynomial differentiation, spectral
//! invariance of the eigensolver, parser robustness, and jet-vs-complex
//! evaluator agreement.

use kahler_core::catalog::ModelBundle;
use kahler_core::dsl::{eval_complex, eval_jet, parse, Expr};
use kahler_core::jet::Jet;
use kahler_core::linalg::CMatrix;
use kahler_core::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn small_complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Random jet in 2 real variables, degree 3, with bounded coefficients.
fn random_jet() -> impl Strategy<Value = Jet> {
    proptest::collection::vec(small_complex(), 10).prop_map(|coeffs| {
        // Assemble sum_k coeffs[k] * x^a y^b over the degree-3 table by
        // building from variables; simplest is a polynomial in the two
        // coordinate jets.
        let x = Jet::variable(0, c(0.0, 0.0), 2, 3).unwrap();
        let y = Jet::variable(1, c(0.0, 0.0), 2, 3).unwrap();
        let mut acc = Jet::constant(coeffs[0], 2, 3);
        let monomials = [
            (1, 0),
            (0, 1),
            (2, 0),
            (1, 1),
            (0, 2),
            (3, 0),
            (2, 1),
            (1, 2),
            (0, 3),
        ];
        for (k, (a, b)) in monomials.iter().enumerate() {
            let term = x
                .powi(*a)
                .unwrap()
                .try_mul(&y.powi(*b).unwrap())
                .unwrap()
                .scale(coeffs[k + 1]);
            acc = &acc + &term;
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_product_commutes(a in random_jet(), b in random_jet()) {
        let ab = a.try_mul(&b).unwrap();
        let ba = b.try_mul(&a).unwrap();
        prop_assert!(ab.approx_eq(&ba, 0.0), "commutativity must be exact");
    }

    #[test]
    fn jet_product_associates(a in random_jet(), b in random_jet(), d in random_jet()) {
        let left = a.try_mul(&b).unwrap().try_mul(&d).unwrap();
        let right = a.try_mul(&b.try_mul(&d).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-13));
    }

    #[test]
    fn jet_product_distributes(a in random_jet(), b in random_jet(), d in random_jet()) {
        let left = a.try_mul(&(&b + &d)).unwrap();
        let right = &a.try_mul(&b).unwrap() + &a.try_mul(&d).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-13));
    }

    #[test]
    fn wirtinger_matches_symbolic_polynomial_derivative(
        coeffs in proptest::collection::vec(small_complex(), 16),
        z0 in small_complex(),
        h in 0usize..3,
        k in 0usize..3,
    ) {
        // p(z, zb) = sum_{a,b <= 3} c_{ab} z^a zb^b; symbolic mixed derivative
        // at z0 is sum c_{ab} a!/(a-h)! b!/(b-k)! z^{a-h} zb^{b-k}.
        let z = Jet::complex_coordinate(0, z0, 1, 4).unwrap();
        let zb = z.conj();
        let mut jet = Jet::constant(c(0.0, 0.0), 2, 4);
        for a in 0..4usize {
            for b in 0..4usize {
                let term = z.powi(a as i64).unwrap()
                    .try_mul(&zb.powi(b as i64).unwrap()).unwrap()
                    .scale(coeffs[a * 4 + b]);
                jet = &jet + &term;
            }
        }
        // Degree-4 truncation cuts monomials with a + b > 4, so restrict the
        // check to the exactly-carried part by zeroing those coefficients in
        // the symbolic sum as well.
        let mut symbolic = c(0.0, 0.0);
        let falling = |n: usize, d: usize| -> f64 {
            (n - d + 1..=n).product::<usize>() as f64
        };
        for a in h..4usize {
            for b in k..4usize {
                if a + b > 4 {
                    continue;
                }
                let factor = falling(a, h) * falling(b, k);
                let zpow = z0.powu((a - h) as u32);
                let zbpow = z0.conj().powu((b - k) as u32);
                symbolic += coeffs[a * 4 + b] * factor * zpow * zbpow;
            }
        }
        // Zero out truncated monomials from the jet too: rebuild with the
        // same restriction.
        let mut jet_r = Jet::constant(c(0.0, 0.0), 2, 4);
        for a in 0..4usize {
            for b in 0..4usize {
                if a + b > 4 {
                    continue;
                }
                let term = z.powi(a as i64).unwrap()
                    .try_mul(&zb.powi(b as i64).unwrap()).unwrap()
                    .scale(coeffs[a * 4 + b]);
                jet_r = &jet_r + &term;
            }
        }
        let got = jet_r.wirtinger(&[h as u8], &[k as u8]).unwrap();
        prop_assert!((got - symbolic).norm() < 1e-12 * (1.0 + symbolic.norm()),
            "got {got}, symbolic {symbolic}");
        // And on the raw truncated jet the low-order derivatives (h + k <= 1)
        // are unaffected by truncation when the polynomial has degree <= 4.
        let _ = jet;
    }

    #[test]
    fn eigenvalues_invariant_under_unitary_conjugation(
        entries in proptest::collection::vec(small_complex(), 16),
        mixer in proptest::collection::vec(small_complex(), 16),
    ) {
        let n = 4;
        let raw = CMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
        let a = CMatrix::from_fn(n, n, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)].conj()));
        // A unitary from the eigenvectors of another random Hermitian matrix.
        let raw_u = CMatrix::from_fn(n, n, |i, j| mixer[i * n + j]);
        let h = CMatrix::from_fn(n, n, |i, j| 0.5 * (raw_u[(i, j)] + raw_u[(j, i)].conj()));
        let (_, u) = h.herm_eig_full().unwrap();
        let conj = u.adjoint().mul(&a).mul(&u);
        // Symmetrize away the rounding from the triple product.
        let conj = CMatrix::from_fn(n, n, |i, j| 0.5 * (conj[(i, j)] + conj[(j, i)].conj()));
        let eig_a = a.herm_eig().unwrap();
        let eig_c = conj.herm_eig().unwrap();
        for (x, y) in eig_a.iter().zip(&eig_c) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse(&text);
    }

    #[test]
    fn parsed_expressions_round_trip(expr in expr_strategy()) {
        let printed = expr.to_string();
        if let Ok(reparsed) = parse(&printed) {
            prop_assert_eq!(&expr, &reparsed, "printed as {}", printed);
        } else {
            prop_assert!(false, "pretty-printed expression failed to parse: {}", printed);
        }
    }

    #[test]
    fn jet_eval_constant_term_matches_complex_eval(
        expr in expr_strategy(),
        z0 in small_complex(),
    ) {
        let complex_val = eval_complex(&expr, &[z0]);
        let env = vec![Jet::complex_coordinate(0, z0, 1, 0).unwrap()];
        let jet_val = eval_jet(&expr, &env);
        match (complex_val, jet_val) {
            (Ok(cv), Ok(jv)) => {
                prop_assume!(cv.norm() < 1e6);
                prop_assert!((cv - jv.constant_term()).norm() < 1e-13 * (1.0 + cv.norm()),
                    "complex {cv} vs jet {}", jv.constant_term());
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "route disagreement: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }
}

/// Random expression trees of depth <= 6 over z1, with domains kept safe by
/// shifting divisors and log arguments away from zero.
fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.1f64..2.0).prop_map(Expr::Const),
        Just(Expr::I),
        Just(Expr::Var(0)),
    ];
    leaf.prop_recursive(5, 64, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                kahler_core::dsl::BinOp::Add,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                kahler_core::dsl::BinOp::Sub,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(
                kahler_core::dsl::BinOp::Mul,
                Box::new(a),
                Box::new(b)
            )),
            // guarded division: denominator shifted away from zero
            (inner.clone(), 2.0f64..4.0).prop_map(|(a, shift)| Expr::Binary(
                kahler_core::dsl::BinOp::Div,
                Box::new(a),
                Box::new(Expr::Binary(
                    kahler_core::dsl::BinOp::Add,
                    Box::new(Expr::Const(shift)),
                    Box::new(Expr::Binary(
                        kahler_core::dsl::BinOp::Mul,
                        Box::new(Expr::Var(0)),
                        Box::new(Expr::Unary(kahler_core::dsl::UnaryOp::Conj, Box::new(Expr::Var(0)))),
                    )),
                )),
            )),
            inner.clone().prop_map(|a| Expr::Unary(
                kahler_core::dsl::UnaryOp::Neg,
                Box::new(a)
            )),
            inner.clone().prop_map(|a| Expr::Unary(
                kahler_core::dsl::UnaryOp::Conj,
                Box::new(a)
            )),
            // guarded log of a positive-real-part argument
            (2.0f64..4.0).prop_map(|shift| Expr::Unary(
                kahler_core::dsl::UnaryOp::Log,
                Box::new(Expr::Binary(
                    kahler_core::dsl::BinOp::Add,
                    Box::new(Expr::Const(shift)),
                    Box::new(Expr::Binary(
                        kahler_core::dsl::BinOp::Mul,
                        Box::new(Expr::Var(0)),
                        Box::new(Expr::Unary(kahler_core::dsl::UnaryOp::Conj, Box::new(Expr::Var(0)))),
                    )),
                )),
            )),
            (inner, -3i32..4).prop_map(|(a, p)| {
                // Negative exponents as the parser would produce them:
                // unary negation of a positive literal.
                let exponent = if p < 0 {
                    Expr::Unary(
                        kahler_core::dsl::UnaryOp::Neg,
                        Box::new(Expr::Const(f64::from(-p))),
                    )
                } else {
                    Expr::Const(f64::from(p))
                };
                Expr::Binary(
                    kahler_core::dsl::BinOp::Pow,
                    Box::new(Expr::Binary(
                        kahler_core::dsl::BinOp::Add,
                        Box::new(Expr::Const(2.0)),
                        Box::new(Expr::Binary(
                            kahler_core::dsl::BinOp::Mul,
                            Box::new(a),
                            Box::new(Expr::Const(0.1)),
                        )),
                    )),
                    Box::new(exponent),
                )
            }),
        ]
    })
}

#[test]
fn inverse_residual_on_model_matrices() {
    // ||A A^{-1} - I||_inf < 1e-10 for every metric block the models generate.
    for name in kahler_core::catalog::BUILTIN_NAMES {
        let m = ModelBundle::builtin(name).unwrap();
        let samples = kahler_core::dsl::spec::domain_samples(&m.domain, 20, 7);
        for z in samples {
            for mat in [m.base_metric_values(&z).unwrap(), m.fiber_metric_values(&z).unwrap()] {
                let inv = mat.herm_inverse().unwrap();
                let eye = CMatrix::identity(mat.rows());
                let residual = mat.mul(&inv).max_diff(&eye);
                assert!(residual < 1e-10, "{name}: residual {residual}");
            }
        }
    }
}

#[test]
fn json_encoding_of_disk_matches_builtin() {
    let json = serde_json::json!({
        "n": 1, "r": 1,
        "g": [["(1 - z1*conj(z1))^-2"]],
        "G": [["(1 - z1*conj(z1))^-2"]],
        "beta": ["i*z1/(1 - z1*conj(z1))"],
        "psi": "-log(1 - z1*conj(z1))",
        "k": 1.0,
        "domain": {"z_center": [[0.0, 0.0]], "z_radius": [0.8], "v_radius": 2.0}
    })
    .to_string();
    let spec = kahler_core::dsl::MetricSpec::from_json(&json).unwrap();
    let from_spec = ModelBundle::from_spec("disk_json".into(), &spec).unwrap();
    let builtin = ModelBundle::builtin("disk_tangent").unwrap();
    assert!(from_spec.tangent_like);

    let samples = kahler_core::dsl::spec::domain_samples(&builtin.domain, 20, 11);
    for z in samples {
        let a = kahler_core::geometry::chern_curvature(&from_spec, &z).unwrap();
        let b = kahler_core::geometry::chern_curvature(&builtin, &z).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
        let ga = from_spec.base_metric_values(&z).unwrap();
        let gb = builtin.base_metric_values(&z).unwrap();
        assert!(ga.max_diff(&gb) < 1e-12);
    }
}

#[test]
fn hermitian_symmetry_of_builtin_metrics() {
    for name in kahler_core::catalog::BUILTIN_NAMES {
        let m = ModelBundle::builtin(name).unwrap();
        for z in kahler_core::dsl::spec::domain_samples(&m.domain, 10, 3) {
            assert!(m.base_metric_values(&z).unwrap().hermitian_asymmetry() < 1e-12);
            assert!(m.fiber_metric_values(&z).unwrap().hermitian_asymmetry() < 1e-12);
        }
    }
}

#[test]
fn chern_tensor_hermitian_symmetry() {
    // R_{i jb a bb} = conj(R_{j ib b ab}) on a generic sampled point.
    let m = ModelBundle::builtin("product_rank2").unwrap();
    let z = vec![c(0.21, -0.33), c(-0.4, 0.12)];
    let t = kahler_core::geometry::chern_curvature(&m, &z).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let lhs = t.get(i, j, a, b);
                    let rhs = t.get(j, i, b, a).conj();
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }
}
