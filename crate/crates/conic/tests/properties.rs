use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use ris_conic::linalg::{hermitian_eigen, min_eigenvalue, trace};
use ris_conic::{
    solve_qcqp, solve_sdp, ConcaveQuadratic, ConstraintMatrix, ConvexQuadraticProgram, ObjectiveTerm, QcqpOptions,
    QuadraticConstraint, SdpConstraint, SdpOptions, SemidefiniteProgram, Sense, SolveStatus,
};

fn cvec(n: usize) -> impl Strategy<Value = DVector<C64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n)
        .prop_map(|v| DVector::from_iterator(v.len(), v.into_iter().map(|(re, im)| C64::new(re, im))))
}

fn hermitian(n: usize) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
        let m = DMatrix::from_iterator(n, n, v.into_iter().map(|(re, im)| C64::new(re, im)));
        (&m + m.adjoint()) * C64::new(0.5, 0.0)
    })
}

fn completed_square(target: &DVector<C64>) -> ObjectiveTerm {
    let n = target.len();
    ObjectiveTerm::Quadratic(ConcaveQuadratic {
        curvature: DMatrix::identity(n, n),
        linear: target.clone(),
        constant: 0.0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // With identity curvature the problem separates per entry and the
    // optimum is the radial projection of the target onto each disc.
    #[test]
    fn qcqp_box_optimum_is_entrywise_projection(
        (target, bounds) in (1usize..7).prop_flat_map(|n| (cvec(n), prop::collection::vec(0.05f64..4.0, n)))
    ) {
        let p = ConvexQuadraticProgram {
            dim: target.len(),
            objective: vec![completed_square(&target)],
            constraints: vec![],
            modulus_bounds: bounds.clone(),
        };
        let out = solve_qcqp(&p, None, &QcqpOptions::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let expect = DVector::from_fn(target.len(), |i, _| {
            let t = target[i];
            if t.norm() <= bounds[i] { t } else { t * (bounds[i] / t.norm()) }
        });
        let best = p.objective_value(&expect);
        prop_assert!(best - out.objective <= 1e-7 * best.abs().max(1.0), "{} vs {}", out.objective, best);
        prop_assert!((&out.solution - &expect).norm() <= 1e-4 * expect.norm().max(1.0));
        prop_assert!(p.max_violation(&out.solution) <= 1e-9);
    }

    #[test]
    fn qcqp_ball_optimum_is_radial_projection(
        target in (1usize..7).prop_flat_map(cvec),
        radius_sq in 0.1f64..10.0,
    ) {
        let n = target.len();
        let p = ConvexQuadraticProgram {
            dim: n,
            objective: vec![completed_square(&target)],
            constraints: vec![QuadraticConstraint {
                curvature: DMatrix::identity(n, n),
                linear: DVector::zeros(n),
                bound: radius_sq,
            }],
            modulus_bounds: vec![f64::INFINITY; n],
        };
        let out = solve_qcqp(&p, None, &QcqpOptions::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let r = radius_sq.sqrt();
        let expect = if target.norm() <= r { target.clone() } else { &target * C64::new(r / target.norm(), 0.0) };
        let best = p.objective_value(&expect);
        prop_assert!(best - out.objective <= 1e-7 * best.abs().max(1.0));
        prop_assert!(out.objective <= best + 1e-9 * best.abs().max(1.0));
    }

    #[test]
    fn sdp_trace_one_gives_min_eigenvalue(c in (2usize..6).prop_flat_map(hermitian)) {
        let n = c.nrows();
        let p = SemidefiniteProgram {
            dim: n,
            objective: c.clone(),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Dense(DMatrix::identity(n, n)),
                scalars: vec![],
                sense: Sense::Eq,
                rhs: 1.0,
            }],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let lmin = min_eigenvalue(&c);
        let scale = c.norm().max(1.0);
        prop_assert!((out.objective - lmin).abs() <= 1e-5 * scale, "{} vs {}", out.objective, lmin);
        prop_assert!(min_eigenvalue(&out.solution.matrix) >= -1e-7);
        prop_assert!((trace(&out.solution.matrix) - 1.0).abs() <= 1e-6);
    }

    // min Tr(A) s.t. <G, A> >= 1 is attained at v v^H / λ_max(G).
    #[test]
    fn sdp_trace_minimization_gives_inverse_top_eigenvalue(
        (g, shift) in (2usize..6).prop_flat_map(|n| (hermitian(n), 0.1f64..2.0))
    ) {
        let n = g.nrows();
        let g = &g * g.adjoint() + DMatrix::identity(n, n) * C64::new(shift, 0.0);
        let p = SemidefiniteProgram {
            dim: n,
            objective: DMatrix::identity(n, n),
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Dense(g.clone()),
                scalars: vec![],
                sense: Sense::Ge,
                rhs: 1.0,
            }],
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let (vals, _) = hermitian_eigen(&g);
        let expect = 1.0 / vals[0];
        prop_assert!((out.objective - expect).abs() <= 1e-5 * expect, "{} vs {}", out.objective, expect);
    }

    #[test]
    fn sdp_diagonal_caps_below_trace_floor_are_infeasible(n in 2usize..6, cap in 0.1f64..3.0) {
        let mut constraints: Vec<SdpConstraint> = (0..n)
            .map(|q| SdpConstraint {
                matrix: ConstraintMatrix::Diagonal(q),
                scalars: vec![],
                sense: Sense::Le,
                rhs: cap,
            })
            .collect();
        constraints.push(SdpConstraint {
            matrix: ConstraintMatrix::Dense(DMatrix::identity(n, n)),
            scalars: vec![],
            sense: Sense::Ge,
            rhs: n as f64 * cap * 1.5,
        });
        let p = SemidefiniteProgram {
            dim: n,
            objective: DMatrix::identity(n, n),
            scalar_costs: vec![],
            constraints,
        };
        let out = solve_sdp(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn solves_are_deterministic(c in (2usize..5).prop_flat_map(hermitian)) {
        let n = c.nrows();
        let p = SemidefiniteProgram {
            dim: n,
            objective: c,
            scalar_costs: vec![],
            constraints: vec![SdpConstraint {
                matrix: ConstraintMatrix::Dense(DMatrix::identity(n, n)),
                scalars: vec![],
                sense: Sense::Eq,
                rhs: 2.0,
            }],
        };
        let a = solve_sdp(&p, &SdpOptions::default()).unwrap();
        let b = solve_sdp(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.objective, b.objective);
        prop_assert_eq!(a.iterations, b.iterations);
    }
}
