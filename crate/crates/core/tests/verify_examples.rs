use anisomin::exponents::{self, PQExponents, SplitExponents};
use anisomin::geometry;
use anisomin::verify::{self, CaccioppoliForm, Problem, WeightedIntegralSpec};
use anisomin::{BoundaryDatum, DomainSpec, EnergyDensity, SolverConfig};

fn tent(density: EnergyDensity) -> Problem {
    Problem {
        domain: DomainSpec::unit_square(16),
        density,
        datum: BoundaryDatum::Tent { scale: 1.0 },
        solver: SolverConfig::default(),
    }
}

fn t34(safety: f64) -> WeightedIntegralSpec {
    let t = safety * exponents::threshold_t(&SplitExponents::new(3.0, 4.0).unwrap());
    WeightedIntegralSpec::Splitting { q1: 3.0, q2: 4.0, t }
}

#[test]
fn tent_weighted_integral_is_finite_and_positive() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let level = p.solve_at(32).unwrap();
    let w = verify::weighted_integral(&level.mesh, &level.result.u, &level.u0, &t34(1.05)).unwrap();
    assert!(w.is_finite() && w > 0.0, "{w}");
}

#[test]
fn weighted_integral_decreases_in_t_when_offset_below_one() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let level = p.solve_at(32).unwrap();
    assert!(level.result.u.sup_distance(&level.u0) <= 1.0);
    let w: Vec<f64> = [1.05, 1.2, 1.5]
        .iter()
        .map(|&s| verify::weighted_integral(&level.mesh, &level.result.u, &level.u0, &t34(s)).unwrap())
        .collect();
    assert!(w[0] >= w[1] && w[1] >= w[2], "{w:?}");
}

#[test]
fn euler_residual_before_and_after_solving() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let level = p.solve_at(32).unwrap();
    let before = verify::euler_residual(&level.mesh, &level.u0, &p.density);
    assert!(before > 1e-3, "{before}");
    let after = verify::euler_residual(&level.mesh, &level.result.u, &p.density);
    assert_eq!(after, level.result.grad_norm);
    assert!(after <= p.solver.grad_tol);

    let affine = Problem {
        datum: BoundaryDatum::Affine { a: 0.25, b: 1.0, c: -0.5 },
        ..p
    };
    let level = affine.solve_at(32).unwrap();
    assert!(verify::euler_residual(&level.mesh, &level.result.u, &affine.density) <= 1e-14);
}

#[test]
fn affine_refinement_study_is_zero_and_bounded() {
    let p = Problem {
        datum: BoundaryDatum::Affine { a: 0.5, b: -1.0, c: 2.0 },
        ..tent(EnergyDensity::splitting(3.0, 4.0).unwrap())
    };
    let r = verify::refinement_study(&p, &t34(1.05), &[16, 32, 64], 0.1).unwrap();
    assert!(r.rows.iter().all(|row| row.weighted_integral == 0.0));
    assert!(r.verdict.bounded);
    assert!(r.rows.windows(2).all(|w| w[0].h > w[1].h));
}

#[test]
fn study_rejects_mismatched_spec_and_ladder() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let wrong = WeightedIntegralSpec::Splitting { q1: 4.0, q2: 4.0, t: 30.0 };
    assert!(verify::refinement_study(&p, &wrong, &[16, 32, 64], 0.1).is_err());
    assert!(verify::refinement_study(&p, &t34(1.05), &[16, 32], 0.1).is_err());
}

/// The reentrant-corner ladder approaches its limit from below; on
/// `h = 1/16 .. 1/128` the growth ratios still exceed 1.1 but shrink
/// monotonically.
#[test]
fn pyramid_l_shape_nosplit_trend() {
    let p = Problem {
        domain: DomainSpec::l_shape(1.0, 0.5, 16),
        density: EnergyDensity::pq_growth(3.0, 3.4, 1.0).unwrap(),
        datum: BoundaryDatum::Pyramid { scale: 1.0 },
        solver: SolverConfig::default(),
    };
    let pq = PQExponents::new(2, 3.0, 3.4).unwrap();
    let bundle = exponents::ExponentBundle::nosplit(&pq, None, 1.05).unwrap();
    let spec = WeightedIntegralSpec::from_bundle(&p.density, &bundle).unwrap();
    let r = verify::refinement_study(&p, &spec, &[16, 32, 64, 128], 0.1).unwrap();
    let w: Vec<f64> = r.rows.iter().map(|r| r.weighted_integral).collect();
    let ratios: Vec<f64> = w.windows(2).map(|p| p[1] / p[0]).collect();
    assert!(w.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(ratios.windows(2).all(|q| q[1] < q[0]), "{ratios:?}");
    assert!(r.rows.iter().all(|row| row.euler_residual <= p.solver.grad_tol));
}

#[test]
fn caccioppoli_weights_compare() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let level = p.solve_at(64).unwrap();
    let phi = geometry::cutoff(&level.mesh, 4).unwrap();
    let ratio = |alpha| {
        verify::caccioppoli_check(&level.mesh, &level.result.u, &p.density, alpha, &phi.values, 1, CaccioppoliForm::Splitting)
            .unwrap()
            .ratio
    };
    let (r0, r4) = (ratio(0.0), ratio(-0.4));
    assert!(r0.is_finite() && r4.is_finite() && r0 > 0.0);
    // absorption factor (1 - 2|alpha|)^{-1} = 5
    assert!(r0 <= 5.0 * r4, "{r0} vs {r4}");
}

#[test]
fn eta_m_from_solution_vanishes_on_boundary() {
    let p = tent(EnergyDensity::splitting(3.0, 4.0).unwrap());
    let level = p.solve_at(32).unwrap();
    let phi = geometry::cutoff(&level.mesh, 4).unwrap();
    let eta = verify::eta_m(&phi.values, &level.result.u, &level.u0);
    for (v, &b) in level.mesh.boundary_mask.iter().enumerate() {
        if b {
            assert_eq!(eta.0[v], 0.0);
        }
    }
    let r = verify::caccioppoli_check(&level.mesh, &level.result.u, &p.density, 0.0, &eta, 1, CaccioppoliForm::FullGradient)
        .unwrap();
    assert!(r.ratio.is_finite());
}
