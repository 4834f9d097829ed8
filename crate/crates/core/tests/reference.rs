mod common;

use common::{d_ref, lambda_ref, CONSTANT, EPSILON, WATSON_G};
use friedrichs::{
    bs_eigenvalue, d_fn, eigenvalue, lambda_fn, mu0, FormFactor, ModelParams, QuadratureSpec, TorusPoint,
};
use std::f64::consts::PI;

fn ff(c: [f64; 4]) -> FormFactor {
    FormFactor::cosine_poly(c[0], [c[1], c[2], c[3]]).unwrap()
}

fn unit(c: [f64; 4]) -> ModelParams {
    ModelParams::new(1.0, ff(c)).unwrap()
}

fn pt(p: [f64; 3]) -> TorusPoint {
    TorusPoint::from_array(p)
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn oracle_reproduces_lattice_green_constant() {
    let v = d_ref([0.0; 3], 0.0, CONSTANT);
    assert!(rel(v, 4.0 * PI.powi(3) * WATSON_G) < 1e-12, "{v}");
}

#[test]
fn shifted_integral_matches_bessel_reference() {
    let points = [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.3, -1.2, 2.5], [3.0, 0.1, -0.4]];
    let ws = [0.0, 0.05, 0.4, 2.0];
    for c in [CONSTANT, EPSILON, [0.5, 0.2, -0.7, 0.1]] {
        for p in points {
            for w in ws {
                let lib = d_fn(&pt(p), w, &unit(c), &quad()).unwrap().value;
                let oracle = d_ref(p, w, c);
                let err = (lib - oracle).abs() / oracle.abs().max(1e-3);
                assert!(err < 1e-9, "coeffs {c:?} p {p:?} w {w}: {lib} vs {oracle}");
            }
        }
    }
}

#[test]
fn lambda_and_critical_coupling_match_reference() {
    let p = [0.7, -0.2, 1.9];
    for z in [-4.0, -0.5, 1.0] {
        let lib = lambda_fn(&pt(p), z, &unit(CONSTANT), &quad()).unwrap().value;
        assert!(rel(lib, lambda_ref(p, z, CONSTANT)) < 1e-9);
    }
    let m0 = mu0(&ff(CONSTANT), &quad()).unwrap();
    assert!(rel(m0, 1.0 / d_ref([0.0; 3], 0.0, CONSTANT)) < 1e-9);
    let m0e = mu0(&ff(EPSILON), &quad()).unwrap();
    assert!(rel(m0e, 1.0 / (12.0 * PI.powi(3))) < 1e-9, "{m0e}");
}

#[test]
fn eigenvalue_solves_reference_secular_equation() {
    let f = ff(CONSTANT);
    let m0 = mu0(&f, &quad()).unwrap();
    let params = ModelParams::new(2.0 * m0, f.clone()).unwrap();
    let p = [1.0, 1.0, 1.0];
    let state = eigenvalue(&pt(p), &params, &quad(), 1e-12).unwrap().unwrap();
    // the root of 1 − μΛ evaluated with the independent integral
    let residual = 1.0 - 2.0 * m0 * lambda_ref(p, state.e, CONSTANT);
    assert!(residual.abs() < 1e-9, "{residual}");
    assert!((state.e - (-1.142_028_899_643_847)).abs() < 1e-8, "{}", state.e);
    let b = bs_eigenvalue(&pt(p), state.e, &params, &quad()).unwrap();
    assert!((b - 1.0).abs() < 1e-9);
}

#[test]
fn threshold_slope_from_reference_integral() {
    // (D(0,0) − D(0,w))/w → 2π² φ(0)² as w → 0
    let d0 = d_ref([0.0; 3], 0.0, CONSTANT);
    let w = 1e-4;
    let slope = (d0 - d_ref([0.0; 3], w, CONSTANT)) / w;
    assert!((slope / (2.0 * PI * PI) - 1.0).abs() < 1e-3, "{slope}");
    let lib = friedrichs::asymptotics::fit_w_slope(
        &ModelParams::new(1.0 / d0, ff(CONSTANT)).unwrap(),
        &quad(),
        &[0.2, 0.1, 0.05, 0.025, 0.0125],
    )
    .unwrap();
    assert!((lib.fitted_slope * d0 / slope - 1.0).abs() < 0.01, "{}", lib.fitted_slope * d0);
}

#[test]
fn epsilon_type_edge_determinant_is_negative_in_reference() {
    let m0 = 1.0 / (12.0 * PI.powi(3));
    for p in [[0.05, 0.0, 0.0], [0.1, 0.1, 0.1], [0.3, -0.2, 0.1]] {
        let at_edge = 1.0 - m0 * d_ref(p, 0.0, EPSILON);
        let at_zero = 1.0 - m0 * lambda_ref(p, 0.0, EPSILON);
        assert!(at_edge < 0.0 && at_zero > 0.0, "{p:?}: {at_edge} {at_zero}");
        let lib = friedrichs::delta(&pt(p), common::edge(p), &ModelParams::new(m0, ff(EPSILON)).unwrap(), &quad());
        assert!((lib.unwrap().value - at_edge).abs() < 1e-9);
    }
}
