use std::f64::consts::PI;

use parafermion::enumeration::{holo_residual_report, observable, Lattice, MarkedPoint};
use parafermion::holo_solver::potts_weight_ratio;
use parafermion::models::{c2_integrable_weights, dense_weights, integrable_direction, spin_value, ModelId, WeightSet};

fn residuals(rows: usize, cols: usize, alpha: f64, w: &WeightSet, s: f64) -> (f64, f64) {
    let lat = Lattice::standard(rows, cols, alpha, w.model).unwrap();
    let f = observable(&lat, w, s, MarkedPoint::boundary_default()).unwrap();
    let r = holo_residual_report(&f, &lat.domain).unwrap();
    (r.interior_max, r.origin_adjacent_max)
}

fn dense(gamma: f64, alpha: f64) -> (WeightSet, f64) {
    let ratio = potts_weight_ratio(gamma, alpha, alpha).unwrap();
    let w = WeightSet::new(ModelId::DensePotts, &[1.0, ratio], 2.0 * gamma.cos());
    (w, spin_value(ModelId::DensePotts, gamma))
}

#[test]
fn dense_is_holomorphic() {
    for &(gamma, alpha) in &[(PI / 4.0, 1.2), (PI / 3.0, PI / 2.0), (0.44 * PI, 2.0 * PI / 3.0)] {
        let (w, s) = dense(gamma, alpha);
        for (r, c) in [(2, 2), (2, 3)] {
            let (int, _) = residuals(r, c, alpha, &w, s);
            assert!(int < 1e-12, "γ={gamma} α={alpha} {r}x{c}: {int}");
        }
    }
}

#[test]
fn dense_matches_spectral_weights() {
    // the ratio b/a is the one from a = sin u, b = sin(γ − u)
    let (gamma, alpha) = (PI / 4.0, 1.2);
    let (w, s) = dense(gamma, alpha);
    let u = PI / 2.0 - (s + 1.0) * alpha / 2.0;
    let d = dense_weights(gamma, u);
    assert!((d.values()[1] / d.values()[0] - w.values()[1]).abs() < 1e-12);
}

#[test]
fn dilute_is_holomorphic() {
    for &(eta, alpha) in &[(0.9, 1.1), (2.0 * PI / 5.0, PI / 2.0)] {
        let s = spin_value(ModelId::DiluteOn, eta);
        let w = WeightSet::new(ModelId::DiluteOn, &integrable_direction(ModelId::DiluteOn, eta, alpha), -2.0 * (2.0 * eta).cos());
        let (int, _) = residuals(2, 2, alpha, &w, s);
        assert!(int < 1e-12, "η={eta} α={alpha}: {int}");
        let (bad, _) = residuals(2, 2, alpha, &w.perturbed(0.01), s);
        assert!(bad > 1e-4, "perturbed {bad}");
    }
}

#[test]
fn c2_is_holomorphic() {
    let (eta, alpha) = (0.7, 1.0);
    let s = spin_value(ModelId::C2Loop, eta);
    let w = c2_integrable_weights(eta, (2.0 * s + 1.0) * alpha);
    let (int, _) = residuals(2, 2, alpha, &w, s);
    assert!(int < 1e-12, "{int}");
}
