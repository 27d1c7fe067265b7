use parafermion::enumeration::{partition_function, Lattice};
use parafermion::models::{on_v0_dense_weights, ModelId, WeightSet};

fn z(model: ModelId, rows: usize, cols: usize, w: &WeightSet) -> f64 {
    partition_function(&Lattice::standard(rows, cols, 1.0, model).unwrap(), w).unwrap()
}

#[test]
fn ghost_loop_maps_dilute_to_dense() {
    for n in [0.5, 1.5, 2.0] {
        for (r, c) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
            let (u1, u2) = (0.37, 0.81);
            let dil = on_v0_dense_weights(u1, u2, n).scaled(-1.0).flip_u();
            let dense = WeightSet::new(ModelId::DensePotts, &[u2, u1], n + 1.0);
            let (zd, zp) = (z(ModelId::DiluteOn, r, c, &dil), z(ModelId::DensePotts, r, c, &dense));
            assert!((zd - zp).abs() < 1e-12 * zp.abs(), "n={n} {r}x{c}: {zd} vs {zp}");
        }
    }
}

#[test]
fn ghost_loop_needs_the_u_gauge() {
    // without flipping the u-signs the map breaks on a 1x2 strip
    let (u1, u2, n) = (0.37, 0.81, 1.5);
    let dil = on_v0_dense_weights(u1, u2, n).scaled(-1.0);
    let dense = WeightSet::new(ModelId::DensePotts, &[u2, u1], n + 1.0);
    let (zd, zp) = (z(ModelId::DiluteOn, 1, 2, &dil), z(ModelId::DensePotts, 1, 2, &dense));
    assert!((zd - zp).abs() > 1e-6);
}

#[test]
fn single_face_dilute_partition_function() {
    let (n, w) = (1.3, [0.2, 0.3, 0.5, 0.0, 0.7, 1.1]);
    let ws = WeightSet::new(ModelId::DiluteOn, &w, n);
    let zz = z(ModelId::DiluteOn, 1, 1, &ws);
    let want = w[0] + 2.0 * n * w[1] + n * n * w[4] + n * w[5];
    assert!((zz - want).abs() < 1e-14, "{zz} vs {want}");
}
