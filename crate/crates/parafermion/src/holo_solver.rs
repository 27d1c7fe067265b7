//! Local holomorphicity conditions as linear systems in the tile weights.
//!
//! Each model yields a few complex equations whose coefficients depend on
//! λ (a pure phase fixed by the spin) and μ = e^{iφ} (fixed by the spin and
//! the embedding angle). Real and imaginary parts are stacked into a real
//! matrix with rows `[Re eq0, Im eq0, Re eq1, Im eq1, ...]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::models::{ModelId, Symbol, WeightSet};

type C64 = Complex64;

/// Numeric determinants equal the closed forms exactly with this row
/// scaling, so the normalisation constant is one for every model.
pub const DETERMINANT_NORMALISATION: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoloError {
    #[error("n^2 = 1 (n = {0}) makes the two-colour reduction degenerate")]
    DegenerateFugacity(f64),
    #[error("scan needs at least two steps, got {0}")]
    TooFewSteps(usize),
    #[error("empty spin interval [{0}, {1}]")]
    EmptyRange(f64, f64),
    #[error("weight ratio has a pole: cos x = 0")]
    RatioPole,
    #[error("spin is zero so beta cannot be tuned")]
    ZeroSpin,
    #[error("Q must be non-negative, got {0}")]
    NegativeQ(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinParams {
    pub s: f64,
    pub lambda: C64,
    pub alpha: f64,
    pub beta: f64,
    pub phi: f64,
    pub mu: C64,
}

impl SpinParams {
    /// Dense model with winding increments (β, π − β): φ = α + βs.
    pub fn dense(s: f64, alpha: f64, beta: f64) -> SpinParams {
        let phi = alpha + beta * s;
        SpinParams { s, lambda: C64::from_polar(1.0, PI * s), alpha, beta, phi, mu: C64::from_polar(1.0, phi) }
    }

    pub fn dilute(s: f64, alpha: f64) -> SpinParams {
        let phi = (s + 1.0) * alpha;
        SpinParams { s, lambda: C64::from_polar(1.0, PI * s), alpha, beta: alpha, phi, mu: C64::from_polar(1.0, phi) }
    }

    pub fn c2(s: f64, alpha: f64) -> SpinParams {
        let phi = (2.0 * s + 1.0) * alpha;
        SpinParams {
            s,
            lambda: C64::from_polar(1.0, 2.0 * PI * s),
            alpha,
            beta: alpha,
            phi,
            mu: C64::from_polar(1.0, phi),
        }
    }

    pub fn for_model(model: ModelId, s: f64, alpha: f64) -> SpinParams {
        match model {
            ModelId::DensePotts => SpinParams::dense(s, alpha, alpha),
            ModelId::DiluteOn => SpinParams::dilute(s, alpha),
            ModelId::C2Loop => SpinParams::c2(s, alpha),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HoloSystem {
    pub model: ModelId,
    pub params: SpinParams,
    pub fugacity: f64,
    pub columns: Vec<Symbol>,
    pub equations: Vec<Vec<C64>>,
    /// Row labels of [`HoloSystem::real`].
    pub labels: Vec<String>,
    pub real: DMatrix<f64>,
    /// Rows of `real` kept in the square reduced system.
    pub selected: Vec<usize>,
}

impl HoloSystem {
    fn assemble(model: ModelId, params: SpinParams, fugacity: f64, equations: Vec<Vec<C64>>, selected: Vec<usize>) -> Self {
        let ncols = equations[0].len();
        let mut real = DMatrix::zeros(2 * equations.len(), ncols);
        let mut labels = Vec::new();
        for (i, eq) in equations.iter().enumerate() {
            let tag = (b'a' + i as u8) as char;
            labels.push(format!("Re({tag})"));
            labels.push(format!("Im({tag})"));
            for (j, z) in eq.iter().enumerate() {
                real[(2 * i, j)] = z.re;
                real[(2 * i + 1, j)] = z.im;
            }
        }
        HoloSystem { model, params, fugacity, columns: model.symbols().to_vec(), equations, labels, real, selected }
    }

    /// Complex residual of each equation at weight vector `w`.
    pub fn residuals(&self, w: &[f64]) -> Vec<C64> {
        self.equations.iter().map(|eq| eq.iter().zip(w).map(|(c, x)| c * x).sum()).collect()
    }

    pub fn max_residual(&self, w: &[f64]) -> f64 {
        self.residuals(w).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn selected_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.selected.len(), self.real.ncols(), |i, j| self.real[(self.selected[i], j)])
    }

    pub fn selected_labels(&self) -> Vec<String> {
        self.selected.iter().map(|&i| self.labels[i].clone()).collect()
    }

    /// Determinant of the square reduced system. For the dense model this
    /// is the determinant of the complex 2×2 system (real part only would
    /// lose information, so see [`HoloSystem::complex_determinant`]).
    pub fn numeric_determinant(&self) -> f64 {
        self.selected_matrix().determinant()
    }

    pub fn complex_determinant(&self) -> C64 {
        assert_eq!(self.equations.len(), 2, "complex determinant needs a 2x2 system");
        let e = &self.equations;
        Matrix2::new(e[0][0], e[0][1], e[1][0], e[1][1]).determinant()
    }

    /// Null space of the full stacked real system.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<f64>> {
        null_space(&self.real, tol)
    }
}

pub fn build_potts_system(q: f64, params: SpinParams) -> Result<HoloSystem, HoloError> {
    if q < 0.0 {
        return Err(HoloError::NegativeQ(q));
    }
    let (l, m) = (params.lambda, params.mu);
    let r = q.sqrt();
    let one = C64::new(1.0, 0.0);
    let eqs = vec![
        vec![(one - m / l) * r, one + m - one / l - m / l],
        vec![one + m - l - m / l, (one + m) * r],
    ];
    Ok(HoloSystem::assemble(ModelId::DensePotts, params, r, eqs, vec![0, 1, 2, 3]))
}

pub fn potts_determinant(q: f64, params: SpinParams) -> C64 {
    let (l, m) = (params.lambda, params.mu);
    let one = C64::new(1.0, 0.0);
    (one + m) * (one - m / l) * (l * l + l * (q - 2.0) + one) / l
}

pub fn build_on_system(n: f64, params: SpinParams) -> HoloSystem {
    let (l, m) = (params.lambda, params.mu);
    let one = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let nc = C64::new(n, 0.0);
    let eqs = vec![
        vec![one, m, -m / l, -one, z, z],
        vec![z, -one / l, nc, l * m, -m / l, -m * n / l],
        vec![z, nc, -l, -m / (l * l), m * n, m],
        vec![z, -m / (l * l), m * l, nc, -one / (l * l), -l * l],
    ];
    HoloSystem::assemble(ModelId::DiluteOn, params, n, eqs, vec![0, 2, 3, 4, 5, 6])
}

/// Both imaginary-part combinations of the four dilute equations,
/// evaluated on an arbitrary real weight vector.
pub fn on_dependency_residuals(n: f64, params: SpinParams, w: &[f64]) -> (f64, f64) {
    let sys = build_on_system(n, params);
    let e = sys.residuals(w);
    let (l, m) = (params.lambda, params.mu);
    let r1 = (e[0] * (n + 1.0) - e[1] * l / m + e[2] / m).im;
    let l2 = l * l;
    let r2 = (e[1] * (l / m) * (l2 - n / l2) + e[2] * (l2 * n - 1.0 / l2) / m - e[3] * (n * n - 1.0)).im;
    (r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OnBranch {
    VZero,
    VNonzero,
}

/// Closed-form determinant of the reduced dilute system.
pub fn on_determinant(n: f64, params: SpinParams, branch: OnBranch) -> f64 {
    let (s, phi) = (params.s, params.phi);
    let base = phi.sin() * (phi - PI * s).sin();
    match branch {
        OnBranch::VZero => (n * n - 1.0).powi(2) * base,
        OnBranch::VNonzero => (n * n - 1.0) * base * (2.0 * (4.0 * PI * s).cos() - 3.0 * n + n.powi(3)),
    }
}

/// Numeric counterpart of [`on_determinant`].
pub fn on_numeric_determinant(sys: &HoloSystem, branch: OnBranch) -> f64 {
    match branch {
        OnBranch::VNonzero => sys.numeric_determinant(),
        OnBranch::VZero => {
            let rows = [0usize, 2, 3, 4, 5];
            let cols = [0usize, 1, 2, 4, 5];
            DMatrix::from_fn(5, 5, |i, j| sys.real[(rows[i], cols[j])]).determinant()
        }
    }
}

pub fn build_c2_system(n: f64, params: SpinParams) -> HoloSystem {
    let (l, m) = (params.lambda, params.mu);
    let nc = C64::new(n, 0.0);
    let eqs = vec![
        vec![nc, -l, -m / l, m * n, m],
        vec![-C64::new(1.0, 0.0) / l, nc, m, -m / l, -m * n / l],
        vec![-m / l, m, nc, -C64::new(1.0, 0.0) / l, -l],
    ];
    HoloSystem::assemble(ModelId::C2Loop, params, n, eqs, vec![0, 1, 2, 3, 4])
}

/// Reduction check: the two-colour system is only square-reducible when n² ≠ 1.
pub fn check_c2_fugacity(n: f64) -> Result<(), HoloError> {
    if ((n * n) - 1.0).abs() < 1e-9 {
        Err(HoloError::DegenerateFugacity(n))
    } else {
        Ok(())
    }
}

fn c2_dependency(n: f64, params: SpinParams, w: &[f64], last_sign: f64) -> f64 {
    let sys = build_c2_system(n, params);
    let e = sys.residuals(w);
    let (l, m) = (params.lambda, params.mu);
    (e[0] * (l * n - 1.0 / l) / m + e[1] * (l / m) * (l - n / l) + e[2] * (last_sign * (n * n - 1.0))).im
}

/// Imaginary-part identity tying the third two-colour equation to the first two.
pub fn c2_dependency_residual(n: f64, params: SpinParams, w: &[f64]) -> f64 {
    c2_dependency(n, params, w, -1.0)
}

pub fn c2_determinant(n: f64, params: SpinParams) -> f64 {
    let (s, phi) = (params.s, params.phi);
    (n * n - 1.0) * phi.sin() * (phi - 2.0 * PI * s).sin() * (2.0 * (4.0 * PI * s).cos() - 3.0 * n + n.powi(3))
}

/// b/a at the Potts spin s = 1 − 2γ/π with winding increments (β, π − β).
pub fn potts_weight_ratio(gamma: f64, alpha: f64, beta: f64) -> Result<f64, HoloError> {
    let s = 1.0 - 2.0 * gamma / PI;
    let x = (alpha + beta * s) / 2.0;
    let den = x.cos();
    if den.abs() < 1e-14 {
        return Err(HoloError::RatioPole);
    }
    Ok(-(gamma + x).cos() / den)
}

/// Spectral parameter tied to the embedding: u = π/2 − (α + βs)/2.
pub fn spectral_u(s: f64, alpha: f64, beta: f64) -> f64 {
    PI / 2.0 - (alpha + beta * s) / 2.0
}

/// β for which the spectral parameter becomes u = γα/π.
pub fn tuned_beta(gamma: f64, alpha: f64) -> Result<f64, HoloError> {
    let s = 1.0 - 2.0 * gamma / PI;
    if s.abs() < 1e-14 {
        return Err(HoloError::ZeroSpin);
    }
    Ok((PI - alpha - 2.0 * gamma * alpha / PI) / s)
}

/// Orthonormal null-space basis: right singular vectors whose singular
/// value, relative to the largest, is below `tol`. Each vector is signed so
/// that its largest-magnitude entry is positive.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let ncols = m.ncols();
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return (0..ncols).map(|j| (0..ncols).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    }
    let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] / smax < tol).collect();
    idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    idx.into_iter()
        .map(|i| {
            let mut v: Vec<f64> = vt.row(i).iter().copied().collect();
            let big = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect()
}

/// |P w| / |w| where P projects onto the span of `basis` (orthonormal).
pub fn alignment(basis: &[Vec<f64>], w: &[f64]) -> f64 {
    let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if wn == 0.0 {
        return 0.0;
    }
    let proj: f64 = basis.iter().map(|b| b.iter().zip(w).map(|(x, y)| x * y).sum::<f64>().powi(2)).sum();
    proj.sqrt() / wn
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Spin,
    EmbeddingDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRoot {
    pub s: f64,
    pub kind: RootKind,
    /// Distance to the nearest zero of the α-independent factor.
    pub closed_form_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub samples: Vec<(f64, f64)>,
    pub roots: Vec<ScanRoot>,
    pub identically_zero: bool,
}

/// Real-valued determinant along the spin axis. The dense complex
/// determinant is rotated by its known phase so that it changes sign at
/// each simple root.
pub fn real_determinant(model: ModelId, fugacity: f64, alpha: f64, s: f64) -> f64 {
    match model {
        ModelId::DensePotts => {
            let p = SpinParams::dense(s, alpha, alpha);
            let sys = build_potts_system(fugacity * fugacity, p).expect("Q = fugacity^2 is non-negative");
            let rot = C64::from_polar(1.0, -(p.phi - PI * s / 2.0)) * C64::i();
            (sys.complex_determinant() * rot).re
        }
        ModelId::DiluteOn => build_on_system(fugacity, SpinParams::dilute(s, alpha)).numeric_determinant(),
        ModelId::C2Loop => build_c2_system(fugacity, SpinParams::c2(s, alpha)).numeric_determinant(),
    }
}

fn embedding_factors(model: ModelId, alpha: f64, s: f64) -> [f64; 2] {
    let p = SpinParams::for_model(model, s, alpha);
    match model {
        ModelId::DensePotts => [(p.phi / 2.0).cos(), ((p.phi - PI * s) / 2.0).sin()],
        ModelId::DiluteOn => [p.phi.sin(), (p.phi - PI * s).sin()],
        ModelId::C2Loop => [p.phi.sin(), (p.phi - 2.0 * PI * s).sin()],
    }
}

/// Zeros in [lo, hi] of the α-independent determinant factor.
pub fn characteristic_roots(model: ModelId, fugacity: f64, lo: f64, hi: f64) -> Vec<f64> {
    let (x, period, scale) = match model {
        ModelId::DensePotts => ((2.0 - fugacity * fugacity) / 2.0, 2.0, PI),
        _ => ((3.0 * fugacity - fugacity.powi(3)) / 2.0, 0.5, 4.0 * PI),
    };
    if x.abs() > 1.0 + 1e-12 {
        return vec![];
    }
    let base = x.clamp(-1.0, 1.0).acos() / scale;
    let mut out = Vec::new();
    let kmin = ((lo - base.abs()) / period).floor() as i64 - 1;
    let kmax = ((hi + base.abs()) / period).ceil() as i64 + 1;
    for k in kmin..=kmax {
        for r in [base + k as f64 * period, -base + k as f64 * period] {
            if r >= lo - 1e-12 && r <= hi + 1e-12 && !out.iter().any(|&o: &f64| (o - r).abs() < 1e-12) {
                out.push(r);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn determinant_scan(model: ModelId, fugacity: f64, alpha: f64, range: (f64, f64), steps: usize) -> Result<ScanResult, HoloError> {
    if steps < 2 {
        return Err(HoloError::TooFewSteps(steps));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(HoloError::EmptyRange(lo, hi));
    }
    if model == ModelId::C2Loop {
        check_c2_fugacity(fugacity)?;
    }
    let f = |s: f64| real_determinant(model, fugacity, alpha, s);
    let samples: Vec<(f64, f64)> = (0..steps)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
            (s, f(s))
        })
        .collect();
    let scale = samples.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    if scale < 1e-12 {
        return Ok(ScanResult { samples, roots: vec![], identically_zero: true });
    }
    let mut raw = Vec::new();
    for w in samples.windows(2) {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 == 0.0 {
            raw.push(s0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (s0, s1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 || (b - a) < 1e-15 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa * fm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            raw.push(0.5 * (a + b));
        }
    }
    if samples.last().map(|p| p.1 == 0.0).unwrap_or(false) {
        raw.push(hi);
    }
    let chars = characteristic_roots(model, fugacity, lo - 1.0, hi + 1.0);
    let roots = raw
        .into_iter()
        .map(|s| {
            let ef = embedding_factors(model, alpha, s);
            let kind = if ef.iter().any(|x| x.abs() < 1e-6) { RootKind::EmbeddingDegenerate } else { RootKind::Spin };
            let gap = chars.iter().map(|c| (c - s).abs()).fold(f64::INFINITY, f64::min);
            ScanRoot { s, kind, closed_form_gap: gap }
        })
        .collect();
    Ok(ScanResult { samples, roots, identically_zero: false })
}

/// Null-space solution of a model's system at the holomorphic spin.
#[derive(Debug, Clone)]
pub struct Solution {
    pub system: HoloSystem,
    pub basis: Vec<Vec<f64>>,
    pub singular_gap: f64,
}

pub fn solve(model: ModelId, fugacity: f64, params: SpinParams, tol: f64) -> Solution {
    let system = match model {
        ModelId::DensePotts => build_potts_system(fugacity * fugacity, params).expect("square is non-negative"),
        ModelId::DiluteOn => build_on_system(fugacity, params),
        ModelId::C2Loop => build_c2_system(fugacity, params),
    };
    let basis = system.null_space(tol);
    let singular_gap = basis
        .iter()
        .map(|b| system.max_residual(b))
        .fold(0.0, f64::max);
    Solution { system, basis, singular_gap }
}

/// Residual of a weight set in the system it belongs to.
pub fn weight_residual(w: &WeightSet, params: SpinParams) -> f64 {
    let sys = match w.model {
        ModelId::DensePotts => build_potts_system(w.fugacity * w.fugacity, params).expect("square is non-negative"),
        ModelId::DiluteOn => build_on_system(w.fugacity, params),
        ModelId::C2Loop => build_c2_system(w.fugacity, params),
    };
    sys.max_residual(w.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{c2_integrable_weights, on_integrable_weights, spin_value};
    use rand::{Rng, SeedableRng};

    #[test]
    fn potts_det_matches_closed_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let q = rng.gen_range(0.0..4.0);
            let p = SpinParams::dense(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
            let sys = build_potts_system(q, p).unwrap();
            let d = sys.complex_determinant() * DETERMINANT_NORMALISATION;
            assert!((d - potts_determinant(q, p)).norm() < 1e-12);
        }
    }

    #[test]
    fn potts_root_and_degenerate_factor() {
        let g: f64 = 0.6;
        let q = 4.0 * g.cos().powi(2);
        let p = SpinParams::dense(spin_value(ModelId::DensePotts, g), 1.1, 1.1);
        assert!(potts_determinant(q, p).norm() < 1e-12);
        // μ = −1
        let s = 0.3;
        let p = SpinParams::dense(s, PI / (s + 1.0), PI / (s + 1.0));
        assert!(potts_determinant(2.0, p).norm() < 1e-12);
        assert!(build_potts_system(0.0, p).is_ok());
        assert!(build_potts_system(-1.0, p).is_err());
    }

    #[test]
    fn on_weights_solve_system() {
        for &eta in &[0.3, 1.2, -0.9, 2.5] {
            let s = spin_value(ModelId::DiluteOn, eta);
            for &alpha in &[0.5, 1.3, 2.4] {
                let p = SpinParams::dilute(s, alpha);
                let w = on_integrable_weights(eta, p.phi);
                assert!(build_on_system(w.fugacity, p).max_residual(w.values()) < 1e-12);
            }
        }
    }

    #[test]
    fn dependency_identities_on_random_weights() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(-2.0..2.0);
            let p = SpinParams::dilute(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..3.0));
            let w: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, b) = on_dependency_residuals(n, p, &w);
            assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
            let p = SpinParams::c2(rng.gen_range(-1.0..1.0), rng.gen_range(0.1..3.0));
            let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(c2_dependency_residual(n, p, &w).abs() < 1e-12);
        }
    }

    #[test]
    fn c2_dependency_needs_minus_sign() {
        let p = SpinParams::c2(0.23, 0.9);
        let w = [0.3, -0.2, 0.5, 0.1, 0.7];
        assert!(c2_dependency(1.4, p, &w, 1.0).abs() > 1e-3);
    }

    #[test]
    fn determinants_match_closed_forms() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(-2.0..2.0);
            let s = rng.gen_range(-1.0..1.0);
            let alpha = rng.gen_range(0.1..3.0);
            let sys = build_on_system(n, SpinParams::dilute(s, alpha));
            for br in [OnBranch::VZero, OnBranch::VNonzero] {
                let d = on_numeric_determinant(&sys, br);
                assert!((d - on_determinant(n, sys.params, br)).abs() < 1e-9);
            }
            let sys = build_c2_system(n, SpinParams::c2(s, alpha));
            assert!((sys.numeric_determinant() - c2_determinant(n, sys.params)).abs() < 1e-9);
        }
    }

    #[test]
    fn null_space_examples() {
        let g = PI / 4.0;
        let p = SpinParams::dense(spin_value(ModelId::DensePotts, g), PI / 2.0, PI / 2.0);
        let ns = build_potts_system(2.0, p).unwrap().null_space(1e-10);
        assert_eq!(ns.len(), 1);
        let ratio = ns[0][1] / ns[0][0];
        assert!((ratio - potts_weight_ratio(g, PI / 2.0, PI / 2.0).unwrap()).abs() < 1e-10);
        let p = SpinParams::dense(0.3, 1.0, 1.0);
        assert!(build_potts_system(2.0, p).unwrap().null_space(1e-10).is_empty());
        let eta = 0.8;
        let s = spin_value(ModelId::C2Loop, eta);
        let p = SpinParams::c2(s, 1.0);
        let w = c2_integrable_weights(eta, p.phi);
        let ns = build_c2_system(w.fugacity, p).null_space(1e-10);
        assert!((alignment(&ns, w.values()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let ns = null_space(&DMatrix::zeros(2, 3), 1e-10);
        assert_eq!(ns.len(), 3);
    }

    #[test]
    fn scan_finds_spins() {
        let r = determinant_scan(ModelId::DensePotts, 2f64.sqrt(), PI / 2.0, (0.0, 1.0), 400).unwrap();
        assert!(r.roots.iter().any(|x| x.kind == RootKind::Spin && (x.s - 0.5).abs() < 1e-8));
        let r = determinant_scan(ModelId::DiluteOn, 1.0, 1.0, (-1.0, 1.0), 100).unwrap();
        assert!(r.identically_zero);
        assert!(determinant_scan(ModelId::C2Loop, 1.0, 1.0, (-1.0, 1.0), 100).is_err());
        let eta = 1.3;
        let n = ModelId::C2Loop.fugacity(eta);
        let r = determinant_scan(ModelId::C2Loop, n, PI / 2.0, (-0.5, 0.5), 2000).unwrap();
        let want = spin_value(ModelId::C2Loop, eta);
        assert!(r.roots.iter().any(|x| x.kind == RootKind::Spin && (x.s - want).abs() < 1e-8));
        for root in r.roots.iter().filter(|x| x.kind == RootKind::Spin) {
            assert!(root.closed_form_gap < 1e-8);
        }
    }

    #[test]
    fn ratio_pole_reported() {
        // cos x = 0 with x = (α + βs)/2
        let g = 0.5;
        let s = 1.0 - 2.0 * g / PI;
        let alpha = PI / (1.0 + s);
        assert_eq!(potts_weight_ratio(g, alpha, alpha), Err(HoloError::RatioPole));
    }
}
