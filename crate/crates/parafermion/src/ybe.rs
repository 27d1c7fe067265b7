//! Yang–Baxter checks. Dense weights are checked in the three-strand
//! Temperley–Lieb algebra; all three models are also checked by summing
//! three-tile assemblies grouped by external connectivity.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::enumeration::{face_pieces, Piece, StrandGraph, StrandRec};
use crate::models::{c2_integrable_weights, dense_weights, on_integrable_weights, ModelId, WeightSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YbeError {
    #[error("weight sets belong to different models")]
    ModelMismatch,
    #[error("weight sets carry different loop fugacities ({0} vs {1})")]
    FugacityMismatch(f64, f64),
    #[error("unknown convention {0:?}")]
    UnknownConvention(String),
    #[error("the dense model has no spectral-combination scan")]
    DenseConvention,
}

/// Basis words of TL_3, in coefficient order.
pub const TL_BASIS: [&str; 5] = ["1", "E1", "E2", "E1E2", "E2E1"];
const WORDS: [&[u8]; 5] = [&[], &[1], &[2], &[1, 2], &[2, 1]];

/// Reduces a word in E1, E2 to a basis index and a power of the loop weight.
fn reduce(word: &[u8]) -> (usize, i32) {
    let mut w = word.to_vec();
    let mut loops = 0;
    'outer: loop {
        for i in 0..w.len().saturating_sub(1) {
            if w[i] == w[i + 1] {
                w.remove(i);
                loops += 1;
                continue 'outer;
            }
        }
        for i in 0..w.len().saturating_sub(2) {
            if w[i] == w[i + 2] {
                w.drain(i + 1..i + 3);
                continue 'outer;
            }
        }
        break;
    }
    let idx = WORDS.iter().position(|b| *b == w.as_slice()).expect("reduced words of TL_3 are basis words");
    (idx, loops)
}

/// Element of the three-strand Temperley–Lieb algebra with loop weight `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlWord {
    pub q: f64,
    pub coeffs: [f64; 5],
}

impl TlWord {
    pub fn zero(q: f64) -> TlWord {
        TlWord { q, coeffs: [0.0; 5] }
    }

    pub fn basis(q: f64, k: usize) -> TlWord {
        let mut w = TlWord::zero(q);
        w.coeffs[k] = 1.0;
        w
    }

    pub fn identity(q: f64) -> TlWord {
        TlWord::basis(q, 0)
    }

    /// E1 or E2.
    pub fn generator(q: f64, i: usize) -> TlWord {
        assert!(i == 1 || i == 2, "TL_3 has generators E1 and E2");
        TlWord::basis(q, i)
    }

    /// a·1 + b·E_i.
    pub fn r_matrix(q: f64, i: usize, a: f64, b: f64) -> TlWord {
        TlWord::identity(q).scale(a).add(&TlWord::generator(q, i).scale(b))
    }

    pub fn add(&self, o: &TlWord) -> TlWord {
        let mut c = self.coeffs;
        for (x, y) in c.iter_mut().zip(o.coeffs) {
            *x += y;
        }
        TlWord { q: self.q, coeffs: c }
    }

    pub fn scale(&self, k: f64) -> TlWord {
        TlWord { q: self.q, coeffs: self.coeffs.map(|x| x * k) }
    }

    pub fn mul(&self, o: &TlWord) -> TlWord {
        let mut out = TlWord::zero(self.q);
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in o.coeffs.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                let word: Vec<u8> = WORDS[i].iter().chain(WORDS[j]).copied().collect();
                let (k, loops) = reduce(&word);
                out.coeffs[k] += x * y * self.q.powi(loops);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, o: &TlWord) -> f64 {
        self.coeffs.iter().zip(o.coeffs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Both sides of R1(x1) R2(x2) R1(x3) = R2(x3) R1(x2) R2(x1), with the
/// leftmost factor acting first.
pub fn tl_ybe_sides<F: Fn(f64) -> (f64, f64)>(q: f64, ab: F, x: [f64; 3]) -> (TlWord, TlWord) {
    let r = |i: usize, t: f64| {
        let (a, b) = ab(t);
        TlWord::r_matrix(q, i, a, b)
    };
    let lhs = r(1, x[0]).mul(&r(2, x[1])).mul(&r(1, x[2]));
    let rhs = r(2, x[2]).mul(&r(1, x[1])).mul(&r(2, x[0]));
    (lhs, rhs)
}

pub fn tl_ybe_residual_with<F: Fn(f64) -> (f64, f64)>(q: f64, ab: F, x: [f64; 3]) -> f64 {
    let (l, r) = tl_ybe_sides(q, ab, x);
    l.max_abs_diff(&r)
}

/// Middle argument for the dense weights a = sin u, b = sin(γ − u).
pub fn dense_middle(gamma: f64, u: f64, v: f64) -> f64 {
    u + v - gamma
}

/// YBE residual for Ř(x) = sin x·1 + sin(γ − x)·E at (u, u + v − γ, v).
pub fn tl_ybe_residual(gamma: f64, u: f64, v: f64) -> f64 {
    let ab = |x: f64| (x.sin(), (gamma - x).sin());
    tl_ybe_residual_with(2.0 * gamma.cos(), ab, [u, dense_middle(gamma, u, v), v])
}

/// Same weights with the middle argument taken as v − u.
pub fn tl_ybe_residual_difference_form(gamma: f64, u: f64, v: f64) -> f64 {
    let ab = |x: f64| (x.sin(), (gamma - x).sin());
    tl_ybe_residual_with(2.0 * gamma.cos(), ab, [u, v - u, v])
}

/// External data of a three-tile assembly: occupancy code at each of the six
/// boundary points (bottom 0..3, top 3..6) and the pairing of occupied ones.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConnectivityClass {
    pub occupancy: [u8; 6],
    pub pairing: Vec<(u8, u8)>,
}

impl ConnectivityClass {
    pub fn label(&self) -> String {
        let occ: String = self.occupancy.iter().map(|c| char::from(b'0' + c)).collect();
        let pairs: Vec<String> = self.pairing.iter().map(|(a, b)| format!("{a}{b}")).collect();
        format!("{occ}|{}", pairs.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassResidual {
    pub class: ConnectivityClass,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramReport {
    pub classes: Vec<ClassResidual>,
    pub max_residual: f64,
    /// max_residual divided by the largest class magnitude.
    pub normalised_residual: f64,
}

/// Point ids of the three cells for layer positions `order` (0 acts on
/// strands 0,1 and 1 on strands 1,2), plus the six external points.
fn assembly(order: [usize; 3], through_x: bool) -> (Vec<[usize; 4]>, [usize; 6], usize) {
    // raw point (layer k, position j) -> k*3 + j
    let raw = |k: usize, j: usize| k * 3 + j;
    let mut parent: Vec<usize> = (0..12).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for (l, &i) in order.iter().enumerate() {
        let k = l + 1;
        let j = (0..3).find(|x| *x != i && *x != i + 1).unwrap();
        let a = find(&mut parent, raw(k, j));
        let b = find(&mut parent, raw(k - 1, j));
        parent[a] = b;
    }
    let mut dense = BTreeMap::new();
    let mut id = |p: &mut Vec<usize>, x: usize| {
        let r = find(p, x);
        let n = dense.len();
        *dense.entry(r).or_insert(n)
    };
    let mut cells = Vec::new();
    for (l, &i) in order.iter().enumerate() {
        let k = l + 1;
        let mut pts = [raw(k - 1, i), raw(k - 1, i + 1), raw(k, i + 1), raw(k, i)];
        if through_x {
            pts.rotate_left(1);
        }
        cells.push(pts.map(|x| id(&mut parent, x)));
    }
    let mut ext = [0usize; 6];
    for j in 0..3 {
        ext[j] = id(&mut parent, raw(0, j));
        ext[3 + j] = id(&mut parent, raw(3, j));
    }
    let npts = dense.len();
    (cells, ext, npts)
}

/// Whether the X-pattern tiles are the ones passing strands straight
/// through the assembly. For the dense model it is the a-tile (Y pattern),
/// so that Ř = a·1 + b·E; for the other two models it is the X pattern.
fn through_x(model: ModelId) -> bool {
    model != ModelId::DensePotts
}

fn classes(model: ModelId, ws: [&WeightSet; 3], order: [usize; 3]) -> BTreeMap<ConnectivityClass, f64> {
    let (cells, ext, npts) = assembly(order, through_x(model));
    let pieces = face_pieces(model);
    let fug = ws[0].fugacity;
    let mut out = BTreeMap::new();
    let np = pieces.len();
    for code in 0..np * np * np {
        let choice = [code % np, (code / np) % np, code / (np * np)];
        let chosen: [&Piece; 3] = choice.map(|c| &pieces[c]);
        // occupancy seen by each cell touching a point must agree
        let mut seen: Vec<Option<u8>> = vec![None; npts];
        let mut ok = true;
        for (ci, pts) in cells.iter().enumerate() {
            for (slot, &p) in pts.iter().enumerate() {
                let o = chosen[ci].occupancy(slot);
                match seen[p] {
                    None => seen[p] = Some(o),
                    Some(x) if x != o => ok = false,
                    _ => {}
                }
            }
        }
        if !ok {
            continue;
        }
        let mut g = StrandGraph::new(npts);
        for (ci, pts) in cells.iter().enumerate() {
            for s in &chosen[ci].strands {
                g.push(StrandRec {
                    cell: ci,
                    slot_a: s.a,
                    slot_b: s.b,
                    pa: pts[s.a as usize],
                    pb: pts[s.b as usize],
                    colour: s.colour,
                });
            }
        }
        let mut pairing = Vec::new();
        let mut used = [false; 6];
        for (k, &p) in ext.iter().enumerate() {
            if used[k] {
                continue;
            }
            let Some(s0) = g.ends(p).next() else { continue };
            let end = g.walk(p, s0, None).last().expect("a strand has at least one step").point;
            let m = ext.iter().position(|&e| e == end).expect("open strands end on the boundary");
            used[k] = true;
            used[m] = true;
            pairing.push((k.min(m) as u8, k.max(m) as u8));
        }
        pairing.sort();
        let occupancy = ext.map(|p| seen[p].unwrap_or(0));
        let w: f64 = (0..3).map(|ci| ws[ci].get(chosen[ci].symbol.expect("faces carry a symbol"))).product();
        let w = w * fug.powi(g.closed_loops() as i32);
        *out.entry(ConnectivityClass { occupancy, pairing }).or_insert(0.0) += w;
    }
    out
}

/// Compares the assembly with layers (W1, W2, W3) acting on strands
/// (01, 12, 01) against (W3, W2, W1) acting on (12, 01, 12).
pub fn diagram_ybe_residual(w1: &WeightSet, w2: &WeightSet, w3: &WeightSet) -> Result<DiagramReport, YbeError> {
    let model = w1.model;
    if w2.model != model || w3.model != model {
        return Err(YbeError::ModelMismatch);
    }
    for w in [w2, w3] {
        if (w.fugacity - w1.fugacity).abs() > 1e-12 * (1.0 + w1.fugacity.abs()) {
            return Err(YbeError::FugacityMismatch(w1.fugacity, w.fugacity));
        }
    }
    let lhs = classes(model, [w1, w2, w3], [0, 1, 0]);
    let rhs = classes(model, [w3, w2, w1], [1, 0, 1]);
    let mut keys: Vec<&ConnectivityClass> = lhs.keys().chain(rhs.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut out = Vec::with_capacity(keys.len());
    let (mut max, mut mag) = (0.0f64, 0.0f64);
    for k in keys {
        let l = lhs.get(k).copied().unwrap_or(0.0);
        let r = rhs.get(k).copied().unwrap_or(0.0);
        let diff = (l - r).abs();
        max = max.max(diff);
        mag = mag.max(l.abs()).max(r.abs());
        out.push(ClassResidual { class: k.clone(), lhs: l, rhs: r, diff });
    }
    let normalised_residual = if mag > 0.0 { max / mag } else { 0.0 };
    Ok(DiagramReport { classes: out, max_residual: max, normalised_residual })
}

/// TL basis element matching a dense connectivity class.
pub fn dense_class_to_tl(class: &ConnectivityClass) -> Option<usize> {
    let table: [[(u8, u8); 3]; 5] = [
        [(0, 3), (1, 4), (2, 5)],
        [(0, 1), (2, 5), (3, 4)],
        [(0, 3), (1, 2), (4, 5)],
        [(0, 1), (2, 3), (4, 5)],
        [(0, 5), (1, 2), (3, 4)],
    ];
    table.iter().position(|t| t.as_slice() == class.pairing.as_slice())
}

/// Dense diagram sides arranged as TL words.
pub fn dense_diagram_as_tl(report: &DiagramReport, q: f64) -> (TlWord, TlWord) {
    let (mut l, mut r) = (TlWord::zero(q), TlWord::zero(q));
    for c in &report.classes {
        if let Some(k) = dense_class_to_tl(&c.class) {
            l.coeffs[k] += c.lhs;
            r.coeffs[k] += c.rhs;
        }
    }
    (l, r)
}

/// Diagram residual for dense weights at (u, u + v − γ, v).
pub fn dense_diagram_residual(gamma: f64, u: f64, v: f64) -> DiagramReport {
    diagram_ybe_residual(&dense_weights(gamma, u), &dense_weights(gamma, dense_middle(gamma, u, v)), &dense_weights(gamma, v))
        .expect("dense weight sets share model and fugacity")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralVariable {
    /// Raw angle φ.
    Phi,
    /// ψ = φ − (π + η)/4.
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CombinationForm {
    /// (x1, x1 + x2, x2)
    Sum,
    /// (x1, x2 − x1, x2)
    Diff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gauge {
    Plain,
    /// Single-strand corner weights negated.
    FlipU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YbeConvention {
    pub variable: SpectralVariable,
    pub form: CombinationForm,
    pub gauge: Gauge,
}

impl YbeConvention {
    pub fn all() -> Vec<YbeConvention> {
        let mut out = Vec::new();
        for variable in [SpectralVariable::Phi, SpectralVariable::Psi] {
            for form in [CombinationForm::Sum, CombinationForm::Diff] {
                for gauge in [Gauge::Plain, Gauge::FlipU] {
                    out.push(YbeConvention { variable, form, gauge });
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let v = match self.variable {
            SpectralVariable::Phi => "phi",
            SpectralVariable::Psi => "psi",
        };
        let f = match self.form {
            CombinationForm::Sum => "sum",
            CombinationForm::Diff => "diff",
        };
        let g = match self.gauge {
            Gauge::Plain => "plain",
            Gauge::FlipU => "flipu",
        };
        format!("{v}-{f}-{g}")
    }

    pub fn triple(&self, x1: f64, x2: f64) -> [f64; 3] {
        match self.form {
            CombinationForm::Sum => [x1, x1 + x2, x2],
            CombinationForm::Diff => [x1, x2 - x1, x2],
        }
    }

    pub fn weights(&self, model: ModelId, eta: f64, x: f64) -> Result<WeightSet, YbeError> {
        let phi = match self.variable {
            SpectralVariable::Phi => x,
            SpectralVariable::Psi => x + (PI + eta) / 4.0,
        };
        let w = match model {
            ModelId::DiluteOn => on_integrable_weights(eta, phi),
            ModelId::C2Loop => c2_integrable_weights(eta, phi),
            ModelId::DensePotts => return Err(YbeError::DenseConvention),
        };
        Ok(match self.gauge {
            Gauge::Plain => w,
            Gauge::FlipU => w.flip_u(),
        })
    }

    pub fn residual(&self, model: ModelId, eta: f64, x1: f64, x2: f64) -> Result<DiagramReport, YbeError> {
        let t = self.triple(x1, x2);
        let w = t.map(|x| self.weights(model, eta, x));
        let [a, b, c] = w;
        diagram_ybe_residual(&a?, &b?, &c?)
    }
}

impl fmt::Display for YbeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for YbeConvention {
    type Err = YbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        YbeConvention::all().into_iter().find(|c| c.name() == s).ok_or_else(|| YbeError::UnknownConvention(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionScore {
    pub convention: YbeConvention,
    /// Worst residual over the samples.
    pub max_residual: f64,
}

/// Worst diagram residual of every convention over the (η, x1, x2) samples.
pub fn scan_conventions(model: ModelId, samples: &[(f64, f64, f64)]) -> Result<Vec<ConventionScore>, YbeError> {
    YbeConvention::all()
        .into_iter()
        .map(|c| {
            let mut worst = 0.0f64;
            for &(eta, x1, x2) in samples {
                worst = worst.max(c.residual(model, eta, x1, x2)?.max_residual);
            }
            Ok(ConventionScore { convention: c, max_residual: worst })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tl_relations() {
        let q = 1.3;
        let e1 = TlWord::generator(q, 1);
        let e2 = TlWord::generator(q, 2);
        assert_eq!(e1.mul(&e1), e1.scale(q));
        assert_eq!(e2.mul(&e2), e2.scale(q));
        assert_eq!(e1.mul(&e2).mul(&e1), e1);
        assert_eq!(e2.mul(&e1).mul(&e2), e2);
        let e21 = TlWord::basis(q, 4);
        assert_eq!(e1.mul(&e21), e1);
        assert_eq!(TlWord::basis(q, 3).mul(&e21), e1.scale(q));
    }

    #[test]
    fn tl_ybe_holds() {
        for &(g, u, v) in &[(0.7, 0.3, 0.5), (1.1, -0.4, 2.0), (2.5, 0.9, 0.1)] {
            assert!(tl_ybe_residual(g, u, v) < 1e-14);
        }
    }

    #[test]
    fn tl_ybe_detects_bad_weights() {
        let (g, u, v) = (0.7, 0.3, 0.5);
        let bad = |x: f64| (x.sin(), (g - x).sin() + 0.1);
        let r = tl_ybe_residual_with(2.0 * g.cos(), bad, [u, dense_middle(g, u, v), v]);
        assert!(r > 1e-3);
    }

    #[test]
    fn difference_form_fails_generically() {
        assert!(tl_ybe_residual_difference_form(0.7, 0.3, 0.5) > 1e-3);
    }

    #[test]
    fn zero_argument_is_not_the_identity() {
        // at x = 0 only the E term survives, so u = v is no shortcut
        let g: f64 = 0.7;
        let q = 2.0 * g.cos();
        let r0 = TlWord::r_matrix(q, 1, 0.0, g.sin());
        assert!(r0.max_abs_diff(&TlWord::generator(q, 1).scale(g.sin())) < 1e-15);
        assert!(r0.max_abs_diff(&TlWord::identity(q).scale(g.sin())) > 0.1);
        assert!(tl_ybe_residual_difference_form(g, 0.4, 0.4) > 1e-3);
    }

    #[test]
    fn dense_diagram_matches_tl() {
        let (g, u, v) = (0.9, 0.35, 0.6);
        let rep = dense_diagram_residual(g, u, v);
        assert!(rep.max_residual < 1e-14);
        assert_eq!(rep.classes.len(), 5);
        let q = 2.0 * g.cos();
        let (dl, dr) = dense_diagram_as_tl(&rep, q);
        let ab = |x: f64| (x.sin(), (g - x).sin());
        let (tl, tr) = tl_ybe_sides(q, ab, [u, dense_middle(g, u, v), v]);
        assert!(dl.max_abs_diff(&tl) < 1e-14);
        assert!(dr.max_abs_diff(&tr) < 1e-14);
    }

    #[test]
    fn dilute_and_c2_conventions() {
        let c: YbeConvention = "phi-sum-flipu".parse().unwrap();
        let r = c.residual(ModelId::DiluteOn, 0.9, 0.4, 0.7).unwrap();
        assert!(r.max_residual < 1e-12, "{}", r.max_residual);
        let r = c.residual(ModelId::C2Loop, 0.5, 0.3, 1.1).unwrap();
        assert!(r.max_residual < 1e-12, "{}", r.max_residual);
        let plain: YbeConvention = "phi-sum-plain".parse().unwrap();
        assert!(plain.residual(ModelId::DiluteOn, 0.9, 0.4, 0.7).unwrap().max_residual > 1e-6);
    }

    #[test]
    fn rejects_mixed_inputs() {
        let d = dense_weights(0.5, 0.2);
        let o = on_integrable_weights(0.5, 0.2);
        assert_eq!(diagram_ybe_residual(&d, &o, &d), Err(YbeError::ModelMismatch));
        assert!(matches!(
            diagram_ybe_residual(&d, &dense_weights(0.6, 0.2), &d),
            Err(YbeError::FugacityMismatch(..))
        ));
        assert!("nope".parse::<YbeConvention>().is_err());
    }

    #[test]
    fn normalised_residual_is_scale_free() {
        let c: YbeConvention = "phi-sum-plain".parse().unwrap();
        let t = c.triple(0.4, 0.7);
        let w: Vec<WeightSet> = t.iter().map(|&x| c.weights(ModelId::DiluteOn, 0.9, x).unwrap()).collect();
        let a = diagram_ybe_residual(&w[0], &w[1], &w[2]).unwrap();
        let b = diagram_ybe_residual(&w[0].scaled(7.5), &w[1], &w[2]).unwrap();
        assert!((a.normalised_residual - b.normalised_residual).abs() < 1e-12 * a.normalised_residual.max(1e-300));
    }
}
