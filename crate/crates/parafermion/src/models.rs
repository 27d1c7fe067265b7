//! Tile catalogs, weight families and spin formulas for the three loop models.
//!
//! Tiles are described by how they pair the four slots of a face (see
//! [`crate::geometry`] for the slot order). Two non-crossing pairings exist:
//!
//! * pattern X pairs (0,1) and (2,3): arcs wrap the (π − α)-corners 0 and 2;
//! * pattern Y pairs (1,2) and (3,0): arcs wrap the α-corners 1 and 3.
//!
//! The assignment of weight symbols to pictures was fixed by demanding that
//! the enumerated observable be discretely holomorphic at the integrable
//! point, so the catalogs below are the ones that make the checks pass.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::json::num;

type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model '{0}' (expected dense, dilute or c2)")]
    UnknownModel(String),
    #[error("Q must be positive, got {0}")]
    NonPositiveQ(f64),
    #[error("coupling J = {0} gives e^J = 1, so the weight ratio is degenerate")]
    DegenerateCoupling(f64),
    #[error("malformed weight set: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    #[serde(rename = "dense")]
    DensePotts,
    #[serde(rename = "dilute")]
    DiluteOn,
    #[serde(rename = "c2")]
    C2Loop,
}

impl ModelId {
    pub const ALL: [ModelId; 3] = [ModelId::DensePotts, ModelId::DiluteOn, ModelId::C2Loop];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::DensePotts => "dense",
            ModelId::DiluteOn => "dilute",
            ModelId::C2Loop => "c2",
        }
    }

    /// Weight symbols in the column order used by every linear system.
    pub fn symbols(self) -> &'static [Symbol] {
        use Symbol::*;
        match self {
            ModelId::DensePotts => &[A, B],
            ModelId::DiluteOn => &[T, U1, U2, V, W1, W2],
            ModelId::C2Loop => &[U1, U2, V, W1, W2],
        }
    }

    pub fn fugacity_symbol(self) -> &'static str {
        match self {
            ModelId::DensePotts => "sqrtQ",
            _ => "n",
        }
    }

    /// Loop fugacity as a function of the model angle (γ or η).
    pub fn fugacity(self, angle: f64) -> f64 {
        match self {
            ModelId::DensePotts => 2.0 * angle.cos(),
            _ => -2.0 * (2.0 * angle).cos(),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" | "potts" => Ok(ModelId::DensePotts),
            "dilute" | "on" => Ok(ModelId::DiluteOn),
            "c2" => Ok(ModelId::C2Loop),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    A,
    B,
    T,
    U1,
    U2,
    V,
    W1,
    W2,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::A => "a",
            Symbol::B => "b",
            Symbol::T => "t",
            Symbol::U1 => "u1",
            Symbol::U2 => "u2",
            Symbol::V => "v",
            Symbol::W1 => "w1",
            Symbol::W2 => "w2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    Black,
    Grey,
}

/// A strand joining two slots of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strand {
    pub a: u8,
    pub b: u8,
    pub colour: Option<Colour>,
}

const fn st(a: u8, b: u8, colour: Option<Colour>) -> Strand {
    Strand { a, b, colour }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub id: usize,
    pub symbol: Symbol,
    pub strands: Vec<Strand>,
}

impl Tile {
    /// True if a tile is made only of arcs around the (π − α)-corners.
    pub fn is_pattern_x(&self) -> bool {
        !self.strands.is_empty() && self.strands.iter().all(|s| matches!((s.a, s.b), (0, 1) | (2, 3)))
    }

    pub fn is_pattern_y(&self) -> bool {
        !self.strands.is_empty() && self.strands.iter().all(|s| matches!((s.a, s.b), (1, 2) | (3, 0)))
    }
}

const X: [(u8, u8); 2] = [(0, 1), (2, 3)];
const Y: [(u8, u8); 2] = [(1, 2), (3, 0)];

pub fn tiles(model: ModelId) -> Vec<Tile> {
    let mut out: Vec<(Symbol, Vec<Strand>)> = Vec::new();
    match model {
        ModelId::DensePotts => {
            // the a-tile wraps the α-corners
            out.push((Symbol::A, Y.iter().map(|&(a, b)| st(a, b, None)).collect()));
            out.push((Symbol::B, X.iter().map(|&(a, b)| st(a, b, None)).collect()));
        }
        ModelId::DiluteOn => {
            out.push((Symbol::T, vec![]));
            for &(a, b) in &X {
                out.push((Symbol::U1, vec![st(a, b, None)]));
            }
            for &(a, b) in &Y {
                out.push((Symbol::U2, vec![st(a, b, None)]));
            }
            out.push((Symbol::V, vec![st(0, 2, None)]));
            out.push((Symbol::V, vec![st(1, 3, None)]));
            out.push((Symbol::W1, X.iter().map(|&(a, b)| st(a, b, None)).collect()));
            out.push((Symbol::W2, Y.iter().map(|&(a, b)| st(a, b, None)).collect()));
        }
        ModelId::C2Loop => {
            let cols = [Colour::Black, Colour::Grey];
            for (pat, distinct, same) in [(X, Symbol::U1, Symbol::W1), (Y, Symbol::U2, Symbol::W2)] {
                for &c1 in &cols {
                    for &c2 in &cols {
                        let sym = if c1 == c2 { same } else { distinct };
                        out.push((sym, vec![st(pat[0].0, pat[0].1, Some(c1)), st(pat[1].0, pat[1].1, Some(c2))]));
                    }
                }
            }
            out.push((Symbol::V, vec![st(0, 2, Some(Colour::Black)), st(1, 3, Some(Colour::Grey))]));
            out.push((Symbol::V, vec![st(0, 2, Some(Colour::Grey)), st(1, 3, Some(Colour::Black))]));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(id, (symbol, strands))| Tile { id, symbol, strands })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub model: ModelId,
    values: Vec<f64>,
    pub fugacity: f64,
}

impl WeightSet {
    pub fn new(model: ModelId, values: &[f64], fugacity: f64) -> WeightSet {
        assert_eq!(values.len(), model.symbols().len(), "wrong number of weights for {model}");
        WeightSet { model, values: values.to_vec(), fugacity }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, sym: Symbol) -> f64 {
        self.model
            .symbols()
            .iter()
            .position(|&s| s == sym)
            .map(|i| self.values[i])
            .unwrap_or(0.0)
    }

    pub fn scaled(&self, c: f64) -> WeightSet {
        WeightSet { values: self.values.iter().map(|x| x * c).collect(), ..self.clone() }
    }

    /// Multiplies weight `i` by `1 + eps * pattern[i % 3]` with pattern (−1, 0, 1),
    /// which moves every family off its integrable point.
    pub fn perturbed(&self, eps: f64) -> WeightSet {
        let pat = [-1.0, 0.0, 1.0];
        let values = self.values.iter().enumerate().map(|(i, x)| x * (1.0 + eps * pat[i % 3])).collect();
        WeightSet { values, ..self.clone() }
    }

    /// Negates the single-turn weights u1 and u2.
    pub fn flip_u(&self) -> WeightSet {
        let values = self
            .model
            .symbols()
            .iter()
            .zip(&self.values)
            .map(|(s, &x)| if matches!(s, Symbol::U1 | Symbol::U2) { -x } else { x })
            .collect();
        WeightSet { values, ..self.clone() }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Value {
        let mut w = serde_json::Map::new();
        for (s, &x) in self.model.symbols().iter().zip(&self.values) {
            w.insert(s.name().to_string(), num(x));
        }
        serde_json::json!({ "model": self.model.name(), "weights": w, "fugacity": num(self.fugacity) })
    }

    pub fn from_json(v: &Value) -> Result<WeightSet, ModelError> {
        let bad = |m: &str| ModelError::Malformed(m.to_string());
        let model: ModelId = v["model"].as_str().ok_or_else(|| bad("missing model"))?.parse()?;
        let fugacity = v["fugacity"].as_f64().ok_or_else(|| bad("missing fugacity"))?;
        let w = v["weights"].as_object().ok_or_else(|| bad("missing weights"))?;
        let mut values = Vec::new();
        for s in model.symbols() {
            values.push(w.get(s.name()).and_then(Value::as_f64).ok_or_else(|| bad(s.name()))?);
        }
        Ok(WeightSet { model, values, fugacity })
    }

    pub fn as_map(&self) -> BTreeMap<&'static str, f64> {
        self.model.symbols().iter().map(|s| s.name()).zip(self.values.iter().copied()).collect()
    }
}

/// Ratios (b1/a1, b2/a2) of the Potts plaquette weights in loop language.
pub fn potts_loop_weights(j1: f64, j2: f64, q: f64) -> Result<(f64, f64), ModelError> {
    if !(q > 0.0) {
        return Err(ModelError::NonPositiveQ(q));
    }
    let e1 = j1.exp_m1();
    let e2 = j2.exp_m1();
    if e1 == 0.0 {
        return Err(ModelError::DegenerateCoupling(j1));
    }
    if e2 == 0.0 {
        return Err(ModelError::DegenerateCoupling(j2));
    }
    let r = q.sqrt();
    Ok((e1 / r, r / e2))
}

/// a = sin u, b = sin(γ − u); the physical range is 0 < u < γ.
pub fn dense_weights(gamma: f64, u: f64) -> WeightSet {
    WeightSet::new(ModelId::DensePotts, &[u.sin(), (gamma - u).sin()], 2.0 * gamma.cos())
}

fn on_integrable_c(eta: C64, phi: C64) -> [C64; 6] {
    let h = C64::new(0.5, 0.0);
    let e32 = eta * 1.5;
    let c = (e32 - phi).cos();
    let t = -(phi * 2.0 - e32).sin() + (eta * 2.5).sin() - e32.sin() - (eta * h).sin();
    let u1 = -eta.sin() * c * 2.0;
    let u2 = -eta.sin() * phi.sin() * 2.0;
    let v = -phi.sin() * c * 2.0;
    let w1 = -(phi - eta).sin() * c * 2.0;
    let w2 = -(eta * h - phi).cos() * phi.sin() * 2.0;
    [t, u1, u2, v, w1, w2]
}

fn c2_integrable_c(eta: C64, phi: C64) -> [C64; 5] {
    let s3 = (phi - eta * 3.0).sin();
    let sp = phi.sin();
    [
        -eta.sin() * s3,
        eta.sin() * sp,
        -sp * s3,
        -(phi - eta).sin() * s3,
        -(phi - eta * 2.0).sin() * sp,
    ]
}

fn re<const N: usize>(w: [C64; N]) -> Vec<f64> {
    w.iter().map(|z| z.re).collect()
}

/// Integrable dilute weights (t, u1, u2, v, w1, w2) at spectral angle φ.
pub fn on_integrable_weights(eta: f64, phi: f64) -> WeightSet {
    let w = re(on_integrable_c(C64::new(eta, 0.0), C64::new(phi, 0.0)));
    WeightSet::new(ModelId::DiluteOn, &w, -2.0 * (2.0 * eta).cos())
}

/// Integrable two-colour weights (u1, u2, v, w1, w2) at spectral angle φ.
pub fn c2_integrable_weights(eta: f64, phi: f64) -> WeightSet {
    let w = re(c2_integrable_c(C64::new(eta, 0.0), C64::new(phi, 0.0)));
    WeightSet::new(ModelId::C2Loop, &w, -2.0 * (2.0 * eta).cos())
}

const STEP: f64 = 1e-20;

/// Unit vector along the integrable weights at the holomorphic spin and
/// embedding angle α. Where every weight vanishes the projective limit
/// along the curve η ↦ w(η, φ(η)) is returned (complex-step derivative).
pub fn integrable_direction(model: ModelId, eta: f64, alpha: f64) -> Vec<f64> {
    let eval = |e: C64| -> Vec<C64> {
        match model {
            ModelId::DiluteOn => {
                let s = e * (1.5 / PI) - 0.5;
                on_integrable_c(e, (s + 1.0) * alpha).to_vec()
            }
            ModelId::C2Loop => {
                let s = (e * 3.0 - PI) / (2.0 * PI);
                c2_integrable_c(e, (s * 2.0 + 1.0) * alpha).to_vec()
            }
            ModelId::DensePotts => panic!("dense weights are parametrised by u, not a curve in eta"),
        }
    };
    let w: Vec<f64> = eval(C64::new(eta, 0.0)).iter().map(|z| z.re).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v = if norm > 1e-10 {
        w
    } else {
        eval(C64::new(eta, STEP)).iter().map(|z| z.im / STEP).collect()
    };
    normalise(&v)
}

pub fn normalise(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// v = 0, n = 1 branch: t = sin πs, u1 = sin(φ − πs), u2 = sin φ and
/// w1 + w2 = sin πs with w1 taking the fraction `w1_share`.
pub fn on_v0_n1_weights(s: f64, phi: f64, w1_share: f64) -> WeightSet {
    let sp = (PI * s).sin();
    WeightSet::new(
        ModelId::DiluteOn,
        &[sp, (phi - PI * s).sin(), phi.sin(), 0.0, w1_share * sp, (1.0 - w1_share) * sp],
        1.0,
    )
}

/// Spin −1 branch: t = −u1 − u2, w1 = −u1, w2 = −u2, v = 0. The fugacity is
/// left free; pass the n you want to pair with the ghost-loop dense model.
pub fn on_v0_dense_weights(u1: f64, u2: f64, n: f64) -> WeightSet {
    WeightSet::new(ModelId::DiluteOn, &[-u1 - u2, u1, u2, 0.0, -u1, -u2], n)
}

pub fn spin_value(model: ModelId, angle: f64) -> f64 {
    match model {
        ModelId::DensePotts => 1.0 - 2.0 * angle / PI,
        ModelId::DiluteOn => 1.5 * angle / PI - 0.5,
        ModelId::C2Loop => (3.0 * angle - PI) / (2.0 * PI),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SixVertex {
    pub omega: [f64; 6],
    pub delta: f64,
}

pub fn six_vertex_map(s: f64, phi: f64) -> SixVertex {
    let a = (phi - PI * s).sin();
    let b = phi.sin();
    let c = (PI * s).sin();
    SixVertex { omega: [a, a, b, b, c, c], delta: (PI * s).cos() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-13
    }

    #[test]
    fn catalog_sizes() {
        assert_eq!(tiles(ModelId::DensePotts).len(), 2);
        assert_eq!(tiles(ModelId::DiluteOn).len(), 9);
        assert_eq!(tiles(ModelId::C2Loop).len(), 10);
        let c2 = tiles(ModelId::C2Loop);
        for t in &c2 {
            if t.symbol == Symbol::W1 || t.symbol == Symbol::W2 {
                assert_eq!(t.strands[0].colour, t.strands[1].colour);
            } else {
                assert_ne!(t.strands[0].colour, t.strands[1].colour);
            }
        }
    }

    #[test]
    fn potts_ratios() {
        let (r1, r2) = potts_loop_weights(3f64.ln(), 3f64.ln(), 4.0).unwrap();
        assert!(close(r1, 1.0) && close(r2, 1.0));
        let (r1, r2) = potts_loop_weights(2f64.ln(), 2f64.ln(), 1.0).unwrap();
        assert!(close(r1, 1.0) && close(r2, 1.0));
        assert!(matches!(potts_loop_weights(0.0, 1.0, 2.0), Err(ModelError::DegenerateCoupling(_))));
        assert!(matches!(potts_loop_weights(1.0, 1.0, 0.0), Err(ModelError::NonPositiveQ(_))));
    }

    #[test]
    fn dense_examples() {
        let g = 0.9;
        let w = dense_weights(g, g / 2.0);
        assert!(close(w.get(Symbol::A), w.get(Symbol::B)));
        let w = dense_weights(g, 0.0);
        assert!(close(w.get(Symbol::A), 0.0) && close(w.get(Symbol::B), g.sin()));
        let w = dense_weights(FRAC_PI_4, PI / 8.0);
        assert!(close(w.fugacity, 2f64.sqrt()));
    }

    #[test]
    fn on_examples() {
        let eta = 0.7;
        let w = on_integrable_weights(eta, 0.0);
        assert!(close(w.get(Symbol::U2), 0.0) && close(w.get(Symbol::V), 0.0) && close(w.get(Symbol::W2), 0.0));
        assert!(close(w.get(Symbol::W1), -w.get(Symbol::U1)));
        let w = on_integrable_weights(eta, eta);
        assert!(close(w.get(Symbol::U1), -2.0 * eta.sin() * (eta / 2.0).cos()));
        assert!(close(w.get(Symbol::W1), 0.0));
    }

    #[test]
    fn c2_examples() {
        let eta = 0.4;
        let w = c2_integrable_weights(eta, 0.0);
        assert!(close(w.get(Symbol::U2), 0.0) && close(w.get(Symbol::V), 0.0) && close(w.get(Symbol::W2), 0.0));
        let w = c2_integrable_weights(eta, 3.0 * eta);
        assert!(close(w.get(Symbol::U1), 0.0) && close(w.get(Symbol::V), 0.0) && close(w.get(Symbol::W1), 0.0));
    }

    #[test]
    fn special_branches() {
        let w = on_v0_n1_weights(0.5, FRAC_PI_4, 0.5);
        assert!(close(w.get(Symbol::T), 1.0));
        assert!(close(w.get(Symbol::U1), -(0.5f64).sqrt()));
        assert!(close(w.get(Symbol::W1) + w.get(Symbol::W2), 1.0));
        let w = on_v0_n1_weights(0.3, 0.3 * PI, 0.5);
        assert!(close(w.get(Symbol::U1), 0.0));
        let w = on_v0_dense_weights(1.0, 1.0, 0.5);
        assert_eq!(w.values(), &[-2.0, 1.0, 1.0, 0.0, -1.0, -1.0]);
        let w = on_v0_dense_weights(1.0, 0.0, 0.5);
        assert_eq!(w.values(), &[-1.0, 1.0, 0.0, 0.0, -1.0, -0.0]);
    }

    #[test]
    fn spins() {
        let s = spin_value(ModelId::DensePotts, FRAC_PI_4);
        assert!(close(s, 0.5));
        assert!(close(2.0 * (PI * s / 2.0).sin(), 2f64.sqrt()));
        assert!(close(spin_value(ModelId::DiluteOn, FRAC_PI_2), 0.25));
        assert!(close(spin_value(ModelId::C2Loop, PI / 3.0), 0.0));
    }

    #[test]
    fn six_vertex() {
        assert!(six_vertex_map(0.5, 1.0).delta.abs() < 1e-15);
        let m = six_vertex_map(1.0 / 3.0, FRAC_PI_2);
        assert!(close(m.omega[0], 0.5) && close(m.omega[2], 1.0) && close(m.omega[4], (PI / 3.0).sin()));
        let m = six_vertex_map(0.25, 0.3);
        assert!(close(m.delta, 0.5f64.sqrt()));
    }

    #[test]
    fn direction_handles_vanishing_weights() {
        // s = −1 puts φ at 0 where every dilute weight vanishes
        let d = integrable_direction(ModelId::DiluteOn, -PI / 3.0, 0.8);
        assert!((d.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let d2 = integrable_direction(ModelId::DiluteOn, 0.6, 0.8);
        let w = on_integrable_weights(0.6, (spin_value(ModelId::DiluteOn, 0.6) + 1.0) * 0.8);
        let n = normalise(w.values());
        assert!(d2.iter().zip(&n).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn json_round_trip() {
        let w = on_integrable_weights(0.5, 0.4);
        let back = WeightSet::from_json(&w.to_json()).unwrap();
        assert_eq!(back.model, w.model);
        for (a, b) in back.values().iter().zip(w.values()) {
            assert_eq!(a, b);
        }
        assert!(w.flip_u().get(Symbol::U1) == -w.get(Symbol::U1));
    }
}
