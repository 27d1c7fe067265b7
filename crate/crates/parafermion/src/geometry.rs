//! Rhombic embeddings of a rectangular patch of the square lattice.
//!
//! Vertex `(r, c)` sits at `c + r e^{iα}`. Horizontal edges run along `1`,
//! vertical edges along `e^{iα}`. Each face lists its four edges
//! counter-clockwise starting from the bottom edge:
//!
//! ```text
//!   slot 0: bottom  H(r, c)     traversed forward
//!   slot 1: right   V(r, c+1)   traversed forward
//!   slot 2: top     H(r+1, c)   traversed backward
//!   slot 3: left    V(r, c)     traversed backward
//! ```
//!
//! Corner `k` of a face lies between slots `k` and `k+1`. Corners 1 and 3
//! have interior angle α, corners 0 and 2 have π − α.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("alpha must lie strictly between 0 and pi, got {0}")]
    InvalidAlpha(f64),
    #[error("domain needs at least one row and one column, got {rows}x{cols}")]
    EmptyDomain { rows: usize, cols: usize },
    #[error("no winding increment is defined for a plaquette the curve does not cross")]
    NoTurn,
    #[error("field has no value at edge {0}")]
    MissingValue(usize),
    #[error("face {0} is not part of the domain")]
    UnknownFace(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub row: usize,
    pub col: usize,
    /// Vertex indices; the edge vector is `vertices[to] - vertices[from]`.
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceEdge {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhombicDomain {
    pub rows: usize,
    pub cols: usize,
    pub alpha: f64,
    pub vertices: Vec<C64>,
    pub edges: Vec<Edge>,
    pub midpoints: Vec<C64>,
    pub faces: Vec<[FaceEdge; 4]>,
}

/// Which of the two interior angles a turning curve wraps around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Corner {
    /// Interior angle α.
    Alpha,
    /// Interior angle π − α.
    Supplement,
}

impl Corner {
    /// Corner `k` of a face in the slot convention above.
    pub fn of_index(k: usize) -> Corner {
        if k % 2 == 1 {
            Corner::Alpha
        } else {
            Corner::Supplement
        }
    }

    pub fn angle(self, alpha: f64) -> f64 {
        match self {
            Corner::Alpha => alpha,
            Corner::Supplement => PI - alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Turn {
    Left(Corner),
    Right(Corner),
    Straight,
    None,
}

/// Turn taken by a strand entering a face through `entry` and leaving
/// through `exit` (slot indices).
pub fn face_turn(entry: usize, exit: usize) -> Turn {
    match (exit + 4 - entry) % 4 {
        0 => Turn::None,
        1 => Turn::Right(Corner::of_index(entry)),
        2 => Turn::Straight,
        _ => Turn::Left(Corner::of_index(exit)),
    }
}

/// Signed winding picked up across one plaquette. Wrapping a (π − α)-corner
/// counts ±β and wrapping an α-corner counts ±(π − β); left is positive.
/// β = π − α gives the geometric direction change of a strand crossing
/// edges at right angles. The default β = α is the convention under which
/// the holomorphicity equations take their standard form.
pub fn winding_increment(turn: Turn, beta: f64) -> Result<f64, GeometryError> {
    let mag = |c: Corner| match c {
        Corner::Alpha => PI - beta,
        Corner::Supplement => beta,
    };
    match turn {
        Turn::Left(c) => Ok(mag(c)),
        Turn::Right(c) => Ok(-mag(c)),
        Turn::Straight => Ok(0.0),
        Turn::None => Err(GeometryError::NoTurn),
    }
}

pub fn build_domain(rows: usize, cols: usize, alpha: f64) -> Result<RhombicDomain, GeometryError> {
    if rows == 0 || cols == 0 {
        return Err(GeometryError::EmptyDomain { rows, cols });
    }
    if !(alpha > 0.0 && alpha < PI) {
        return Err(GeometryError::InvalidAlpha(alpha));
    }
    let e = C64::from_polar(1.0, alpha);
    let vid = |r: usize, c: usize| r * (cols + 1) + c;
    let mut vertices = Vec::with_capacity((rows + 1) * (cols + 1));
    for r in 0..=rows {
        for c in 0..=cols {
            vertices.push(C64::new(c as f64, 0.0) + e * r as f64);
        }
    }
    let mut edges = Vec::new();
    for r in 0..=rows {
        for c in 0..cols {
            edges.push(Edge { kind: EdgeKind::H, row: r, col: c, from: vid(r, c), to: vid(r, c + 1) });
        }
    }
    for r in 0..rows {
        for c in 0..=cols {
            edges.push(Edge { kind: EdgeKind::V, row: r, col: c, from: vid(r, c), to: vid(r + 1, c) });
        }
    }
    let midpoints = edges.iter().map(|ed| (vertices[ed.from] + vertices[ed.to]) * 0.5).collect();
    let h = |r: usize, c: usize| r * cols + c;
    let v = |r: usize, c: usize| (rows + 1) * cols + r * (cols + 1) + c;
    let mut faces = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            faces.push([
                FaceEdge { edge: h(r, c), forward: true },
                FaceEdge { edge: v(r, c + 1), forward: true },
                FaceEdge { edge: h(r + 1, c), forward: false },
                FaceEdge { edge: v(r, c), forward: false },
            ]);
        }
    }
    Ok(RhombicDomain { rows, cols, alpha, vertices, edges, midpoints, faces })
}

impl RhombicDomain {
    pub fn h_edge(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn v_edge(&self, r: usize, c: usize) -> usize {
        (self.rows + 1) * self.cols + r * (self.cols + 1) + c
    }

    pub fn face_index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `z_j - z_i` for slot `slot` of `face`, in counter-clockwise order.
    pub fn edge_vector(&self, face: usize, slot: usize) -> C64 {
        let fe = self.faces[face][slot];
        let ed = &self.edges[fe.edge];
        let d = self.vertices[ed.to] - self.vertices[ed.from];
        if fe.forward {
            d
        } else {
            -d
        }
    }

    /// Unit normal pointing into `face` across slot `slot`.
    pub fn inward_normal(&self, face: usize, slot: usize) -> C64 {
        let d = self.edge_vector(face, slot);
        C64::i() * d / d.norm()
    }

    /// Faces adjacent to an edge with the slot the edge occupies in each.
    pub fn edge_faces(&self, edge: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2);
        for (f, fes) in self.faces.iter().enumerate() {
            for (k, fe) in fes.iter().enumerate() {
                if fe.edge == edge {
                    out.push((f, k));
                }
            }
        }
        out
    }

    pub fn is_boundary(&self, edge: usize) -> bool {
        let ed = &self.edges[edge];
        match ed.kind {
            EdgeKind::H => ed.row == 0 || ed.row == self.rows,
            EdgeKind::V => ed.col == 0 || ed.col == self.cols,
        }
    }

    /// Boundary edges in counter-clockwise order, starting at the bottom-left.
    pub fn boundary_cycle(&self) -> Vec<usize> {
        let (r, c) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(2 * (r + c));
        out.extend((0..c).map(|j| self.h_edge(0, j)));
        out.extend((0..r).map(|i| self.v_edge(i, c)));
        out.extend((0..c).rev().map(|j| self.h_edge(r, j)));
        out.extend((0..r).rev().map(|i| self.v_edge(i, 0)));
        out
    }

    pub fn interior_edge_count(&self) -> usize {
        (0..self.num_edges()).filter(|&e| !self.is_boundary(e)).count()
    }

    /// Interior angle of `face` at corner `k`, measured from the embedding.
    pub fn corner_angle(&self, face: usize, k: usize) -> f64 {
        let a = self.edge_vector(face, k);
        let b = self.edge_vector(face, (k + 1) % 4);
        // interior angle is π minus the exterior turn from a to b
        PI - (b / a).arg()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("domain is always serialisable")
    }
}

/// Σ F(midpoint)(z_j − z_i) around `face`, edges counter-clockwise.
pub fn contour_sum<F>(domain: &RhombicDomain, face: usize, field: F) -> Result<C64, GeometryError>
where
    F: Fn(usize) -> Option<C64>,
{
    let fes = domain.faces.get(face).ok_or(GeometryError::UnknownFace(face))?;
    let mut acc = C64::new(0.0, 0.0);
    for (k, fe) in fes.iter().enumerate() {
        let val = field(fe.edge).ok_or(GeometryError::MissingValue(fe.edge))?;
        acc += val * domain.edge_vector(face, k);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn unit_square() {
        let d = build_domain(1, 1, FRAC_PI_2).unwrap();
        assert_eq!(d.faces.len(), 1);
        assert_eq!(d.edges.len(), 4);
        assert_eq!(d.midpoints.len(), 4);
        assert!((d.vertices[3] - C64::new(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rhombi_are_closed_and_equilateral() {
        let d = build_domain(2, 3, PI / 3.0).unwrap();
        assert_eq!(d.faces.len(), 6);
        for f in 0..d.faces.len() {
            let s: C64 = (0..4).map(|k| d.edge_vector(f, k)).sum();
            assert!(s.norm() < 1e-14);
            for k in 0..4 {
                assert!((d.edge_vector(f, k).norm() - 1.0).abs() < 1e-14);
                let want = Corner::of_index(k).angle(d.alpha);
                assert!((d.corner_angle(f, k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interior_edges_shared_twice() {
        let d = build_domain(2, 2, FRAC_PI_2).unwrap();
        assert_eq!(d.interior_edge_count(), 4);
        for e in 0..d.num_edges() {
            let n = d.edge_faces(e).len();
            assert_eq!(n, if d.is_boundary(e) { 1 } else { 2 });
        }
        assert_eq!(d.boundary_cycle().len(), 8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_domain(0, 2, 1.0), Err(GeometryError::EmptyDomain { .. })));
        assert!(matches!(build_domain(1, 1, 0.0), Err(GeometryError::InvalidAlpha(_))));
        assert!(matches!(build_domain(1, 1, PI), Err(GeometryError::InvalidAlpha(_))));
    }

    #[test]
    fn increments() {
        let a = winding_increment(Turn::Left(Corner::Alpha), FRAC_PI_2).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(winding_increment(Turn::Straight, 0.3).unwrap(), 0.0);
        // obtuse corner at α = β = π/3 is the supplement corner
        let b = winding_increment(Turn::Right(Corner::Supplement), PI / 3.0).unwrap();
        assert!((b + PI / 3.0).abs() < 1e-15);
        let c = winding_increment(Turn::Right(Corner::Alpha), PI / 3.0).unwrap();
        assert!((c + 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(winding_increment(Turn::None, 1.0), Err(GeometryError::NoTurn));
    }

    #[test]
    fn face_turn_matches_embedding() {
        // With β = π − α the increments are the geometric direction changes.
        for &alpha in &[0.4, FRAC_PI_2, 2.2] {
            let d = build_domain(1, 1, alpha).unwrap();
            for k in 0..4 {
                for j in 0..4 {
                    if j == k {
                        continue;
                    }
                    let din = d.inward_normal(0, k);
                    let dout = -d.inward_normal(0, j);
                    let geo = (dout / din).arg();
                    let inc = winding_increment(face_turn(k, j), PI - alpha).unwrap();
                    assert!((geo - inc).abs() < 1e-12, "{k}->{j}: {geo} vs {inc}");
                }
            }
        }
    }

    #[test]
    fn contour_of_conjugate() {
        let d = build_domain(1, 1, FRAC_PI_2).unwrap();
        let s = contour_sum(&d, 0, |e| Some(d.midpoints[e].conj())).unwrap();
        assert!((s - C64::new(0.0, 2.0)).norm() < 1e-14);
        assert_eq!(contour_sum(&d, 0, |_| None), Err(GeometryError::MissingValue(0)));
        assert_eq!(contour_sum(&d, 3, |_| Some(C64::new(1.0, 0.0))), Err(GeometryError::UnknownFace(3)));
    }

    #[test]
    fn serialises() {
        let d = build_domain(1, 2, 1.0).unwrap();
        let v = d.to_json();
        assert_eq!(v["faces"].as_array().unwrap().len(), 2);
        assert_eq!(v["vertices"].as_array().unwrap().len(), 6);
    }
}
