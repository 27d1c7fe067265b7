//! Exact enumeration of loop configurations on small rhombic domains and
//! the parafermionic observable built from them.
//!
//! The domain is closed by boundary arcs: boundary midpoints are listed
//! counter-clockwise and consecutive pairs (shifted by `offset`) are joined
//! outside the domain. Faces and arcs are both "cells"; every edge midpoint
//! then has exactly two sides, and a configuration is a choice of piece per
//! cell such that the two sides of every midpoint agree.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{build_domain, contour_sum, face_turn, winding_increment, GeometryError, RhombicDomain};
use crate::models::{tiles, Colour, ModelId, Strand, Symbol, WeightSet};

type C64 = Complex64;

/// Default bound on the raw number of piece assignments.
pub const DEFAULT_CAP: u128 = 100_000_000;

const NONE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumError {
    #[error("raw configuration count {count} exceeds the cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("boundary offset must be 0 or 1, got {0}")]
    BadBoundary(usize),
    #[error("beta must lie strictly between 0 and pi, got {0}")]
    BadBeta(f64),
    #[error("partition function vanishes")]
    ZeroPartition,
    #[error("edge {edge} cannot host the origin heading into face {face}")]
    BadOrigin { edge: usize, face: usize },
    #[error("weights are for the {got} model but the lattice enumerates {want}")]
    ModelMismatch { want: ModelId, got: ModelId },
    #[error("pairwise check needs the dense model")]
    NotDense,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellKind {
    Face(usize),
    Arc(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub kind: CellKind,
    /// Edge id behind each slot.
    pub slots: Vec<usize>,
}

/// One way of filling a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub symbol: Option<Symbol>,
    pub strands: Vec<Strand>,
    occ: Vec<u8>,
}

fn occ_code(c: Option<Colour>) -> u8 {
    match c {
        None => 1,
        Some(Colour::Black) => 2,
        Some(Colour::Grey) => 3,
    }
}

impl Piece {
    fn new(symbol: Option<Symbol>, strands: Vec<Strand>, nslots: usize) -> Piece {
        let mut occ = vec![0u8; nslots];
        for s in &strands {
            occ[s.a as usize] = occ_code(s.colour);
            occ[s.b as usize] = occ_code(s.colour);
        }
        Piece { symbol, strands, occ }
    }

    /// 0 for an empty slot, otherwise an occupancy/colour code.
    pub fn occupancy(&self, slot: usize) -> u8 {
        self.occ[slot]
    }
}

pub fn face_pieces(model: ModelId) -> Vec<Piece> {
    tiles(model).into_iter().map(|t| Piece::new(Some(t.symbol), t.strands, 4)).collect()
}

pub fn arc_pieces(model: ModelId) -> Vec<Piece> {
    let s = |c| Strand { a: 0, b: 1, colour: c };
    match model {
        ModelId::DensePotts => vec![Piece::new(None, vec![s(None)], 2)],
        ModelId::DiluteOn => vec![Piece::new(None, vec![], 2), Piece::new(None, vec![s(None)], 2)],
        ModelId::C2Loop => vec![
            Piece::new(None, vec![s(Some(Colour::Black))], 2),
            Piece::new(None, vec![s(Some(Colour::Grey))], 2),
        ],
    }
}

/// Constraint imposed at one midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Both sides agree (the default).
    Match,
    /// Endpoint of an open path (dilute) or colour defect (two-colour).
    Mismatch,
    /// Dilute origin: the given cell side is occupied, the other empty.
    /// For the two-colour model this is a colour defect.
    ExactAhead(usize),
}

#[derive(Debug, Clone)]
pub struct Lattice {
    pub domain: RhombicDomain,
    pub model: ModelId,
    pub beta: f64,
    pub offset: usize,
    pub arcs: Vec<(usize, usize)>,
    pub cells: Vec<Cell>,
    sides: Vec<[(usize, usize); 2]>,
    arc_turns: Vec<f64>,
    order: Vec<usize>,
    complete: Vec<Vec<usize>>,
    face_pieces: Vec<Piece>,
    arc_pieces: Vec<Piece>,
    cap: u128,
}

impl Lattice {
    /// Winding increments are β around α-corners and π − β around the others;
    /// boundary arcs turn as they would in a domain of angle π − β.
    pub fn new(domain: RhombicDomain, model: ModelId, beta: f64, offset: usize) -> Result<Lattice, EnumError> {
        if offset > 1 {
            return Err(EnumError::BadBoundary(offset));
        }
        if !(beta > 0.0 && beta < PI) {
            return Err(EnumError::BadBeta(beta));
        }
        let bnd = domain.boundary_cycle();
        let nb = bnd.len();
        let arcs: Vec<(usize, usize)> = (0..nb / 2).map(|k| (bnd[(2 * k + offset) % nb], bnd[(2 * k + 1 + offset) % nb])).collect();
        let frame = build_domain(domain.rows, domain.cols, PI - beta)?;
        let arc_turns = arcs
            .iter()
            .map(|&(a, b)| {
                let (fa, ka) = frame.edge_faces(a)[0];
                let (fb, kb) = frame.edge_faces(b)[0];
                let d1 = -frame.inward_normal(fa, ka);
                let d2 = frame.inward_normal(fb, kb);
                (d2 / d1).arg().rem_euclid(2.0 * PI)
            })
            .collect();
        let mut cells = Vec::new();
        for (f, fes) in domain.faces.iter().enumerate() {
            cells.push(Cell { kind: CellKind::Face(f), slots: fes.iter().map(|fe| fe.edge).collect() });
        }
        for (i, &(a, b)) in arcs.iter().enumerate() {
            cells.push(Cell { kind: CellKind::Arc(i), slots: vec![a, b] });
        }
        let mut sides = vec![[(NONE, 0); 2]; domain.num_edges()];
        let mut fill = vec![0usize; domain.num_edges()];
        for (ci, c) in cells.iter().enumerate() {
            for (k, &e) in c.slots.iter().enumerate() {
                sides[e][fill[e]] = (ci, k);
                fill[e] += 1;
            }
        }
        debug_assert!(fill.iter().all(|&n| n == 2));
        // faces row-major, each arc right after the last face it touches
        let nf = domain.faces.len();
        let face_of = |e: usize| -> usize { sides[e].iter().map(|&(c, _)| c).filter(|&c| c < nf).max().unwrap() };
        let mut order = Vec::with_capacity(cells.len());
        let mut placed = vec![false; arcs.len()];
        for f in 0..nf {
            order.push(f);
            for (i, &(a, b)) in arcs.iter().enumerate() {
                if !placed[i] && face_of(a).max(face_of(b)) == f {
                    placed[i] = true;
                    order.push(nf + i);
                }
            }
        }
        let mut pos = vec![0usize; cells.len()];
        for (p, &c) in order.iter().enumerate() {
            pos[c] = p;
        }
        let mut complete = vec![Vec::new(); cells.len()];
        for (e, sd) in sides.iter().enumerate() {
            complete[pos[sd[0].0].max(pos[sd[1].0])].push(e);
        }
        Ok(Lattice {
            domain,
            model,
            beta,
            offset,
            arcs,
            cells,
            sides,
            arc_turns,
            order,
            complete,
            face_pieces: face_pieces(model),
            arc_pieces: arc_pieces(model),
            cap: DEFAULT_CAP,
        })
    }

    /// Convenience constructor with β = α and boundary offset 0.
    pub fn standard(rows: usize, cols: usize, alpha: f64, model: ModelId) -> Result<Lattice, EnumError> {
        Lattice::new(build_domain(rows, cols, alpha)?, model, alpha, 0)
    }

    pub fn with_cap(mut self, cap: u128) -> Lattice {
        self.cap = cap;
        self
    }

    pub fn num_faces(&self) -> usize {
        self.domain.faces.len()
    }

    pub fn pieces(&self, cell: usize) -> &[Piece] {
        if cell < self.num_faces() {
            &self.face_pieces
        } else {
            &self.arc_pieces
        }
    }

    /// The two (cell, slot) sides of an edge midpoint.
    pub fn sides(&self, edge: usize) -> [(usize, usize); 2] {
        self.sides[edge]
    }

    /// Turn taken along arc `i` when traversed from its first to its second midpoint.
    pub fn arc_turn(&self, i: usize) -> f64 {
        self.arc_turns[i]
    }

    pub fn raw_count(&self) -> u128 {
        let nf = self.num_faces() as u32;
        let na = self.arcs.len() as u32;
        (self.face_pieces.len() as u128).saturating_pow(nf).saturating_mul((self.arc_pieces.len() as u128).saturating_pow(na))
    }

    fn check_cap(&self) -> Result<(), EnumError> {
        let count = self.raw_count();
        if count > self.cap {
            return Err(EnumError::CapExceeded { count, cap: self.cap });
        }
        Ok(())
    }

    fn rule_ok(&self, rule: Rule, edge: usize, choice: &[usize]) -> bool {
        let [(c1, k1), (c2, k2)] = self.sides[edge];
        let o1 = self.pieces(c1)[choice[c1]].occ[k1];
        let o2 = self.pieces(c2)[choice[c2]].occ[k2];
        match (rule, self.model) {
            (Rule::Match, _) | (_, ModelId::DensePotts) => o1 == o2,
            (Rule::Mismatch, ModelId::DiluteOn) => (o1 == 0) != (o2 == 0),
            (Rule::ExactAhead(ahead), ModelId::DiluteOn) => {
                let (oa, ob) = if c1 == ahead { (o1, o2) } else { (o2, o1) };
                oa != 0 && ob == 0
            }
            (_, ModelId::C2Loop) => o1 != 0 && o2 != 0 && o1 != o2,
        }
    }

    /// Calls `f` with the piece index chosen for every cell, once per
    /// configuration consistent with `rules` (Match wherever unspecified).
    pub fn for_each_choice<F: FnMut(&[usize])>(&self, rules: &[(usize, Rule)], mut f: F) -> Result<(), EnumError> {
        self.check_cap()?;
        let mut rule_of = vec![Rule::Match; self.domain.num_edges()];
        for &(e, r) in rules {
            rule_of[e] = r;
        }
        let mut choice = vec![0usize; self.cells.len()];
        self.rec(0, &rule_of, &mut choice, &mut f);
        Ok(())
    }

    fn rec<F: FnMut(&[usize])>(&self, p: usize, rules: &[Rule], choice: &mut Vec<usize>, f: &mut F) {
        if p == self.order.len() {
            f(choice);
            return;
        }
        let cell = self.order[p];
        for opt in 0..self.pieces(cell).len() {
            choice[cell] = opt;
            if self.complete[p].iter().all(|&e| self.rule_ok(rules[e], e, choice)) {
                self.rec(p + 1, rules, choice, f);
            }
        }
    }

    pub fn strand_graph(&self, choice: &[usize]) -> StrandGraph {
        let mut g = StrandGraph::new(self.domain.num_edges());
        for (ci, cell) in self.cells.iter().enumerate() {
            for s in &self.pieces(ci)[choice[ci]].strands {
                g.push(StrandRec {
                    cell: ci,
                    slot_a: s.a,
                    slot_b: s.b,
                    pa: cell.slots[s.a as usize],
                    pb: cell.slots[s.b as usize],
                    colour: s.colour,
                });
            }
        }
        g
    }

    pub fn tile_weight(&self, choice: &[usize], w: &WeightSet) -> f64 {
        (0..self.num_faces()).map(|f| w.get(self.face_pieces[choice[f]].symbol.expect("faces carry a symbol"))).product()
    }

    /// Winding picked up by one step of a traced strand.
    pub fn step_turn(&self, step: &Step) -> f64 {
        match self.cells[step.cell].kind {
            CellKind::Face(_) => winding_increment(face_turn(step.entry as usize, step.exit as usize), self.beta)
                .expect("a step always changes slot"),
            CellKind::Arc(i) => {
                if step.entry == 0 {
                    self.arc_turns[i]
                } else {
                    -self.arc_turns[i]
                }
            }
        }
    }

    /// Midpoints visited from `start` along the strand lying in `cell`,
    /// with the accumulated winding at each.
    pub fn trace(&self, g: &StrandGraph, start: usize, cell: usize, stop: Option<usize>) -> Vec<(usize, f64)> {
        let Some(s0) = g.strand_in_cell(start, cell) else {
            return vec![];
        };
        let mut theta = 0.0;
        g.walk(start, s0, stop)
            .iter()
            .map(|st| {
                theta += self.step_turn(st);
                (st.point, theta)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrandRec {
    pub cell: usize,
    pub slot_a: u8,
    pub slot_b: u8,
    pub pa: usize,
    pub pb: usize,
    pub colour: Option<Colour>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub cell: usize,
    pub entry: u8,
    pub exit: u8,
    /// Point reached at the end of the step.
    pub point: usize,
}

/// Strands joined at shared points. Each point carries at most two strand ends.
#[derive(Debug, Clone)]
pub struct StrandGraph {
    pub strands: Vec<StrandRec>,
    at: Vec<[usize; 2]>,
}

impl StrandGraph {
    pub fn new(npoints: usize) -> StrandGraph {
        StrandGraph { strands: Vec::new(), at: vec![[NONE; 2]; npoints] }
    }

    pub fn push(&mut self, s: StrandRec) {
        let id = self.strands.len();
        for p in [s.pa, s.pb] {
            let slot = if self.at[p][0] == NONE { 0 } else { 1 };
            assert_eq!(self.at[p][slot], NONE, "more than two strand ends at point {p}");
            self.at[p][slot] = id;
        }
        self.strands.push(s);
    }

    pub fn degree(&self, p: usize) -> usize {
        self.at[p].iter().filter(|&&x| x != NONE).count()
    }

    pub fn is_occupied(&self, p: usize) -> bool {
        self.degree(p) > 0
    }

    /// Strands with an end at `p`.
    pub fn ends(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        self.at[p].iter().copied().filter(|&s| s != NONE)
    }

    pub fn strand_in_cell(&self, p: usize, cell: usize) -> Option<usize> {
        self.at[p].iter().copied().find(|&s| s != NONE && self.strands[s].cell == cell)
    }

    fn other(&self, p: usize, s: usize) -> Option<usize> {
        self.at[p].iter().copied().find(|&x| x != NONE && x != s)
    }

    /// Follows strands from `start` along `s0` until returning to `start`,
    /// reaching `stop`, or hitting a dead end.
    pub fn walk(&self, start: usize, s0: usize, stop: Option<usize>) -> Vec<Step> {
        let mut out = Vec::new();
        let (mut s, mut p) = (s0, start);
        loop {
            let r = &self.strands[s];
            let (entry, exit, next) = if r.pa == p { (r.slot_a, r.slot_b, r.pb) } else { (r.slot_b, r.slot_a, r.pa) };
            out.push(Step { cell: r.cell, entry, exit, point: next });
            if next == start || Some(next) == stop {
                break;
            }
            match self.other(next, s) {
                Some(n) => {
                    s = n;
                    p = next;
                }
                None => break,
            }
            if out.len() > self.strands.len() {
                unreachable!("walk revisited a strand");
            }
        }
        out
    }

    /// Number of closed cycles. Components with a free end are paths.
    pub fn closed_loops(&self) -> usize {
        self.loops_by_colour().iter().sum()
    }

    /// Closed cycles grouped by the colour of their first strand
    /// (`[uncoloured or black, grey]`).
    pub fn loops_by_colour(&self) -> [usize; 2] {
        let mut seen = vec![false; self.strands.len()];
        let mut out = [0usize; 2];
        for s0 in 0..self.strands.len() {
            if seen[s0] {
                continue;
            }
            let mut closed = true;
            let mut stack = vec![s0];
            while let Some(s) = stack.pop() {
                if seen[s] {
                    continue;
                }
                seen[s] = true;
                let r = self.strands[s];
                for p in [r.pa, r.pb] {
                    match self.other(p, s) {
                        Some(n) => stack.push(n),
                        None => closed = false,
                    }
                }
            }
            if closed {
                let k = if self.strands[s0].colour == Some(Colour::Grey) { 1 } else { 0 };
                out[k] += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopConfiguration {
    /// Tile id per face.
    pub tiles: Vec<usize>,
    /// Piece index per boundary arc.
    pub arcs: Vec<usize>,
    pub closed_loops: usize,
    pub loops_by_colour: [usize; 2],
    pub weight: f64,
}

/// Every consistent configuration with its loop count and Boltzmann weight.
pub fn enumerate(lat: &Lattice, w: &WeightSet) -> Result<Vec<LoopConfiguration>, EnumError> {
    check_model(lat, w)?;
    let nf = lat.num_faces();
    let mut out = Vec::new();
    lat.for_each_choice(&[], |ch| {
        let g = lat.strand_graph(ch);
        let loops = g.loops_by_colour();
        let nl = loops[0] + loops[1];
        out.push(LoopConfiguration {
            tiles: ch[..nf].to_vec(),
            arcs: ch[nf..].to_vec(),
            closed_loops: nl,
            loops_by_colour: loops,
            weight: lat.tile_weight(ch, w) * w.fugacity.powi(nl as i32),
        });
    })?;
    Ok(out)
}

pub fn partition_function(lat: &Lattice, w: &WeightSet) -> Result<f64, EnumError> {
    check_model(lat, w)?;
    let mut z = 0.0;
    lat.for_each_choice(&[], |ch| {
        let g = lat.strand_graph(ch);
        z += lat.tile_weight(ch, w) * w.fugacity.powi(g.closed_loops() as i32);
    })?;
    Ok(z)
}

fn check_model(lat: &Lattice, w: &WeightSet) -> Result<(), EnumError> {
    if lat.model != w.model {
        return Err(EnumError::ModelMismatch { want: lat.model, got: w.model });
    }
    Ok(())
}

/// The marked point 0: an edge midpoint and the face the traced strand
/// enters first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MarkedPoint {
    pub edge: usize,
    pub ahead_face: usize,
}

impl MarkedPoint {
    /// Bottom-left boundary edge, heading into the domain.
    pub fn boundary_default() -> MarkedPoint {
        MarkedPoint { edge: 0, ahead_face: 0 }
    }

    pub fn validate(&self, d: &RhombicDomain) -> Result<(), EnumError> {
        let bad = EnumError::BadOrigin { edge: self.edge, face: self.ahead_face };
        if self.edge >= d.num_edges() {
            return Err(bad);
        }
        if d.edge_faces(self.edge).iter().any(|&(f, _)| f == self.ahead_face) {
            Ok(())
        } else {
            Err(bad)
        }
    }

    /// Unit vector along which the traced strand leaves 0.
    pub fn direction(&self, d: &RhombicDomain) -> C64 {
        let (_, k) = d.edge_faces(self.edge).into_iter().find(|&(f, _)| f == self.ahead_face).expect("validated");
        d.inward_normal(self.ahead_face, k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableField {
    pub values: Vec<C64>,
    pub spin: f64,
    pub origin: MarkedPoint,
    pub partition_function: f64,
    pub configurations: u64,
}

impl ObservableField {
    pub fn get(&self, edge: usize) -> Option<C64> {
        self.values.get(edge).copied()
    }
}

fn other_side(lat: &Lattice, edge: usize, cell: usize) -> usize {
    let [(c1, _), (c2, _)] = lat.sides(edge);
    if c1 == cell {
        c2
    } else {
        c1
    }
}

/// F_s(z) = Σ P(G) e^{−isθ(z)} over configurations joining 0 to z.
///
/// * dense: 0 and z on the same loop; θ traced from 0 into the ahead face.
/// * dilute: an open path from 0 (entering the ahead face) ending at z.
///   F(0) is the probability that 0 is empty.
/// * two-colour: colour defects at 0 and z; θ is the sum of the windings
///   traced from 0 to z through each of the two cells at 0. F(0) = 1.
pub fn observable(lat: &Lattice, w: &WeightSet, s: f64, origin: MarkedPoint) -> Result<ObservableField, EnumError> {
    check_model(lat, w)?;
    origin.validate(&lat.domain)?;
    let ne = lat.domain.num_edges();
    let ahead = origin.ahead_face;
    let behind = other_side(lat, origin.edge, ahead);
    let phase = |th: f64| C64::from_polar(1.0, -s * th);

    let mut z = 0.0;
    let mut count = 0u64;
    let mut acc = vec![C64::new(0.0, 0.0); ne];
    let mut empty_origin = 0.0;
    lat.for_each_choice(&[], |ch| {
        let g = lat.strand_graph(ch);
        let wt = lat.tile_weight(ch, w) * w.fugacity.powi(g.closed_loops() as i32);
        z += wt;
        count += 1;
        match lat.model {
            ModelId::DensePotts => {
                for (p, th) in lat.trace(&g, origin.edge, ahead, None) {
                    if p != origin.edge {
                        acc[p] += phase(th) * wt;
                    }
                }
            }
            ModelId::DiluteOn => {
                if !g.is_occupied(origin.edge) {
                    empty_origin += wt;
                }
            }
            ModelId::C2Loop => {}
        }
    })?;
    if z == 0.0 || !z.is_finite() {
        return Err(EnumError::ZeroPartition);
    }

    match lat.model {
        ModelId::DensePotts => acc[origin.edge] = C64::new(z, 0.0),
        ModelId::DiluteOn => acc[origin.edge] = C64::new(empty_origin, 0.0),
        ModelId::C2Loop => acc[origin.edge] = C64::new(z, 0.0),
    }
    if lat.model != ModelId::DensePotts {
        let targets: Vec<usize> = (0..ne).filter(|&e| e != origin.edge).collect();
        let parts: Vec<Result<(usize, C64, u64), EnumError>> = targets
            .par_iter()
            .map(|&target| {
                let origin_rule = match lat.model {
                    ModelId::DiluteOn => Rule::ExactAhead(ahead),
                    _ => Rule::Mismatch,
                };
                let rules = [(origin.edge, origin_rule), (target, Rule::Mismatch)];
                let mut sum = C64::new(0.0, 0.0);
                let mut n = 0u64;
                lat.for_each_choice(&rules, |ch| {
                    let g = lat.strand_graph(ch);
                    let wt = lat.tile_weight(ch, w) * w.fugacity.powi(g.closed_loops() as i32);
                    let theta = match lat.model {
                        ModelId::DiluteOn => {
                            let path = lat.trace(&g, origin.edge, ahead, None);
                            let &(end, th) = path.last().expect("origin is occupied on the ahead side");
                            debug_assert_eq!(end, target);
                            th
                        }
                        _ => [ahead, behind]
                            .iter()
                            .map(|&c| {
                                let path = lat.trace(&g, origin.edge, c, Some(target));
                                let &(end, th) = path.last().expect("origin carries two strands");
                                debug_assert_eq!(end, target);
                                th
                            })
                            .sum(),
                    };
                    sum += phase(theta) * wt;
                    n += 1;
                })?;
                Ok((target, sum, n))
            })
            .collect();
        for part in parts {
            let (t, v, _) = part?;
            acc[t] = v;
        }
    }
    Ok(ObservableField {
        values: acc.into_iter().map(|v| v / z).collect(),
        spin: s,
        origin,
        partition_function: z,
        configurations: count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceResidual {
    pub face: usize,
    pub origin_adjacent: bool,
    pub residual: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoloReport {
    pub per_face: Vec<FaceResidual>,
    pub interior_max: f64,
    pub origin_adjacent_max: f64,
}

/// Contour sum on every face, split into faces touching the origin edge
/// and the rest.
pub fn holo_residual_report(field: &ObservableField, domain: &RhombicDomain) -> Result<HoloReport, EnumError> {
    let mut per_face = Vec::new();
    let (mut imax, mut omax) = (0.0f64, 0.0f64);
    for (f, fes) in domain.faces.iter().enumerate() {
        let r = contour_sum(domain, f, |e| field.get(e))?;
        let adj = fes.iter().any(|fe| fe.edge == field.origin.edge);
        if adj {
            omax = omax.max(r.norm());
        } else {
            imax = imax.max(r.norm());
        }
        per_face.push(FaceResidual { face: f, origin_adjacent: adj, residual: r });
    }
    Ok(HoloReport { per_face, interior_max: imax, origin_adjacent_max: omax })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCase {
    /// The a-tile member has one more loop: P(G′)/b = P(G)/(a√Q).
    ExtraLoopOnA,
    /// The b-tile member has one more loop: P(G′)/(b√Q) = P(G)/a.
    ExtraLoopOnB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRecord {
    pub case: PairCase,
    /// Relative violation of the probability ratio for this pair.
    pub ratio_residual: f64,
    /// Sum of both members' contributions to the contour sum at the face.
    pub contribution_sum: C64,
    /// Whether the strand through 0 reaches the face.
    pub visits_face: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub face: usize,
    pub pairs: Vec<PairRecord>,
    pub other_loop_changes: usize,
    pub max_ratio_residual: f64,
    pub max_pair_sum: f64,
}

/// Groups dense configurations into pairs differing only at `face` and
/// checks the weight ratios and the cancellation of their contour terms.
pub fn pairwise_cancellation_check(lat: &Lattice, w: &WeightSet, s: f64, origin: MarkedPoint, face: usize) -> Result<PairReport, EnumError> {
    if lat.model != ModelId::DensePotts {
        return Err(EnumError::NotDense);
    }
    check_model(lat, w)?;
    origin.validate(&lat.domain)?;
    let z = partition_function(lat, w)?;
    if z == 0.0 {
        return Err(EnumError::ZeroPartition);
    }
    let (a, b, q) = (w.get(Symbol::A), w.get(Symbol::B), w.fugacity);
    // key: choices with `face` masked out
    let mut groups: std::collections::BTreeMap<Vec<usize>, [Option<(f64, usize, C64, bool)>; 2]> = Default::default();
    lat.for_each_choice(&[], |ch| {
        let g = lat.strand_graph(ch);
        let nl = g.closed_loops();
        let p = lat.tile_weight(ch, w) * q.powi(nl as i32) / z;
        let path = lat.trace(&g, origin.edge, origin.ahead_face, None);
        let mut contrib = C64::new(0.0, 0.0);
        let mut visits = false;
        for (k, fe) in lat.domain.faces[face].iter().enumerate() {
            let th = if fe.edge == origin.edge { Some(0.0) } else { path.iter().find(|x| x.0 == fe.edge).map(|x| x.1) };
            if let Some(th) = th {
                visits = true;
                contrib += C64::from_polar(p, -s * th) * lat.domain.edge_vector(face, k);
            }
        }
        let mut key = ch.to_vec();
        key[face] = NONE;
        groups.entry(key).or_default()[ch[face]] = Some((p, nl, contrib, visits));
    })?;
    let mut pairs = Vec::new();
    let mut other = 0;
    for (_, g) in groups {
        let (Some((pa, la, ca, va)), Some((pb, lb, cb, vb))) = (g[0], g[1]) else { continue };
        let scale = pa.abs().max(pb.abs()).max(f64::MIN_POSITIVE);
        let (case, res) = if la == lb + 1 {
            // G carries a, G′ carries b
            (PairCase::ExtraLoopOnA, (pb / b - pa / (a * q)).abs() * a.abs().min(b.abs()) / scale)
        } else if lb == la + 1 {
            (PairCase::ExtraLoopOnB, (pb / (b * q) - pa / a).abs() * a.abs().min(b.abs()) / scale)
        } else {
            other += 1;
            continue;
        };
        pairs.push(PairRecord { case, ratio_residual: res, contribution_sum: ca + cb, visits_face: va || vb });
    }
    let max_ratio_residual = pairs.iter().map(|p| p.ratio_residual).fold(0.0, f64::max);
    let max_pair_sum = pairs.iter().map(|p| p.contribution_sum.norm()).fold(0.0, f64::max);
    Ok(PairReport { face, pairs, other_loop_changes: other, max_ratio_residual, max_pair_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{dense_weights, on_integrable_weights};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn dense_counts() {
        let lat = Lattice::standard(1, 1, FRAC_PI_2, ModelId::DensePotts).unwrap();
        let w = dense_weights(0.7, 0.3);
        assert_eq!(enumerate(&lat, &w).unwrap().len(), 2);
        let lat = Lattice::standard(2, 2, FRAC_PI_2, ModelId::DensePotts).unwrap();
        let ones = WeightSet::new(ModelId::DensePotts, &[1.0, 1.0], 1.0);
        assert_eq!(partition_function(&lat, &ones).unwrap(), 16.0);
        let lat = Lattice::standard(2, 3, 1.0, ModelId::DensePotts).unwrap();
        assert_eq!(enumerate(&lat, &ones).unwrap().len(), 64);
    }

    #[test]
    fn one_by_one_loop_counts() {
        // offset 0 joins (bottom, right) and (top, left) outside the face
        let q = 1.3;
        let (a, b) = (0.4, 0.9);
        let lat = Lattice::standard(1, 1, 1.0, ModelId::DensePotts).unwrap();
        let w = WeightSet::new(ModelId::DensePotts, &[a, b], q);
        let z = partition_function(&lat, &w).unwrap();
        assert!((z - (b * q * q + a * q)).abs() < 1e-14);
        let lat = Lattice::new(build_domain(1, 1, 1.0).unwrap(), ModelId::DensePotts, 1.0, 1).unwrap();
        let z = partition_function(&lat, &w).unwrap();
        assert!((z - (b * q + a * q * q)).abs() < 1e-14);
    }

    #[test]
    fn dilute_one_by_one() {
        let w = WeightSet::new(ModelId::DiluteOn, &[0.3, 0.5, 0.7, 1.1, 1.3, 1.7], 0.6);
        let n = w.fugacity;
        let lat = Lattice::standard(1, 1, 1.0, ModelId::DiluteOn).unwrap();
        let z = partition_function(&lat, &w).unwrap();
        assert!((z - (0.3 + 2.0 * n * 0.5 + n * n * 1.3 + n * 1.7)).abs() < 1e-14);
        let lat = Lattice::new(build_domain(1, 1, 1.0).unwrap(), ModelId::DiluteOn, 1.0, 1).unwrap();
        let z = partition_function(&lat, &w).unwrap();
        assert!((z - (0.3 + 2.0 * n * 0.7 + n * 1.3 + n * n * 1.7)).abs() < 1e-14);
    }

    #[test]
    fn closed_loops_wind_once() {
        for &(alpha, beta) in &[(FRAC_PI_2, FRAC_PI_2), (0.7, 0.7), (2.1, 0.4)] {
            let lat = Lattice::new(build_domain(2, 2, alpha).unwrap(), ModelId::DensePotts, beta, 0).unwrap();
            lat.for_each_choice(&[], |ch| {
                let g = lat.strand_graph(ch);
                for s0 in 0..g.strands.len() {
                    let steps = g.walk(g.strands[s0].pa, s0, None);
                    let total: f64 = steps.iter().map(|st| lat.step_turn(st)).sum();
                    assert!((total.abs() - 2.0 * PI).abs() < 1e-12, "total {total}");
                }
            })
            .unwrap();
        }
    }

    #[test]
    fn cap_is_enforced() {
        let lat = Lattice::standard(3, 3, 1.0, ModelId::DiluteOn).unwrap();
        let w = on_integrable_weights(0.5, 0.4);
        assert!(matches!(partition_function(&lat, &w), Err(EnumError::CapExceeded { .. })));
        assert!(Lattice::new(build_domain(1, 1, 1.0).unwrap(), ModelId::DiluteOn, 1.0, 2).is_err());
        assert!(Lattice::new(build_domain(1, 1, 1.0).unwrap(), ModelId::DiluteOn, 0.0, 0).is_err());
    }

    #[test]
    fn model_mismatch() {
        let lat = Lattice::standard(1, 1, 1.0, ModelId::DiluteOn).unwrap();
        assert!(matches!(partition_function(&lat, &dense_weights(0.5, 0.2)), Err(EnumError::ModelMismatch { .. })));
    }

    #[test]
    fn origin_value_and_zero_spin() {
        let lat = Lattice::standard(2, 2, 1.0, ModelId::DensePotts).unwrap();
        let w = dense_weights(0.8, 0.3);
        let o = MarkedPoint::boundary_default();
        let f = observable(&lat, &w, 0.0, o).unwrap();
        assert!((f.values[o.edge] - C64::new(1.0, 0.0)).norm() < 1e-15);
        // s = 0: F is the probability of sharing the loop through 0
        for e in 0..lat.domain.num_edges() {
            assert!(f.values[e].im.abs() < 1e-15);
            assert!(f.values[e].re > -1e-15 && f.values[e].re < 1.0 + 1e-15);
        }
        assert!(MarkedPoint { edge: 0, ahead_face: 3 }.validate(&lat.domain).is_err());
    }
}
