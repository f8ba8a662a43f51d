//! Poincaré–Reeb graphs of planar regions by a vertical sweep.
//!
//! The region is cut by lines `x1 = c`. Each slice is a sorted list of
//! intervals; a vertex is placed wherever the interval count changes, and
//! every interval track between two vertices becomes an edge.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::construct::Hypersurface;
use crate::error::{Error, Result};
use crate::polynomial::MultiPoly;
use crate::region::{linspace, PointClass, Region};
use crate::roots::isolate_roots;
use crate::unionfind::UnionFind;

pub const MIN_SWEEP_RES: usize = 64;
pub const DEFAULT_SWEEP_RES: usize = 512;
/// Width to which event abscissae are bisected.
pub const EVENT_TOL: f64 = 1e-9;
const SLICE_SAMPLES: usize = 1024;
const SLICE_ROOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub c: f64,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Birth,
    Death,
    Split,
    Merge,
}

impl EventKind {
    pub fn degree(self) -> usize {
        match self {
            EventKind::Birth | EventKind::Death => 1,
            EventKind::Split | EventKind::Merge => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebVertex {
    pub x: f64,
    pub y: f64,
    pub kind: EventKind,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReebEdge {
    pub from: usize,
    pub to: usize,
    pub track: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebGraph {
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<ReebEdge>,
    pub components: usize,
    pub betti1: i64,
    /// Sweep direction in degrees from the `x1` axis.
    pub sweep_angle: f64,
}

impl ReebGraph {
    /// `(V, E, betti1)`.
    pub fn shape(&self) -> (usize, usize, i64) {
        (self.vertices.len(), self.edges.len(), self.betti1)
    }
}

/// Slicer with the boundary polynomials' `x2`-derivatives cached.
struct Slicer<'a> {
    region: &'a Region,
    derivs: Vec<MultiPoly>,
    lo: f64,
    hi: f64,
}

impl<'a> Slicer<'a> {
    fn new(region: &'a Region) -> Result<Self> {
        if region.dim() != 2 {
            return Err(Error::NotSupported(format!(
                "sweeps need a planar region, got dimension {}",
                region.dim()
            )));
        }
        let derivs = region
            .boundary_polys()
            .iter()
            .map(|p| p.partial_derivative(1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Slicer {
            region,
            derivs,
            lo: region.bbox().min()[1],
            hi: region.bbox().max()[1],
        })
    }

    fn slice(&self, c: f64) -> Result<Slice> {
        let mut zeros = vec![self.lo, self.hi];
        for (p, d) in self.region.boundary_polys().iter().zip(&self.derivs) {
            zeros.extend(isolate_roots(
                |t| p.eval_unchecked(&[c, t]),
                |t| d.eval_unchecked(&[c, t]),
                self.lo,
                self.hi,
                SLICE_SAMPLES,
                SLICE_ROOT_TOL,
            ));
        }
        zeros.sort_by(f64::total_cmp);
        zeros.dedup();
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for w in zeros.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let class = self.region.classify_point(&[c, mid], f64::MIN_POSITIVE).map_err(|e| match e {
                Error::Ambiguous { indices } => Error::NonGenericSweep {
                    at: c,
                    message: format!("near-tangency of boundary polynomials {indices:?} at x2 = {mid}; perturb the sweep position"),
                },
                other => other,
            })?;
            if class == PointClass::Interior {
                match intervals.last_mut() {
                    Some(last) if last.1 == a => last.1 = b,
                    _ => intervals.push((a, b)),
                }
            }
        }
        Ok(Slice { c, intervals })
    }
}

/// The slice `{x2 : (c, x2) ∈ N̄}` of a planar region.
pub fn slice_region(r: &Region, c: f64) -> Result<Slice> {
    Slicer::new(r)?.slice(c)
}

fn overlaps(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Brackets `(before, after)` of width at most [`EVENT_TOL`] around every
/// count change inside `[a, b]`, in sweep order.
fn find_events(slicer: &Slicer, a: Slice, b: Slice, out: &mut Vec<(Slice, Slice)>) -> Result<()> {
    let (na, nb) = (a.intervals.len(), b.intervals.len());
    if na == nb {
        return Ok(());
    }
    if b.c - a.c <= EVENT_TOL {
        if na.abs_diff(nb) >= 2 {
            return Err(Error::NonGenericSweep {
                at: 0.5 * (a.c + b.c),
                message: format!("interval count jumps from {na} to {nb}"),
            });
        }
        out.push((a, b));
        return Ok(());
    }
    let mid = slicer.slice(0.5 * (a.c + b.c))?;
    find_events(slicer, a, mid.clone(), out)?;
    find_events(slicer, mid, b, out)
}

struct Builder {
    vertices: Vec<ReebVertex>,
    edges: Vec<ReebEdge>,
    next_track: usize,
    /// Origin vertex of each active interval, in slice order.
    active: Vec<usize>,
}

impl Builder {
    fn end_track(&mut self, origin: usize, to: usize) {
        self.edges.push(ReebEdge {
            from: origin,
            to,
            track: self.next_track,
        });
        self.next_track += 1;
    }

    fn event(&mut self, before: &Slice, after: &Slice) -> Result<()> {
        let x = 0.5 * (before.c + after.c);
        let (bi, ai) = (&before.intervals, &after.intervals);
        let hits = |iv: (f64, f64), set: &[(f64, f64)]| -> Vec<usize> {
            (0..set.len()).filter(|&j| overlaps(iv, set[j])).collect()
        };
        let bad = |msg: &str| Error::NonGenericSweep {
            at: x,
            message: msg.to_string(),
        };
        let id = self.vertices.len();
        let mut next = Vec::with_capacity(ai.len());
        if ai.len() == bi.len() + 1 {
            if let Some(born) = (0..ai.len()).find(|&j| hits(ai[j], bi).is_empty()) {
                let mid = 0.5 * (ai[born].0 + ai[born].1);
                self.vertices.push(ReebVertex { x, y: mid, kind: EventKind::Birth, degree: 1 });
                let mut old = self.active.iter();
                for j in 0..ai.len() {
                    next.push(if j == born { id } else { *old.next().ok_or_else(|| bad("track mismatch"))? });
                }
            } else if let Some(split) = (0..bi.len()).find(|&j| hits(bi[j], ai).len() == 2) {
                let parts = hits(bi[split], ai);
                let y = 0.5 * (ai[parts[0]].1 + ai[parts[1]].0);
                self.vertices.push(ReebVertex { x, y, kind: EventKind::Split, degree: 3 });
                self.end_track(self.active[split], id);
                for j in 0..bi.len() {
                    if j == split {
                        next.extend([id, id]);
                    } else {
                        next.push(self.active[j]);
                    }
                }
            } else {
                return Err(bad("count increases without a birth or a split"));
            }
        } else if bi.len() == ai.len() + 1 {
            if let Some(dead) = (0..bi.len()).find(|&j| hits(bi[j], ai).is_empty()) {
                let mid = 0.5 * (bi[dead].0 + bi[dead].1);
                self.vertices.push(ReebVertex { x, y: mid, kind: EventKind::Death, degree: 1 });
                self.end_track(self.active[dead], id);
                next.extend((0..bi.len()).filter(|&j| j != dead).map(|j| self.active[j]));
            } else if let Some(merged) = (0..ai.len()).find(|&j| hits(ai[j], bi).len() == 2) {
                let parts = hits(ai[merged], bi);
                let y = 0.5 * (bi[parts[0]].1 + bi[parts[1]].0);
                self.vertices.push(ReebVertex { x, y, kind: EventKind::Merge, degree: 3 });
                self.end_track(self.active[parts[0]], id);
                self.end_track(self.active[parts[1]], id);
                for j in 0..bi.len() {
                    if j == parts[0] {
                        next.push(id);
                    } else if j != parts[1] {
                        next.push(self.active[j]);
                    }
                }
            } else {
                return Err(bad("count decreases without a death or a merge"));
            }
        } else {
            return Err(bad("interval count jumps by two or more"));
        }
        self.active = next;
        Ok(())
    }
}

/// Sweeps `r` along `x1` at `sweep_res` cells.
pub fn poincare_reeb(r: &Region, sweep_res: usize) -> Result<ReebGraph> {
    poincare_reeb_at_angle(r, sweep_res, 0.0)
}

/// Sweeps along the direction at `angle_deg` degrees from the `x1` axis.
pub fn poincare_reeb_at_angle(r: &Region, sweep_res: usize, angle_deg: f64) -> Result<ReebGraph> {
    if sweep_res < MIN_SWEEP_RES {
        return Err(Error::InvalidArgument(format!(
            "sweep resolution must be at least {MIN_SWEEP_RES}, got {sweep_res}"
        )));
    }
    let rotated;
    let region = if angle_deg == 0.0 {
        r
    } else {
        rotated = r.rotated(angle_deg.to_radians())?;
        &rotated
    };
    let slicer = Slicer::new(region)?;
    let bbox = region.bbox();
    let cs = linspace(bbox.min()[0], bbox.max()[0], sweep_res);
    let slices = cs.iter().map(|&c| slicer.slice(c)).collect::<Result<Vec<_>>>()?;
    if !slices[0].intervals.is_empty() || !slices[sweep_res].intervals.is_empty() {
        return Err(Error::TouchesBoundary);
    }

    let mut b = Builder {
        vertices: Vec::new(),
        edges: Vec::new(),
        next_track: 0,
        active: Vec::new(),
    };
    for w in slices.windows(2) {
        let mut brackets = Vec::new();
        find_events(&slicer, w[0].clone(), w[1].clone(), &mut brackets)?;
        for (before, after) in &brackets {
            b.event(before, after)?;
        }
    }
    if !b.active.is_empty() {
        return Err(Error::TouchesBoundary);
    }

    let mut degree = vec![0usize; b.vertices.len()];
    for e in &b.edges {
        degree[e.from] += 1;
        degree[e.to] += 1;
    }
    for (v, d) in b.vertices.iter().zip(&degree) {
        if v.degree != *d {
            return Err(Error::NonGenericSweep {
                at: v.x,
                message: format!("{:?} vertex has degree {d}", v.kind),
            });
        }
    }
    let mut uf = UnionFind::new(b.vertices.len());
    for e in &b.edges {
        uf.union(e.from, e.to);
    }
    let mut roots: Vec<usize> = (0..b.vertices.len()).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len();
    let betti1 = b.edges.len() as i64 - b.vertices.len() as i64 + components as i64;
    Ok(ReebGraph {
        vertices: b.vertices,
        edges: b.edges,
        components,
        betti1,
        sweep_angle: angle_deg,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReeb {
    pub graph: ReebGraph,
    pub justification: String,
}

const COMPOSITION_NOTE: &str = "fibers over interior points are connected spheres and fibers over boundary points are single points, \
so connected components of the level sets of x1 on the hypersurface correspond one-to-one with those of x1 on the closed region; \
the Reeb graph of the composition equals the Poincaré–Reeb graph of the region";

/// Reeb graph of `x1` composed with the projection of the hypersurface.
/// Needs a planar region and `k ≥ 2`, so that fibers are connected.
pub fn reeb_of_composition(h: &Hypersurface, sweep_res: usize, angle_deg: f64) -> Result<CompositionReeb> {
    if h.k() < 2 {
        return Err(Error::NotSupported(
            "k = 1 gives two-point fibers; the composed Reeb graph is that of the doubled region".into(),
        ));
    }
    if h.n() != 2 {
        return Err(Error::NotSupported(format!("sweeps need a planar region, got dimension {}", h.n())));
    }
    Ok(CompositionReeb {
        graph: poincare_reeb_at_angle(h.region(), sweep_res, angle_deg)?,
        justification: COMPOSITION_NOTE.to_string(),
    })
}

/// Undirected DOT text with one node per vertex.
pub fn to_dot(g: &ReebGraph) -> String {
    let mut out = String::from("graph reeb {\n");
    for (i, v) in g.vertices.iter().enumerate() {
        writeln!(out, "  v{i} [label=\"{:?} x1={:?}\"];", v.kind, v.x).expect("write to string");
    }
    for e in &g.edges {
        writeln!(out, "  v{} -- v{} [label=\"t{}\"];", e.from, e.to, e.track).expect("write to string");
    }
    out.push_str("}\n");
    out
}

pub fn export_dot(g: &ReebGraph, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_dot(g))?;
    Ok(())
}
