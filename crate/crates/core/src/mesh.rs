//! Zero-set extraction on regular grids: marching squares in the plane and
//! marching tetrahedra in space.
//!
//! Each grid cube is split into six tetrahedra along its main diagonal, so
//! every cell case is unambiguous and neighbouring cubes share faces
//! consistently. Planar saddle cells are resolved with the bilinear
//! asymptotic decider.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::MultiPoly;
use crate::region::BBox;
use crate::unionfind::UnionFind;

pub const MIN_RES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Cells {
    Segments(Vec<[usize; 2]>),
    Triangles(Vec<[usize; 3]>),
}

/// A curve (dimension 2) or a surface (dimension 3). Planar vertices have a
/// zero third coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    pub cells: Cells,
}

impl Mesh {
    pub fn cell_count(&self) -> usize {
        match &self.cells {
            Cells::Segments(s) => s.len(),
            Cells::Triangles(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count() == 0
    }

    fn cell_vertices(&self) -> Vec<Vec<usize>> {
        match &self.cells {
            Cells::Segments(s) => s.iter().map(|c| c.to_vec()).collect(),
            Cells::Triangles(t) => t.iter().map(|c| c.to_vec()).collect(),
        }
    }
}

struct EdgeVertices {
    index: HashMap<(usize, usize), usize>,
    vertices: Vec<[f64; 3]>,
}

impl EdgeVertices {
    fn new() -> Self {
        EdgeVertices {
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    /// Crossing on the grid edge `(a, b)`; `va` and `vb` have opposite signs.
    fn get(&mut self, a: usize, b: usize, pa: [f64; 3], pb: [f64; 3], va: f64, vb: f64) -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let t = va / (va - vb);
        let p = [0, 1, 2].map(|c| pa[c] + t * (pb[c] - pa[c]));
        self.vertices.push(p);
        self.index.insert(key, self.vertices.len() - 1);
        self.vertices.len() - 1
    }
}

/// Extracts `{p = 0}` inside `bbox` on a grid with `res` cells per axis.
pub fn extract_isosurface(p: &MultiPoly, bbox: &BBox, res: usize) -> Result<Mesh> {
    let dim = bbox.dim();
    if p.nvars() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.nvars(),
        });
    }
    if !(2..=3).contains(&dim) {
        return Err(Error::NotSupported(format!(
            "meshing needs 2 or 3 variables, got {dim}"
        )));
    }
    if res < MIN_RES {
        return Err(Error::InvalidArgument(format!("mesh resolution must be at least {MIN_RES}, got {res}")));
    }
    let axes = bbox.axes(res);
    let mut vals = p.eval_grid(&axes)?;
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bump = if vmax > 0.0 { 1e-12 * vmax } else { 1e-300 };
    for v in vals.iter_mut() {
        if *v == 0.0 {
            *v = bump;
        }
    }
    let n = res + 1;
    check_faces(&vals, dim, n)?;

    let point = |idx: &[usize]| -> [f64; 3] {
        let mut q = [0.0; 3];
        for (c, &i) in idx.iter().enumerate() {
            q[c] = axes[c][i];
        }
        q
    };
    let weld_tol = 1e-6 * (0..dim).map(|a| (bbox.extent(a) / res as f64).powi(2)).sum::<f64>().sqrt();
    let mut ev = EdgeVertices::new();
    let mesh = if dim == 2 {
        let mut segs = Vec::new();
        for i in 0..res {
            for j in 0..res {
                march_square(i, j, n, &vals, &point, &mut ev, &mut segs);
            }
        }
        Mesh {
            dim,
            vertices: ev.vertices,
            cells: Cells::Segments(segs),
        }
    } else {
        let mut tris = Vec::new();
        for i in 0..res {
            for j in 0..res {
                for l in 0..res {
                    march_cube(i, j, l, n, &vals, &point, &mut ev, &mut tris);
                }
            }
        }
        Mesh {
            dim,
            vertices: ev.vertices,
            cells: Cells::Triangles(tris),
        }
    };
    Ok(weld(mesh, weld_tol))
}

/// The zero set must not cross the box: all face samples share one sign.
fn check_faces(vals: &[f64], dim: usize, n: usize) -> Result<()> {
    let dims = vec![n; dim];
    let mut idx = vec![0; dim];
    let mut sign = None;
    for (flat, v) in vals.iter().enumerate() {
        crate::region::unravel(flat, &dims, &mut idx);
        if idx.iter().any(|&i| i == 0 || i == n - 1) {
            let s = *v > 0.0;
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return Err(Error::TouchesBoundary),
                _ => {}
            }
        }
    }
    Ok(())
}

fn march_square<F: Fn(&[usize]) -> [f64; 3]>(
    i: usize,
    j: usize,
    n: usize,
    vals: &[f64],
    point: &F,
    ev: &mut EdgeVertices,
    segs: &mut Vec<[usize; 2]>,
) {
    // corners 00, 10, 11, 01 counter-clockwise
    let ids = [i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1];
    let idx = [[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]];
    let v = ids.map(|g| vals[g]);
    let pos = v.map(|x| x > 0.0);
    let mut cross = |e: usize| -> usize {
        let (a, b) = (e, (e + 1) % 4);
        ev.get(ids[a], ids[b], point(&idx[a]), point(&idx[b]), v[a], v[b])
    };
    // edge e joins corner e and corner e + 1
    let edges: Vec<usize> = (0..4).filter(|&e| pos[e] != pos[(e + 1) % 4]).collect();
    match edges.len() {
        2 => {
            let s = [cross(edges[0]), cross(edges[1])];
            segs.push(s);
        }
        4 => {
            let saddle = (v[0] * v[2] - v[1] * v[3]) / (v[0] + v[2] - v[1] - v[3]);
            // cut off the two corners whose sign differs from the saddle
            let isolated = if (saddle > 0.0) == pos[0] { [1, 3] } else { [0, 2] };
            for c in isolated {
                let s = [cross((c + 3) % 4), cross(c)];
                segs.push(s);
            }
        }
        _ => {}
    }
}

/// The six tetrahedra of a cube split along the diagonal from corner 0 to 7.
/// Corner bits are (axis0, axis1, axis2).
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

#[allow(clippy::too_many_arguments)]
fn march_cube<F: Fn(&[usize]) -> [f64; 3]>(
    i: usize,
    j: usize,
    l: usize,
    n: usize,
    vals: &[f64],
    point: &F,
    ev: &mut EdgeVertices,
    tris: &mut Vec<[usize; 3]>,
) {
    let corner = |c: usize| [i + (c >> 2 & 1), j + (c >> 1 & 1), l + (c & 1)];
    let gid = |c: usize| {
        let q = corner(c);
        (q[0] * n + q[1]) * n + q[2]
    };
    let cv: [f64; 8] = std::array::from_fn(|c| vals[gid(c)]);
    if cv.iter().all(|&x| x > 0.0) || cv.iter().all(|&x| x < 0.0) {
        return;
    }
    for tet in TETS {
        let v = tet.map(|c| cv[c]);
        let neg: Vec<usize> = (0..4).filter(|&a| v[a] < 0.0).collect();
        let posv: Vec<usize> = (0..4).filter(|&a| v[a] > 0.0).collect();
        if neg.is_empty() || posv.is_empty() {
            continue;
        }
        let mut cross = |a: usize, b: usize| {
            ev.get(gid(tet[a]), gid(tet[b]), point(&corner(tet[a])), point(&corner(tet[b])), v[a], v[b])
        };
        let mut local = Vec::new();
        match (neg.len(), posv.len()) {
            (1, 3) | (3, 1) => {
                let (lone, rest) = if neg.len() == 1 { (neg[0], &posv) } else { (posv[0], &neg) };
                local.push([cross(lone, rest[0]), cross(lone, rest[1]), cross(lone, rest[2])]);
            }
            _ => {
                let (a, b, c, d) = (neg[0], neg[1], posv[0], posv[1]);
                let (ac, ad, bd, bc) = (cross(a, c), cross(a, d), cross(b, d), cross(b, c));
                local.push([ac, ad, bd]);
                local.push([ac, bd, bc]);
            }
        }
        // orient normals from the negative side towards the positive side
        let centroid = |set: &[usize]| {
            let mut s = [0.0; 3];
            for &a in set {
                let q = point(&corner(tet[a]));
                for c in 0..3 {
                    s[c] += q[c] / set.len() as f64;
                }
            }
            s
        };
        let (cn, cp) = (centroid(&neg), centroid(&posv));
        let up = [0, 1, 2].map(|c| cp[c] - cn[c]);
        for mut t in local {
            if dot(&normal(&ev.vertices, &t), &up) < 0.0 {
                t.swap(1, 2);
            }
            tris.push(t);
        }
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normal(vs: &[[f64; 3]], t: &[usize; 3]) -> [f64; 3] {
    let (a, b, c) = (vs[t[0]], vs[t[1]], vs[t[2]]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]]
}

/// Merges vertices closer than `tol`, then drops degenerate and duplicate
/// cells and unreferenced vertices.
fn weld(mesh: Mesh, tol: f64) -> Mesh {
    let nv = mesh.vertices.len();
    let mut uf = UnionFind::new(nv);
    if tol > 0.0 {
        let key = |p: &[f64; 3]| p.map(|c| (c / tol).floor() as i64);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in mesh.vertices.iter().enumerate() {
            buckets.entry(key(p)).or_default().push(i);
        }
        for (i, p) in mesh.vertices.iter().enumerate() {
            let k = key(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(b) = buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            for &j in b {
                                if j > i && dist3(p, &mesh.vertices[j]) <= tol {
                                    uf.union(i, j);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let rep: Vec<usize> = (0..nv).map(|i| uf.find(i)).collect();
    let mut seen = BTreeSet::new();
    let mut keep = |c: &[usize]| -> Option<Vec<usize>> {
        let mapped: Vec<usize> = c.iter().map(|&v| rep[v]).collect();
        let mut sorted = mapped.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() < mapped.len() || !seen.insert(sorted) {
            return None;
        }
        Some(mapped)
    };
    let kept: Vec<Vec<usize>> = mesh.cell_vertices().iter().filter_map(|c| keep(c)).collect();

    let mut new_index = vec![usize::MAX; nv];
    let mut vertices = Vec::new();
    let mut remap = |v: usize| {
        if new_index[v] == usize::MAX {
            new_index[v] = vertices.len();
            vertices.push(mesh.vertices[v]);
        }
        new_index[v]
    };
    let cells = match mesh.cells {
        Cells::Segments(_) => Cells::Segments(kept.iter().map(|c| [remap(c[0]), remap(c[1])]).collect()),
        Cells::Triangles(_) => {
            Cells::Triangles(kept.iter().map(|c| [remap(c[0]), remap(c[1]), remap(c[2])]).collect())
        }
    };
    Mesh {
        dim: mesh.dim,
        vertices,
        cells,
    }
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Undirected edges of a triangle mesh with their incidence counts.
fn edge_counts(tris: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for t in tris {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn referenced_vertices(mesh: &Mesh) -> usize {
    let set: BTreeSet<usize> = mesh.cell_vertices().into_iter().flatten().collect();
    set.len()
}

/// `V - E` for curves, `V - E + F` for surfaces. Surface edges shared by more
/// than two triangles are an error.
pub fn euler_char(mesh: &Mesh) -> Result<i64> {
    let v = referenced_vertices(mesh) as i64;
    match &mesh.cells {
        Cells::Segments(s) => Ok(v - s.len() as i64),
        Cells::Triangles(t) => {
            let counts = edge_counts(t);
            let mut bad: Vec<(&(usize, usize), &usize)> = counts.iter().filter(|(_, &c)| c > 2).collect();
            bad.sort();
            if let Some((&(a, b), &c)) = bad.first() {
                return Err(Error::NonManifoldEdge(a, b, c));
            }
            Ok(v - counts.len() as i64 + t.len() as i64)
        }
    }
}

/// Number of edges (segments for curves).
pub fn edge_count(mesh: &Mesh) -> usize {
    match &mesh.cells {
        Cells::Segments(s) => s.len(),
        Cells::Triangles(t) => edge_counts(t).len(),
    }
}

/// Whether every surface edge has exactly two triangles (every curve vertex
/// exactly two segments).
pub fn is_closed(mesh: &Mesh) -> bool {
    match &mesh.cells {
        Cells::Segments(s) => {
            let mut deg = vec![0usize; mesh.vertices.len()];
            for c in s {
                deg[c[0]] += 1;
                deg[c[1]] += 1;
            }
            deg.iter().all(|&d| d == 0 || d == 2)
        }
        Cells::Triangles(t) => edge_counts(t).values().all(|&c| c == 2),
    }
}

fn labels(mesh: &Mesh) -> Vec<usize> {
    let mut uf = UnionFind::new(mesh.vertices.len());
    for c in mesh.cell_vertices() {
        for w in c.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    (0..mesh.vertices.len()).map(|i| uf.find(i)).collect()
}

pub fn component_count(mesh: &Mesh) -> usize {
    let lab = labels(mesh);
    let roots: BTreeSet<usize> = mesh.cell_vertices().iter().map(|c| lab[c[0]]).collect();
    roots.len()
}

/// Connected components as separate meshes, ordered by smallest original
/// vertex index.
pub fn split_components(mesh: &Mesh) -> Vec<Mesh> {
    let lab = labels(mesh);
    let mut groups: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for c in mesh.cell_vertices() {
        let r = lab[c[0]];
        let s = *slot.entry(r).or_insert_with(|| {
            groups.push((r, Vec::new()));
            groups.len() - 1
        });
        groups[s].1.push(c);
    }
    groups
        .into_iter()
        .map(|(_, cells)| {
            let mut index = HashMap::new();
            let mut vertices = Vec::new();
            let mut map = |v: usize| {
                *index.entry(v).or_insert_with(|| {
                    vertices.push(mesh.vertices[v]);
                    vertices.len() - 1
                })
            };
            let cells = match mesh.cells {
                Cells::Segments(_) => Cells::Segments(cells.iter().map(|c| [map(c[0]), map(c[1])]).collect()),
                Cells::Triangles(_) => {
                    Cells::Triangles(cells.iter().map(|c| [map(c[0]), map(c[1]), map(c[2])]).collect())
                }
            };
            Mesh {
                dim: mesh.dim,
                vertices,
                cells,
            }
        })
        .collect()
}

/// Wavefront OBJ text with 1-based face indices.
pub fn to_obj(mesh: &Mesh) -> Result<String> {
    let Cells::Triangles(tris) = &mesh.cells else {
        return Err(Error::NotSupported("OBJ export needs a surface mesh".into()));
    };
    if tris.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let mut out = String::new();
    for v in &mesh.vertices {
        writeln!(out, "v {:?} {:?} {:?}", v[0], v[1], v[2]).expect("write to string");
    }
    for t in tris {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).expect("write to string");
    }
    Ok(out)
}

pub fn export_obj(mesh: &Mesh, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_obj(mesh)?)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub components: usize,
}

pub fn summarize(mesh: &Mesh) -> Result<MeshSummary> {
    let faces = match &mesh.cells {
        Cells::Segments(_) => 0,
        Cells::Triangles(t) => t.len(),
    };
    Ok(MeshSummary {
        vertices: referenced_vertices(mesh),
        edges: edge_count(mesh),
        faces,
        euler: euler_char(mesh)?,
        components: component_count(mesh),
    })
}
