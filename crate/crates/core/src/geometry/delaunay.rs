//! Incremental Bowyer-Watson Delaunay triangulation with Voronoi cell
//! extraction and per-nucleus circumradii.
//!
//! Inputs are perturbed by a deterministic jitter of `1e-9` times the region
//! diameter before triangulating, which resolves cocircular and duplicate
//! configurations without exact-arithmetic predicates. Circumcenters are
//! computed in coordinates relative to a triangle vertex to avoid
//! cancellation on large regions.

use super::ppp::PointPattern;
use super::GeometryError;
use crate::mix_seed;
use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

const INVALID: u32 = u32::MAX;
const JITTER_SALT: u64 = 0x9d8f_33aa_0c61_7b02;
const JITTER_SCALE: f64 = 1e-9;
/// Super-triangle half-extent as a multiple of the point cloud extent.
const SUPER_SCALE: f64 = 1e4;
/// Default guard depth in units of `1/sqrt(pi*intensity)` within which cells
/// are flagged as boundary-affected.
const GUARD_FACTOR: f64 = 3.0;

/// Circumradius of one Voronoi cell, or a marker that the cell is unbounded
/// or close enough to the region edge that its radius cannot be trusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellRadius {
    Interior(f64),
    Boundary,
}

/// A realized point pattern with its Delaunay triangles, per-nucleus Voronoi
/// vertices (triangle circumcenters, angle-ordered), and cell circumradii.
#[derive(Debug, Clone)]
pub struct Tessellation {
    pub pattern: PointPattern,
    pub triangles: Vec<[usize; 3]>,
    pub cell_vertices: Vec<Vec<[f64; 2]>>,
    pub circumradii: Vec<CellRadius>,
}

impl Tessellation {
    /// Writes a plain-text debug listing: one record per line, space-separated
    /// reals. Two-field lines are Voronoi vertices `x y`; four-field lines are
    /// Voronoi edges `x1 y1 x2 y2` (segments between circumcenters of
    /// adjacent triangles).
    pub fn export_text<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let centers: Vec<[f64; 2]> = self.triangles.iter().map(|t| circumcenter_of(self, t)).collect();
        for c in &centers {
            writeln!(out, "{} {}", c[0], c[1])?;
        }
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                if let Some(&other) = edge_map.get(&key) {
                    let p = centers[other];
                    let q = centers[ti];
                    writeln!(out, "{} {} {} {}", p[0], p[1], q[0], q[1])?;
                } else {
                    edge_map.insert(key, ti);
                }
            }
        }
        Ok(())
    }
}

fn circumcenter_of(t: &Tessellation, tri: &[usize; 3]) -> [f64; 2] {
    let pts = &t.pattern.points;
    circumcircle(pts[tri[0]], pts[tri[1]], pts[tri[2]]).0
}

/// Circumcenter and squared circumradius; the arithmetic runs in coordinates
/// relative to `a`. Degenerate (collinear) triples map to an infinite radius.
fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> ([f64; 2], f64) {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let d = 2.0 * (bx * cy - by * cx);
    if d == 0.0 {
        return ([a[0], a[1]], f64::INFINITY);
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], ux * ux + uy * uy)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[derive(Debug, Clone)]
struct Tri {
    v: [u32; 3],
    /// Neighbor across the edge opposite `v[i]`, or `INVALID` on the hull.
    nb: [u32; 3],
    cc: [f64; 2],
    rr_sq: f64,
    alive: bool,
}

struct Triangulator {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    hint: u32,
}

impl Triangulator {
    fn new(points: &[[f64; 2]], diameter: f64) -> Self {
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len() + 3);
        // deterministic jitter against cocircular/duplicate degeneracies
        for (i, p) in points.iter().enumerate() {
            let h = mix_seed(JITTER_SALT, i as u64);
            let jx = ((h & 0xffff_ffff) as f64 / u32::MAX as f64 - 0.5) * JITTER_SCALE * diameter;
            let jy = ((h >> 32) as f64 / u32::MAX as f64 - 0.5) * JITTER_SCALE * diameter;
            pts.push([p[0] + jx, p[1] + jy]);
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pts {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(diameter * 1e-6).max(1e-12);
        let s = ext * SUPER_SCALE;
        let n_input = pts.len();
        pts.push([cx - 3.0 * s, cy - s]);
        pts.push([cx + 3.0 * s, cy - s]);
        pts.push([cx, cy + 3.0 * s]);

        let sv = [n_input as u32, n_input as u32 + 1, n_input as u32 + 2];
        let (cc, rr_sq) = circumcircle(pts[sv[0] as usize], pts[sv[1] as usize], pts[sv[2] as usize]);
        let root = Tri { v: sv, nb: [INVALID; 3], cc, rr_sq, alive: true };
        Triangulator { pts, tris: vec![root], hint: 0 }
    }

    fn in_circumcircle(&self, tri: u32, p: [f64; 2]) -> bool {
        let t = &self.tris[tri as usize];
        if t.rr_sq.is_infinite() {
            return true;
        }
        let dx = p[0] - t.cc[0];
        let dy = p[1] - t.cc[1];
        dx * dx + dy * dy < t.rr_sq
    }

    /// Visibility walk from the hint triangle; falls back to a linear scan if
    /// the walk cycles (possible only on near-degenerate geometry).
    fn locate(&self, p: [f64; 2]) -> Result<u32, GeometryError> {
        let mut cur = self.hint;
        if !self.tris[cur as usize].alive {
            cur = self
                .tris
                .iter()
                .position(|t| t.alive)
                .map(|i| i as u32)
                .ok_or(GeometryError::LocationFailed)?;
        }
        let max_steps = 64 + 2 * self.tris.len();
        for _ in 0..max_steps {
            let t = &self.tris[cur as usize];
            let mut moved = false;
            for i in 0..3 {
                let a = self.pts[t.v[(i + 1) % 3] as usize];
                let b = self.pts[t.v[(i + 2) % 3] as usize];
                if orient(a, b, p) < 0.0 {
                    if t.nb[i] == INVALID {
                        return Ok(cur); // outside hull: super-triangle edge
                    }
                    cur = t.nb[i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return Ok(cur);
            }
        }
        // walk cycled; scan for any triangle whose circumcircle admits p
        for (i, t) in self.tris.iter().enumerate() {
            if t.alive && self.in_circumcircle(i as u32, p) {
                return Ok(i as u32);
            }
        }
        Err(GeometryError::LocationFailed)
    }

    fn insert(&mut self, point_index: u32) -> Result<(), GeometryError> {
        let p = self.pts[point_index as usize];
        let start = self.locate(p)?;

        // grow the cavity of circumcircle-violating triangles; the located
        // triangle contains p and is always part of it
        let mut bad: Vec<u32> = Vec::with_capacity(8);
        let mut bad_set: HashSet<u32> = HashSet::new();
        let mut visited: HashSet<u32> = HashSet::new();
        let mut stack = vec![start];
        visited.insert(start);
        while let Some(ti) = stack.pop() {
            if ti != start && !self.in_circumcircle(ti, p) {
                continue;
            }
            bad.push(ti);
            bad_set.insert(ti);
            let nb = self.tris[ti as usize].nb;
            for n in nb {
                if n != INVALID && visited.insert(n) {
                    stack.push(n);
                }
            }
        }

        // cavity boundary: edges of bad triangles facing non-bad territory
        let mut boundary: Vec<(u32, u32, u32)> = Vec::with_capacity(bad.len() + 2);
        for &ti in &bad {
            let t = self.tris[ti as usize].clone();
            for i in 0..3 {
                let n = t.nb[i];
                if n == INVALID || !bad_set.contains(&n) {
                    boundary.push((t.v[(i + 1) % 3], t.v[(i + 2) % 3], n));
                }
            }
        }
        for &ti in &bad {
            self.tris[ti as usize].alive = false;
        }

        // re-triangulate the cavity as a fan around the new point
        let mut edge_link: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        let mut first_new = INVALID;
        for (mut a, mut b, outer) in boundary {
            if orient(p, self.pts[a as usize], self.pts[b as usize]) < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            let (cc, rr_sq) = circumcircle(p, self.pts[a as usize], self.pts[b as usize]);
            let idx = self.tris.len() as u32;
            let mut tri = Tri { v: [point_index, a, b], nb: [outer, INVALID, INVALID], cc, rr_sq, alive: true };
            // patch the outer triangle's back-pointer
            if outer != INVALID {
                let o = &mut self.tris[outer as usize];
                for k in 0..3 {
                    let oa = o.v[(k + 1) % 3];
                    let ob = o.v[(k + 2) % 3];
                    if (oa == a && ob == b) || (oa == b && ob == a) {
                        o.nb[k] = idx;
                    }
                }
            }
            // link to sibling fan triangles across the spokes (p,a) and (p,b);
            // each spoke pairs exactly twice around a simple cavity boundary
            for (slot, (x, y)) in [(2usize, (point_index, a)), (1usize, (b, point_index))] {
                let key = (x.min(y), x.max(y));
                if let Some((other, oslot)) = edge_link.remove(&key) {
                    tri.nb[slot] = other;
                    self.tris[other as usize].nb[oslot] = idx;
                } else {
                    edge_link.insert(key, (idx, slot));
                }
            }
            self.tris.push(tri);
            if first_new == INVALID {
                first_new = idx;
            }
        }
        if first_new == INVALID {
            return Err(GeometryError::LocationFailed);
        }
        self.hint = first_new;
        Ok(())
    }
}

/// Builds the Delaunay/Voronoi tessellation of a pattern with the default
/// boundary guard `3/sqrt(pi*intensity)`.
pub fn build_tessellation(pattern: &PointPattern) -> Result<Tessellation, GeometryError> {
    let guard = GUARD_FACTOR / (std::f64::consts::PI * pattern.intensity).sqrt();
    build_tessellation_with_guard(pattern, guard)
}

/// As [`build_tessellation`] with an explicit guard depth in meters: cells
/// whose nucleus is within `guard_m` of the region edge (or whose cell is
/// unbounded) are flagged [`CellRadius::Boundary`].
pub fn build_tessellation_with_guard(
    pattern: &PointPattern,
    guard_m: f64,
) -> Result<Tessellation, GeometryError> {
    let n = pattern.points.len();
    if n < 3 {
        return Err(GeometryError::TooFewPoints(n));
    }
    collinearity_check(&pattern.points)?;

    let diameter = 2.0 * pattern.region.outer_m;
    let mut tr = Triangulator::new(&pattern.points, diameter);
    for i in 0..n {
        tr.insert(i as u32)?;
    }

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n);
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut unbounded = vec![false; n];
    for (ti, t) in tr.tris.iter().enumerate() {
        if !t.alive {
            continue;
        }
        let finite = t.v.iter().all(|&v| (v as usize) < n);
        for &v in &t.v {
            let vi = v as usize;
            if vi < n {
                if finite {
                    incident[vi].push(ti as u32);
                } else {
                    unbounded[vi] = true;
                }
            }
        }
        if finite {
            triangles.push([t.v[0] as usize, t.v[1] as usize, t.v[2] as usize]);
        }
    }

    let mut cell_vertices: Vec<Vec<[f64; 2]>> = Vec::with_capacity(n);
    let mut circumradii: Vec<CellRadius> = Vec::with_capacity(n);
    for i in 0..n {
        let x = pattern.points[i];
        let mut verts: Vec<[f64; 2]> = incident[i].iter().map(|&t| tr.tris[t as usize].cc).collect();
        verts.sort_by(|p, q| {
            let ap = (p[1] - x[1]).atan2(p[0] - x[0]);
            let aq = (q[1] - x[1]).atan2(q[0] - x[0]);
            ap.total_cmp(&aq)
        });
        let radius = if unbounded[i] || verts.is_empty() || pattern.region.depth(x) < guard_m {
            CellRadius::Boundary
        } else {
            let max_sq = verts
                .iter()
                .map(|v| (v[0] - x[0]).powi(2) + (v[1] - x[1]).powi(2))
                .fold(0.0f64, f64::max);
            CellRadius::Interior(max_sq.sqrt())
        };
        cell_vertices.push(verts);
        circumradii.push(radius);
    }

    Ok(Tessellation { pattern: pattern.clone(), triangles, cell_vertices, circumradii })
}

/// Circumradius of the cell of `nucleus_index`: the maximum distance from the
/// nucleus to its Voronoi vertices, or [`CellRadius::Boundary`] when flagged.
pub fn cell_circumradius(t: &Tessellation, nucleus_index: usize) -> Result<CellRadius, GeometryError> {
    t.circumradii
        .get(nucleus_index)
        .copied()
        .ok_or(GeometryError::BadNucleusIndex { index: nucleus_index, count: t.circumradii.len() })
}

fn collinearity_check(points: &[[f64; 2]]) -> Result<(), GeometryError> {
    let a = points[0];
    let b = match points.iter().find(|p| (p[0] - a[0]).abs() + (p[1] - a[1]).abs() > 0.0) {
        Some(p) => *p,
        None => return Err(GeometryError::CollinearPoints),
    };
    if points.iter().any(|&c| orient(a, b, c) != 0.0) {
        Ok(())
    } else {
        Err(GeometryError::CollinearPoints)
    }
}
