//! Closed triangulated surfaces in ℝ³.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Triangle mesh of a closed orientable surface.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

/// Summary statistics of a mesh.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MeshStats {
    pub vertices: usize,
    pub faces: usize,
    pub edges: usize,
    pub euler_characteristic: i64,
    pub area: f64,
    pub mean_edge_length: f64,
    pub max_edge_length: f64,
    pub min_angle_degrees: f64,
}

impl SurfaceMesh {
    /// Build and validate a mesh: closed (every edge in exactly two faces),
    /// consistently oriented, min angle above 1°, and no face with area
    /// below 1e-12 of the mean.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = SurfaceMesh { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        if self.faces.is_empty() {
            return Err(Error::InvalidInput("mesh has no faces".into()));
        }
        let nv = self.vertices.len();
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidInput(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateElement { element: fi, reason: "repeated vertex".into() });
            }
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if directed.insert(e, fi).is_some() {
                    return Err(Error::InvalidInput(format!(
                        "edge {}-{} is used twice with the same orientation (non-orientable or non-manifold)",
                        e.0, e.1
                    )));
                }
            }
        }
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                return Err(Error::InvalidInput(format!("boundary edge {a}-{b}: mesh is not closed")));
            }
        }
        let areas: Vec<f64> = (0..self.faces.len()).map(|f| self.face_area(f)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        for (fi, &a) in areas.iter().enumerate() {
            if !(a > 1e-12 * mean) {
                return Err(Error::DegenerateElement { element: fi, reason: format!("area {a:e}") });
            }
            let ang = self.face_min_angle(fi);
            if !(ang > 1f64.to_radians()) {
                return Err(Error::DegenerateElement {
                    element: fi,
                    reason: format!("minimum angle {:.4} degrees", ang.to_degrees()),
                });
            }
        }
        Ok(())
    }

    /// Icosahedron subdivided `subdiv` times and projected to a sphere;
    /// `10·4^subdiv + 2` vertices.
    pub fn icosphere(subdiv: usize, radius: f64) -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vec3> = vec![
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .into_iter()
        .map(normalize)
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdiv {
            let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
                let key = (a.min(b), a.max(b));
                *cache.entry(key).or_insert_with(|| {
                    verts.push(normalize(scale(add(verts[a], verts[b]), 0.5)));
                    verts.len() - 1
                })
            };
            for f in &faces {
                let ab = midpoint(f[0], f[1], &mut vertices);
                let bc = midpoint(f[1], f[2], &mut vertices);
                let ca = midpoint(f[2], f[0], &mut vertices);
                next.push([f[0], ab, ca]);
                next.push([f[1], bc, ab]);
                next.push([f[2], ca, bc]);
                next.push([ab, bc, ca]);
            }
            faces = next;
        }
        let vertices = vertices.into_iter().map(|v| scale(v, radius)).collect();
        SurfaceMesh { vertices, faces }
    }

    /// Apply `x_i ↦ s_i x_i` to every vertex (sphere → ellipsoid).
    pub fn scaled_axes(&self, s: Vec3) -> Result<Self> {
        let vertices = self.vertices.iter().map(|v| [v[0] * s[0], v[1] * s[1], v[2] * s[2]]).collect();
        SurfaceMesh::new(vertices, self.faces.clone())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized normal (twice the area) following the face orientation.
    pub fn face_normal_raw(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        cross(sub(b, a), sub(c, a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * norm(self.face_normal_raw(f))
    }

    pub fn face_barycenter(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        scale(add(add(a, b), c), 1.0 / 3.0)
    }

    fn face_min_angle(&self, f: usize) -> f64 {
        let p = self.face_corners(f);
        (0..3)
            .map(|k| {
                let u = sub(p[(k + 1) % 3], p[k]);
                let v = sub(p[(k + 2) % 3], p[k]);
                (dot(u, v) / (norm(u) * norm(v))).clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Gradients of the three hat functions on face `f` (constant per face).
    pub fn hat_gradients(&self, f: usize) -> [Vec3; 3] {
        let p = self.face_corners(f);
        let nrm = self.face_normal_raw(f);
        let twice_area2 = dot(nrm, nrm);
        let mut out = [[0.0; 3]; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // ∇ψ_k = (n × e_k) / |n|², e_k = opposite edge oriented with the face
            let e = sub(p[(k + 2) % 3], p[(k + 1) % 3]);
            *slot = scale(cross(nrm, e), 1.0 / twice_area2);
        }
        out
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]))))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed enclosed volume (positive when faces are oriented outward).
    pub fn signed_volume(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.face_corners(f);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn stats(&self) -> MeshStats {
        let edges = self.edges();
        let lens: Vec<f64> = edges.iter().map(|&(a, b)| norm(sub(self.vertices[a], self.vertices[b]))).collect();
        MeshStats {
            vertices: self.vertices.len(),
            faces: self.faces.len(),
            edges: edges.len(),
            euler_characteristic: self.euler_characteristic(),
            area: self.total_area(),
            mean_edge_length: lens.iter().sum::<f64>() / lens.len() as f64,
            max_edge_length: lens.iter().copied().fold(0.0, f64::max),
            min_angle_degrees: (0..self.faces.len()).map(|f| self.face_min_angle(f)).fold(f64::INFINITY, f64::min).to_degrees(),
        }
    }

    /// Area-weighted vertex normals pointing towards the enclosed region.
    pub fn inward_vertex_normals(&self) -> Vec<Vec3> {
        let sign = if self.signed_volume() > 0.0 { -1.0 } else { 1.0 };
        let mut acc = vec![[0.0; 3]; self.vertices.len()];
        for (f, face) in self.faces.iter().enumerate() {
            let nrm = self.face_normal_raw(f);
            for &v in face {
                acc[v] = add(acc[v], nrm);
            }
        }
        acc.into_iter().map(|v| scale(normalize(v), sign)).collect()
    }

    /// Parse ASCII OFF text (triangles only).
    pub fn from_off_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, message: &str| Error::MeshFormat { line, message: message.to_string() };
        let (ln, header) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
        let header_rest = header.strip_prefix("OFF").ok_or_else(|| bad(ln, "missing OFF header"))?.trim();
        let (ln, counts) = if header_rest.is_empty() {
            lines.next().ok_or_else(|| bad(ln, "missing counts line"))?
        } else {
            (ln, header_rest)
        };
        let nums: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln, "bad counts line"))?;
        if nums.len() < 2 {
            return Err(bad(ln, "counts line needs vertex and face counts"));
        }
        let (nv, nf) = (nums[0], nums[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "unexpected end of file in vertex list"))?;
            let v: Vec<f64> = l
                .split_whitespace()
                .take(3)
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "bad vertex coordinates"))?;
            if v.len() != 3 || v.iter().any(|x| !x.is_finite()) {
                return Err(bad(ln, "vertex needs three finite coordinates"));
            }
            vertices.push([v[0], v[1], v[2]]);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "unexpected end of file in face list"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "bad face indices"))?;
            if idx.first() != Some(&3) || idx.len() < 4 {
                return Err(bad(ln, "only triangular faces are supported"));
            }
            if idx[1..4].iter().any(|&v| v >= nv) {
                return Err(bad(ln, "face index out of range"));
            }
            faces.push([idx[1], idx[2], idx[3]]);
        }
        SurfaceMesh::new(vertices, faces)
    }

    pub fn read_off(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_off_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_off_string(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.vertices.len(), self.faces.len());
        for v in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]));
        }
        for f in &self.faces {
            s.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        s
    }

    pub fn write_off(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_off_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_area() {
        let m0 = SurfaceMesh::icosphere(0, 1.0);
        assert_eq!((m0.vertices().len(), m0.faces().len()), (12, 20));
        for s in 0..4 {
            let m = SurfaceMesh::icosphere(s, 1.0);
            assert_eq!(m.vertices().len(), 10 * 4usize.pow(s as u32) + 2);
            assert_eq!(m.euler_characteristic(), 2);
            assert!(m.signed_volume() > 0.0);
            SurfaceMesh::new(m.vertices().to_vec(), m.faces().to_vec()).unwrap();
        }
        let m3 = SurfaceMesh::icosphere(3, 1.0);
        assert_eq!(m3.vertices().len(), 642);
        assert!((m3.total_area() / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.005);
    }

    #[test]
    fn off_round_trip_and_errors() {
        let m = SurfaceMesh::icosphere(1, 2.0);
        let back = SurfaceMesh::from_off_str(&m.to_off_string()).unwrap();
        assert_eq!(back, m);
        assert!(matches!(SurfaceMesh::from_off_str("PLY\n"), Err(Error::MeshFormat { .. })));
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(SurfaceMesh::from_off_str(quad), Err(Error::MeshFormat { .. })));
        let open = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        assert!(matches!(SurfaceMesh::from_off_str(open), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hat_gradients_sum_to_zero() {
        let m = SurfaceMesh::icosphere(1, 1.0);
        for f in 0..m.faces().len() {
            let g = m.hat_gradients(f);
            let s = add(add(g[0], g[1]), g[2]);
            assert!(norm(s) < 1e-12);
            let p = m.face_corners(f);
            // ∇ψ_0 · (p_0 − p_1) = 1
            assert!((dot(g[0], sub(p[0], p[1])) - 1.0).abs() < 1e-12);
        }
    }
}
