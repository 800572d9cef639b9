//! Tensor coefficients on triangle meshes, expressed as ambient 3×3
//! matrices acting on the plane of each face.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::{cross, dot, normalize, scale, SurfaceMesh, Vec3};
use crate::error::{Error, Result};
use crate::hypersurface::{ImmersedHypersurface, SurfaceKind};

pub type Mat3 = [[f64; 3]; 3];

/// Where the coefficient is sampled on each face.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Face barycenter (grids: cell center).
    #[default]
    Barycentric,
    /// Edge midpoints (grids: 2-point Gauss rule per axis).
    ThreePoint,
}

impl Quadrature {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1" | "barycentric" | "one-point" => Ok(Quadrature::Barycentric),
            "3" | "three-point" => Ok(Quadrature::ThreePoint),
            _ => Err(Error::InvalidInput(format!("unknown quadrature '{s}' (barycentric|three-point)"))),
        }
    }
}

/// Closed analytic surface used to evaluate exact shape quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ImplicitSurface {
    Sphere { r: f64 },
    /// `Σ x_i²/a_i² = 1`.
    Ellipsoid { axes: Vec3 },
}

impl ImplicitSurface {
    fn axes(&self) -> Vec3 {
        match self {
            ImplicitSurface::Sphere { r } => [*r; 3],
            ImplicitSurface::Ellipsoid { axes } => *axes,
        }
    }

    /// Radial projection onto the surface.
    pub fn project(&self, x: Vec3) -> Vec3 {
        let a = self.axes();
        let s: f64 = (0..3).map(|i| (x[i] / a[i]).powi(2)).sum::<f64>().sqrt();
        scale(x, 1.0 / s)
    }

    /// Unit normal pointing into the enclosed region at a surface point.
    pub fn inward_normal(&self, y: Vec3) -> Vec3 {
        let a = self.axes();
        normalize([-y[0] / (a[0] * a[0]), -y[1] / (a[1] * a[1]), -y[2] / (a[2] * a[2])])
    }

    /// Shape operator `A = P Hess F P / |∇F|` for `F = Σ x_i²/a_i² − 1`,
    /// as an ambient matrix vanishing on the normal.
    pub fn shape_operator(&self, y: Vec3) -> Mat3 {
        let a = self.axes();
        let grad = [2.0 * y[0] / (a[0] * a[0]), 2.0 * y[1] / (a[1] * a[1]), 2.0 * y[2] / (a[2] * a[2])];
        let gn = dot(grad, grad).sqrt();
        let nu = scale(grad, 1.0 / gn);
        let p = projector(nu);
        let hess = [2.0 / (a[0] * a[0]), 2.0 / (a[1] * a[1]), 2.0 / (a[2] * a[2])];
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| p[i][k] * hess[k] * p[k][j]).sum::<f64>() / gn;
            }
        }
        out
    }

    pub fn newton_p1(&self, y: Vec3) -> Mat3 {
        let a = self.shape_operator(y);
        let h = a[0][0] + a[1][1] + a[2][2];
        let p = projector(self.inward_normal(y));
        mat_from(|i, j| h * p[i][j] - a[i][j])
    }
}

/// Tensor evaluated on an [`ImplicitSurface`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SurfaceTensor {
    Metric,
    ShapeOperator,
    NewtonP1,
}

pub type FaceTensorFn = Arc<dyn Fn(usize, Vec3) -> Mat3 + Send + Sync>;

/// Coefficient provider for mesh assembly.
#[derive(Clone)]
pub enum MeshCoefficient {
    /// `φ = g` (cotangent Laplacian).
    Metric,
    Scaled(f64, Box<MeshCoefficient>),
    /// Exact tensor of an analytic surface at the radial projection of each
    /// quadrature point, rotated into the face plane.
    Analytic { surface: ImplicitSurface, tensor: SurfaceTensor },
    /// `P₁ = H I − A` from interpolated area-weighted vertex normals; usable
    /// on arbitrary closed meshes.
    VertexNormalNewton1,
    /// Ambient matrix per `(face, point)`, projected onto the face plane.
    /// Must be symmetric.
    Custom { label: String, f: FaceTensorFn },
}

impl fmt::Debug for MeshCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl MeshCoefficient {
    pub fn custom(label: impl Into<String>, f: impl Fn(usize, Vec3) -> Mat3 + Send + Sync + 'static) -> Self {
        MeshCoefficient::Custom { label: label.into(), f: Arc::new(f) }
    }

    pub fn scaled(self, s: f64) -> Self {
        MeshCoefficient::Scaled(s, Box::new(self))
    }

    /// Exact `P₁` of a two-dimensional sphere or ellipsoid in ℝ³.
    pub fn newton_p1_of(hs: &ImmersedHypersurface) -> Result<Self> {
        if hs.dim() != 2 || hs.kappa() != 0.0 {
            return Err(Error::InvalidInput("mesh coefficients need a surface in R^3".into()));
        }
        let surface = match hs.kind() {
            SurfaceKind::Sphere { r } => ImplicitSurface::Sphere { r: *r },
            SurfaceKind::Ellipsoid { axes } => ImplicitSurface::Ellipsoid { axes: [axes[0], axes[1], axes[2]] },
            SurfaceKind::GeodesicSphere { alpha, .. } => ImplicitSurface::Sphere { r: 1.0 / alpha },
        };
        Ok(MeshCoefficient::Analytic { surface, tensor: SurfaceTensor::NewtonP1 })
    }

    pub fn label(&self) -> String {
        match self {
            MeshCoefficient::Metric => "metric".into(),
            MeshCoefficient::Scaled(s, inner) => format!("{s}*{}", inner.label()),
            MeshCoefficient::Analytic { surface, tensor } => format!("{tensor:?}({surface:?})"),
            MeshCoefficient::VertexNormalNewton1 => "newton1(vertex-normals)".into(),
            MeshCoefficient::Custom { label, .. } => label.clone(),
        }
    }

    pub(crate) fn prepare<'a>(&'a self, mesh: &'a SurfaceMesh) -> Prepared<'a> {
        let normals = if self.needs_normals() { Some(mesh.inward_vertex_normals()) } else { None };
        Prepared { coef: self, mesh, normals }
    }

    fn needs_normals(&self) -> bool {
        match self {
            MeshCoefficient::VertexNormalNewton1 => true,
            MeshCoefficient::Scaled(_, inner) => inner.needs_normals(),
            _ => false,
        }
    }
}

pub(crate) struct Prepared<'a> {
    coef: &'a MeshCoefficient,
    mesh: &'a SurfaceMesh,
    normals: Option<Vec<Vec3>>,
}

impl Prepared<'_> {
    /// Coefficient on face `f` acting on its plane, averaged over the rule's
    /// points.
    pub fn face_tensor(&self, f: usize, rule: Quadrature) -> Result<Mat3> {
        let [a, b, c] = self.mesh.face_corners(f);
        let pts: Vec<Vec3> = match rule {
            Quadrature::Barycentric => vec![self.mesh.face_barycenter(f)],
            Quadrature::ThreePoint => vec![mid(a, b), mid(b, c), mid(c, a)],
        };
        let w = 1.0 / pts.len() as f64;
        let mut acc = [[0.0; 3]; 3];
        for x in pts {
            let t = self.eval(self.coef, f, x)?;
            for i in 0..3 {
                for j in 0..3 {
                    acc[i][j] += w * t[i][j];
                }
            }
        }
        Ok(acc)
    }

    fn eval(&self, coef: &MeshCoefficient, f: usize, x: Vec3) -> Result<Mat3> {
        let nf = normalize(self.mesh.face_normal_raw(f));
        let pf = projector(nf);
        Ok(match coef {
            MeshCoefficient::Metric => pf,
            MeshCoefficient::Scaled(s, inner) => {
                let t = self.eval(inner, f, x)?;
                mat_from(|i, j| s * t[i][j])
            }
            MeshCoefficient::Analytic { surface, tensor } => {
                let y = surface.project(x);
                let nu = surface.inward_normal(y);
                let t = match tensor {
                    SurfaceTensor::Metric => projector(nu),
                    SurfaceTensor::ShapeOperator => surface.shape_operator(y),
                    SurfaceTensor::NewtonP1 => surface.newton_p1(y),
                };
                let a = if dot(nu, nf) < 0.0 { scale(nu, -1.0) } else { nu };
                let r = rotation_between(a, nf);
                mat_from(|i, j| (0..3).map(|k| (0..3).map(|l| r[i][k] * t[k][l] * r[j][l]).sum::<f64>()).sum())
            }
            MeshCoefficient::VertexNormalNewton1 => {
                let normals = self.normals.as_ref().expect("prepared with normals");
                let grads = self.mesh.hat_gradients(f);
                let face = self.mesh.faces()[f];
                // dN = Σ N_a ⊗ ∇ψ_a, A = −sym(P dN P)
                let dn = mat_from(|i, j| (0..3).map(|k| normals[face[k]][i] * grads[k][j]).sum());
                let pdp = mat_mul(&mat_mul(&pf, &dn), &pf);
                let a = mat_from(|i, j| -0.5 * (pdp[i][j] + pdp[j][i]));
                let h = a[0][0] + a[1][1] + a[2][2];
                mat_from(|i, j| h * pf[i][j] - a[i][j])
            }
            MeshCoefficient::Custom { f: func, .. } => {
                let t = func(f, x);
                let norm = t.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let asym = (0..3)
                    .flat_map(|i| (0..3).map(move |j| (i, j)))
                    .fold(0.0f64, |m, (i, j)| m.max((t[i][j] - t[j][i]).abs()));
                if !(asym <= 1e-12 * norm.max(1.0)) {
                    return Err(Error::NonSymmetricCoefficient { element: f, asymmetry: asym });
                }
                mat_mul(&mat_mul(&pf, &t), &pf)
            }
        })
    }
}

fn mid(a: Vec3, b: Vec3) -> Vec3 {
    [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5, (a[2] + b[2]) * 0.5]
}

pub fn mat_from(f: impl Fn(usize, usize) -> f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = f(i, j);
        }
    }
    m
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    mat_from(|i, j| (0..3).map(|k| a[i][k] * b[k][j]).sum())
}

/// Orthogonal projector onto the plane with unit normal `n`.
pub fn projector(n: Vec3) -> Mat3 {
    mat_from(|i, j| if i == j { 1.0 } else { 0.0 } - n[i] * n[j])
}

/// Rotation taking unit `a` to unit `b` about `a × b` (Rodrigues);
/// requires `a · b > −1`.
pub fn rotation_between(a: Vec3, b: Vec3) -> Mat3 {
    let v = cross(a, b);
    let c = dot(a, b);
    let k = [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]];
    let k2 = mat_mul(&k, &k);
    let f = 1.0 / (1.0 + c);
    mat_from(|i, j| if i == j { 1.0 } else { 0.0 } + k[i][j] + k2[i][j] * f)
}
