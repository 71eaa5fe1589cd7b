//! Closed triangulated surfaces with body-outward normals and quadrature.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{OseenError, Result};
use crate::geom::Vec3;
use crate::quad::gauss_legendre;
use crate::sum::compensated_sum;

/// Quadrature node on the surface. `normal` points out of the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub pos: Vec3,
    pub normal: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Centroid,
    ThreePoint,
}

/// Triangulated closed surface.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub nodes: Vec<QuadNode>,
    /// Largest triangle diameter, or the node spacing for product rules.
    pub h: f64,
    pub rule: QuadratureRule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let verts = v.iter().map(|&(x, y, z)| Vec3::new(x, y, z).normalize()).collect();
    let tris = vec![
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
    (verts, tris)
}

fn subdivide(verts: &mut Vec<Vec3>, tris: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| {
        let key = (a.min(b), a.max(b));
        *cache.entry(key).or_insert_with(|| {
            verts.push(((verts[a] + verts[b]) * 0.5).normalize());
            verts.len() - 1
        })
    };
    let mut out = Vec::with_capacity(tris.len() * 4);
    for &[a, b, c] in tris {
        let ab = midpoint(a, b, verts);
        let bc = midpoint(b, c, verts);
        let ca = midpoint(c, a, verts);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    out
}

impl SurfaceMesh {
    /// Subdivided icosahedron with `20·4^level` triangles inscribed in the
    /// sphere of the given center and radius.
    pub fn sphere(center: Vec3, radius: f64, level: u32) -> Result<Self> {
        Self::sphere_with_rule(center, radius, level, QuadratureRule::Centroid)
    }

    pub fn sphere_with_rule(
        center: Vec3,
        radius: f64,
        level: u32,
        rule: QuadratureRule,
    ) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(OseenError::Domain(format!("sphere radius must be > 0, got {radius}")));
        }
        let (mut verts, mut tris) = icosahedron();
        for _ in 0..level {
            tris = subdivide(&mut verts, &tris);
        }
        let verts = verts.into_iter().map(|v| center + v * radius).collect();
        Self::from_triangles(verts, tris, rule)
    }

    /// Product rule on the exact sphere: Gauss–Legendre in `cos θ` and the
    /// trapezoidal rule with `2·n_theta` points in `φ`. Exact for spherical
    /// harmonics up to degree `2·n_theta - 1`. Carries no triangles.
    pub fn sphere_gauss(center: Vec3, radius: f64, n_theta: usize) -> Result<Self> {
        if !(radius > 0.0) || n_theta < 2 {
            return Err(OseenError::Domain(
                "sphere_gauss needs radius > 0 and n_theta >= 2".into(),
            ));
        }
        let (xs, ws) = gauss_legendre(n_theta);
        let n_phi = 2 * n_theta;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&c, &w) in xs.iter().zip(ws.iter()) {
            let s = (1.0 - c * c).sqrt();
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                let n = Vec3::new(s * phi.cos(), s * phi.sin(), c);
                nodes.push(QuadNode {
                    pos: center + n * radius,
                    normal: n,
                    weight: w * dphi * radius * radius,
                });
            }
        }
        Ok(Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            nodes,
            h: std::f64::consts::PI * radius / n_theta as f64,
            rule: QuadratureRule::Centroid,
        })
    }

    /// Builds quadrature nodes from a triangulation. The orientation is
    /// flipped if needed so that normals point out of the enclosed volume.
    pub fn from_triangles(
        vertices: Vec<Vec3>,
        mut triangles: Vec<[usize; 3]>,
        rule: QuadratureRule,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(OseenError::Domain("mesh has no triangles".into()));
        }
        for t in &triangles {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(OseenError::Domain(format!("triangle {t:?} indexes past vertex list")));
            }
        }
        let signed_volume = compensated_sum(triangles.iter().map(|&[a, b, c]| {
            vertices[a].dot(&vertices[b].cross(&vertices[c])) / 6.0
        }));
        if signed_volume < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
        let mut nodes = Vec::with_capacity(triangles.len() * 3);
        let mut h: f64 = 0.0;
        for &[a, b, c] in &triangles {
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let cross = (pb - pa).cross(&(pc - pa));
            let area = 0.5 * cross.norm();
            if !(area > 0.0) {
                return Err(OseenError::Domain("degenerate triangle in mesh".into()));
            }
            let normal = cross.normalize();
            h = h.max((pb - pa).norm()).max((pc - pb).norm()).max((pa - pc).norm());
            match rule {
                QuadratureRule::Centroid => nodes.push(QuadNode {
                    pos: (pa + pb + pc) / 3.0,
                    normal,
                    weight: area,
                }),
                QuadratureRule::ThreePoint => {
                    for (wa, wb, wc) in [
                        (2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0),
                        (1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0),
                        (1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0),
                    ] {
                        nodes.push(QuadNode {
                            pos: pa * wa + pb * wb + pc * wc,
                            normal,
                            weight: area / 3.0,
                        });
                    }
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
            nodes,
            h,
            rule,
        })
    }

    pub fn from_file_data(data: MeshFile, rule: QuadratureRule) -> Result<Self> {
        let verts = data.vertices.into_iter().map(Vec3::from).collect();
        Self::from_triangles(verts, data.triangles, rule)
    }

    pub fn load_json(path: impl AsRef<Path>, rule: QuadratureRule) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let data: MeshFile = serde_json::from_str(&text)?;
        Self::from_file_data(data, rule)
    }

    pub fn to_file_data(&self) -> MeshFile {
        MeshFile {
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn total_area(&self) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| n.weight))
    }

    /// `∫_Σ ν_body dS`, zero for a closed surface.
    pub fn normal_integral(&self) -> Vec3 {
        compensated_sum(self.nodes.iter().map(|n| n.normal * n.weight))
    }

    /// Checks closedness relative to the total area.
    pub fn check_closed(&self, tol: f64) -> Result<()> {
        let r = self.normal_integral().norm() / self.total_area();
        if r > tol {
            return Err(OseenError::Domain(format!(
                "surface not closed: |∫ν dS| / area = {r:e}"
            )));
        }
        Ok(())
    }

    pub fn centroid(&self) -> Vec3 {
        compensated_sum(self.nodes.iter().map(|n| n.pos * n.weight)) / self.total_area()
    }

    /// Radius of the smallest origin-centred ball containing all nodes and
    /// vertices.
    pub fn circumradius(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.pos.norm())
            .chain(self.vertices.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }

    pub fn distance_to(&self, x: &Vec3) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.pos - x).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Far-field guard: the point must be at least `2h` from every node.
    pub fn check_far(&self, x: &Vec3) -> Result<()> {
        let dist = self.distance_to(x);
        let required = 2.0 * self.h;
        if dist < required {
            return Err(OseenError::Proximity { dist, required });
        }
        Ok(())
    }
}
