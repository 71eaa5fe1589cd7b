//! Volume quadrature over the exterior of a star-shaped body, truncated at a
//! sphere, with a partition of unity that isolates an evaluation point.

use std::f64::consts::PI;

use crate::error::{OseenError, Result};
use crate::geom::Vec3;
use crate::mesh::SurfaceMesh;
use crate::quad::{geometric_edges, GaussRule};

/// Weighted volume node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeNode {
    pub pos: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VolumeRuleOptions {
    /// Gauss–Legendre points in `cos θ`; `2·n_theta` trapezoidal points in `φ`.
    pub n_theta: usize,
    /// Gauss–Legendre points per radial panel.
    pub n_radial: usize,
    /// Width of the first radial panel relative to the inner radius.
    pub first_panel: f64,
    /// Radius of the isolating ball around the evaluation point relative to
    /// its distance from the body.
    pub local_fraction: f64,
    pub local_n_theta: usize,
    pub local_n_radial: usize,
}

impl Default for VolumeRuleOptions {
    fn default() -> Self {
        Self {
            n_theta: 24,
            n_radial: 8,
            first_panel: 0.125,
            local_fraction: 0.5,
            local_n_theta: 16,
            local_n_radial: 16,
        }
    }
}

/// `(1 - (r/a)²)⁴` for `r < a`.
pub fn bump(r: f64, a: f64) -> f64 {
    if r >= a {
        0.0
    } else {
        let q = 1.0 - (r / a).powi(2);
        q * q * q * q
    }
}

/// Distance along the ray `center + s·dir`, `s > 0`, to the first triangle
/// of `mesh`; falls back to the sphere radius for product-rule meshes.
fn ray_exit(mesh: &SurfaceMesh, center: &Vec3, dir: &Vec3) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &[a, b, c] in &mesh.triangles {
        let (p0, p1, p2) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let e1 = p1 - p0;
        let e2 = p2 - p0;
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        if det.abs() < 1e-300 {
            continue;
        }
        let inv = 1.0 / det;
        let s = center - p0;
        let u = s.dot(&h) * inv;
        if !(-1e-12..=1.0 + 1e-12).contains(&u) {
            continue;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < -1e-12 || u + v > 1.0 + 1e-12 {
            continue;
        }
        let t = e2.dot(&q) * inv;
        if t > 0.0 {
            best = Some(best.map_or(t, |b: f64| b.max(t)));
        }
    }
    best
}

/// Nodes for `∫_{Ω ∩ B_R(center)} g(y) dy`, where `Ω` is the exterior of
/// `mesh` (star-shaped about `center`). If `isolate` is given, nodes are
/// split by a smooth bump about that point so that integrands singular
/// there are integrated in local spherical coordinates.
pub fn exterior_rule(
    mesh: Option<&SurfaceMesh>,
    center: &Vec3,
    r_trunc: f64,
    isolate: Option<&Vec3>,
    opts: &VolumeRuleOptions,
) -> Result<Vec<VolumeNode>> {
    let dirs = SurfaceMesh::sphere_gauss(Vec3::zeros(), 1.0, opts.n_theta)?;
    let radial = GaussRule::new(opts.n_radial);
    let inner_default = mesh.map_or(0.0, |m| {
        m.nodes.iter().map(|n| (n.pos - center).norm()).fold(0.0, f64::max)
    });
    let (a, xc) = match isolate {
        Some(x) => {
            let dist = mesh.map_or((x - center).norm(), |m| m.distance_to(x));
            let a = opts.local_fraction * dist;
            if !(a > 0.0) {
                return Err(OseenError::Proximity {
                    dist,
                    required: f64::MIN_POSITIVE,
                });
            }
            (a, Some(*x))
        }
        None => (0.0, None),
    };
    let mut out = Vec::new();
    for d in &dirs.nodes {
        let dir = d.normal;
        let r0 = match mesh {
            Some(m) if !m.triangles.is_empty() => ray_exit(m, center, &dir).unwrap_or(inner_default),
            _ => inner_default,
        };
        if r0 >= r_trunc {
            continue;
        }
        let first = if r0 > 0.0 {
            opts.first_panel * r0
        } else {
            opts.first_panel * r_trunc / 64.0
        };
        for w in geometric_edges(r0, r_trunc, first).windows(2) {
            for (r, wr) in radial.on(w[0], w[1]) {
                let pos = center + dir * r;
                let mut weight = wr * r * r * d.weight;
                if let Some(x) = xc {
                    weight *= 1.0 - bump((pos - x).norm(), a);
                }
                if weight != 0.0 {
                    out.push(VolumeNode { pos, weight });
                }
            }
        }
    }
    if let Some(x) = xc {
        let ldirs = SurfaceMesh::sphere_gauss(Vec3::zeros(), 1.0, opts.local_n_theta)?;
        let lrad = GaussRule::new(opts.local_n_radial);
        for (r, wr) in lrad.on(0.0, a) {
            let wb = wr * r * r * bump(r, a);
            for d in &ldirs.nodes {
                let pos = x + d.normal * r;
                if (pos - center).norm() < r_trunc {
                    out.push(VolumeNode {
                        pos,
                        weight: wb * d.weight,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Volume of the truncated exterior, for checking a rule.
pub fn exact_shell_volume(r_in: f64, r_out: f64) -> f64 {
    4.0 * PI / 3.0 * (r_out.powi(3) - r_in.powi(3))
}
