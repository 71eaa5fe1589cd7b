//! Layer and volume potentials over a surface mesh, and the representation
//! formulas for exterior time-periodic Oseen flows.
//!
//! Everything is evaluated mode by mode: a time convolution with `Γ_ζ`
//! multiplies Fourier coefficients, the pressure kernels act at equal times.
//! The normal `n` used in all formulas points into the body, i.e. it is the
//! negative of [`QuadNode::normal`](crate::mesh::QuadNode).
//!
//! Velocity gradients supplied by callers are Jacobians, `J[(i, j)] = ∂_j v_i`.

use log::warn;
use num_complex::Complex64;

use crate::error::{OseenError, Result};
use crate::fourier::{FourierField, FourierScalar, FourierSeries, FourierTensor};
use crate::fundsol::{grad_p, laplace_e, pressure_p, ModeKernelCache};
use crate::geom::{c64, to_complex_mat, to_complex_vec, CMat3, CVec3, Grad3, Vec3};
use crate::mesh::SurfaceMesh;
use crate::par;
use crate::sum::{CompensatedSum, Summand};
use crate::volume::{exterior_rule, VolumeNode, VolumeRuleOptions};

const CHUNK: usize = 64;

/// Boundary traces at the mesh quadrature nodes.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub v_b: Vec<FourierField>,
    /// Stress vector `𝕋(v,p)n = 2νD(v)n − pn` with `n` pointing into the body.
    pub traction: Option<Vec<FourierField>>,
    pub tensor_trace: Option<Vec<FourierTensor>>,
}

impl BoundaryData {
    pub fn zeros(mesh: &SurfaceMesh, period: f64, n_modes: usize) -> Self {
        let n = mesh.nodes.len();
        Self {
            v_b: vec![FourierField::zeros(period, n_modes); n],
            traction: Some(vec![FourierField::zeros(period, n_modes); n]),
            tensor_trace: None,
        }
    }

    pub fn validate(&self, mesh: &SurfaceMesh, tol: f64) -> Result<()> {
        let n = mesh.nodes.len();
        let len_ok = self.v_b.len() == n
            && self.traction.as_ref().is_none_or(|t| t.len() == n)
            && self.tensor_trace.as_ref().is_none_or(|t| t.len() == n);
        if !len_ok {
            return Err(OseenError::Shape(format!(
                "boundary data does not match {n} mesh nodes"
            )));
        }
        let sym = self.v_b.iter().all(|s| s.is_conjugate_symmetric(tol))
            && self
                .traction
                .iter()
                .flatten()
                .all(|s| s.is_conjugate_symmetric(tol))
            && self
                .tensor_trace
                .iter()
                .flatten()
                .all(|s| s.is_conjugate_symmetric(tol));
        if !sym {
            return Err(OseenError::Domain(
                "boundary data is not conjugate symmetric".into(),
            ));
        }
        Ok(())
    }

    fn traction(&self) -> Result<&[FourierField]> {
        self.traction
            .as_deref()
            .ok_or_else(|| OseenError::MissingData("traction".into()))
    }
}

/// Compactly supported volume data, given on quadrature nodes inside a ball.
#[derive(Debug, Clone)]
pub struct VolumeForcing {
    pub nodes: Vec<VolumeNode>,
    pub f: Vec<FourierField>,
    /// Optional tensor `𝔽`, entering through its divergence.
    pub tensor: Option<Vec<FourierTensor>>,
    pub center: Vec3,
    pub radius: f64,
}

impl VolumeForcing {
    pub fn validate(&self) -> Result<()> {
        if self.f.len() != self.nodes.len()
            || self.tensor.as_ref().is_some_and(|t| t.len() != self.nodes.len())
        {
            return Err(OseenError::Shape("forcing data does not match nodes".into()));
        }
        for n in &self.nodes {
            if !(n.weight > 0.0) {
                return Err(OseenError::Domain("forcing weights must be positive".into()));
            }
            if (n.pos - self.center).norm() > self.radius {
                return Err(OseenError::Domain("forcing node outside its support ball".into()));
            }
        }
        Ok(())
    }

    fn check_outside(&self, x: &Vec3) -> Result<()> {
        let dist = (x - self.center).norm();
        if dist <= self.radius {
            return Err(OseenError::Proximity {
                dist,
                required: self.radius,
            });
        }
        Ok(())
    }
}

/// Which signs to use for the two pressure terms carrying `v_b·n` against
/// `ζ·P` and `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PressureSigns {
    /// Both terms enter with a minus sign, as obtained from the extension
    /// `∂_t ṽ` of the boundary flux.
    #[default]
    Derived,
    /// Both terms enter with a plus sign.
    Printed,
}

impl PressureSigns {
    fn sign(self) -> f64 {
        match self {
            Self::Derived => -1.0,
            Self::Printed => 1.0,
        }
    }
}

fn mode_index(n_modes: usize, k: i64) -> usize {
    (k + n_modes as i64) as usize
}

/// Sums `f(i, acc)` over `n` items in fixed-size chunks, combining chunks in
/// index order so results do not depend on the thread count.
fn chunked_sum<T, F>(n: usize, len: usize, f: F) -> Result<Vec<T>>
where
    T: Summand + Send + Sync,
    F: Fn(usize, &mut [CompensatedSum<T>]) -> Result<()> + Sync + Send,
{
    let chunks: Vec<usize> = (0..n.div_ceil(CHUNK)).collect();
    let partial = par::try_map(&chunks, |&c| -> Result<Vec<T>> {
        let mut acc: Vec<CompensatedSum<T>> = (0..len).map(|_| CompensatedSum::new()).collect();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            f(i, &mut acc)?;
        }
        Ok(acc.iter().map(|a| a.value()).collect())
    })?;
    let mut total: Vec<CompensatedSum<T>> = (0..len).map(|_| CompensatedSum::new()).collect();
    for p in &partial {
        for (t, v) in total.iter_mut().zip(p) {
            t.add(*v);
        }
    }
    Ok(total.iter().map(|t| t.value()).collect())
}

/// Non-negative modes `k` for which some series has a nonzero `±k` coefficient.
fn active_modes<'a, T: crate::fourier::Coefficient + 'a>(
    n_modes: usize,
    series: impl IntoIterator<Item = &'a FourierSeries<T>>,
) -> Vec<i64> {
    let mut on = vec![false; n_modes + 1];
    for s in series {
        for (k, flag) in on.iter_mut().enumerate() {
            let k = k as i64;
            if !*flag && (s.mode(k).norm_sqr() > 0.0 || s.mode(-k).norm_sqr() > 0.0) {
                *flag = true;
            }
        }
    }
    (0..=n_modes as i64).filter(|&k| on[k as usize]).collect()
}

fn check_series<T: crate::fourier::Coefficient>(
    s: &FourierSeries<T>,
    cache: &ModeKernelCache,
) -> Result<()> {
    if s.n_modes() != cache.params.n_modes || s.period() != cache.params.period {
        return Err(OseenError::Shape(format!(
            "series with {} modes and period {} used with kernel of {} modes and period {}",
            s.n_modes(),
            s.period(),
            cache.params.n_modes,
            cache.params.period
        )));
    }
    Ok(())
}

fn check_len<T>(v: &[T], mesh: &SurfaceMesh) -> Result<()> {
    if v.len() != mesh.nodes.len() {
        return Err(OseenError::Shape(format!(
            "{} densities for {} mesh nodes",
            v.len(),
            mesh.nodes.len()
        )));
    }
    Ok(())
}

fn conj_grad(g: &Grad3<Complex64>) -> Grad3<Complex64> {
    g.map(|m| m.map(|c| c.conj()))
}

/// Mode-wise sum over points `y_i` of `w_i · term(i, k, Γ̂_k(x−y_i), ∇Γ̂_k(x−y_i))`.
fn kernel_pass<F>(
    points: &[(Vec3, f64)],
    x: &Vec3,
    cache: &ModeKernelCache,
    active: &[i64],
    need_grad: bool,
    term: F,
) -> Result<FourierField>
where
    F: Fn(usize, i64, &CMat3, &Grad3<Complex64>) -> CVec3 + Sync + Send,
{
    let n_modes = cache.params.n_modes;
    let zero_grad: Grad3<Complex64> = [CMat3::zeros(); 3];
    let acc = chunked_sum(points.len(), 2 * n_modes + 1, |i, acc| {
        let (y, w) = points[i];
        let z = x - y;
        for &k in active {
            let (kv, kg) = if need_grad {
                cache.eval(k, &z)?
            } else {
                (cache.eval_value(k, &z)?, zero_grad)
            };
            acc[mode_index(n_modes, k)].add(term(i, k, &kv, &kg) * c64(w));
            if k > 0 {
                let kc = kv.map(|c| c.conj());
                let gc = conj_grad(&kg);
                acc[mode_index(n_modes, -k)].add(term(i, -k, &kc, &gc) * c64(w));
            }
        }
        Ok(())
    })?;
    Ok(FourierField::from_fn(cache.params.period, n_modes, |k| {
        acc[mode_index(n_modes, k)]
    }))
}

fn surface_points(mesh: &SurfaceMesh) -> Vec<(Vec3, f64)> {
    mesh.nodes.iter().map(|n| (n.pos, n.weight)).collect()
}

/// `ν Σ_{j,m} v_j n_m (∂_jΓ_mi + ∂_mΓ_ji)`, i.e. `2ν v·𝔻(Γe_i)n` per component.
fn stress_couple(g: &Grad3<Complex64>, v: &CVec3, n: &Vec3, nu: f64) -> CVec3 {
    let mut a = CMat3::zeros();
    let mut b = CMat3::zeros();
    for l in 0..3 {
        a += g[l] * v[l];
        b += g[l] * c64(n[l]);
    }
    (a.transpose() * to_complex_vec(n) + b.transpose() * v) * c64(nu)
}

/// `Σ_l ∂_lM · W.row(l)`: the contraction `Σ_{l,m} ∂_l M_im W_lm`.
fn grad_contract(g: &Grad3<Complex64>, w: &CMat3) -> CVec3 {
    let mut out = CVec3::zeros();
    for l in 0..3 {
        out += g[l] * w.row(l).transpose();
    }
    out
}

/// `∫_Σ Γ_ζ(·, x−y) ∗ g(·, y) dS(y)`.
pub fn single_layer_velocity(
    mesh: &SurfaceMesh,
    density: &[FourierField],
    x: &Vec3,
    cache: &ModeKernelCache,
) -> Result<FourierField> {
    mesh.check_far(x)?;
    check_len(density, mesh)?;
    density.iter().try_for_each(|d| check_series(d, cache))?;
    let active = active_modes(cache.params.n_modes, density);
    kernel_pass(&surface_points(mesh), x, cache, &active, false, |i, k, kv, _| {
        kv * density[i].mode(k)
    })
}

/// `∫_Σ 2ν v_b ∗ 𝔻(Γ_ζ e_i)(x−y) n(y) dS(y) e_i`.
pub fn stress_couple_layer(
    mesh: &SurfaceMesh,
    v_b: &[FourierField],
    x: &Vec3,
    cache: &ModeKernelCache,
) -> Result<FourierField> {
    mesh.check_far(x)?;
    check_len(v_b, mesh)?;
    v_b.iter().try_for_each(|d| check_series(d, cache))?;
    let active = active_modes(cache.params.n_modes, v_b);
    let nu = cache.params.nu;
    kernel_pass(&surface_points(mesh), x, cache, &active, true, |i, k, _, g| {
        stress_couple(g, &v_b[i].mode(k), &-mesh.nodes[i].normal, nu)
    })
}

/// Equal-time surface sum `Σ_i w_i · term(i, k)` for every mode.
fn static_surface_pass<T, F>(
    mesh: &SurfaceMesh,
    period: f64,
    n_modes: usize,
    term: F,
) -> Result<FourierSeries<T>>
where
    T: crate::fourier::Coefficient + Summand + Send + Sync + std::ops::Mul<Complex64, Output = T>,
    F: Fn(usize, i64) -> Result<T> + Sync + Send,
{
    let acc = chunked_sum(mesh.nodes.len(), 2 * n_modes + 1, |i, acc| {
        let w = c64(mesh.nodes[i].weight);
        for k in -(n_modes as i64)..=n_modes as i64 {
            acc[mode_index(n_modes, k)].add(term(i, k)? * w);
        }
        Ok(())
    })?;
    Ok(FourierSeries::from_fn(period, n_modes, |k| acc[mode_index(n_modes, k)]))
}

fn scalar_meta(density: &[FourierScalar]) -> Result<(f64, usize)> {
    density
        .first()
        .map(|d| (d.period(), d.n_modes()))
        .ok_or_else(|| OseenError::Shape("empty density".into()))
}

/// `∫_Σ P(x−y) σ(t, y) dS(y)`.
pub fn pressure_monopole_layer(
    mesh: &SurfaceMesh,
    density: &[FourierScalar],
    x: &Vec3,
) -> Result<FourierField> {
    mesh.check_far(x)?;
    check_len(density, mesh)?;
    let (period, n) = scalar_meta(density)?;
    static_surface_pass(mesh, period, n, |i, k| {
        Ok(to_complex_vec(&pressure_p(&(x - mesh.nodes[i].pos))?) * density[i].mode(k))
    })
}

/// `∫_Σ E(x−y) σ(t, y) dS(y)`.
pub fn laplace_monopole_layer(
    mesh: &SurfaceMesh,
    density: &[FourierScalar],
    x: &Vec3,
) -> Result<FourierScalar> {
    mesh.check_far(x)?;
    check_len(density, mesh)?;
    let (period, n) = scalar_meta(density)?;
    static_surface_pass(mesh, period, n, |i, k| {
        Ok(density[i].mode(k) * laplace_e(&(x - mesh.nodes[i].pos))?)
    })
}

/// `∫_Σ v_b(t, y)·∇P(x−y) n(y) dS(y)`.
pub fn pressure_gradient_layer(
    mesh: &SurfaceMesh,
    v_b: &[FourierField],
    x: &Vec3,
) -> Result<FourierScalar> {
    mesh.check_far(x)?;
    check_len(v_b, mesh)?;
    let (period, n) = v_b
        .first()
        .map(|d| (d.period(), d.n_modes()))
        .ok_or_else(|| OseenError::Shape("empty density".into()))?;
    static_surface_pass(mesh, period, n, |i, k| {
        let node = &mesh.nodes[i];
        let gp = grad_p(&(x - node.pos))?;
        Ok(v_b[i].mode(k).dot(&to_complex_vec(&(gp * -node.normal))))
    })
}

fn volume_points(forcing: &VolumeForcing) -> Vec<(Vec3, f64)> {
    forcing.nodes.iter().map(|n| (n.pos, n.weight)).collect()
}

/// `∫ Γ_ζ(·, x−y) ∗ f(·, y) dy`, plus `−Σ ∫ ∂_lΓ_ζ(x−y) 𝔽_lm` when a tensor is given.
pub fn volume_potential(
    forcing: &VolumeForcing,
    x: &Vec3,
    cache: &ModeKernelCache,
) -> Result<FourierField> {
    forcing.check_outside(x)?;
    forcing.f.iter().try_for_each(|d| check_series(d, cache))?;
    let mut active = active_modes(cache.params.n_modes, &forcing.f);
    let tensor = forcing.tensor.as_deref();
    if let Some(t) = tensor {
        active.extend(active_modes(cache.params.n_modes, t));
        active.sort_unstable();
        active.dedup();
    }
    kernel_pass(
        &volume_points(forcing),
        x,
        cache,
        &active,
        tensor.is_some(),
        |i, k, kv, g| {
            let mut out = kv * forcing.f[i].mode(k);
            if let Some(t) = tensor {
                out -= grad_contract(g, &t[i].mode(k));
            }
            out
        },
    )
}

/// Pressure of the volume data: `∫ P·f dy − Σ ∫ ∂_lP_m(x−y) 𝔽_lm dy`.
pub fn volume_pressure(forcing: &VolumeForcing, x: &Vec3) -> Result<FourierScalar> {
    forcing.check_outside(x)?;
    let first = forcing
        .f
        .first()
        .ok_or_else(|| OseenError::Shape("empty forcing".into()))?;
    let (period, n) = (first.period(), first.n_modes());
    let acc = chunked_sum(forcing.nodes.len(), 2 * n + 1, |i, acc| {
        let node = &forcing.nodes[i];
        let z = x - node.pos;
        let p = to_complex_vec(&pressure_p(&z)?);
        let gp = match &forcing.tensor {
            Some(_) => Some(to_complex_mat(&grad_p(&z)?)),
            None => None,
        };
        for k in -(n as i64)..=n as i64 {
            let mut v = p.dot(&forcing.f[i].mode(k));
            if let (Some(gp), Some(t)) = (&gp, &forcing.tensor) {
                v -= gp.component_mul(&t[i].mode(k)).sum();
            }
            acc[mode_index(n, k)].add(v * node.weight);
        }
        Ok(())
    })?;
    Ok(FourierScalar::from_fn(period, n, |k| acc[mode_index(n, k)]))
}

/// Surface part of the velocity representation, optionally with the extra
/// boundary moment `−∫_Σ Γ_ζ ∗ (v_b·n)v_b` of the divergence form.
fn surface_velocity(
    mesh: &SurfaceMesh,
    bdata: &BoundaryData,
    x: &Vec3,
    cache: &ModeKernelCache,
    flux_moment: Option<&[FourierField]>,
) -> Result<FourierField> {
    mesh.check_far(x)?;
    check_len(&bdata.v_b, mesh)?;
    let traction = bdata.traction()?;
    check_len(traction, mesh)?;
    let n_modes = cache.params.n_modes;
    for s in bdata.v_b.iter().chain(traction) {
        check_series(s, cache)?;
    }
    let tensor = bdata.tensor_trace.as_deref();
    let mut active = active_modes(n_modes, bdata.v_b.iter().chain(traction));
    if let Some(t) = tensor {
        check_len(t, mesh)?;
        active.extend(active_modes(n_modes, t));
    }
    if let Some(m) = flux_moment {
        active.extend(active_modes(n_modes, m));
    }
    active.sort_unstable();
    active.dedup();
    let zeta = cache.params.zeta;
    let nu = cache.params.nu;
    let need_grad = !active_modes(n_modes, &bdata.v_b).is_empty();
    let layers = kernel_pass(&surface_points(mesh), x, cache, &active, need_grad, |i, k, kv, g| {
        let n = -mesh.nodes[i].normal;
        let vb = bdata.v_b[i].mode(k);
        // traction plus the drift flux (ζ·n) v_b
        let mut density = traction[i].mode(k) + vb * c64(zeta.dot(&n));
        if let Some(t) = tensor {
            density -= t[i].mode(k).transpose() * to_complex_vec(&n);
        }
        if let Some(m) = flux_moment {
            density -= m[i].mode(k);
        }
        kv * density + stress_couple(g, &vb, &n, nu)
    })?;
    // −∫_Σ (v_b·n) P(x−y)
    let flux: Vec<FourierScalar> = mesh
        .nodes
        .iter()
        .zip(&bdata.v_b)
        .map(|(node, vb)| vb.map(|_, c| c.dot(&to_complex_vec(&-node.normal))))
        .collect();
    let mono = pressure_monopole_layer(mesh, &flux, x)?;
    layers.try_sub(&mono)
}

/// Velocity of the linear exterior problem from its boundary traces and
/// compactly supported forcing.
pub fn represent_velocity_linear(
    mesh: &SurfaceMesh,
    bdata: &BoundaryData,
    forcing: Option<&VolumeForcing>,
    x: &Vec3,
    cache: &ModeKernelCache,
) -> Result<FourierField> {
    let surf = surface_velocity(mesh, bdata, x, cache, None)?;
    match forcing {
        Some(f) => surf.try_add(&volume_potential(f, x, cache)?),
        None => Ok(surf),
    }
}

/// Pressure of the linear exterior problem, with `p_∞ = 0`.
pub fn represent_pressure_linear(
    mesh: &SurfaceMesh,
    bdata: &BoundaryData,
    forcing: Option<&VolumeForcing>,
    x: &Vec3,
    zeta: &Vec3,
    nu: f64,
    signs: PressureSigns,
) -> Result<FourierScalar> {
    mesh.check_far(x)?;
    check_len(&bdata.v_b, mesh)?;
    let traction = bdata.traction()?;
    check_len(traction, mesh)?;
    let first = &bdata.v_b[0];
    let (period, n_modes) = (first.period(), first.n_modes());
    let s = signs.sign();
    let surf = static_surface_pass(mesh, period, n_modes, |i, k| {
        let node = &mesh.nodes[i];
        let n = -node.normal;
        let nc = to_complex_vec(&n);
        let z = x - node.pos;
        let p = to_complex_vec(&pressure_p(&z)?);
        let gp = to_complex_mat(&grad_p(&z)?);
        let e = laplace_e(&z)?;
        let vb = bdata.v_b[i].mode(k);
        let vn = vb.dot(&nc);
        let mut g = traction[i].mode(k) + vb * c64(zeta.dot(&n));
        if let Some(t) = &bdata.tensor_trace {
            g -= t[i].mode(k).transpose() * nc;
        }
        let lambda = first.lambda(k);
        Ok(p.dot(&g)
            + vn * p.dot(&to_complex_vec(zeta)) * s
            + vb.dot(&(gp * nc)) * (2.0 * nu)
            + Complex64::new(0.0, lambda) * vn * e * s)
    })?;
    match forcing {
        Some(f) => surf.try_add(&volume_pressure(f, x)?),
        None => Ok(surf),
    }
}

/// A velocity field known everywhere in the exterior domain.
pub trait VelocitySampler: Sync {
    /// Fourier coefficients of `v(·, y)` and its Jacobian `∂_j v_i`.
    fn sample(&self, y: &Vec3) -> Result<(FourierField, FourierTensor)>;
}

/// Forcing known as a field rather than on fixed nodes.
pub trait ForcingField: Sync {
    fn sample(&self, y: &Vec3) -> Result<FourierField>;
}

#[derive(Debug, Clone, Copy)]
pub struct NonlinearOptions {
    /// Truncation radius of the volume integrals; defaults to 32 times the
    /// body circumradius.
    pub r_trunc: Option<f64>,
    pub rule: VolumeRuleOptions,
    /// Relative tail size above which a warning is logged.
    pub tail_warn: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            r_trunc: None,
            rule: VolumeRuleOptions::default(),
            tail_warn: 1e-3,
        }
    }
}

/// The two equivalent velocity representations of the nonlinear problem.
#[derive(Debug, Clone)]
pub struct NonlinearRepresentation {
    /// Volume term `Γ ∗ (f − v·∇v)`.
    pub convective: FourierField,
    /// Volume terms `Γ ∗ f − ∇Γ : v⊗v` plus the boundary moment `−Γ ∗ (v_b·n)v_b`.
    pub divergence: FourierField,
    /// Estimated size of the truncated volume tail, per variant.
    pub tail_estimate: [f64; 2],
    pub r_trunc: f64,
}

fn series_norm(s: &FourierField) -> f64 {
    s.coeffs().iter().map(|c| c.norm_squared()).sum::<f64>().sqrt()
}

/// Evaluates both nonlinear representations from a supplied velocity field.
/// The volume integrals run over the exterior of the mesh inside a sphere of
/// radius `r_trunc` about the mesh centroid.
pub fn represent_velocity_nonlinear(
    mesh: &SurfaceMesh,
    bdata: &BoundaryData,
    forcing: Option<&dyn ForcingField>,
    vfield: &dyn VelocitySampler,
    x: &Vec3,
    cache: &ModeKernelCache,
    opts: &NonlinearOptions,
) -> Result<NonlinearRepresentation> {
    let center = mesh.centroid();
    let r_trunc = opts.r_trunc.unwrap_or(32.0 * mesh.circumradius());
    if (x - center).norm() >= r_trunc {
        return Err(OseenError::Domain(format!(
            "evaluation point outside the truncation radius {r_trunc}"
        )));
    }
    let (period, n_modes) = (cache.params.period, cache.params.n_modes);
    let flux_moment: Vec<FourierField> = mesh
        .nodes
        .iter()
        .zip(&bdata.v_b)
        .map(|(node, vb)| {
            let n = to_complex_vec(&-node.normal);
            vb.time_product(vb, |a, b| a * b.dot(&n))
        })
        .collect::<Result<_>>()?;
    let surf1 = surface_velocity(mesh, bdata, x, cache, None)?;
    let surf2 = surface_velocity(mesh, bdata, x, cache, Some(&flux_moment))?;

    let rule = exterior_rule(Some(mesh), &center, r_trunc, Some(x), &opts.rule)?;
    let len = 2 * n_modes + 1;
    let outer = 0.5 * r_trunc;
    // Per node: (Γ∗(f − v·∇v), Γ∗f − ∇Γ:(v⊗v)), accumulated separately for
    // the outer half of the truncation ball to estimate the tail.
    let acc = chunked_sum(rule.len(), 4 * len, |i, acc| {
        let node = rule[i];
        let (v, jac) = vfield.sample(&node.pos)?;
        let conv = v.time_product(&jac, |a, j| j * a)?;
        let tens = v.time_product(&v, |a, b| a * b.transpose())?;
        let f = match forcing {
            Some(ff) => ff.sample(&node.pos)?,
            None => FourierField::zeros(period, n_modes),
        };
        let rhs1 = f.try_sub(&conv)?;
        let scale = series_norm(&rhs1).max(tens.l2_norm()).max(series_norm(&f));
        let z = x - node.pos;
        let off = if (node.pos - center).norm() > outer { 2 * len } else { 0 };
        for k in 0..=n_modes as i64 {
            let negligible = |c: f64| c <= 1e-15 * scale;
            let m1 = rhs1.mode(k).norm().max(rhs1.mode(-k).norm());
            let mt = tens.mode(k).norm().max(tens.mode(-k).norm());
            let mf = f.mode(k).norm().max(f.mode(-k).norm());
            if negligible(m1) && negligible(mt) && negligible(mf) {
                continue;
            }
            let (kv, g) = if negligible(mt) {
                (cache.eval_value(k, &z)?, [CMat3::zeros(); 3])
            } else {
                cache.eval(k, &z)?
            };
            for (kk, kv, g) in [(k, kv, g), (-k, kv.map(|c| c.conj()), conj_grad(&g))] {
                let a = kv * rhs1.mode(kk);
                let b = kv * f.mode(kk) - grad_contract(&g, &tens.mode(kk));
                acc[off + mode_index(n_modes, kk)].add(a * c64(node.weight));
                acc[off + len + mode_index(n_modes, kk)].add(b * c64(node.weight));
                if k == 0 {
                    break;
                }
            }
        }
        Ok(())
    })?;
    let series = |o: usize| FourierField::from_fn(period, n_modes, |k| acc[o + mode_index(n_modes, k)]);
    let (in1, in2, out1, out2) = (series(0), series(len), series(2 * len), series(3 * len));
    let vol1 = in1.try_add(&out1)?;
    let vol2 = in2.try_add(&out2)?;
    let convective = surf1.try_add(&vol1)?;
    let divergence = surf2.try_add(&vol2)?;
    // Integrands decaying at least like |y|^{-2} in the radial measure have a
    // tail beyond R no larger than their contribution from [R/2, R].
    let tail_estimate = [series_norm(&out1), series_norm(&out2)];
    for (t, total, name) in [
        (tail_estimate[0], &convective, "convective"),
        (tail_estimate[1], &divergence, "divergence"),
    ] {
        if t > opts.tail_warn * series_norm(total).max(f64::MIN_POSITIVE) {
            warn!("{name} volume tail estimate {t:.3e} at truncation radius {r_trunc}");
        }
    }
    Ok(NonlinearRepresentation {
        convective,
        divergence,
        tail_estimate,
        r_trunc,
    })
}
