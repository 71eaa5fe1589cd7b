//! Far-field expansions: flux functionals, expansion coefficients, leading
//! terms, remainders and decay-exponent fits.
//!
//! As in [`crate::potentials`], `n` points into the body.

pub mod conv;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OseenError, Result};
use crate::fourier::{Coefficient, FourierField, FourierScalar, FourierSeries};
use crate::fundsol::{grad_p, laplace_e, pressure_p, ModeKernelCache};
use crate::geom::{c64, to_complex_mat, to_complex_vec, wake_weight, Ray, Vec3};
use crate::mesh::SurfaceMesh;
use crate::par;
use crate::potentials::{BoundaryData, VolumeForcing};
use crate::sum::CompensatedSum;

/// `Φ(t) = ∫_Σ v_b·n dS`.
pub fn flux_phi(mesh: &SurfaceMesh, v_b: &[FourierField]) -> Result<FourierScalar> {
    let first = check_nodes(mesh, v_b)?;
    let mut acc = FourierScalar::zeros(first.period(), first.n_modes());
    for k in first.modes() {
        let mut s = CompensatedSum::<Complex64>::new();
        for (node, v) in mesh.nodes.iter().zip(v_b) {
            s.add(v.mode(k).dot(&to_complex_vec(&-node.normal)) * node.weight);
        }
        acc.set_mode(k, s.value());
    }
    Ok(acc)
}

/// `Ψ(t) = ∫_Σ (v_b·n) y dS`.
pub fn moment_psi(mesh: &SurfaceMesh, v_b: &[FourierField]) -> Result<FourierField> {
    let first = check_nodes(mesh, v_b)?;
    let mut acc = FourierField::zeros(first.period(), first.n_modes());
    for k in first.modes() {
        let mut s = CompensatedSum::new();
        for (node, v) in mesh.nodes.iter().zip(v_b) {
            let vn = v.mode(k).dot(&to_complex_vec(&-node.normal));
            s.add(to_complex_vec(&node.pos) * (vn * node.weight));
        }
        acc.set_mode(k, s.value());
    }
    Ok(acc)
}

fn check_nodes<'a, T: Coefficient>(
    mesh: &SurfaceMesh,
    data: &'a [FourierSeries<T>],
) -> Result<&'a FourierSeries<T>> {
    if data.len() != mesh.nodes.len() || data.is_empty() {
        return Err(OseenError::Shape(format!(
            "{} values for {} mesh nodes",
            data.len(),
            mesh.nodes.len()
        )));
    }
    Ok(&data[0])
}

/// Zeroth and first moments `Λ = Σ w f`, `Ξ = Σ w y f` of vector data on
/// weighted points.
pub fn moments(points: &[(Vec3, f64)], f: &[FourierField]) -> Result<(FourierField, Vec<FourierField>)> {
    let first = f
        .first()
        .filter(|_| f.len() == points.len())
        .ok_or_else(|| OseenError::Shape("moment data does not match points".into()))?;
    let (period, n) = (first.period(), first.n_modes());
    let mut lam = FourierField::zeros(period, n);
    let mut xi = vec![FourierField::zeros(period, n); 3];
    for k in first.modes() {
        let mut l = CompensatedSum::new();
        let mut x: [CompensatedSum<_>; 3] = Default::default();
        for ((y, w), fi) in points.iter().zip(f) {
            let c = fi.mode(k) * c64(*w);
            l.add(c);
            for (d, xd) in x.iter_mut().enumerate() {
                xd.add(c * c64(y[d]));
            }
        }
        lam.set_mode(k, l.value());
        for d in 0..3 {
            xi[d].set_mode(k, x[d].value());
        }
    }
    Ok((lam, xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    Lin,
    Nonlin,
}

/// Coefficients of the far-field expansion.
#[derive(Debug, Clone)]
pub struct ExpansionCoefficients {
    pub phi: FourierScalar,
    pub psi: FourierField,
    /// `∫ f + ∫_Σ [𝕋(v,p)n + (ζ·n)v_b]`.
    pub f_lin: FourierField,
    /// `f_lin − ∫_Σ (v_b·n)v_b`.
    pub f_full: FourierField,
}

impl ExpansionCoefficients {
    pub fn compute(
        mesh: &SurfaceMesh,
        bdata: &BoundaryData,
        forcing: Option<&VolumeForcing>,
        zeta: &Vec3,
    ) -> Result<Self> {
        Ok(Self {
            phi: flux_phi(mesh, &bdata.v_b)?,
            psi: moment_psi(mesh, &bdata.v_b)?,
            f_lin: coeff_f(mesh, bdata, forcing, zeta, Expansion::Lin)?,
            f_full: coeff_f(mesh, bdata, forcing, zeta, Expansion::Nonlin)?,
        })
    }

    pub fn force(&self, expansion: Expansion) -> &FourierField {
        match expansion {
            Expansion::Lin => &self.f_lin,
            Expansion::Nonlin => &self.f_full,
        }
    }

    pub fn zeros(period: f64, n_modes: usize) -> Self {
        Self {
            phi: FourierScalar::zeros(period, n_modes),
            psi: FourierField::zeros(period, n_modes),
            f_lin: FourierField::zeros(period, n_modes),
            f_full: FourierField::zeros(period, n_modes),
        }
    }
}

/// The force coefficient `𝓕^lin` or `𝓕`.
pub fn coeff_f(
    mesh: &SurfaceMesh,
    bdata: &BoundaryData,
    forcing: Option<&VolumeForcing>,
    zeta: &Vec3,
    expansion: Expansion,
) -> Result<FourierField> {
    let first = check_nodes(mesh, &bdata.v_b)?;
    let traction = bdata
        .traction
        .as_deref()
        .ok_or_else(|| OseenError::MissingData("traction".into()))?;
    check_nodes(mesh, traction)?;
    let density: Vec<FourierField> = mesh
        .nodes
        .iter()
        .zip(&bdata.v_b)
        .zip(traction)
        .map(|((node, vb), tr)| {
            let n = -node.normal;
            let mut d = tr.try_add(&vb.scale(c64(zeta.dot(&n))))?;
            if expansion == Expansion::Nonlin {
                let nc = to_complex_vec(&n);
                d = d.try_sub(&vb.time_product(vb, |a, b| a * b.dot(&nc))?)?;
            }
            Ok(d)
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(Vec3, f64)> = mesh.nodes.iter().map(|n| (n.pos, n.weight)).collect();
    let (mut total, _) = moments(&pts, &density)?;
    if let Some(f) = forcing {
        let fp: Vec<(Vec3, f64)> = f.nodes.iter().map(|n| (n.pos, n.weight)).collect();
        total = total.try_add(&moments(&fp, &f.f)?.0)?;
    }
    if total.n_modes() != first.n_modes() {
        return Err(OseenError::Shape("forcing truncation differs from boundary data".into()));
    }
    Ok(total)
}

/// Signs of the flux terms in the leading-order expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `−ΦP + Ψ·∇P`; pressure `Φ'E + [𝓕 + ζΦ − Ψ']·P`.
    #[default]
    ThmLin,
    /// `+ΦP − Ψ·∇P`; pressure `Φ'E + [𝓕 + ζΦ + Ψ']·P`.
    ThmNonlin,
    /// Velocity as `ThmLin`; pressure `−Φ'E + [𝓕 − ζΦ − Ψ']·P`, the expansion
    /// of the pressure representation with the derived signs.
    Derived,
}

/// Which part of the time-periodic field to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Part {
    #[default]
    Full,
    Steady,
    Periodic,
}

impl Part {
    fn keeps(self, k: i64) -> bool {
        match self {
            Part::Full => true,
            Part::Steady => k == 0,
            Part::Periodic => k != 0,
        }
    }
}

/// Selection of terms in the leading expansion, for ablation experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeadingTerms {
    pub force: bool,
    pub flux: bool,
    pub moment: bool,
}

impl Default for LeadingTerms {
    fn default() -> Self {
        Self {
            force: true,
            flux: true,
            moment: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LeadingOptions {
    pub expansion: Expansion,
    pub signs: SignConvention,
    pub part: Part,
    pub terms: LeadingTerms,
}

impl Default for LeadingOptions {
    fn default() -> Self {
        Self {
            expansion: Expansion::Lin,
            signs: SignConvention::ThmLin,
            part: Part::Full,
            terms: LeadingTerms::default(),
        }
    }
}

/// Fourier coefficients of `Γ_ζ(·,x) ∗ 𝓕 ∓ ΦP(x) ± Ψ·∇P(x)`.
pub fn leading_velocity_modes(
    coeffs: &ExpansionCoefficients,
    x: &Vec3,
    cache: &ModeKernelCache,
    opts: &LeadingOptions,
) -> Result<FourierField> {
    let f = coeffs.force(opts.expansion);
    let (s_flux, s_moment) = match opts.signs {
        SignConvention::ThmLin | SignConvention::Derived => (-1.0, 1.0),
        SignConvention::ThmNonlin => (1.0, -1.0),
    };
    let p = to_complex_vec(&pressure_p(x)?);
    let gp = to_complex_mat(&grad_p(x)?);
    let mut out = FourierField::zeros(f.period(), f.n_modes());
    for k in 0..=f.n_modes() as i64 {
        let kernel = if opts.terms.force && opts.part.keeps(k) && f.mode(k).norm_squared() + f.mode(-k).norm_squared() > 0.0 {
            Some(cache.eval_value(k, x)?)
        } else {
            None
        };
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            if !opts.part.keeps(kk) {
                continue;
            }
            let mut v = crate::geom::CVec3::zeros();
            if let Some(g) = &kernel {
                let g = if kk < 0 { g.map(|c| c.conj()) } else { *g };
                v += g * f.mode(kk);
            }
            if opts.terms.flux {
                v += p * (coeffs.phi.mode(kk) * s_flux);
            }
            if opts.terms.moment {
                v += gp * coeffs.psi.mode(kk) * c64(s_moment);
            }
            out.set_mode(kk, v);
        }
    }
    Ok(out)
}

pub fn leading_velocity(
    coeffs: &ExpansionCoefficients,
    t: f64,
    x: &Vec3,
    cache: &ModeKernelCache,
    opts: &LeadingOptions,
) -> Result<Vec3> {
    Ok(leading_velocity_modes(coeffs, x, cache, opts)?.eval_real(t))
}

/// Fourier coefficients of the leading pressure, with `p_∞ = 0`.
pub fn leading_pressure_modes(
    coeffs: &ExpansionCoefficients,
    x: &Vec3,
    zeta: &Vec3,
    opts: &LeadingOptions,
) -> Result<FourierScalar> {
    let f = coeffs.force(opts.expansion);
    let (s_e, s_zeta, s_moment) = match opts.signs {
        SignConvention::ThmLin => (1.0, 1.0, -1.0),
        SignConvention::ThmNonlin => (1.0, 1.0, 1.0),
        SignConvention::Derived => (-1.0, -1.0, -1.0),
    };
    let p = to_complex_vec(&pressure_p(x)?);
    let e = laplace_e(x)?;
    let z = to_complex_vec(zeta);
    Ok(FourierScalar::from_fn(f.period(), f.n_modes(), |k| {
        if !opts.part.keeps(k) {
            return Complex64::new(0.0, 0.0);
        }
        let iw = Complex64::new(0.0, f.lambda(k));
        let phi = coeffs.phi.mode(k);
        let mut g = crate::geom::CVec3::zeros();
        let mut out = Complex64::new(0.0, 0.0);
        if opts.terms.force {
            g += f.mode(k);
        }
        if opts.terms.flux {
            out += iw * phi * e * s_e;
            g += z * (phi * s_zeta);
        }
        if opts.terms.moment {
            g += coeffs.psi.mode(k) * (iw * s_moment);
        }
        out + p.dot(&g)
    }))
}

pub fn leading_pressure(
    coeffs: &ExpansionCoefficients,
    t: f64,
    x: &Vec3,
    zeta: &Vec3,
    opts: &LeadingOptions,
) -> Result<f64> {
    Ok(leading_pressure_modes(coeffs, x, zeta, opts)?.eval_real(t))
}

/// Norm in time of the purely periodic part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeNorm {
    /// Maximum over a uniform `4N + 1` grid.
    #[default]
    Max,
    L2,
}

/// Steady and purely periodic size of a real Fourier series.
pub fn split_norms<T: Coefficient>(s: &FourierSeries<T>, norm: TimeNorm) -> (f64, f64) {
    let steady = s.mode(0).norm_sqr().sqrt();
    let per = s.periodic_part();
    let periodic = match norm {
        TimeNorm::L2 => per.l2_norm(),
        TimeNorm::Max => per
            .time_grid(4 * s.n_modes() + 1)
            .iter()
            .map(|&t| per.eval(t).norm_sqr().sqrt())
            .fold(0.0, f64::max),
    };
    (steady, periodic)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderSample {
    pub r: f64,
    pub x: Vec3,
    pub steady: f64,
    pub periodic: f64,
}

/// `|field − leading|` along a ray, split into steady and periodic parts.
pub fn remainder_samples<T, F, L>(
    field: F,
    leading: L,
    ray: &Ray,
    norm: TimeNorm,
) -> Result<Vec<RemainderSample>>
where
    T: Coefficient + Send,
    F: Fn(&Vec3) -> Result<FourierSeries<T>> + Sync + Send,
    L: Fn(&Vec3) -> Result<FourierSeries<T>> + Sync + Send,
{
    let pts: Vec<(f64, Vec3)> = ray.points().collect();
    par::try_map(&pts, |&(r, x)| {
        let d = field(&x)?.try_sub(&leading(&x)?)?;
        let (steady, periodic) = split_norms(&d, norm);
        Ok(RemainderSample {
            r,
            x,
            steady,
            periodic,
        })
    })
}

/// Power-law fit `|R| ≈ C|x|^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub ray: String,
    pub field: String,
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual of the log-log regression.
    pub residual: f64,
    pub n_samples: usize,
    /// `(radius, value)` pairs used in the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Number of smallest radii discarded before fitting.
pub const FIT_DROP_SMALLEST: usize = 2;
pub const FIT_MIN_SAMPLES: usize = 5;

/// Least-squares slope of `log|R|` against `log|x|` after discarding the
/// `drop_smallest` smallest radii and nonpositive values.
pub fn fit_decay(
    ray: &str,
    field: &str,
    samples: &[(f64, f64)],
    drop_smallest: usize,
) -> Result<DecayFit> {
    let mut s: Vec<(f64, f64)> = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let s: Vec<(f64, f64)> = s.into_iter().skip(drop_smallest).collect();
    let kept: Vec<(f64, f64)> = s
        .iter()
        .copied()
        .filter(|&(r, v)| r > 0.0 && v > 0.0 && v.is_finite())
        .collect();
    if kept.len() < s.len() {
        warn!(
            "{field} on {ray}: dropped {} nonpositive samples",
            s.len() - kept.len()
        );
    }
    if kept.len() < FIT_MIN_SAMPLES {
        return Err(OseenError::Fit(format!(
            "{field} on {ray}: {} usable samples, need {FIT_MIN_SAMPLES}",
            kept.len()
        )));
    }
    let rows: Vec<[f64; 2]> = kept.iter().map(|&(r, _)| [1.0, r.ln()]).collect();
    let y: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let (beta, residual) = least_squares(&rows, &y)?;
    Ok(DecayFit {
        ray: ray.into(),
        field: field.into(),
        exponent: beta[1],
        prefactor: beta[0].exp(),
        residual,
        n_samples: kept.len(),
        samples: kept,
    })
}

/// Two-exponent fit `|R| ≈ C|x|^p (1 + 𝓈_ζ(x))^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropicFit {
    pub exponent_r: f64,
    pub exponent_s: f64,
    pub prefactor: f64,
    pub residual: f64,
    pub n_samples: usize,
}

pub fn fit_decay_anisotropic(samples: &[(Vec3, f64)], zeta: &Vec3) -> Result<AnisotropicFit> {
    let kept: Vec<&(Vec3, f64)> = samples.iter().filter(|(_, v)| *v > 0.0 && v.is_finite()).collect();
    if kept.len() < samples.len() {
        warn!("anisotropic fit: dropped {} nonpositive samples", samples.len() - kept.len());
    }
    if kept.len() < FIT_MIN_SAMPLES {
        return Err(OseenError::Fit(format!(
            "{} usable samples, need {FIT_MIN_SAMPLES}",
            kept.len()
        )));
    }
    let rows: Vec<[f64; 3]> = kept
        .iter()
        .map(|(x, _)| [1.0, x.norm().ln(), (1.0 + wake_weight(zeta, x)).ln()])
        .collect();
    let y: Vec<f64> = kept.iter().map(|(_, v)| v.ln()).collect();
    let (beta, residual) = least_squares(&rows, &y)?;
    Ok(AnisotropicFit {
        exponent_r: beta[1],
        exponent_s: beta[2],
        prefactor: beta[0].exp(),
        residual,
        n_samples: kept.len(),
    })
}

fn least_squares<const P: usize>(rows: &[[f64; P]], y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let a = DMatrix::from_fn(rows.len(), P, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(OseenError::Fit("regression design is rank deficient".into()));
    }
    let beta = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|e| OseenError::Fit(e.to_string()))?;
    let res = &a * &beta - b;
    Ok((beta.iter().copied().collect(), (res.norm_squared() / rows.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::geometric_radii;
    use crate::params::KernelParams;
    use crate::scenarios::{Scenario, Singularity, SphereBody};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = geometric_radii(4.0, 64.0, 9).iter().map(|&r| (r, 3.0 * r.powi(-2))).collect();
        let f = fit_decay("e1", "v", &s, FIT_DROP_SMALLEST).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-9);
        assert!((f.prefactor - 3.0).abs() < 1e-8);
        assert_eq!(f.n_samples, 7);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s: Vec<(f64, f64)> = geometric_radii(4.0, 64.0, 12)
            .iter()
            .map(|&r| (r, r.powi(-2) * (1.0 + 0.1 * rng.gen_range(-1.0..1.0))))
            .collect();
        let f = fit_decay("e1", "v", &s, 0).unwrap();
        assert!((f.exponent + 2.0).abs() < 0.1);
    }

    #[test]
    fn fit_rejects_too_few_samples() {
        let s = vec![(1.0, 1.0), (2.0, -1.0), (4.0, 0.25), (8.0, 0.1), (16.0, 0.0), (32.0, 0.01)];
        assert!(matches!(fit_decay("r", "f", &s, 0), Err(OseenError::Fit(_))));
    }

    #[test]
    fn anisotropic_fit_recovers_two_exponents() {
        let zeta = Vec3::x();
        let mut s = Vec::new();
        for (i, r) in geometric_radii(4.0, 64.0, 8).iter().enumerate() {
            for d in [Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.6, 0.8, 0.0)] {
                let x = d * *r * (1.0 + 0.01 * i as f64);
                s.push((x, 2.0 * x.norm().powf(-1.0) * (1.0 + wake_weight(&zeta, &x)).powf(-1.0)));
            }
        }
        let f = fit_decay_anisotropic(&s, &zeta).unwrap();
        assert!((f.exponent_r + 1.0).abs() < 1e-9 && (f.exponent_s + 1.0).abs() < 1e-9);
    }

    fn source_scenario(center: Vec3, y0: Vec3) -> Scenario {
        let p = KernelParams::new(Vec3::x(), 1.0, 1.0, 2).unwrap();
        let q = FourierScalar::from_trig(1.0, 2, 0.0, &[(1, 1.0)], &[]).unwrap();
        Scenario::new(
            p,
            SphereBody { center, radius: 1.0 },
            vec![Singularity::PulsatingSource { location: y0, strength: q }],
        )
        .unwrap()
    }

    #[test]
    fn source_flux_and_moment() {
        let y0 = Vec3::new(0.3, -0.2, 0.1);
        let s = source_scenario(y0, y0);
        let mesh = SurfaceMesh::sphere_gauss(y0, 1.0, 24).unwrap();
        let bd = s.boundary_data(&mesh).unwrap();
        let phi = flux_phi(&mesh, &bd.v_b).unwrap();
        let psi = moment_psi(&mesh, &bd.v_b).unwrap();
        let q1 = 0.5;
        // n points into the body, so the outflow of the source counts negatively.
        assert!((phi.mode(1) + c64(q1)).norm() < 1e-12);
        assert!(phi.mode(0).norm() < 1e-12);
        assert!((psi.mode(1) + to_complex_vec(&y0) * c64(q1)).norm() < 1e-12);
    }

    #[test]
    fn oseenlets_carry_no_flux() {
        let (dep, _) = crate::scenarios::make_flux_pair(&KernelParams::new(Vec3::x(), 1.0, 1.0, 2).unwrap(), SphereBody::default()).unwrap();
        let only = Scenario::new(dep.params, dep.body, dep.singularities[..2].to_vec()).unwrap();
        let mesh = SurfaceMesh::sphere_gauss(Vec3::zeros(), 1.0, 24).unwrap();
        let bd = only.boundary_data(&mesh).unwrap();
        assert!(flux_phi(&mesh, &bd.v_b).unwrap().l2_norm() < 1e-11);
        let c = ExpansionCoefficients::compute(&mesh, &bd, None, &only.params.zeta).unwrap();
        let diff = c.f_lin.try_sub(&c.f_full).unwrap();
        let mut moment = FourierField::zeros(1.0, 2);
        for (node, vb) in mesh.nodes.iter().zip(&bd.v_b) {
            let n = to_complex_vec(&-node.normal);
            let m = vb.time_product(vb, |a, b| a * b.dot(&n)).unwrap();
            moment = moment.try_add(&m.scale(c64(node.weight))).unwrap();
        }
        assert!(diff.try_sub(&moment).unwrap().l2_norm() < 1e-12 * (1.0 + moment.l2_norm()));
    }

    #[test]
    fn leading_terms_vanish_for_zero_coefficients_and_split_adds_up() {
        let p = KernelParams::new(Vec3::x(), 1.0, 1.0, 2).unwrap();
        let cache = ModeKernelCache::new(&p).unwrap();
        let zero = ExpansionCoefficients::zeros(1.0, 2);
        let x = Vec3::new(5.0, 2.0, -1.0);
        assert_eq!(leading_velocity_modes(&zero, &x, &cache, &Default::default()).unwrap().l2_norm(), 0.0);
        assert_eq!(leading_pressure_modes(&zero, &x, &p.zeta, &Default::default()).unwrap().l2_norm(), 0.0);

        let s = source_scenario(Vec3::zeros(), Vec3::new(0.2, 0.1, -0.1));
        let mesh = s.mesh(2).unwrap();
        let bd = s.boundary_data(&mesh).unwrap();
        let c = ExpansionCoefficients::compute(&mesh, &bd, None, &p.zeta).unwrap();
        let full = leading_velocity_modes(&c, &x, &cache, &Default::default()).unwrap();
        let st = leading_velocity_modes(&c, &x, &cache, &LeadingOptions { part: Part::Steady, ..Default::default() }).unwrap();
        let pe = leading_velocity_modes(&c, &x, &cache, &LeadingOptions { part: Part::Periodic, ..Default::default() }).unwrap();
        assert!(full.try_sub(&st.try_add(&pe).unwrap()).unwrap().l2_norm() < 1e-15 * full.l2_norm());
    }

    #[test]
    fn field_equal_to_leading_has_zero_remainder() {
        let p = KernelParams::new(Vec3::x(), 1.0, 1.0, 2).unwrap();
        let cache = ModeKernelCache::new(&p).unwrap();
        let mut c = ExpansionCoefficients::zeros(1.0, 2);
        c.f_lin.set_mode(0, to_complex_vec(&Vec3::new(1.0, 0.0, 0.0)));
        let ray = Ray::new("e2", Vec3::y(), geometric_radii(4.0, 64.0, 5)).unwrap();
        let lead = |x: &Vec3| leading_velocity_modes(&c, x, &cache, &Default::default());
        let r = remainder_samples(lead, lead, &ray, TimeNorm::Max).unwrap();
        assert!(r.iter().all(|s| s.steady == 0.0 && s.periodic == 0.0));
    }
}
