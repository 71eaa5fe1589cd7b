//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line.

use oseen_tp::asymptotics::conv::{domain_stability, ConvCase, ConvSpec};
use oseen_tp::asymptotics::*;
use oseen_tp::fourier::FourierField;
use oseen_tp::fundsol::*;
use oseen_tp::geom::{c64, default_rays, geometric_radii, wake_weight, CMat3};
use oseen_tp::potentials::*;
use oseen_tp::scenarios::*;
use oseen_tp::verify::*;
use oseen_tp::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(n: u32, pass: bool, detail: &str, start: Instant) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!(
        "criterion {n}: {tag} ({:.1}s) {detail}",
        start.elapsed().as_secs_f64()
    );
    pass
}

fn params() -> KernelParams {
    KernelParams::new(Vec3::new(1.0, 0.0, 0.0), 1.0, 1.0, 2).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Vec3 {
    let d = loop {
        let d = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if d.norm() > 0.1 && d.norm() <= 1.0 {
            break d.normalize();
        }
    };
    d * rng.gen_range(r_min..r_max)
}

fn kernel_pair(g: CMat3, x: &Vec3) -> Result<PairSample> {
    let pr = pressure_p(x)?;
    Ok(PairSample {
        velocity: (0..3).map(|j| g.column(j).into_owned()).collect(),
        pressure: (0..3).map(|j| c64(pr[j])).collect(),
    })
}

#[test]
fn criterion_1_kernel_correctness() {
    let start = Instant::now();
    let p = KernelParams::new(Vec3::new(1.0, 0.3, -0.2), 0.7, 1.3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in [0i64, 1, -1, 2, -2] {
        for _ in 0..20 {
            let x = random_point(&mut rng, 1.0, 8.0);
            let sampler = |y: &Vec3| {
                let g = if k == 0 {
                    oseen_steady(y, &p)?.map(c64)
                } else {
                    mode_velocity(y, &p, k)?
                };
                kernel_pair(g, y)
            };
            let r = pde_residual(sampler, p.lambda(k), &x, &p, residual_step(&x), &[Vec3::zeros()])
                .unwrap();
            worst = worst.max(r.momentum).max(r.divergence);
        }
    }
    let mut k0_err = 0.0f64;
    for _ in 0..10 {
        let x = random_point(&mut rng, 0.5, 8.0);
        let k = drift_helmholtz_k(&x, &p, 0.0).unwrap();
        let exact = (-wake_weight(&p.zeta, &x) / p.nu).exp() / (4.0 * std::f64::consts::PI * p.nu * x.norm());
        k0_err = k0_err.max((k - c64(exact)).norm() / exact);
    }
    let small = KernelParams::new(1e-6 * Vec3::new(0.6, 0.0, 0.8), 1.0, 1.0, 1).unwrap();
    let mut stokes_err = 0.0f64;
    for _ in 0..10 {
        let x = random_point(&mut rng, 1.0, 8.0);
        let a = oseen_steady(&x, &small).unwrap();
        let b = stokeslet(&x, 1.0).unwrap();
        stokes_err = stokes_err.max((a - b).norm() / b.norm());
    }
    let pass = worst < 1e-4 && k0_err < 1e-12 && stokes_err < 1e-5;
    let detail = format!("residual {worst:.2e}, K_0 {k0_err:.2e}, Stokes limit {stokes_err:.2e}");
    assert!(report(1, pass, &detail, start), "{detail}");
}

#[test]
fn criterion_2_mode_kernel_cross_validation() {
    let start = Instant::now();
    let p = params();
    let spec = FftGridSpec {
        half_length: 16.0,
        n: 64,
        k: 1,
        params: p,
    };
    let fft_err = fft_vs_mode_velocity(&spec).unwrap();
    let p0 = KernelParams::new(Vec3::zeros(), 0.8, 1.5, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut closed_err = 0.0f64;
    for _ in 0..10 {
        let x = random_point(&mut rng, 0.5, 6.0);
        for k in [1i64, 2] {
            let a = mode_velocity(&x, &p0, k).unwrap();
            let b = mode_velocity_zeta0(&x, p0.nu, p0.lambda(k)).unwrap();
            closed_err = closed_err.max((a - b).norm() / b.norm());
        }
    }
    let pass = fft_err < 0.05 && closed_err < 1e-4;
    let detail = format!("FFT oracle {fft_err:.3e}, zero-drift closed form {closed_err:.2e}");
    assert!(report(2, pass, &detail, start), "{detail}");
}

#[test]
fn criterion_3_fundamental_solution_decay() {
    let start = Instant::now();
    let p = params();
    let radii = geometric_radii(4.0, 64.0, 9);
    let rays = default_rays(&p.zeta, &radii);
    let mut lines = Vec::new();
    let mut pass = true;
    for ray in rays.iter().filter(|r| ["upstream", "wake", "transverse1", "diag_up"].contains(&r.label.as_str())) {
        let s: Vec<(f64, f64)> = ray
            .points()
            .map(|(r, x)| (r, periodic_l2_norm(&x, &p).unwrap()))
            .collect();
        let f = fit_decay(&ray.label, "periodic", &s, FIT_DROP_SMALLEST).unwrap();
        pass &= (f.exponent + 3.0).abs() <= 0.15;
        lines.push(format!("per/{} {:.3}", ray.label, f.exponent));
    }
    for (label, target, tol) in [("wake", -1.0, 0.1), ("transverse1", -2.0, 0.15)] {
        let ray = rays.iter().find(|r| r.label == label).unwrap();
        let s: Vec<(f64, f64)> = ray
            .points()
            .map(|(r, x)| (r, oseen_steady(&x, &p).unwrap().norm()))
            .collect();
        let f = fit_decay(label, "steady", &s, FIT_DROP_SMALLEST).unwrap();
        pass &= (f.exponent - target).abs() <= tol;
        lines.push(format!("ste/{label} {:.3}", f.exponent));
    }
    let detail = lines.join(", ");
    assert!(report(3, pass, &detail, start), "{detail}");
}

fn far_points() -> Vec<Vec3> {
    (0..8)
        .map(|i| {
            let r = 6.0 * (20.0f64 / 6.0).powf(i as f64 / 7.0);
            let th = 0.3 + 0.7 * i as f64;
            let ph = 1.1 * i as f64;
            Vec3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()) * r
        })
        .collect()
}

fn steady_scenario(p: KernelParams) -> Scenario {
    Scenario::new(
        p,
        SphereBody::default(),
        vec![Singularity::SteadyOseenlet {
            location: Vec3::new(0.1, -0.2, 0.15),
            strength: Vec3::new(1.0, 0.6, -0.4),
        }],
    )
    .unwrap()
}

fn periodic_scenario(p: KernelParams) -> Scenario {
    Scenario::new(
        p,
        SphereBody::default(),
        vec![Singularity::PeriodicOseenlet {
            k: 1,
            location: Vec3::new(-0.15, 0.1, 0.2),
            strength: Vec3::new(0.5, -0.8, 0.7),
        }],
    )
    .unwrap()
}

fn source_scenario(p: KernelParams) -> Scenario {
    let q = FourierScalar::from_trig(p.period, p.n_modes, 0.3, &[(1, 1.0)], &[(2, 0.4)]).unwrap();
    Scenario::new(
        p,
        SphereBody::default(),
        vec![Singularity::PulsatingSource {
            location: Vec3::new(0.2, 0.1, -0.25),
            strength: q,
        }],
    )
    .unwrap()
}

#[test]
fn criterion_4_representation_reproduction() {
    let start = Instant::now();
    let p = params();
    let pts = far_points();
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, s) in [
        ("steady", steady_scenario(p)),
        ("periodic", periodic_scenario(p)),
        ("source", source_scenario(p)),
    ] {
        let mut errs = Vec::new();
        for level in 2..=4 {
            let mesh = s.mesh(level).unwrap();
            let bd = s.boundary_data(&mesh).unwrap();
            let (mut ev, mut ep) = (0.0f64, 0.0f64);
            for x in &pts {
                let m = s.modes(x).unwrap();
                let v = represent_velocity_linear(&mesh, &bd, None, x, s.cache()).unwrap();
                let pr = represent_pressure_linear(&mesh, &bd, None, x, &p.zeta, p.nu, PressureSigns::Derived)
                    .unwrap();
                ev = ev.max(v.try_sub(&m.velocity).unwrap().l2_norm() / m.velocity.l2_norm());
                ep = ep.max(pr.try_sub(&m.pressure).unwrap().l2_norm() / m.pressure.l2_norm());
            }
            errs.push((ev, ep));
        }
        let (v4, p4) = errs[2];
        let shrink_v = (errs[0].0 / errs[1].0).min(errs[1].0 / errs[2].0);
        let shrink_p = (errs[0].1 / errs[1].1).min(errs[1].1 / errs[2].1);
        pass &= v4 < 1e-3 && p4 < 1e-3 && shrink_v >= 3.0 && shrink_p >= 3.0;
        lines.push(format!(
            "{name}: v {v4:.2e} p {p4:.2e} shrink v x{shrink_v:.2} p x{shrink_p:.2}"
        ));
    }
    let detail = lines.join("; ");
    assert!(report(4, pass, &detail, start), "{detail}");
}

#[test]
fn criterion_5_flux_dichotomy() {
    let start = Instant::now();
    let p = params();
    let (dep, cst) = make_flux_pair(&p, SphereBody::default()).unwrap();
    let radii = geometric_radii(8.0, 64.0, 9);
    let rays = default_rays(&p.zeta, &radii);
    let mut pass = true;
    let mut ranges = Vec::new();
    for (name, s, tv, tp, tol) in [("time-dependent", &dep, -2.0, -1.0, 0.15), ("constant", &cst, -3.0, -2.0, 0.2)] {
        let (mut vr, mut pr) = ((f64::MAX, f64::MIN), (f64::MAX, f64::MIN));
        for ray in &rays {
            let (mut v, mut q) = (Vec::new(), Vec::new());
            for (r, x) in ray.points() {
                let m = s.modes(&x).unwrap();
                v.push((r, split_norms(&m.velocity, TimeNorm::Max).1));
                q.push((r, split_norms(&m.pressure, TimeNorm::Max).1));
            }
            let fv = fit_decay(&ray.label, "v_perp", &v, FIT_DROP_SMALLEST).unwrap().exponent;
            let fp = fit_decay(&ray.label, "p_perp", &q, FIT_DROP_SMALLEST).unwrap().exponent;
            pass &= (fv - tv).abs() <= tol && (fp - tp).abs() <= tol;
            vr = (vr.0.min(fv), vr.1.max(fv));
            pr = (pr.0.min(fp), pr.1.max(fp));
        }
        ranges.push(format!(
            "{name}: v⊥ [{:.3}, {:.3}] p⊥ [{:.3}, {:.3}]",
            vr.0, vr.1, pr.0, pr.1
        ));
    }
    let detail = ranges.join("; ");
    assert!(report(5, pass, &detail, start), "{detail}");
}

#[test]
fn criterion_6_expansion_remainders() {
    let start = Instant::now();
    let p = params();
    let (dep, _) = make_flux_pair(&p, SphereBody::default()).unwrap();
    let mesh = SurfaceMesh::sphere_gauss(Vec3::zeros(), 1.0, 32).unwrap();
    let bd = dep.boundary_data(&mesh).unwrap();
    let c = ExpansionCoefficients::compute(&mesh, &bd, None, &p.zeta).unwrap();
    let radii = geometric_radii(8.0, 64.0, 9);
    let rays = default_rays(&p.zeta, &radii);
    let run = |moment: bool| {
        let opts = LeadingOptions {
            terms: LeadingTerms {
                moment,
                ..Default::default()
            },
            ..Default::default()
        };
        rays.iter()
            .map(|ray| {
                let rs = remainder_samples(
                    |x| Ok(dep.modes(x)?.velocity),
                    |x| leading_velocity_modes(&c, x, dep.cache(), &opts),
                    ray,
                    TimeNorm::Max,
                )
                .unwrap();
                let per: Vec<(f64, f64)> = rs.iter().map(|s| (s.r, s.periodic)).collect();
                let e = fit_decay(&ray.label, "periodic_remainder", &per, FIT_DROP_SMALLEST)
                    .unwrap()
                    .exponent;
                let ratios: Vec<f64> = rs
                    .iter()
                    .map(|s| s.steady * (s.r * (1.0 + wake_weight(&p.zeta, &s.x))).powf(1.5))
                    .collect();
                (e, ratios)
            })
            .collect::<Vec<_>>()
    };
    let full = run(true);
    let ablated = run(false);
    let worst_exp = full.iter().map(|(e, _)| *e).fold(f64::MIN, f64::max);
    // The steady bound is an upper bound: the ratio may decay, it must not grow.
    let growth = full
        .iter()
        .map(|(_, r)| r.iter().fold(0.0f64, |m, v| m.max(*v)) / r[0])
        .fold(0.0, f64::max);
    let spread = full
        .iter()
        .map(|(_, r)| r.iter().fold(0.0f64, |m, v| m.max(*v)) / r.iter().fold(f64::MAX, |m, v| m.min(*v)))
        .fold(0.0, f64::max);
    let abl: Vec<f64> = ablated.iter().map(|(e, _)| *e).collect();
    let abl_ok = abl.iter().all(|e| (e + 3.0).abs() <= 0.2);
    let pass = worst_exp <= -3.7 && growth <= 2.0 && abl_ok;
    let detail = format!(
        "periodic exponent ≤ {worst_exp:.3}, steady ratio growth x{growth:.2} (max/min x{spread:.2}), ablated exponents [{:.3}, {:.3}]",
        abl.iter().cloned().fold(f64::MAX, f64::min),
        abl.iter().cloned().fold(f64::MIN, f64::max)
    );
    assert!(report(6, pass, &detail, start), "{detail}");
}

#[test]
fn criterion_7_convolution_bounds() {
    let start = Instant::now();
    let p = params();
    let mut pass = true;
    let mut lines = Vec::new();
    for case in ConvCase::ALL {
        let spec = ConvSpec::new(case, &p.zeta);
        let d = domain_stability(&spec, &p).unwrap();
        pass &= d.variation < 1.5 && d.base.sup_ratio.is_finite();
        lines.push(format!("{case:?} x{:.3}", d.variation));
    }
    let growth = |with_log: bool| {
        let mut spec = ConvSpec::new(ConvCase::SteadyGradLog, &p.zeta);
        spec.with_log = with_log;
        let rep = oseen_tp::asymptotics::conv::verify_conv_bounds(&spec, &p).unwrap();
        spec.rays
            .iter()
            .map(|ray| {
                let r: Vec<f64> = rep.samples.iter().filter(|s| s.ray == ray.label).map(|s| s.ratio).collect();
                r[r.len() - 1] / r[0]
            })
            .collect::<Vec<f64>>()
    };
    let with = growth(true);
    let without = growth(false);
    let log_ok = with.iter().all(|g| *g <= 1.25) && without.iter().all(|g| *g >= 1.5);
    pass &= log_ok;
    lines.push(format!(
        "log test: growth with log ≤ x{:.2}, without ≥ x{:.2}",
        with.iter().cloned().fold(0.0, f64::max),
        without.iter().cloned().fold(f64::MAX, f64::min)
    ));
    let detail = lines.join(", ");
    assert!(report(7, pass, &detail, start), "{detail}");
}

struct Convective<'a>(&'a Scenario);

impl ForcingField for Convective<'_> {
    fn sample(&self, y: &Vec3) -> Result<FourierField> {
        let m = self.0.modes(y)?;
        m.velocity.time_product(&m.jacobian, |a, j: &CMat3| j * a)
    }
}

#[test]
fn criterion_8_nonlinear_evaluator_structural() {
    let start = Instant::now();
    let p = params();
    let x = Vec3::new(3.0, 1.5, -1.0);
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, s) in [("steady", steady_scenario(p)), ("periodic", periodic_scenario(p))] {
        let mesh = s.mesh(3).unwrap();
        let bd = s.boundary_data(&mesh).unwrap();
        let opts = NonlinearOptions {
            r_trunc: Some(16.0),
            ..Default::default()
        };
        let forcing = Convective(&s);
        let rep = represent_velocity_nonlinear(&mesh, &bd, Some(&forcing), &s, &x, s.cache(), &opts).unwrap();
        let lin = represent_velocity_linear(&mesh, &bd, None, &x, s.cache()).unwrap();
        let exact = s.modes(&x).unwrap().velocity;
        let n = exact.l2_norm();
        let conv_lin = rep.convective.try_sub(&lin).unwrap().l2_norm() / n;
        let agree = rep.divergence.try_sub(&rep.convective).unwrap().l2_norm() / n;
        let err = rep.convective.try_sub(&exact).unwrap().l2_norm() / n;
        let lin_err = lin.try_sub(&exact).unwrap().l2_norm() / n;
        pass &= conv_lin < 1e-10 && agree < 1e-3 && (err - lin_err).abs() < 1e-10 && rep.tail_estimate[1] < 1e-3 * n;
        lines.push(format!(
            "{name}: variants differ {agree:.2e}, convective vs linear {conv_lin:.1e}, error {err:.2e}"
        ));
    }
    let detail = lines.join("; ");
    assert!(report(8, pass, &detail, start), "{detail}");
}
