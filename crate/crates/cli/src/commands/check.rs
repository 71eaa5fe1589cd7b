use clap::ValueEnum;
use num_complex::Complex64;
use oseen_tp::asymptotics::conv::{domain_stability, verify_conv_bounds, ConvCase, ConvSpec};
use oseen_tp::fundsol::{mode_velocity, mode_velocity_zeta0, oseen_steady, pressure_p};
use oseen_tp::geom::CMat3;
use oseen_tp::params::ParamsFile;
use oseen_tp::verify::{fft_vs_mode_velocity, pde_residual, residual_step, FftGridSpec, PairSample};
use oseen_tp::{KernelParams, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{core, Outcome};
use crate::io::{fmt_f, input_err, output_path, read_json, Table};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Residual,
    Fft,
    Conv,
}

fn default_params() -> ParamsFile {
    ParamsFile {
        zeta: [1.0, 0.0, 0.0],
        nu: 1.0,
        period: 1.0,
        n_modes: 2,
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualConfig {
    pub params: ParamsFile,
    pub n_points: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub modes: Vec<i64>,
    pub tol: f64,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        Self {
            params: default_params(),
            n_points: 20,
            r_min: 1.0,
            r_max: 8.0,
            modes: vec![0, 1, -1, 2, -2],
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FftConfig {
    pub params: ParamsFile,
    pub half_length: f64,
    pub n: usize,
    pub k: i64,
    pub tol: f64,
    /// Tolerance of the zero-drift closed-form comparison.
    pub closed_form_tol: f64,
}

impl Default for FftConfig {
    fn default() -> Self {
        Self {
            params: default_params(),
            half_length: 16.0,
            n: 64,
            k: 1,
            tol: 0.05,
            closed_form_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvConfig {
    pub params: ParamsFile,
    pub cases: Vec<ConvCase>,
    pub radii: Vec<f64>,
    pub domain_radius: f64,
    /// Largest allowed change of the sup ratio when the domain doubles.
    pub max_variation: f64,
    /// Also run the log-discriminating test of the `steady_grad_log` case.
    pub log_test: bool,
}

impl Default for ConvConfig {
    fn default() -> Self {
        Self {
            params: default_params(),
            cases: ConvCase::ALL.to_vec(),
            radii: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            domain_radius: 64.0,
            max_variation: 1.5,
            log_test: true,
        }
    }
}

/// Run configuration of `check`; every block is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub residual: ResidualConfig,
    pub fft: FftConfig,
    pub conv: ConvConfig,
}

fn positive(name: &str, v: f64) -> anyhow::Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(input_err(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

impl RunConfig {
    fn validate(&self) -> anyhow::Result<()> {
        positive("residual.tol", self.residual.tol)?;
        positive("residual.r_min", self.residual.r_min)?;
        if self.residual.r_max <= self.residual.r_min {
            return Err(input_err("residual.r_max must exceed residual.r_min"));
        }
        positive("fft.tol", self.fft.tol)?;
        positive("fft.closed_form_tol", self.fft.closed_form_tol)?;
        positive("conv.max_variation", self.conv.max_variation)?;
        positive("conv.domain_radius", self.conv.domain_radius)?;
        Ok(())
    }
}

struct Report {
    table: Table,
    pass: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            table: Table::new(["check", "case", "metric", "value", "tolerance", "pass"]),
            pass: true,
        }
    }

    /// Records `value ≤ tol` (or `value ≥ tol` when `at_least`).
    fn add(&mut self, check: &str, case: &str, metric: &str, value: f64, tol: f64, at_least: bool) {
        let ok = if at_least { value >= tol } else { value <= tol };
        self.pass &= ok;
        self.table.push(vec![
            check.into(),
            case.into(),
            metric.into(),
            fmt_f(value),
            fmt_f(tol),
            ok.to_string(),
        ]);
    }
}

fn random_point(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Vec3 {
    loop {
        let d = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = d.norm();
        if n > 0.1 && n <= 1.0 {
            return d / n * rng.gen_range(r_min..r_max);
        }
    }
}

fn kernel_pair(g: CMat3, x: &Vec3) -> oseen_tp::Result<PairSample> {
    let pr = pressure_p(x)?;
    Ok(PairSample {
        velocity: (0..3).map(|j| g.column(j).into_owned()).collect(),
        pressure: (0..3).map(|j| Complex64::new(pr[j], 0.0)).collect(),
    })
}

fn residual(cfg: &ResidualConfig, seed: u64, rep: &mut Report) -> anyhow::Result<()> {
    let p = core(KernelParams::try_from(cfg.params.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &k in &cfg.modes {
        if k == 0 {
            core(p.require_drift())?;
        } else if k.unsigned_abs() as usize > p.n_modes {
            return Err(input_err(format!("mode {k} exceeds n_modes {}", p.n_modes)));
        }
        for i in 0..cfg.n_points {
            let x = random_point(&mut rng, cfg.r_min, cfg.r_max);
            let sampler = |y: &Vec3| {
                let g = if k == 0 {
                    oseen_steady(y, &p)?.map(|c| Complex64::new(c, 0.0))
                } else {
                    mode_velocity(y, &p, k)?
                };
                kernel_pair(g, y)
            };
            let r = core(pde_residual(sampler, p.lambda(k), &x, &p, residual_step(&x), &[Vec3::zeros()]))?;
            let case = format!("k={k} point={i}");
            rep.add("residual", &case, "momentum", r.momentum, cfg.tol, false);
            rep.add("residual", &case, "divergence", r.divergence, cfg.tol, false);
        }
    }
    Ok(())
}

fn fft(cfg: &FftConfig, seed: u64, rep: &mut Report) -> anyhow::Result<()> {
    let p = core(KernelParams::try_from(cfg.params.clone()))?;
    let spec = FftGridSpec {
        half_length: cfg.half_length,
        n: cfg.n,
        k: cfg.k,
        params: p,
    };
    let err = core(fft_vs_mode_velocity(&spec))?;
    rep.add("fft", &format!("k={}", cfg.k), "mean_subtracted_rel_error", err, cfg.tol, false);
    let p0 = p.with_zeta(Vec3::zeros());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = random_point(&mut rng, 0.5, 6.0);
        let a = core(mode_velocity(&x, &p0, cfg.k))?;
        let b = core(mode_velocity_zeta0(&x, p0.nu, p0.lambda(cfg.k)))?;
        worst = worst.max((a - b).norm() / b.norm());
    }
    rep.add("fft", "zero_drift_closed_form", "rel_error", worst, cfg.closed_form_tol, false);
    Ok(())
}

fn conv(cfg: &ConvConfig, rep: &mut Report) -> anyhow::Result<()> {
    let p = core(KernelParams::try_from(cfg.params.clone()))?;
    for &case in &cfg.cases {
        let mut spec = ConvSpec::new(case, &p.zeta);
        spec.domain_radius = cfg.domain_radius;
        for ray in &mut spec.rays {
            ray.radii = cfg.radii.clone();
        }
        let d = core(domain_stability(&spec, &p))?;
        let name = serde_json::to_value(case)?.as_str().unwrap_or_default().to_string();
        rep.add("conv", &name, "sup_ratio", d.base.sup_ratio, f64::INFINITY, false);
        rep.add("conv", &name, "domain_variation", d.variation, cfg.max_variation, false);
    }
    if cfg.log_test {
        let growth = |with_log: bool| -> anyhow::Result<Vec<(String, f64)>> {
            let mut spec = ConvSpec::new(ConvCase::SteadyGradLog, &p.zeta);
            spec.domain_radius = cfg.domain_radius;
            spec.with_log = with_log;
            let rep = core(verify_conv_bounds(&spec, &p))?;
            Ok(spec
                .rays
                .iter()
                .map(|ray| {
                    let r: Vec<f64> = rep.samples.iter().filter(|s| s.ray == ray.label).map(|s| s.ratio).collect();
                    (ray.label.clone(), r[r.len() - 1] / r[0])
                })
                .collect())
        };
        for (label, g) in growth(true)? {
            rep.add("conv", &format!("log_test/{label}"), "growth_with_log", g, 1.25, false);
        }
        for (label, g) in growth(false)? {
            rep.add("conv", &format!("log_test/{label}"), "growth_without_log", g, 1.5, true);
        }
    }
    Ok(())
}

pub fn run(g: &Global, suite: Suite) -> anyhow::Result<Outcome> {
    let cfg: RunConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let mut rep = Report::new();
    match suite {
        Suite::Residual => residual(&cfg.residual, g.seed, &mut rep)?,
        Suite::Fft => fft(&cfg.fft, g.seed, &mut rep)?,
        Suite::Conv => conv(&cfg.conv, &mut rep)?,
    }
    let name = match suite {
        Suite::Residual => "check_residual.csv",
        Suite::Fft => "check_fft.csv",
        Suite::Conv => "check_conv.csv",
    };
    rep.table.write(&output_path(g.out.as_deref(), name))?;
    println!("check {:?}: {}", suite, if rep.pass { "pass" } else { "FAIL" });
    Ok(if rep.pass { Outcome::Pass } else { Outcome::Fail })
}
