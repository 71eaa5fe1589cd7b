use std::path::PathBuf;

use clap::{Args, ValueEnum};
use oseen_tp::asymptotics::{
    fit_decay, leading_pressure_modes, leading_velocity_modes, split_norms, Expansion,
    ExpansionCoefficients, LeadingOptions, SignConvention, TimeNorm, FIT_DROP_SMALLEST,
};
use oseen_tp::mesh::SurfaceMesh;

use super::{core, Outcome};
use crate::io::{fmt_f, input_err, load_scenario, output_path, sibling, PointsFile, Table};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpansionArg {
    Lin,
    Nonlin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SignsArg {
    ThmLin,
    ThmNonlin,
    Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Max,
    L2,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = ExpansionArg::Lin)]
    pub expansion: ExpansionArg,
    #[arg(long, value_enum, default_value_t = SignsArg::ThmLin)]
    pub signs: SignsArg,
    /// Rays file.
    #[arg(long)]
    pub rays: PathBuf,
    /// Latitudes of the Gauss body mesh used for the expansion coefficients.
    #[arg(long, default_value_t = 32)]
    pub gauss_latitudes: usize,
    /// Number of smallest radii left out of each fit.
    #[arg(long, default_value_t = FIT_DROP_SMALLEST)]
    pub drop: usize,
    /// Time norm of the purely periodic part.
    #[arg(long, value_enum, default_value_t = NormArg::Max)]
    pub norm: NormArg,
}

pub fn fit(g: &Global, a: &FitArgs) -> anyhow::Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let rays = PointsFile::load(&a.rays)?.ray_list(&s.params.zeta)?;
    if rays.is_empty() {
        return Err(input_err(format!("{}: no rays given", a.rays.display())));
    }
    for r in &rays {
        core(r.check_outside(s.body.radius + (s.body.center).norm()))?;
    }
    let mesh = core(SurfaceMesh::sphere_gauss(s.body.center, s.body.radius, a.gauss_latitudes))?;
    let bd = core(s.boundary_data(&mesh))?;
    let coeffs = core(ExpansionCoefficients::compute(&mesh, &bd, None, &s.params.zeta))?;
    let opts = LeadingOptions {
        expansion: match a.expansion {
            ExpansionArg::Lin => Expansion::Lin,
            ExpansionArg::Nonlin => Expansion::Nonlin,
        },
        signs: match a.signs {
            SignsArg::ThmLin => SignConvention::ThmLin,
            SignsArg::ThmNonlin => SignConvention::ThmNonlin,
            SignsArg::Derived => SignConvention::Derived,
        },
        ..Default::default()
    };
    let norm = match a.norm {
        NormArg::Max => TimeNorm::Max,
        NormArg::L2 => TimeNorm::L2,
    };
    const FIELDS: [&str; 6] = ["v_perp", "p_perp", "v_steady", "rem_v_perp", "rem_v_steady", "rem_p_perp"];
    let mut fits = Table::new(["field", "ray", "exponent", "residual", "n_samples"]);
    let mut samples = Table::new(["field", "ray", "r", "value"]);
    for ray in &rays {
        let mut vals: [Vec<(f64, f64)>; 6] = Default::default();
        for (r, x) in ray.points() {
            let m = core(s.modes(&x))?;
            let lv = core(leading_velocity_modes(&coeffs, &x, s.cache(), &opts))?;
            let lp = core(leading_pressure_modes(&coeffs, &x, &s.params.zeta, &opts))?;
            let (v0, vp) = split_norms(&m.velocity, norm);
            let (_, pp) = split_norms(&m.pressure, norm);
            let (rv0, rvp) = split_norms(&m.velocity.try_sub(&lv)?, norm);
            let (_, rpp) = split_norms(&m.pressure.try_sub(&lp)?, norm);
            for (i, v) in [vp, pp, v0, rvp, rv0, rpp].into_iter().enumerate() {
                vals[i].push((r, v));
            }
        }
        for (field, v) in FIELDS.iter().zip(&vals) {
            for &(r, value) in v {
                samples.push(vec![field.to_string(), ray.label.clone(), fmt_f(r), fmt_f(value)]);
            }
            // Fields that vanish identically for this scenario have no fit.
            if v.iter().all(|&(_, x)| x <= 1e-300) {
                continue;
            }
            match fit_decay(&ray.label, field, v, a.drop) {
                Ok(f) => fits.push(vec![
                    field.to_string(),
                    ray.label.clone(),
                    fmt_f(f.exponent),
                    fmt_f(f.residual),
                    f.n_samples.to_string(),
                ]),
                Err(e) => log::warn!("{e}"),
            }
        }
    }
    let path = output_path(g.out.as_deref(), "fits.csv");
    fits.write(&path)?;
    samples.write(&sibling(&path, "samples"))?;
    Ok(Outcome::Pass)
}
