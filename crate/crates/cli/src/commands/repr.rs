use std::path::PathBuf;

use clap::{Args, ValueEnum};
use oseen_tp::fourier::{Coefficient, FourierSeries};
use oseen_tp::mesh::{QuadratureRule, SurfaceMesh};
use oseen_tp::potentials::{represent_pressure_linear, represent_velocity_linear, PressureSigns};

use super::{core, Outcome};
use crate::io::{fmt_f, input_err, load_scenario, output_path, sibling, PointsFile, Table};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Signs {
    Derived,
    Printed,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Icosphere refinement level of the body mesh.
    #[arg(long, default_value_t = 4)]
    pub mesh_level: u32,
    /// Mesh file replacing the icosphere.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Points or rays file.
    #[arg(long)]
    pub points: PathBuf,
    /// Sign convention of the pressure representation.
    #[arg(long, value_enum, default_value_t = Signs::Derived)]
    pub pressure_signs: Signs,
    /// Exit with code 1 when any relative error exceeds this value.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Rows `point, mode, |analytic|, |represented|, rel_err`; errors are
/// relative to the time-L² norm of the analytic field at the point.
fn push_rows<T: Coefficient>(
    t: &mut Table,
    point: usize,
    analytic: &FourierSeries<T>,
    repr: &FourierSeries<T>,
) -> anyhow::Result<f64> {
    let scale = analytic.l2_norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for k in analytic.modes() {
        let a = analytic.mode(k);
        let b = repr.mode(k);
        let diff = (a - b).norm_sqr().sqrt();
        let rel = diff / scale;
        worst = worst.max(rel);
        t.push(vec![
            point.to_string(),
            k.to_string(),
            fmt_f(a.norm_sqr().sqrt()),
            fmt_f(b.norm_sqr().sqrt()),
            fmt_f(rel),
        ]);
    }
    Ok(worst)
}

const HEADER: [&str; 5] = ["point", "mode", "|analytic|", "|represented|", "rel_err"];

pub fn check(g: &Global, a: &CheckArgs) -> anyhow::Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let pf = PointsFile::load(&a.points)?;
    let pts = pf.all_points(&s.params.zeta)?;
    let mesh = match &a.mesh {
        Some(p) => core(SurfaceMesh::load_json(p, QuadratureRule::Centroid))?,
        None => {
            if a.mesh_level > 7 {
                return Err(input_err("--mesh-level must be at most 7"));
            }
            core(s.mesh(a.mesh_level))?
        }
    };
    let bd = core(s.boundary_data(&mesh))?;
    let signs = match a.pressure_signs {
        Signs::Derived => PressureSigns::Derived,
        Signs::Printed => PressureSigns::Printed,
    };
    let mut tv = Table::new(HEADER);
    let mut tp = Table::new(HEADER);
    let mut worst = 0.0f64;
    for (i, x) in pts.iter().enumerate() {
        let m = core(s.modes(x))?;
        let v = core(represent_velocity_linear(&mesh, &bd, None, x, s.cache()))?;
        let p = core(represent_pressure_linear(&mesh, &bd, None, x, &s.params.zeta, s.params.nu, signs))?;
        worst = worst.max(push_rows(&mut tv, i, &m.velocity, &v)?);
        worst = worst.max(push_rows(&mut tp, i, &m.pressure, &p)?);
    }
    let path = output_path(g.out.as_deref(), "report.csv");
    tv.write(&path)?;
    tp.write(&sibling(&path, "pressure"))?;
    println!("max relative error {worst:.3e} over {} points", pts.len());
    Ok(match a.tol {
        Some(tol) if !(worst <= tol) => Outcome::Fail,
        _ => Outcome::Pass,
    })
}
