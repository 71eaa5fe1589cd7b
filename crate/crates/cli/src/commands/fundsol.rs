use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use oseen_tp::fundsol::{
    laplace_e, mode_velocity, oseen_steady, periodic_velocity, pressure_p, stokeslet,
};
use oseen_tp::geom::{CMat3, Mat3};
use oseen_tp::{KernelParams, Vec3};

use super::{core, Outcome};
use crate::io::{fmt_f, input_err, load_params, output_path, PointsFile, Table};
use crate::Global;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kernel {
    #[value(name = "E")]
    E,
    #[value(name = "P")]
    P,
    Stokeslet,
    Oseen,
    Mode,
    Periodic,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub kernel: Kernel,
    /// Points file; `times` feed `periodic`, `modes` feed `mode`.
    #[arg(long)]
    pub points: PathBuf,
    /// Kernel parameters; required except for `E` and `P`.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

fn tensor_header(prefix: &str, complex: bool) -> Vec<String> {
    let mut h = Vec::new();
    for i in 1..=3 {
        for j in 1..=3 {
            if complex {
                h.push(format!("{prefix}{i}{j}_re"));
                h.push(format!("{prefix}{i}{j}_im"));
            } else {
                h.push(format!("{prefix}{i}{j}"));
            }
        }
    }
    h
}

fn real_entries(m: &Mat3) -> impl Iterator<Item = String> + '_ {
    (0..3).flat_map(move |i| (0..3).map(move |j| fmt_f(m[(i, j)])))
}

fn complex_entries(m: &CMat3) -> Vec<String> {
    let mut v = Vec::with_capacity(18);
    for i in 0..3 {
        for j in 0..3 {
            let c: Complex64 = m[(i, j)];
            v.push(fmt_f(c.re));
            v.push(fmt_f(c.im));
        }
    }
    v
}

fn coords(x: &Vec3) -> Vec<String> {
    x.iter().map(|c| fmt_f(*c)).collect()
}

pub fn eval(g: &Global, a: &EvalArgs) -> anyhow::Result<Outcome> {
    let pf = PointsFile::load(&a.points)?;
    let params: Option<KernelParams> = a.params.as_deref().map(load_params).transpose()?;
    let need = || params.ok_or_else(|| input_err(format!("--params is required for kernel {:?}", a.kernel)));
    let zeta = params.map(|p| p.zeta).unwrap_or_else(Vec3::x);
    let pts = pf.all_points(&zeta)?;
    let mut header: Vec<String> = ["x1", "x2", "x3"].map(String::from).to_vec();
    let table = match a.kernel {
        Kernel::E => {
            header.push("value".into());
            let mut t = Table::new(header);
            for x in &pts {
                let mut r = coords(x);
                r.push(fmt_f(core(laplace_e(x))?));
                t.push(r);
            }
            t
        }
        Kernel::P => {
            header.extend(["p1", "p2", "p3"].map(String::from));
            let mut t = Table::new(header);
            for x in &pts {
                let mut r = coords(x);
                r.extend(core(pressure_p(x))?.iter().map(|c| fmt_f(*c)));
                t.push(r);
            }
            t
        }
        Kernel::Stokeslet | Kernel::Oseen => {
            let p = need()?;
            header.extend(tensor_header("g", false));
            let mut t = Table::new(header);
            for x in &pts {
                let m = if a.kernel == Kernel::Stokeslet {
                    core(stokeslet(x, p.nu))?
                } else {
                    core(p.require_drift().and_then(|_| oseen_steady(x, &p)))?
                };
                let mut r = coords(x);
                r.extend(real_entries(&m));
                t.push(r);
            }
            t
        }
        Kernel::Mode => {
            let p = need()?;
            let modes = if pf.modes.is_empty() { vec![1] } else { pf.modes.clone() };
            header.push("k".into());
            header.extend(tensor_header("g", true));
            let mut t = Table::new(header);
            for x in &pts {
                for &k in &modes {
                    let mut r = coords(x);
                    r.push(k.to_string());
                    r.extend(complex_entries(&core(mode_velocity(x, &p, k))?));
                    t.push(r);
                }
            }
            t
        }
        Kernel::Periodic => {
            let p = need()?;
            let times = if pf.times.is_empty() { vec![0.0] } else { pf.times.clone() };
            header.push("t".into());
            header.extend(tensor_header("g", false));
            let mut t = Table::new(header);
            for x in &pts {
                for &time in &times {
                    let mut r = coords(x);
                    r.push(fmt_f(time));
                    r.extend(real_entries(&core(periodic_velocity(time, x, &p))?));
                    t.push(r);
                }
            }
            t
        }
    };
    let path = output_path(g.out.as_deref(), "fundsol.csv");
    table.write(&path)?;
    log::info!("wrote {} rows to {}", table.len(), path.display());
    Ok(Outcome::Pass)
}
