use std::path::PathBuf;

use clap::Args;

use super::{core, Outcome};
use crate::io::{fmt_f, load_scenario, output_path, PointsFile, Table};
use crate::Global;

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Points file; `times` default to `[0]`.
    #[arg(long)]
    pub points: PathBuf,
}

pub fn eval(g: &Global, a: &EvalArgs) -> anyhow::Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let pf = PointsFile::load(&a.points)?;
    let pts = pf.all_points(&s.params.zeta)?;
    let times = if pf.times.is_empty() { vec![0.0] } else { pf.times.clone() };
    let mut t = Table::new(["x1", "x2", "x3", "t", "v1", "v2", "v3", "p"]);
    for x in &pts {
        let m = core(s.modes(x))?;
        for &time in &times {
            let v = m.velocity.eval_real(time);
            let mut row: Vec<String> = x.iter().map(|c| fmt_f(*c)).collect();
            row.push(fmt_f(time));
            row.extend(v.iter().map(|c| fmt_f(*c)));
            row.push(fmt_f(m.pressure.eval_real(time)));
            t.push(row);
        }
    }
    t.write(&output_path(g.out.as_deref(), "scenario.csv"))?;
    Ok(Outcome::Pass)
}
