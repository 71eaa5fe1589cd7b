use std::collections::BTreeMap;
use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use oseen_tp::asymptotics::{fit_decay, FIT_DROP_SMALLEST};

use super::Outcome;
use crate::claims::Claim;
use crate::io::input_err;
use crate::svg::{loglog_plot, Series};
use crate::Global;

struct Csv {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &Path) -> anyhow::Result<Csv> {
    let mut r = csv::Reader::from_path(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(String::from).collect());
    }
    Ok(Csv {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

fn num(s: &str) -> anyhow::Result<f64> {
    s.parse().map_err(|_| input_err(format!("not a number: '{s}'")))
}

fn short(s: &str) -> String {
    s.parse::<f64>().map(|v| format!("{v:.4}")).unwrap_or_else(|_| s.to_string())
}

fn is(c: &Csv, cols: &[&str]) -> bool {
    c.header.iter().map(String::as_str).eq(cols.iter().copied())
}

pub fn run(g: &Global, inputs: &[PathBuf]) -> anyhow::Result<Outcome> {
    let (dir, md_path) = match g.out.as_deref() {
        Some(p) if p.extension().is_some() => (
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
            p.to_path_buf(),
        ),
        Some(p) => (p.to_path_buf(), p.join("report.md")),
        None => (PathBuf::new(), PathBuf::from("report.md")),
    };
    if !dir.as_os_str().is_empty() {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut md = String::from("# Verification report\n");
    for path in inputs {
        let c = read_csv(path)?;
        let _ = writeln!(md, "\n## {}\n", c.path.display());
        if is(&c, &["field", "ray", "exponent", "residual", "n_samples"]) {
            md.push_str("| claim | field | ray | exponent | residual | samples |\n|---|---|---|---|---|---|\n");
            for r in &c.rows {
                let claim = Claim::for_field(&r[0]).map(|c| c.tag()).unwrap_or("-");
                let _ = writeln!(md, "| {claim} | {} | {} | {} | {} | {} |", r[0], r[1], short(&r[2]), short(&r[3]), r[4]);
            }
        } else if is(&c, &["field", "ray", "r", "value"]) {
            let mut by_field: BTreeMap<String, BTreeMap<String, Vec<(f64, f64)>>> = BTreeMap::new();
            for r in &c.rows {
                by_field
                    .entry(r[0].clone())
                    .or_default()
                    .entry(r[1].clone())
                    .or_default()
                    .push((num(&r[2])?, num(&r[3])?));
            }
            for (field, rays) in &by_field {
                let series: Vec<Series> = rays
                    .iter()
                    .map(|(ray, pts)| Series {
                        label: ray.clone(),
                        fit: fit_decay(ray, field, pts, FIT_DROP_SMALLEST)
                            .ok()
                            .map(|f| (f.prefactor, f.exponent)),
                        points: pts.clone(),
                    })
                    .collect();
                let name = format!("decay_{field}.svg");
                let svg = loglog_plot(field, "|x|", field, &series);
                fs::write(dir.join(&name), svg).with_context(|| format!("writing {name}"))?;
                let claim = Claim::for_field(field).map(|c| c.tag()).unwrap_or("-");
                let _ = writeln!(md, "![{field} ({claim})]({name})\n");
            }
        } else if is(&c, &["check", "case", "metric", "value", "tolerance", "pass"]) {
            let failed: Vec<&Vec<String>> = c.rows.iter().filter(|r| r[5] != "true").collect();
            let claim = c.rows.first().and_then(|r| Claim::for_check(&r[0])).map(|c| c.tag()).unwrap_or("-");
            let _ = writeln!(md, "claim `{claim}`: {} of {} rows pass\n", c.rows.len() - failed.len(), c.rows.len());
            md.push_str("| case | metric | value | tolerance | pass |\n|---|---|---|---|---|\n");
            for r in &c.rows {
                let _ = writeln!(md, "| {} | {} | {} | {} | {} |", r[1], r[2], short(&r[3]), short(&r[4]), r[5]);
            }
        } else if is(&c, &["point", "mode", "|analytic|", "|represented|", "rel_err"]) {
            let mut worst = 0.0f64;
            for r in &c.rows {
                worst = worst.max(num(&r[4])?);
            }
            let _ = writeln!(
                md,
                "claim `{}`: {} rows, largest relative error {worst:.3e}",
                Claim::LinearRepresentation,
                c.rows.len()
            );
        } else {
            return Err(input_err(format!("{}: unrecognized CSV header", path.display())));
        }
    }
    fs::write(&md_path, md).with_context(|| format!("writing {}", md_path.display()))?;
    println!("wrote {}", md_path.display());
    Ok(Outcome::Pass)
}
