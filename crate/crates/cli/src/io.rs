//! Input file formats and CSV output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use oseen_tp::geom::{default_rays, geometric_radii, Ray};
use oseen_tp::{KernelParams, Vec3};
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Input that failed to parse or validate; mapped to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_err(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Reads and deserializes a JSON file; parse errors carry line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        input_err(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn load_params(path: &Path) -> anyhow::Result<KernelParams> {
    let f: oseen_tp::params::ParamsFile = read_json(path)?;
    KernelParams::try_from(f).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

pub fn load_scenario(path: &Path) -> anyhow::Result<oseen_tp::scenarios::Scenario> {
    let f: oseen_tp::scenarios::ScenarioFile = read_json(path)?;
    oseen_tp::scenarios::Scenario::from_file_data(f)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayFile {
    pub label: String,
    pub direction: [f64; 3],
    pub radii: Vec<f64>,
}

/// Geometric radii for the default ray set.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

/// Evaluation points: explicit points, explicit rays and/or the default ray
/// set, with optional sample times and modes.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
    #[serde(default)]
    pub rays: Vec<RayFile>,
    #[serde(default)]
    pub default_rays: Option<RadiiSpec>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub modes: Vec<i64>,
}

impl PointsFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let f: Self = read_json(path)?;
        if f.points.is_empty() && f.rays.is_empty() && f.default_rays.is_none() {
            return Err(input_err(format!("{}: no points or rays given", path.display())));
        }
        Ok(f)
    }

    /// Rays, the default set expanded along `zeta`.
    pub fn ray_list(&self, zeta: &Vec3) -> anyhow::Result<Vec<Ray>> {
        let mut out = Vec::new();
        for r in &self.rays {
            out.push(
                Ray::new(r.label.clone(), Vec3::from(r.direction), r.radii.clone())
                    .map_err(|e| input_err(format!("ray '{}': {e}", r.label)))?,
            );
        }
        if let Some(d) = self.default_rays {
            if !(d.r_min > 0.0 && d.r_max > d.r_min && d.count >= 2) {
                return Err(input_err("default_rays needs 0 < r_min < r_max and count >= 2"));
            }
            if zeta.norm() == 0.0 {
                return Err(input_err("default_rays requires a nonzero drift"));
            }
            out.extend(default_rays(zeta, &geometric_radii(d.r_min, d.r_max, d.count)));
        }
        Ok(out)
    }

    /// Every point, explicit points first, then ray points in ray order.
    pub fn all_points(&self, zeta: &Vec3) -> anyhow::Result<Vec<Vec3>> {
        let mut pts: Vec<Vec3> = self.points.iter().map(|p| Vec3::from(*p)).collect();
        for ray in self.ray_list(zeta)? {
            pts.extend(ray.points().map(|(_, x)| x));
        }
        Ok(pts)
    }
}

/// Float formatting with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with a header row and LF line endings.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&bytes))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Resolves `--out`: a path with an extension names the file, anything else
/// is a directory receiving `default_name`.
pub fn output_path(out: Option<&Path>, default_name: &str) -> PathBuf {
    match out {
        Some(p) if p.extension().is_some() => p.to_path_buf(),
        Some(p) => p.join(default_name),
        None => PathBuf::from(default_name),
    }
}

/// `stem_suffix.ext` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_path_rules() {
        assert_eq!(output_path(Some(Path::new("a/b.csv")), "x.csv"), PathBuf::from("a/b.csv"));
        assert_eq!(output_path(Some(Path::new("a/b")), "x.csv"), PathBuf::from("a/b/x.csv"));
        assert_eq!(output_path(None, "x.csv"), PathBuf::from("x.csv"));
        assert_eq!(sibling(Path::new("d/fits.csv"), "samples"), PathBuf::from("d/fits_samples.csv"));
    }

    #[test]
    fn float_format_has_17_digits() {
        assert_eq!(fmt_f(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn points_file_rejects_unknown_keys() {
        let e = serde_json::from_str::<PointsFile>(r#"{"points": [[1,2,3]], "extra": 1}"#);
        assert!(e.is_err());
        let f: PointsFile = serde_json::from_str(r#"{"default_rays": {"r_min": 2, "r_max": 8, "count": 3}}"#).unwrap();
        assert_eq!(f.all_points(&Vec3::x()).unwrap().len(), 18);
    }
}
