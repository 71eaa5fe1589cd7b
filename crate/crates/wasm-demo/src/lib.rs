//! Browser bindings: wake heat map, kernel decay fits and the flux dichotomy.

use oseen_tp::asymptotics::{fit_decay, split_norms, TimeNorm, FIT_DROP_SMALLEST};
use oseen_tp::fundsol::{oseen_steady, periodic_l2_norm};
use oseen_tp::geom::{default_rays, geometric_radii};
use oseen_tp::scenarios::{make_flux_pair, SphereBody};
use oseen_tp::{KernelParams, Vec3};
use serde::Serialize;
use wasm_bindgen::prelude::*;

type Res<T> = Result<T, String>;

fn js_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_js<T>(r: Res<T>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn params(speed: f64, nu: f64, n_modes: usize) -> Res<KernelParams> {
    KernelParams::new(Vec3::new(speed, 0.0, 0.0), nu, 1.0, n_modes).map_err(js_err)
}

/// `log10 |Γ^ste(x)|` on an `n × n` grid of the plane `x₃ = 0` covering
/// `[-half, half]²`, row-major with `x₂` decreasing down the rows.
#[wasm_bindgen]
pub fn wake_map(speed: f64, nu: f64, half: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    to_js(wake_map_impl(speed, nu, half, n))
}

fn wake_map_impl(speed: f64, nu: f64, half: f64, n: usize) -> Res<Vec<f64>> {
    let p = params(speed, nu, 1)?;
    if n < 2 || !(half > 0.0) {
        return Err(js_err("need n >= 2 and half > 0"));
    }
    let step = 2.0 * half / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = Vec3::new(-half + j as f64 * step, half - i as f64 * step, 0.0);
            out.push(match oseen_steady(&x, &p) {
                Ok(g) => g.norm().log10(),
                Err(_) => f64::NAN,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct RayFit {
    ray: String,
    exponent: f64,
    samples: Vec<(f64, f64)>,
}

fn fits<F>(p: &KernelParams, r_min: f64, r_max: f64, mut value: F) -> Res<Vec<RayFit>>
where
    F: FnMut(&Vec3) -> Res<f64>,
{
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(js_err("need 0 < r_min < r_max"));
    }
    let radii = geometric_radii(r_min, r_max, 9);
    let mut out = Vec::new();
    for ray in default_rays(&p.zeta, &radii) {
        let mut s = Vec::new();
        for (r, x) in ray.points() {
            s.push((r, value(&x)?));
        }
        let f = fit_decay(&ray.label, "", &s, FIT_DROP_SMALLEST).map_err(js_err)?;
        out.push(RayFit {
            ray: ray.label,
            exponent: f.exponent,
            samples: s,
        });
    }
    Ok(out)
}

/// Decay fits of `|Γ^ste|` (`kind = "steady"`) or `‖Γ^per‖_{L²(𝕋)}`
/// (`kind = "periodic"`) along the default rays, as JSON.
#[wasm_bindgen]
pub fn kernel_decay(kind: &str, speed: f64, nu: f64, r_min: f64, r_max: f64) -> Result<String, JsValue> {
    to_js(kernel_decay_impl(kind, speed, nu, r_min, r_max))
}

fn kernel_decay_impl(kind: &str, speed: f64, nu: f64, r_min: f64, r_max: f64) -> Res<String> {
    let p = params(speed, nu, 2)?;
    let rows = match kind {
        "steady" => fits(&p, r_min, r_max, |x| oseen_steady(x, &p).map(|g| g.norm()).map_err(js_err))?,
        "periodic" => fits(&p, r_min, r_max, |x| periodic_l2_norm(x, &p).map_err(js_err))?,
        _ => return Err(js_err(format!("unknown kernel kind '{kind}'"))),
    };
    serde_json::to_string(&rows).map_err(js_err)
}

#[derive(Serialize)]
struct FluxFits {
    velocity: Vec<RayFit>,
    pressure: Vec<RayFit>,
}

/// Decay of the purely periodic velocity and pressure of the manufactured
/// flux pair; `oscillating` selects the time-dependent flux.
#[wasm_bindgen]
pub fn flux_decay(oscillating: bool, speed: f64, r_min: f64, r_max: f64) -> Result<String, JsValue> {
    to_js(flux_decay_impl(oscillating, speed, r_min, r_max))
}

fn flux_decay_impl(oscillating: bool, speed: f64, r_min: f64, r_max: f64) -> Res<String> {
    let p = params(speed, 1.0, 2)?;
    let (dep, cst) = make_flux_pair(&p, SphereBody::default()).map_err(js_err)?;
    let s = if oscillating { dep } else { cst };
    let part = |x: &Vec3, pressure: bool| -> Res<f64> {
        let m = s.modes(x).map_err(js_err)?;
        Ok(if pressure {
            split_norms(&m.pressure, TimeNorm::Max).1
        } else {
            split_norms(&m.velocity, TimeNorm::Max).1
        })
    };
    let out = FluxFits {
        velocity: fits(&p, r_min, r_max, |x| part(x, false))?,
        pressure: fits(&p, r_min, r_max, |x| part(x, true))?,
    };
    serde_json::to_string(&out).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wake_map_is_largest_behind_the_body() {
        let m = wake_map_impl(1.0, 1.0, 8.0, 17).unwrap();
        // middle row: x₂ = 0; wake at x₁ < 0, upstream at x₁ > 0
        let row = &m[8 * 17..9 * 17];
        assert!(row[0] > row[16]);
        assert!(row[8].is_nan());
    }

    #[test]
    fn decay_fits_recover_exponents() {
        let v: serde_json::Value = serde_json::from_str(&kernel_decay_impl("periodic", 1.0, 1.0, 4.0, 64.0).unwrap()).unwrap();
        for r in v.as_array().unwrap() {
            assert!((r["exponent"].as_f64().unwrap() + 3.0).abs() < 0.15);
        }
        let f: serde_json::Value = serde_json::from_str(&flux_decay_impl(false, 1.0, 8.0, 64.0).unwrap()).unwrap();
        for r in f["velocity"].as_array().unwrap() {
            assert!((r["exponent"].as_f64().unwrap() + 3.0).abs() < 0.2);
        }
        assert!(kernel_decay_impl("bogus", 1.0, 1.0, 4.0, 64.0).is_err());
    }
}
