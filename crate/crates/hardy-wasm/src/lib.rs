//! Browser bindings for the interactive demo page: chain-sweep curves,
//! single-point chains, and certified bounds for the Lebesgue model case.
//! All payloads are JSON strings assembled by hand (non-finite values become
//! `null`), so the page needs no framework and no extra glue.

use wasm_bindgen::prelude::*;

use hardy::bounds::{two_sided, BoundaryKind, HardySetup};
use hardy::exact::{self, Delta1Reading};
use hardy::measure::{Density, Interval, WeightedMeasure};
use hardy::special::Exponents;

fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{}", x)
    } else {
        "null".to_string()
    }
}

fn parse_reading(reading: &str) -> Result<Delta1Reading, String> {
    match reading {
        "A" | "a" => Ok(Delta1Reading::A),
        "B" | "b" | "" => Ok(Delta1Reading::B),
        other => Err(format!("unknown delta1 reading '{other}'")),
    }
}

fn parse_boundary(boundary: &str) -> Result<BoundaryKind, String> {
    match boundary {
        "ergodic" => Ok(BoundaryKind::Ergodic),
        "dirichlet-left" => Ok(BoundaryKind::DirichletLeft),
        "dirichlet-right" => Ok(BoundaryKind::DirichletRight),
        "dirichlet-both" => Ok(BoundaryKind::DirichletBoth),
        other => Err(format!("unknown boundary '{other}'")),
    }
}

fn chain_json(c: &exact::ImprovementChain) -> String {
    format!(
        "{{\"p\":{},\"q\":{},\"B\":{},\"delta1_bar\":{},\"A\":{},\"A_star\":{},\"delta1\":{},\"kB\":{},\"ordered\":{}}}",
        json_num(c.p),
        json_num(c.q),
        json_num(c.b),
        json_num(c.delta1_bar),
        json_num(c.a_exact),
        json_num(c.a_star),
        json_num(c.delta1),
        json_num(c.k_b),
        c.is_ordered()
    )
}

fn sweep_impl(
    mode: &str,
    p: f64,
    start: f64,
    end: f64,
    step: f64,
    reading: &str,
) -> Result<String, String> {
    let reading = parse_reading(reading)?;
    if !(step > 0.0) || !(end > start) {
        return Err("range must satisfy start < end with positive step".into());
    }
    let rows = match mode {
        "diagonal" => exact::sweep_diagonal(start.max(1.0 + 1e-6), end, step, reading),
        "offset" => exact::sweep_offset(p, start.max(0.0), end, step, reading),
        other => return Err(format!("unknown sweep mode '{other}'")),
    }
    .map_err(|e| e.to_string())?;
    let body: Vec<String> = rows.iter().map(chain_json).collect();
    Ok(format!("[{}]", body.join(",")))
}

fn chain_at_impl(p: f64, q: f64, reading: &str) -> Result<String, String> {
    let reading = parse_reading(reading)?;
    let c = exact::improvement_chain(p, q, reading).map_err(|e| e.to_string())?;
    Ok(chain_json(&c))
}

fn model_bounds_impl(p: f64, q: f64, boundary: &str) -> Result<String, String> {
    let boundary = parse_boundary(boundary)?;
    let iv = Interval::new(0.0, 1.0).map_err(|e| e.to_string())?;
    let m = WeightedMeasure::new(iv, Density::Lebesgue).map_err(|e| e.to_string())?;
    let e = Exponents::new(p, q).map_err(|e| e.to_string())?;
    let setup = HardySetup::new(m.clone(), m, e, boundary).map_err(|e| e.to_string())?;
    let r = two_sided(&setup).map_err(|e| e.to_string())?;
    let exact_val = if boundary == BoundaryKind::DirichletLeft {
        exact::exact_a(p, q).map(json_num).unwrap_or_else(|_| "null".into())
    } else {
        "null".into()
    };
    Ok(format!(
        "{{\"boundary\":\"{}\",\"p\":{},\"q\":{},\"lower\":{},\"upper\":{},\"factor\":{},\"exact\":{},\"note\":{}}}",
        r.boundary,
        json_num(p),
        json_num(q),
        r.lower.map(json_num).unwrap_or_else(|| "null".into()),
        r.upper.map(json_num).unwrap_or_else(|| "null".into()),
        r.factor.map(json_num).unwrap_or_else(|| "null".into()),
        exact_val,
        match &r.gap_note {
            Some(n) => format!("\"{}\"", n.replace('"', "'")),
            None => "null".into(),
        }
    ))
}

/// Chain values over a parameter range, as a JSON array of rows.
/// `mode` is `diagonal` (`p = q` over `[start, end]`) or `offset`
/// (fixed `p`, `q = p + r` with `r` over `[start, end]`).
#[wasm_bindgen]
pub fn chain_sweep(
    mode: &str,
    p: f64,
    start: f64,
    end: f64,
    step: f64,
    reading: &str,
) -> Result<String, JsValue> {
    sweep_impl(mode, p, start, end, step, reading).map_err(|e| JsValue::from_str(&e))
}

/// The six chain values at one `(p, q)`, as a JSON object.
#[wasm_bindgen]
pub fn chain_at(p: f64, q: f64, reading: &str) -> Result<String, JsValue> {
    chain_at_impl(p, q, reading).map_err(|e| JsValue::from_str(&e))
}

/// Certified bounds of the model case (`mu = nu` Lebesgue on `(0,1)`) for a
/// boundary kind, as a JSON object.
#[wasm_bindgen]
pub fn model_bounds(p: f64, q: f64, boundary: &str) -> Result<String, JsValue> {
    model_bounds_impl(p, q, boundary).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_payload_is_json_rows() {
        let s = sweep_impl("diagonal", 0.0, 1.5, 2.5, 0.5, "B").unwrap();
        assert!(s.starts_with("[{\"p\":1.5,"), "{s}");
        assert!(s.matches("\"ordered\":true").count() == 3, "{s}");
        assert!(sweep_impl("nope", 0.0, 1.5, 2.0, 0.5, "B").is_err());
    }

    #[test]
    fn chain_at_payload() {
        let s = chain_at_impl(2.0, 2.0, "B").unwrap();
        assert!(s.contains("\"A\":0.63661977"), "{s}");
        assert!(s.contains("\"kB\":1"), "{s}");
    }

    fn field(s: &str, key: &str) -> f64 {
        s.split(&format!("\"{key}\":"))
            .nth(1)
            .unwrap()
            .split([',', '}'])
            .next()
            .unwrap()
            .parse()
            .unwrap()
    }

    #[test]
    fn model_bounds_payload() {
        let s = model_bounds_impl(2.0, 2.0, "ergodic").unwrap();
        assert!((field(&s, "lower") - 0.25).abs() < 1e-8, "{s}");
        assert!((field(&s, "factor") - 2.0).abs() < 1e-12, "{s}");
        let s = model_bounds_impl(2.0, 4.0, "dirichlet-left").unwrap();
        assert!((field(&s, "exact") - 0.709827942242).abs() < 1e-9, "{s}");
        assert!(model_bounds_impl(2.0, 2.0, "weird").is_err());
    }
}
