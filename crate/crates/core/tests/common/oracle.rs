//! Reference implementations of the closed-form quantities, written from the
//! formulas with plain loops: uniform sign scans followed by bisection, and
//! direct arithmetic. Nothing here calls into `chemostat::analysis`.

use chemostat::{ChemostatParams, Kinetics};
use serde_json::{json, Value};

/// Step of the uniform sign scan for the nutrient floor.
pub const S_SCAN_STEP: f64 = 1e-4;
/// Cells of the uniform sign scan for the biomass floor.
pub const M_SCAN_CELLS: usize = 200_000;

#[derive(Debug, Clone, Copy, Default)]
pub struct Variant {
    pub verbatim_f: bool,
    pub strict: bool,
}

fn mu(kin: &Kinetics, s: f64) -> f64 {
    match *kin {
        Kinetics::Monod { half_saturation: k } => s / (k + s),
        Kinetics::Haldane { half_saturation: k, inhibition: i } => s / (k + s + s * s / i),
    }
}

fn half_sat(kin: &Kinetics) -> f64 {
    match *kin {
        Kinetics::Monod { half_saturation } | Kinetics::Haldane { half_saturation, .. } => half_saturation,
    }
}

pub struct Numbers {
    pub d_min: f64,
    pub d_max: f64,
    pub vartheta: f64,
    pub bound: f64,
    pub p_lower: f64,
    pub p_upper: f64,
}

pub fn numbers(p: &ChemostatParams) -> Numbers {
    let d_min = p.dilution - p.noise_amplitude;
    let d_max = p.dilution + p.noise_amplitude;
    let candidates = [
        d_min * p.outflow_ratio,
        p.death + p.outflow_ratio * d_min - p.growth_yield * p.recycling * p.death / p.consumption,
        p.death,
    ];
    let vartheta = candidates.iter().copied().fold(f64::INFINITY, f64::min);
    Numbers {
        d_min,
        d_max,
        vartheta,
        bound: p.growth_yield * d_max * p.s_in / vartheta,
        p_lower: p.detach / (p.attach + p.detach + p.outflow_ratio * d_max),
        p_upper: p.detach / (p.attach + p.detach),
    }
}

/// Bisection on `[lo, hi]` with `f(lo) > 0 >= f(hi)`, run to exhaustion.
fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// First sign change of `f` on a uniform grid of the given step, refined by
/// bisection; `None` when `f` stays positive up to `end`.
pub fn scan_root(f: &dyn Fn(f64) -> f64, start: f64, end: f64, step: f64) -> Option<f64> {
    let mut lo = start;
    let mut j = 1u64;
    loop {
        let hi = (start + j as f64 * step).min(end);
        if f(hi) <= 0.0 {
            return Some(bisect(f, lo, hi));
        }
        if hi >= end {
            return None;
        }
        lo = hi;
        j += 1;
    }
}

pub fn s_star(p: &ChemostatParams, v: Variant, margin: f64) -> f64 {
    let n = numbers(p);
    let weight = p.growth_yield * n.d_max * if v.verbatim_f { 1.0 } else { p.s_in } / n.vartheta;
    let f =
        |s: f64| n.d_min * p.s_in - p.outflow_ratio * n.d_max * s - mu(&p.kinetics, s) * (weight + margin);
    let end = n.d_min * p.s_in / (p.outflow_ratio * n.d_max);
    scan_root(&f, 0.0, end, S_SCAN_STEP).expect("f is negative at its linear root")
}

pub fn default_margin(p: &ChemostatParams) -> f64 {
    1e-3 * (p.dilution - p.noise_amplitude) * p.s_in
}

pub struct Persistence {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub s_star: f64,
    pub l: Option<f64>,
}

pub fn persistence(p: &ChemostatParams, v: Variant) -> Persistence {
    let n = numbers(p);
    let s = s_star(p, v, default_margin(p));
    let lhs = p.outflow_ratio * n.d_max * n.p_upper + p.death;
    let k = half_sat(&p.kinetics);
    let (rhs, l) = match p.kinetics {
        Kinetics::Monod { .. } => {
            let cap = if v.strict { n.bound / p.growth_yield } else { n.d_max / k };
            let l = s.min(cap);
            (p.growth_yield * s / (k + l), Some(l))
        }
        Kinetics::Haldane { inhibition: i, .. } => {
            let u = n.d_max * p.s_in / k;
            let scale = if v.strict { p.growth_yield } else { 1.0 };
            (scale * s / (k + u + u * u / i), None)
        }
    };
    Persistence { holds: lhs < rhs, lhs, rhs, s_star: s, l }
}

/// Coefficient `B` of the `-B m` term in the growth bound.
pub fn competition_slope(p: &ChemostatParams, v: Variant, eps: f64) -> f64 {
    let n = numbers(p);
    let cap_p = n.p_upper + eps;
    let floor_p = n.p_lower - eps;
    let (r1, r2) = (p.liquid_competition, p.wall_competition);
    if v.strict {
        return r1 * cap_p + r2 * (1.0 - floor_p);
    }
    match p.kinetics {
        Kinetics::Monod { .. } => r1 * cap_p + r2 * floor_p - r2,
        Kinetics::Haldane { .. } => r1 + r2 - floor_p,
    }
}

/// Biomass growth lower bound `G(m; ε)`; `None` outside its domain.
pub fn growth(p: &ChemostatParams, v: Variant, s_star: f64, eps: f64, m: f64) -> Option<f64> {
    let n = numbers(p);
    let g = p.growth_yield;
    let cap_p = n.p_upper + eps;
    let k = half_sat(&p.kinetics);
    let slope = competition_slope(p, v, eps);
    let uptake = match p.kinetics {
        Kinetics::Monod { .. } => {
            let cap = if v.strict { n.bound / g } else { n.d_max / k };
            if s_star <= cap {
                g * s_star / (k + s_star)
            } else {
                let denom = k + cap + eps / g - p.consumption * m / g;
                if denom <= 0.0 {
                    return None;
                }
                g * s_star / denom
            }
        }
        Kinetics::Haldane { inhibition: i, .. } => {
            let u = n.d_max * p.s_in / k + eps;
            g * s_star / (k + u + u * u / i)
        }
    };
    Some(-p.outflow_ratio * n.d_max * cap_p - p.death + uptake - slope * m)
}

pub struct MStar {
    pub value: f64,
    pub bracketed: bool,
    pub epsilon: f64,
}

/// `ε` halves `G(0; ·)`; `m*` is the first root of `G(·; ε)` on
/// `[0, bound / c]` (or the Monod domain end), else that end.
pub fn m_star(p: &ChemostatParams, v: Variant) -> Option<MStar> {
    let pers = persistence(p, v);
    if !pers.holds {
        return None;
    }
    let s = pers.s_star;
    let g0 = growth(p, v, s, 0.0, 0.0)?;
    if g0 <= 0.0 {
        return None;
    }
    let h = |e: f64| growth(p, v, s, e, 0.0).unwrap() - 0.5 * g0;
    let mut hi = 1.0;
    while h(hi) > 0.0 {
        hi *= 2.0;
    }
    let eps = bisect(&h, 0.0, hi);

    let n = numbers(p);
    let mut end = n.bound / p.consumption;
    if let Kinetics::Monod { half_saturation: k } = p.kinetics {
        let cap = if v.strict { n.bound / p.growth_yield } else { n.d_max / k };
        if s > cap {
            let domain = p.growth_yield / p.consumption * (k + cap + eps / p.growth_yield);
            end = end.min(domain * (1.0 - 1e-12));
        }
    }
    let f = |m: f64| growth(p, v, s, eps, m).unwrap_or(f64::NAN);
    Some(match scan_root(&f, 0.0, end, end / M_SCAN_CELLS as f64) {
        Some(m) => MStar { value: m, bracketed: true, epsilon: eps },
        None => MStar { value: end, bracketed: false, epsilon: eps },
    })
}

/// The analysis report as JSON, in the library's serialized layout. Free-text
/// notes are left empty.
pub fn report_json(p: &ChemostatParams, v: Variant) -> Value {
    let n = numbers(p);
    let margin = default_margin(p);
    let ext_lhs = p.dilution * p.outflow_ratio * n.p_lower + p.death;
    let ext_holds = ext_lhs > p.growth_yield;
    let pers = persistence(p, v);

    let floors = match m_star(p, v) {
        Some(ms) => json!({
            "m_star": {
                "value": ms.value,
                "bracketed": ms.bracketed,
                "epsilon": ms.epsilon,
                "intercept": growth(p, v, pers.s_star, ms.epsilon, 0.0).unwrap(),
                "competition_slope": competition_slope(p, v, ms.epsilon),
            },
            "m1_floor": n.p_lower * ms.value,
            "m2_floor": n.p_lower * n.p_upper * ms.value,
        }),
        None => Value::Null,
    };

    let mut pers_json = json!({
        "holds": pers.holds,
        "lhs": pers.lhs,
        "rhs": pers.rhs,
        "s_star": pers.s_star,
    });
    if let Some(l) = pers.l {
        pers_json["l"] = json!(l);
    }
    let (monod, haldane) = match p.kinetics {
        Kinetics::Monod { .. } => (pers_json, Value::Null),
        Kinetics::Haldane { .. } => (Value::Null, pers_json),
    };
    json!({
        "kinetics": match p.kinetics { Kinetics::Monod { .. } => "monod", _ => "haldane" },
        "d_min": n.d_min,
        "d_max": n.d_max,
        "vartheta": n.vartheta,
        "absorbing_bound": n.bound,
        "s_star": pers.s_star,
        "s_star_bracketed": true,
        "s_star_margin": margin,
        "p_lower": n.p_lower,
        "p_upper": n.p_upper,
        "extinction": { "holds": ext_holds, "lhs": ext_lhs, "rhs": p.growth_yield },
        "persistence_monod": monod,
        "persistence_haldane": haldane,
        "floors": floors,
        "conditions_exclusive": !(ext_holds && pers.holds),
        "options": { "verbatim_f": v.verbatim_f, "strict_proof_consistent": v.strict },
        "notes": [],
    })
}

/// Paths of every leaf where `actual` and `expected` differ: numbers beyond
/// `rel` relative error, anything else on inequality. Object keys present on
/// one side only are reported too.
pub fn json_mismatches(actual: &Value, expected: &Value, rel: f64) -> Vec<String> {
    let mut out = Vec::new();
    walk(actual, expected, rel, "$", &mut out);
    out
}

fn walk(a: &Value, e: &Value, rel: f64, path: &str, out: &mut Vec<String>) {
    match (a, e) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            let scale = x.abs().max(y.abs());
            if (x - y).abs() > rel * scale {
                out.push(format!("{path}: {x:e} vs {y:e}"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                let sub = format!("{path}.{key}");
                match (x.get(key), y.get(key)) {
                    (Some(xa), Some(ya)) => walk(xa, ya, rel, &sub, out),
                    _ => out.push(format!("{sub}: present on one side only")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (j, (xa, ya)) in x.iter().zip(y).enumerate() {
                walk(xa, ya, rel, &format!("{path}[{j}]"), out);
            }
        }
        _ if a == e => {}
        _ => out.push(format!("{path}: {a} vs {e}")),
    }
}
