//! WebAssembly entry points for the demo page. Each op returns a JSON string;
//! the `*_json` functions hold the logic and also run natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use randgap::dist::uniform_grid;
use randgap::harness::{
    check_instance, convert_instance, generate_instance, repro_appendix, ExperimentConfig, Setting,
};
use randgap::mech::{Lottery, LotteryCap, LotteryMenu};
use randgap::opt::optimal_symmetric_price;
use randgap::{Error, Rational};

/// Largest grid the page may request, to keep the tab responsive.
pub const MAX_GRID: usize = 4000;

fn encode(v: serde_json::Value) -> Result<String, String> {
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

fn text(e: Error) -> String {
    e.to_string()
}

/// The menu `{(1/2, 1/2, 5/2), (1, 0, 2 + 3h/8), (0, 1, 2 + 3h/8)}` against two
/// i.i.d. equal-revenue values capped at `upper`.
pub fn appendix_json(upper: f64, cells: usize) -> Result<String, String> {
    if cells == 0 || cells > MAX_GRID {
        return Err(format!("cells must be between 1 and {MAX_GRID}"));
    }
    let r = repro_appendix(upper, cells, 0).map_err(text)?;
    encode(json!({ "result": r, "checks": r.checks().to_json() }))
}

/// Two i.i.d. uniform `[5, 6]` values on a grid of `step`: the best symmetric
/// price, and the revenue once the lottery `(qa, qb, price)` joins the menu.
pub fn uniform_lottery_json(step: f64, qa: f64, qb: f64, price: f64) -> Result<String, String> {
    if !(step > 0.0) || (1.0 / step) as usize > MAX_GRID {
        return Err(format!(
            "step must be positive and give at most {MAX_GRID} cells"
        ));
    }
    let d = uniform_grid(5.0, 6.0, step).map_err(text)?;
    let (p, pricing) = optimal_symmetric_price(&d, 2);
    let sure = vec![
        Lottery::new(vec![1.0, 0.0], p),
        Lottery::new(vec![0.0, 1.0], p),
    ];
    let mut with = sure.clone();
    with.push(Lottery::new(vec![qa, qb], price));
    let menu = LotteryMenu::new(2, with, LotteryCap::Simplex).map_err(text)?;
    let (v, pr) = (d.support(), d.probs());
    let (mut revenue, mut mass) = (0.0, 0.0);
    for i in 0..v.len() {
        for j in 0..v.len() {
            let w = pr[i] * pr[j];
            let l = menu.choose(&[v[i], v[j]]);
            revenue += w * l.p;
            if l.q == [qa, qb] && l.p == price {
                mass += w;
            }
        }
    }
    encode(json!({
        "step": step,
        "symmetric_price": p,
        "pricing_revenue": pricing,
        "lottery": [qa, qb, price],
        "revenue_with_lottery": revenue,
        "gain": revenue - pricing,
        "lottery_mass": mass,
    }))
}

/// Generate the `index`-th seeded instance and run every check of its setting.
pub fn check_json(
    setting: u8,
    seed: u64,
    index: usize,
    n: usize,
    m: usize,
    support: usize,
) -> Result<String, String> {
    let cfg = ExperimentConfig {
        seed,
        setting: Setting::try_from(setting).map_err(text)?,
        n,
        m,
        support,
        count: index + 1,
        ..Default::default()
    };
    let inst = generate_instance(&cfg, index).map_err(text)?;
    let exact = convert_instance::<Rational>(&inst).map_err(text)?;
    let report = check_instance(&exact).map_err(text)?;
    encode(json!({ "instance": inst.to_json(), "report": report.to_json() }))
}

#[wasm_bindgen]
pub fn appendix(upper: f64, cells: usize) -> Result<String, JsValue> {
    appendix_json(upper, cells).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn uniform_lottery(step: f64, qa: f64, qb: f64, price: f64) -> Result<String, JsValue> {
    uniform_lottery_json(step, qa, qb, price).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn check(
    setting: u8,
    seed: u64,
    index: usize,
    n: usize,
    m: usize,
    support: usize,
) -> Result<String, JsValue> {
    check_json(setting, seed, index, n, m, support).map_err(|e| JsValue::from_str(&e))
}
