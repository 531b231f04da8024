//! JSON report assembly with all numbers at 6 significant digits.

use avhaz::AhContrast;
use serde_json::{json, Map, Value};

/// Round to 6 significant digits (IEEE nearest).
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.5e}").parse().unwrap_or(v)
}

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(round_sig(v))
    } else {
        Value::Null
    }
}

fn pair(v: (f64, f64)) -> Value {
    json!([num(v.0), num(v.1)])
}

/// The analyze report: per-group AH, difference and ratio with intervals,
/// bootstrap accounting and method diagnostics.
pub fn analyze_report(
    method: &str,
    contrast: &AhContrast,
    diagnostics: Value,
) -> Value {
    let mut m = Map::new();
    m.insert("method".into(), json!(method));
    m.insert("tau".into(), num(contrast.tau));
    m.insert("eta0".into(), num(contrast.eta0));
    m.insert("eta1".into(), num(contrast.eta1));
    m.insert("dah".into(), num(contrast.dah));
    m.insert("dah_ci".into(), pair(contrast.ci_dah));
    m.insert(
        "rah".into(),
        contrast
            .log_rah
            .map(|lr| num(lr.exp()))
            .unwrap_or(Value::Null),
    );
    m.insert(
        "rah_ci".into(),
        contrast.ci_rah.map(pair).unwrap_or(Value::Null),
    );
    m.insert(
        "log_rah".into(),
        contrast.log_rah.map(num).unwrap_or(Value::Null),
    );
    m.insert("se_eta0".into(), num(contrast.se_eta0));
    m.insert("se_eta1".into(), num(contrast.se_eta1));
    m.insert("se_dah".into(), num(contrast.se_dah));
    m.insert(
        "se_log_rah".into(),
        contrast.se_log_rah.map(num).unwrap_or(Value::Null),
    );
    m.insert("eta0_ci".into(), pair(contrast.ci_eta0));
    m.insert("eta1_ci".into(), pair(contrast.ci_eta1));
    m.insert(
        "boot_replicates_used".into(),
        json!(contrast.boot_replicates_used),
    );
    m.insert("boot_failures".into(), json!(contrast.boot_failures));
    m.insert(
        "tau_beyond_followup".into(),
        json!(contrast.tau_beyond_followup),
    );
    m.insert("diagnostics".into(), diagnostics);
    Value::Object(m)
}

/// Round every number in a JSON tree to 6 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return num(f);
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(m) => {
            Value::Object(m.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}
