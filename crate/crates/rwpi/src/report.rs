//! Stable JSON emission: fixed key order, floats printed with 12
//! significant digits, byte-identical across runs for identical inputs.

use crate::limits::QuantileEstimate;
use crate::pipeline::RegularizationChoice;
use crate::profile::RwpValue;
use crate::solvers::FitResult;
use crate::worstcase::WorstCase;

/// 12-significant-digit float rendering used for every numeric field.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        // JSON has no inf/nan literals.
        return "null".to_string();
    }
    format!("{:.11e}", x)
}

/// A tiny ordered-object writer; serde_json maps would reorder keys.
pub struct JsonObject {
    parts: Vec<String>,
}

impl JsonObject {
    pub fn new() -> Self {
        JsonObject { parts: Vec::new() }
    }

    pub fn field_f64(mut self, key: &str, value: f64) -> Self {
        self.parts.push(format!("\"{key}\":{}", fmt_f64(value)));
        self
    }

    pub fn field_usize(mut self, key: &str, value: usize) -> Self {
        self.parts.push(format!("\"{key}\":{value}"));
        self
    }

    pub fn field_u64(mut self, key: &str, value: u64) -> Self {
        self.parts.push(format!("\"{key}\":{value}"));
        self
    }

    pub fn field_bool(mut self, key: &str, value: bool) -> Self {
        self.parts.push(format!("\"{key}\":{value}"));
        self
    }

    pub fn field_str(mut self, key: &str, value: &str) -> Self {
        self.parts
            .push(format!("\"{key}\":\"{}\"", escape(value)));
        self
    }

    pub fn field_opt_f64(mut self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.parts.push(format!("\"{key}\":{}", fmt_f64(v))),
            None => self.parts.push(format!("\"{key}\":null")),
        }
        self
    }

    pub fn field_vec_f64(mut self, key: &str, values: &[f64]) -> Self {
        let body: Vec<String> = values.iter().map(|v| fmt_f64(*v)).collect();
        self.parts
            .push(format!("\"{key}\":[{}]", body.join(",")));
        self
    }

    pub fn field_raw(mut self, key: &str, raw: &str) -> Self {
        self.parts.push(format!("\"{key}\":{raw}"));
        self
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.parts.join(","))
    }
}

impl Default for JsonObject {
    fn default() -> Self {
        Self::new()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn fit_result_json(fit: &FitResult) -> String {
    JsonObject::new()
        .field_vec_f64("beta", fit.beta.as_slice())
        .field_f64("objective", fit.objective)
        .field_f64("kkt_residual", fit.kkt_residual)
        .field_usize("iterations", fit.iterations)
        .field_bool("converged", fit.converged)
        .field_f64("lambda", fit.lambda)
        .field_str(
            "warning",
            fit.warning.map(|w| w.as_str()).unwrap_or("none"),
        )
        .finish()
}

pub fn worst_case_json(wc: &WorstCase) -> String {
    JsonObject::new()
        .field_f64("value", wc.value)
        .field_opt_f64("gamma", wc.gamma)
        .field_str("form", wc.form.as_str())
        .finish()
}

pub fn rwp_value_json(r: &RwpValue) -> String {
    JsonObject::new()
        .field_f64("value", r.value)
        .field_vec_f64("dual_point", r.dual_point.as_slice())
        .field_usize("iterations", r.iterations)
        .field_bool("converged", r.converged)
        .field_str("method", r.method.as_str())
        .finish()
}

pub fn quantile_json(q: &QuantileEstimate) -> String {
    JsonObject::new()
        .field_f64("level", q.level)
        .field_f64("value", q.value)
        .field_usize("sample_size", q.sample_size)
        .field_f64("standard_error", q.standard_error)
        .finish()
}

pub fn regularization_choice_json(c: &RegularizationChoice) -> String {
    JsonObject::new()
        .field_f64("alpha", c.alpha)
        .field_str("method", c.method.as_str())
        .field_usize("mc_draws", c.mc_draws)
        .field_raw("eta_hat", &quantile_json(&c.eta_hat))
        .field_f64("delta", c.delta)
        .field_f64("lambda", c.lambda)
        .field_u64("seed", c.seed.master())
        .finish()
}
