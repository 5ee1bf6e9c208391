//! Monte-Carlo samplers for the limit laws of scaled profile functions, and
//! the quantile machinery that turns their draws into radius choices.
//!
//! Each law is one strategy behind the [`LimitLaw`] trait, registered by
//! name (`rbar`, `rbar1`, `l1`, `l2`, `l4`) and selectable at runtime; the
//! concrete sampling functions remain available directly.

mod highdim;
mod law;
mod linear_laws;
mod logistic_laws;
mod rbar;

pub use highdim::{growth_c, lambda_highdim, probit};
pub use law::{law_by_name, law_names, registry, LawInputs, LimitLaw};
pub use linear_laws::{l1_value, l2_value, normal_error_factor, sample_l1, sample_l2};
pub use logistic_laws::{l4_value, sample_l4};
pub use rbar::{rbar_one_value, rbar_value, sample_rbar, sample_rbar_one};

use crate::error::{Error, Result};
use crate::norms::Exponent;
use crate::rng::RngSeed;

/// Substream offset reserved for the quantile bootstrap so it never collides
/// with per-draw substreams.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawName {
    RbarRho,
    RbarOne,
    L1,
    L2,
    L4,
}

impl LawName {
    pub fn as_str(&self) -> &'static str {
        match self {
            LawName::RbarRho => "rbar",
            LawName::RbarOne => "rbar1",
            LawName::L1 => "l1",
            LawName::L2 => "l2",
            LawName::L4 => "l4",
        }
    }
}

/// Parameters a batch was produced with, kept for reproducibility audits.
#[derive(Debug, Clone, Default)]
pub struct LawMeta {
    pub rho: Option<f64>,
    pub exponent: Option<Exponent>,
    pub cov_id: Option<u64>,
    pub saa_size: Option<usize>,
    pub error_factor: Option<f64>,
}

/// A batch of i.i.d. draws from one limit law.
#[derive(Debug, Clone)]
pub struct LimitSampleBatch {
    pub law: LawName,
    pub values: Vec<f64>,
    pub seed: RngSeed,
    pub meta: LawMeta,
}

impl LimitSampleBatch {
    /// Columnar CSV (law, index, value) for offline inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("law,index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.law.as_str(),
                i,
                crate::report::fmt_f64(*v)
            ));
        }
        out
    }
}

/// An estimated quantile with an order-statistic bootstrap standard error.
#[derive(Debug, Clone)]
pub struct QuantileEstimate {
    pub level: f64,
    pub value: f64,
    pub sample_size: usize,
    pub standard_error: f64,
}

/// Type-1 (inverse ECDF) empirical quantile at `level`, the smallest order
/// statistic whose ECDF reaches the level. The standard error comes from a
/// 200-resample bootstrap of the same order statistic.
pub fn quantile(batch: &LimitSampleBatch, level: f64) -> Result<QuantileEstimate> {
    if batch.values.is_empty() {
        return Err(Error::EmptyInput { what: "quantile of an empty batch" });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel {
            what: format!("quantile level must be in (0,1), got {level}"),
        });
    }
    let mut sorted = batch.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
    let n = sorted.len();
    let value = type1(&sorted, level);

    let mut rng = batch.seed.stream(BOOTSTRAP_STREAM_BASE);
    let resamples = 200;
    let mut stats = Vec::with_capacity(resamples);
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for slot in buf.iter_mut() {
            *slot = sorted[rand::Rng::gen_range(&mut rng, 0..n)];
        }
        buf.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        stats.push(type1(&buf, level));
    }
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var =
        stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (resamples as f64 - 1.0);
    Ok(QuantileEstimate {
        level,
        value,
        sample_size: n,
        standard_error: var.sqrt(),
    })
}

fn type1(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let idx = (level * n as f64).ceil() as usize;
    sorted[idx.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(values: Vec<f64>) -> LimitSampleBatch {
        LimitSampleBatch {
            law: LawName::L2,
            values,
            seed: RngSeed::new(1),
            meta: LawMeta::default(),
        }
    }

    #[test]
    fn inverse_ecdf_on_integers() {
        let b = batch((1..=100).map(|v| v as f64).collect());
        assert_eq!(quantile(&b, 0.95).unwrap().value, 95.0);
        assert_eq!(quantile(&b, 0.999).unwrap().value, 100.0);
    }

    #[test]
    fn constant_law_any_level() {
        let b = batch(vec![3.5; 40]);
        for level in [0.1, 0.5, 0.9] {
            let q = quantile(&b, level).unwrap();
            assert_eq!(q.value, 3.5);
            assert_eq!(q.standard_error, 0.0);
        }
    }

    #[test]
    fn quantile_nondecreasing_in_level_and_tops_at_max() {
        let b = batch(vec![0.3, 9.0, 2.0, 5.5, 1.1, 7.7]);
        let mut prev = f64::MIN;
        for i in 1..20 {
            let level = i as f64 / 20.0;
            let q = quantile(&b, level).unwrap().value;
            assert!(q >= prev);
            prev = q;
        }
        assert_eq!(quantile(&b, 0.999).unwrap().value, 9.0);
    }

    #[test]
    fn empty_and_bad_level_rejected() {
        let b = batch(vec![]);
        assert!(quantile(&b, 0.5).is_err());
        let b = batch(vec![1.0]);
        assert!(quantile(&b, 1.0).is_err());
    }

    #[test]
    fn bootstrap_standard_error_reproducible() {
        let b = batch((0..500).map(|v| (v as f64 * 0.37).sin().abs()).collect());
        let a = quantile(&b, 0.9).unwrap();
        let c = quantile(&b, 0.9).unwrap();
        assert_eq!(a.standard_error.to_bits(), c.standard_error.to_bits());
        assert!(a.standard_error > 0.0);
    }

    #[test]
    fn csv_layout() {
        let b = batch(vec![1.0, 2.0]);
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "law,index,value");
        assert!(lines.next().unwrap().starts_with("l2,0,"));
    }
}
