//! Closed-form tuning rule for the high-dimensional regime, and the
//! growth statistic it is calibrated against.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Inverse standard normal CDF (Wichura's algorithm AS 241, PPND16 branch).
/// Absolute error is below 1e-15 over (0, 1).
#[allow(clippy::excessive_precision)]
pub fn probit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidLevel {
            what: format!("probit argument must be in (0,1), got {p}"),
        });
    }
    const A: [f64; 8] = [
        3.387_132_872_796_366_608e0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 7] = [
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34e0,
        4.630_337_846_156_545_295_9e0,
        5.769_497_221_460_691_405_5e0,
        3.647_848_324_763_204_605_04e0,
        1.270_458_252_452_368_382_58e0,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 7] = [
        2.053_191_626_637_758_821_87e0,
        1.676_384_830_183_803_849_4e0,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2e0,
        5.463_784_911_164_114_369_9e0,
        1.784_826_539_917_291_335_8e0,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 7] = [
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-6,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        let num = poly(&A, r);
        let den = 1.0 + r * poly(&B, r);
        return Ok(q * num / den);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let value = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / (1.0 + r * poly(&D, r))
    } else {
        let r = r - 5.0;
        poly(&E, r) / (1.0 + r * poly(&F, r))
    };
    Ok(if q < 0.0 { -value } else { value })
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Fully data-free penalty prescription
/// `(pi/(pi-2)) * probit(1 - alpha/(2d)) / sqrt(n)`.
pub fn lambda_highdim(n: usize, d: usize, alpha: f64) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::Config {
            what: format!("lambda_highdim requires n >= 1 and d >= 1, got n={n}, d={d}"),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel {
            what: format!("alpha must be in (0,1), got {alpha}"),
        });
    }
    let tail = alpha / (2.0 * d as f64);
    if tail >= 1.0 {
        return Err(Error::InvalidLevel {
            what: format!("alpha/(2d) = {tail} is not below 1"),
        });
    }
    // probit(1 - tail) = -probit(tail); the complement form keeps full
    // precision when tail is tiny.
    let z = -probit(tail)?;
    Ok(std::f64::consts::PI / (std::f64::consts::PI - 2.0) * z / (n as f64).sqrt())
}

/// Plug-in estimate of `E||X||_inf / sqrt(n)` from predictor rows.
pub fn growth_c(x_sample: &DMatrix<f64>, n: usize) -> Result<f64> {
    if x_sample.nrows() == 0 {
        return Err(Error::EmptyInput { what: "growth_c predictor sample" });
    }
    if n == 0 {
        return Err(Error::Config {
            what: "growth_c requires n >= 1".into(),
        });
    }
    let mean_max: f64 = (0..x_sample.nrows())
        .map(|i| x_sample.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .sum::<f64>()
        / x_sample.nrows() as f64;
    Ok(mean_max / (n as f64).sqrt())
}
