//! Norm exponents in [1, inf] with conjugate (dual) pairing, and the p-norms
//! themselves.
//!
//! The infinite exponent is a first-class variant rather than a large float:
//! the headline transport cost uses q = inf, whose dual p = 1 produces the
//! l1 penalty, and every norm routine branches on it explicitly.

use crate::error::{Error, Result};

/// A norm exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Validates and wraps a finite exponent; `f64::INFINITY` maps to `Infinity`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_infinite() && value > 0.0 {
            return Ok(Exponent::Infinity);
        }
        if !value.is_finite() || value < 1.0 {
            return Err(Error::InvalidExponent { got: value });
        }
        Ok(Exponent::Finite(value))
    }

    pub fn one() -> Self {
        Exponent::Finite(1.0)
    }

    pub fn two() -> Self {
        Exponent::Finite(2.0)
    }

    /// The value as a float, `inf` for the infinite variant.
    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Finite(v) => *v,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(v) if *v == 1.0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "Inf" | "INF" | "infinity" => Ok(Exponent::Infinity),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidExponent { got: f64::NAN })?;
                Exponent::new(v)
            }
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// The conjugate exponent p with 1/p + 1/q = 1, under the conventions
/// dual(1) = inf and dual(inf) = 1.
pub fn dual_exponent(q: Exponent) -> Result<Exponent> {
    match q {
        Exponent::Infinity => Ok(Exponent::Finite(1.0)),
        Exponent::Finite(v) => {
            if v < 1.0 {
                return Err(Error::InvalidExponent { got: v });
            }
            if v == 1.0 {
                Ok(Exponent::Infinity)
            } else {
                Ok(Exponent::Finite(v / (v - 1.0)))
            }
        }
    }
}

/// `(sum_i |v_i|^p)^{1/p}`, or `max_i |v_i|` when p = inf. Zero-length input
/// has norm zero.
pub fn lp_norm(v: &[f64], p: Exponent) -> Result<f64> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "lp_norm input" });
    }
    Ok(lp_norm_unchecked(v, p))
}

/// `lp_norm` without the finiteness check, for hot inner loops.
pub fn lp_norm_unchecked(v: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        Exponent::Finite(1.0) => v.iter().map(|x| x.abs()).sum(),
        Exponent::Finite(2.0) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Exponent::Finite(p) => {
            // Scale by the max magnitude so x^p stays in range.
            let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

/// One element of the subdifferential of `||.||_p` at `v`.
///
/// Smooth where the norm is differentiable; at kinks (p = 1 components at
/// zero, ties for p = inf) a representative subgradient is returned. At
/// v = 0 the zero vector is returned (a valid subgradient for every p).
pub fn lp_norm_subgradient(v: &[f64], p: Exponent) -> Vec<f64> {
    let n = lp_norm_unchecked(v, p);
    if n == 0.0 {
        return vec![0.0; v.len()];
    }
    match p {
        Exponent::Finite(1.0) => v.iter().map(|x| sign(*x)).collect(),
        Exponent::Infinity => {
            let mut g = vec![0.0; v.len()];
            let mut best = 0usize;
            for (i, x) in v.iter().enumerate() {
                if x.abs() > v[best].abs() {
                    best = i;
                }
            }
            g[best] = sign(v[best]);
            g
        }
        Exponent::Finite(p) => v
            .iter()
            .map(|x| sign(*x) * (x.abs() / n).powf(p - 1.0))
            .collect(),
    }
}

/// Sign with sign(0) = 0 (unlike `f64::signum`).
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dual_pairs() {
        assert_eq!(dual_exponent(Exponent::two()).unwrap(), Exponent::two());
        assert_eq!(
            dual_exponent(Exponent::Infinity).unwrap(),
            Exponent::Finite(1.0)
        );
        assert_eq!(
            dual_exponent(Exponent::Finite(1.0)).unwrap(),
            Exponent::Infinity
        );
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(lp_norm(&[1.0], Exponent::Finite(2.0)).is_ok());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(lp_norm(&[3.0, -4.0], Exponent::two()).unwrap(), 5.0);
        assert_eq!(lp_norm(&[3.0, -4.0], Exponent::Infinity).unwrap(), 4.0);
        assert_eq!(lp_norm(&[1.0, 1.0, 1.0], Exponent::one()).unwrap(), 3.0);
        assert_eq!(lp_norm(&[], Exponent::two()).unwrap(), 0.0);
    }

    #[test]
    fn norm_rejects_nonfinite() {
        assert!(lp_norm(&[f64::NAN], Exponent::two()).is_err());
    }

    #[test]
    fn subgradient_is_unit_dual_norm() {
        // For v != 0, the subgradient g satisfies g.v = ||v||_p.
        for p in [Exponent::one(), Exponent::two(), Exponent::Finite(3.0), Exponent::Infinity] {
            let v = [0.3, -1.2, 0.0, 2.5];
            let g = lp_norm_subgradient(&v, p);
            let dot: f64 = g.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            assert!((dot - lp_norm(&v, p).unwrap()).abs() < 1e-12, "p={p:?}");
        }
    }

    proptest! {
        #[test]
        fn dual_involution(q in 1.0f64..50.0) {
            let q = Exponent::new(q).unwrap();
            let back = dual_exponent(dual_exponent(q).unwrap()).unwrap();
            prop_assert!((back.as_f64() - q.as_f64()).abs() < 1e-9);
        }

        #[test]
        fn holder_inequality(
            u in proptest::collection::vec(-10.0f64..10.0, 1..8),
            q in 1.0f64..20.0,
        ) {
            let v: Vec<f64> = u.iter().map(|x| x.sin() * 3.0).collect();
            let q = Exponent::new(q).unwrap();
            let p = dual_exponent(q).unwrap();
            let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>().abs();
            let bound = lp_norm(&u, p).unwrap() * lp_norm(&v, q).unwrap();
            prop_assert!(dot <= bound * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn infinity_dual_is_one_sided(v in proptest::collection::vec(-5.0f64..5.0, 1..6)) {
            // ||v||_inf <= ||v||_p for every finite p >= 1.
            let inf = lp_norm(&v, Exponent::Infinity).unwrap();
            for p in [1.0, 1.5, 2.0, 7.0] {
                prop_assert!(inf <= lp_norm(&v, Exponent::new(p).unwrap()).unwrap() + 1e-12);
            }
        }
    }
}
