//! Deterministic desk-scale models of agents embedded in worlds they can
//! reason about: proof-based decision making, policy-reading environments,
//! Bayesian expert mixtures, proxy overoptimization, corrupted reward
//! channels, and program-trust censuses. Every stochastic component is
//! seeded, and every estimator ships with an exact or brute-force oracle.

pub mod delegation;
pub mod explore;
pub mod fiveten;
pub mod goodhart;
pub mod modal;
pub mod mixture;
pub mod newcomb;
pub mod num;
pub mod trust;

/// Exact rational scalar used wherever the contract demands zero tolerance.
pub type Rat = num_rational::BigRational;

/// Lossy conversion for reporting; exact comparisons stay in `Rat`.
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational fits in f64")
}

/// Parse an exact rational from `a/b`, a decimal like `0.99`, or an
/// integer.
pub fn parse_rational(text: &str) -> Result<Rat, String> {
    use num_bigint::BigInt;
    use std::str::FromStr;
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| e.to_string())?;
        let d = BigInt::from_str(den.trim()).map_err(|e| e.to_string())?;
        if d == BigInt::from(0) {
            return Err("zero denominator".into());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let w = if whole.is_empty() || whole == "-" {
            BigInt::from(0)
        } else {
            BigInt::from_str(whole).map_err(|e| e.to_string())?
        };
        let digits = frac.len() as u32;
        let f = if frac.is_empty() {
            BigInt::from(0)
        } else {
            BigInt::from_str(frac).map_err(|e| e.to_string())?
        };
        let scale = BigInt::from(10u32).pow(digits);
        let whole_part = Rat::from_integer(w);
        let frac_part = Rat::new(f, scale);
        return Ok(if negative {
            whole_part - frac_part
        } else {
            whole_part + frac_part
        });
    }
    BigInt::from_str(text)
        .map(Rat::from_integer)
        .map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        let r = |n: i64, d: i64| Rat::new(n.into(), d.into());
        assert_eq!(parse_rational("0.99").unwrap(), r(99, 100));
        assert_eq!(parse_rational("99/100").unwrap(), r(99, 100));
        assert_eq!(parse_rational("-1.5").unwrap(), r(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), r(7, 1));
        assert_eq!(parse_rational("1001/2000").unwrap(), r(1001, 2000));
        assert!(parse_rational("1/0").is_err());
    }
}
