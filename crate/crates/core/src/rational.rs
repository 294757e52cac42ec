//! Exact rational helpers on top of `num_rational::BigRational`.
//!
//! `BigRational` keeps every value in canonical form (positive denominator,
//! coprime parts), which is the representation all commensurability
//! decisions rely on.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational numerator in {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Always renders `num/den`, including `n/1` for integers.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A decimal literal parsed exactly, together with its precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Decimal {
    pub value: Rational,
    pub significant_digits: usize,
    /// Half a unit in the last written place.
    pub half_ulp: Rational,
}

/// Parses `[-+]digits[.digits][e[-+]digits]` without any rounding.
pub fn parse_decimal(s: &str) -> Result<Decimal> {
    let bad = || Error::Parse(format!("invalid decimal literal {s:?}"));
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let significant_digits = digits.trim_start_matches('0').len();
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let pow = |e: i64| Rational::from_integer(BigInt::from(10u32).pow(e.unsigned_abs() as u32));
    let factor = if scale >= 0 { pow(scale) } else { pow(scale).recip() };
    let value = Rational::from_integer(num) * &factor;
    let half_ulp = factor / int(2);
    Ok(Decimal { value, significant_digits, half_ulp })
}

/// Renders `r` with `digits` digits after the decimal point (truncated).
pub fn to_decimal_string(r: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (r.abs() * Rational::from_integer(scale.clone())).floor().to_integer();
    let (ip, fp) = scaled.div_rem(&scale);
    let sign = if r.is_negative() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{ip}");
    }
    format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits as usize)
}

/// `floor(sqrt(n) * 10^digits) / 10^digits` as an exact decimal.
pub fn sqrt_decimal(n: u64, digits: u32) -> Rational {
    let scale = BigUint::from(10u32).pow(digits);
    let root = (BigUint::from(n) * &scale * &scale).sqrt();
    Rational::new(BigInt::from_biguint(Sign::Plus, root), BigInt::from_biguint(Sign::Plus, scale))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - r.floor()
}

/// Largest `g` such that every `x / g` is a positive integer.
pub fn rational_gcd(xs: &[Rational]) -> Result<Rational> {
    check_positive(xs)?;
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        // gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d)
        let (a, b) = (acc.numer(), acc.denom());
        let (c, d) = (x.numer(), x.denom());
        acc = Rational::new((a * d).gcd(&(c * b)), b * d);
    }
    Ok(acc)
}

/// Smallest `m` such that every `m / x` is a positive integer.
pub fn rational_lcm(xs: &[Rational]) -> Result<Rational> {
    check_positive(xs)?;
    let mut num = BigInt::one();
    let mut den = BigInt::zero();
    for x in xs {
        num = num.lcm(x.numer());
        den = den.gcd(x.denom());
    }
    Ok(Rational::new(num, den))
}

fn check_positive(xs: &[Rational]) -> Result<()> {
    if xs.is_empty() {
        return domain("empty list");
    }
    if let Some(x) = xs.iter().find(|x| !x.is_positive()) {
        return domain(format!("non-positive entry {x}"));
    }
    Ok(())
}

/// The `k`-th prime, `p_1 = 2`.
pub fn nth_prime(k: usize) -> Result<BigInt> {
    if k == 0 {
        return domain("prime index must be at least 1");
    }
    Ok(BigInt::from(primes(k)[k - 1]))
}

/// The first `count` primes.
pub fn primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    // p_n < n (ln n + ln ln n) for n >= 6
    let n = count.max(6) as f64;
    let mut limit = (n * (n.ln() + n.ln().ln())).ceil() as usize + 1;
    loop {
        let found = sieve(limit);
        if found.len() >= count {
            return found.into_iter().take(count).collect();
        }
        limit *= 2;
    }
}

fn sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_int(r: &Rational) -> bool {
        r.is_integer() && r.is_positive()
    }

    // Largest g of the form 1/D or k/D (D up to bound) with every x/g integral.
    fn brute_gcd(xs: &[Rational], max_den: i64, max_num: i64) -> Rational {
        let mut best = int(0);
        for d in 1..=max_den {
            for n in 1..=max_num {
                let g = ratio(n, d);
                if g > best && xs.iter().all(|x| is_int(&(x / &g))) {
                    best = g;
                }
            }
        }
        best
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(rational_gcd(&[int(2), int(4), int(6)]).unwrap(), int(2));
        assert_eq!(rational_gcd(&[ratio(5, 3)]).unwrap(), ratio(5, 3));
        let xs = [ratio(3, 2), ratio(7, 5)];
        let oracle = brute_gcd(&xs, 40, 20);
        assert_eq!(oracle, ratio(1, 10));
        assert_eq!(rational_gcd(&xs).unwrap(), oracle);
        assert_eq!(&xs[0] / &oracle, int(15));
        assert_eq!(&xs[1] / &oracle, int(14));
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(rational_lcm(&[ratio(2, 3), ratio(5, 7)]).unwrap(), int(10));
        assert_eq!(rational_lcm(&[int(1), int(2), int(3)]).unwrap(), int(6));
        // brute force over multiples of 1/2
        let xs = [ratio(1, 2), ratio(1, 3)];
        let oracle = (1..100)
            .map(|k| ratio(k, 2))
            .find(|m| xs.iter().all(|x| is_int(&(m / x))))
            .unwrap();
        assert_eq!(oracle, int(1));
        assert_eq!(rational_lcm(&xs).unwrap(), oracle);
    }

    #[test]
    fn gcd_lcm_errors() {
        assert!(rational_gcd(&[]).is_err());
        assert!(rational_lcm(&[int(1), int(0)]).is_err());
        assert!(rational_gcd(&[ratio(-1, 2)]).is_err());
    }

    #[test]
    fn primes_against_trial_division() {
        let trial: Vec<u64> = (2u64..)
            .filter(|n| (2..*n).take_while(|d| d * d <= *n).all(|d| n % d != 0))
            .take(200)
            .collect();
        assert_eq!(primes(200), trial);
        assert_eq!(nth_prime(1).unwrap(), BigInt::from(2));
        assert_eq!(nth_prime(4).unwrap(), BigInt::from(7));
        assert_eq!(nth_prime(25).unwrap(), BigInt::from(97));
        assert!(nth_prime(0).is_err());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&int(10)), "10/1");
        assert_eq!(format_rational(&ratio(-2, 4)), "-1/2");
    }

    #[test]
    fn decimals() {
        let d = parse_decimal("1.4142").unwrap();
        assert_eq!(d.value, ratio(14142, 10000));
        assert_eq!(d.significant_digits, 5);
        assert_eq!(d.half_ulp, ratio(1, 20000));
        assert_eq!(parse_decimal("-2.5e2").unwrap().value, int(-250));
        assert_eq!(parse_decimal("0.00125").unwrap().significant_digits, 3);
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("").is_err());
        let s2 = sqrt_decimal(2, 40);
        assert!(to_decimal_string(&s2, 40).starts_with("1.4142135623730950488016887242096980785696"));
        assert_eq!(frac(&ratio(-1, 3)), ratio(2, 3));
    }
}
