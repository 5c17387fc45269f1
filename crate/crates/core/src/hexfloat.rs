//! Hexadecimal floating-point text (`0x1.8p+1` style) for bit-exact `f64`
//! round trips in checkpoints.

use crate::error::{Error, Result};

const FRACTION_BITS: u32 = 52;
const FRACTION_MASK: u64 = (1 << FRACTION_BITS) - 1;
const EXPONENT_BIAS: i64 = 1023;

/// Formats `x` as a hexadecimal float. Non-finite values use `inf`, `-inf`
/// and `nan`.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let biased = ((bits >> FRACTION_BITS) & 0x7ff) as i64;
    let fraction = bits & FRACTION_MASK;
    if biased == 0 && fraction == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exponent) = if biased == 0 {
        (0, 1 - EXPONENT_BIAS)
    } else {
        (1, biased - EXPONENT_BIAS)
    };
    let digits = format!("{fraction:013x}");
    let digits = digits.trim_end_matches('0');
    let exp_sign = if exponent < 0 { '-' } else { '+' };
    let exponent = exponent.abs();
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp_sign}{exponent}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp_sign}{exponent}")
    }
}

/// Parses the output of [`format`].
pub fn parse(text: &str) -> Result<f64> {
    let bad = || Error::input(format!("invalid hexadecimal float {text:?}"));
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    match body {
        "inf" => return Ok(if negative { f64::NEG_INFINITY } else { f64::INFINITY }),
        "nan" if !negative => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").ok_or_else(bad)?;
    let (mantissa, exponent) = body.split_once('p').ok_or_else(bad)?;
    let exponent: i64 = exponent.parse().map_err(|_| bad())?;
    let (lead, digits) = match mantissa.split_once('.') {
        Some((lead, digits)) if !digits.is_empty() => (lead, digits),
        Some(_) => return Err(bad()),
        None => (mantissa, ""),
    };
    if digits.len() > 13 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(bad());
    }
    let fraction = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(digits, 16).map_err(|_| bad())? << (4 * (13 - digits.len()))
    };
    let sign_bit = u64::from(negative) << 63;
    let bits = match lead {
        "1" if (1 - EXPONENT_BIAS..=EXPONENT_BIAS).contains(&exponent) => {
            sign_bit | (((exponent + EXPONENT_BIAS) as u64) << FRACTION_BITS) | fraction
        }
        "0" if fraction == 0 && exponent == 0 => sign_bit,
        "0" if exponent == 1 - EXPONENT_BIAS => sign_bit | fraction,
        _ => return Err(bad()),
    };
    Ok(f64::from_bits(bits))
}
