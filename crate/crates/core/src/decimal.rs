//! Exact decimal view of JSON numbers.
//!
//! Bounds and `decimalPlaces` checks compare decimal digit strings rather
//! than binary floats, so `0.3` stays a multiple of `0.1`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde_json::Number;

/// `digits × 10^exponent`, with `digits` free of leading and trailing zeros.
/// Zero is the empty digit list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    negative: bool,
    digits: Vec<u8>,
    exponent: i64,
}

impl Decimal {
    /// Parses the JSON number grammar (optional sign, fraction and exponent).
    pub fn parse(text: &str) -> Option<Decimal> {
        let bytes = text.as_bytes();
        let mut i = 0;
        let negative = bytes.first() == Some(&b'-');
        if negative || bytes.first() == Some(&b'+') {
            i += 1;
        }
        let mut digits = Vec::new();
        let mut exponent: i64 = 0;
        let mut seen_digit = false;
        let mut in_fraction = false;
        while i < bytes.len() {
            match bytes[i] {
                b'0'..=b'9' => {
                    seen_digit = true;
                    digits.push(bytes[i] - b'0');
                    if in_fraction {
                        exponent -= 1;
                    }
                }
                b'.' if !in_fraction => in_fraction = true,
                b'e' | b'E' => break,
                _ => return None,
            }
            i += 1;
        }
        if !seen_digit {
            return None;
        }
        if i < bytes.len() {
            let exp: i64 = text[i + 1..].trim_start_matches('+').parse().ok()?;
            exponent = exponent.checked_add(exp)?;
        }
        Some(Decimal::normalized(negative, digits, exponent))
    }

    pub fn from_number(n: &Number) -> Decimal {
        // Display for Number is shortest round-trip for floats and exact for integers.
        Decimal::parse(&alloc::format!("{n}")).unwrap_or_else(Decimal::zero)
    }

    pub fn zero() -> Decimal {
        Decimal {
            negative: false,
            digits: Vec::new(),
            exponent: 0,
        }
    }

    fn normalized(negative: bool, mut digits: Vec<u8>, mut exponent: i64) -> Decimal {
        let lead = digits.iter().take_while(|d| **d == 0).count();
        digits.drain(..lead);
        while digits.last() == Some(&0) {
            digits.pop();
            exponent += 1;
        }
        if digits.is_empty() {
            return Decimal::zero();
        }
        Decimal {
            negative,
            digits,
            exponent,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Number of digits after the decimal point in the shortest exact form.
    pub fn fraction_digits(&self) -> u64 {
        if self.exponent >= 0 {
            0
        } else {
            self.exponent.unsigned_abs()
        }
    }

    /// Position of the most significant digit (`10^magnitude` scale).
    fn magnitude(&self) -> i64 {
        self.digits.len() as i64 + self.exponent
    }

    fn cmp_abs(&self, other: &Decimal) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.magnitude()
            .cmp(&other.magnitude())
            .then_with(|| self.digits.cmp(&other.digits))
    }

    /// Plain positional notation, no exponent: `42`, `-0.015`, `1000`.
    pub fn to_plain(&self) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut out = String::new();
        if self.negative {
            out.push('-');
        }
        let digit_chars = self.digits.iter().map(|d| (b'0' + d) as char);
        if self.exponent >= 0 {
            out.extend(digit_chars);
            for _ in 0..self.exponent {
                out.push('0');
            }
        } else {
            let frac = self.exponent.unsigned_abs() as usize;
            let len = self.digits.len();
            if frac >= len {
                out.push_str("0.");
                for _ in 0..frac - len {
                    out.push('0');
                }
                out.extend(digit_chars);
            } else {
                let chars: Vec<char> = digit_chars.collect();
                out.extend(&chars[..len - frac]);
                out.push('.');
                out.extend(&chars[len - frac..]);
            }
        }
        out
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Decimal) -> Ordering {
        let self_neg = self.negative && !self.is_zero();
        let other_neg = other.negative && !other.is_zero();
        match (self_neg, other_neg) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_abs(other),
            (true, true) => other.cmp_abs(self),
        }
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Decimal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        Decimal::parse(s).unwrap()
    }

    #[test]
    fn plain_forms() {
        assert_eq!(d("42").to_plain(), "42");
        assert_eq!(d("42.000").to_plain(), "42");
        assert_eq!(d("-0.0150").to_plain(), "-0.015");
        assert_eq!(d("1e21").to_plain(), "1000000000000000000000");
        assert_eq!(d("1.5E-3").to_plain(), "0.0015");
        assert_eq!(d("-0").to_plain(), "0");
        assert_eq!(d("12.5e1").to_plain(), "125");
    }

    #[test]
    fn ordering() {
        assert!(d("0.3") > d("0.29999"));
        assert!(d("-1") < d("0"));
        assert!(d("-2") < d("-1.5"));
        assert_eq!(d("1.0").cmp(&d("1")), Ordering::Equal);
        assert!(d("100") > d("99.99"));
        assert_eq!(d("-0").cmp(&d("0")), Ordering::Equal);
    }

    #[test]
    fn fraction_digit_count() {
        assert_eq!(d("0.30").fraction_digits(), 1);
        assert_eq!(d("12").fraction_digits(), 0);
        assert_eq!(d("0.015").fraction_digits(), 3);
    }

    #[test]
    fn float_numbers_use_shortest_repr() {
        let n = Number::from_f64(0.1 + 0.2).unwrap();
        assert_eq!(Decimal::from_number(&n).to_plain(), "0.30000000000000004");
        let n = Number::from_f64(0.3).unwrap();
        assert_eq!(Decimal::from_number(&n).fraction_digits(), 1);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Decimal::parse("abc").is_none());
        assert!(Decimal::parse("").is_none());
        assert!(Decimal::parse("1.2.3").is_none());
    }
}
