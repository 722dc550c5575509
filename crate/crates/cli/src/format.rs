//! Numeric formatting under `--precision`.

use serde_json::Value;

/// `v` to `digits` significant digits, in the style of C's `%g`.
pub fn sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to `digits` significant digits.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            if let Some(r) = sig(x, digits).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|e| round_json(e, digits)),
        Value::Object(o) => o.values_mut().for_each(|e| round_json(e, digits)),
        _ => {}
    }
}

/// Pretty JSON with rounded floats; non-finite floats become `null`.
pub fn to_json<T: serde::Serialize>(value: &T, digits: usize) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v, digits);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.5, 12), "0.5");
        assert_eq!(sig(-3.0, 12), "-3");
        assert_eq!(sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(sig(2.0 / 3.0, 4), "0.6667");
        assert_eq!(sig(123456.0, 3), "1.23e5");
        assert_eq!(sig(1.5e-9, 12), "1.5e-9");
        assert_eq!(sig(0.0001234, 2), "0.00012");
        assert_eq!(sig(-0.0, 5), "0");
        assert_eq!(sig(f64::NAN, 5), "NaN");
    }

    #[test]
    fn json_rounding_keeps_integers() {
        let mut v = serde_json::json!({"a": 0.1234567, "b": [1, 2.5e-20], "c": "x"});
        round_json(&mut v, 3);
        assert_eq!(v, serde_json::json!({"a": 0.123, "b": [1, 2.5e-20], "c": "x"}));
    }
}
