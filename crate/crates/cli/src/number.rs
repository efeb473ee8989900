//! Numeric tokens in instance files: plain floats, `p/q`, `sqrt(x)` and
//! products or quotients of those, e.g. `-sqrt(3)/2`.

pub fn parse_number(token: &str) -> Result<f64, String> {
    let t = token.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    if body.is_empty() {
        return Err(format!("empty number in {token:?}"));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = body;
    loop {
        let end = factor_end(rest);
        let f = parse_factor(&rest[..end]).map_err(|e| format!("{e} in {token:?}"))?;
        value = if op == '*' { value * f } else { value / f };
        rest = &rest[end..];
        match rest.chars().next() {
            None => break,
            Some(c @ ('*' | '/')) => {
                op = c;
                rest = &rest[1..];
            }
            Some(c) => return Err(format!("unexpected {c:?} in {token:?}")),
        }
    }
    if !value.is_finite() {
        return Err(format!("{token:?} is not a finite number"));
    }
    Ok(sign * value)
}

fn factor_end(s: &str) -> usize {
    if s.starts_with("sqrt(") {
        return s.find(')').map_or(s.len(), |i| i + 1);
    }
    s.find(['*', '/']).unwrap_or(s.len())
}

fn parse_factor(s: &str) -> Result<f64, String> {
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let x = parse_number(inner)?;
        if x < 0.0 {
            return Err("square root of a negative number".into());
        }
        return Ok(x.sqrt());
    }
    s.parse::<f64>().map_err(|_| format!("cannot read {s:?} as a number"))
}

#[cfg(test)]
mod tests {
    use super::parse_number;

    #[test]
    fn forms() {
        assert_eq!(parse_number("2/3").unwrap(), 2.0 / 3.0);
        assert_eq!(parse_number("-sqrt(3)/2").unwrap(), -(3f64.sqrt()) / 2.0);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_number("2*sqrt(2)").unwrap(), 2.0 * 2f64.sqrt());
        assert_eq!(parse_number("sqrt(1/4)").unwrap(), 0.5);
        for bad in ["", "-", "1/0", "abc", "sqrt(-1)", "1//2", "sqrt(2"] {
            assert!(parse_number(bad).is_err(), "{bad}");
        }
    }
}
