//! Grid files: a header `grid dim=<d> axes=<lo:hi:count,...>` followed by
//! whitespace-separated values in row-major order. Lines starting with `#`
//! are comments.

use std::fmt::Write as _;
use std::path::Path;

use entsub_core::Axis;

use crate::number::parse_number;

#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
}

pub fn parse_axis(spec: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("axis {spec:?} is not lo:hi:count"));
    };
    let count: usize = count.trim().parse().map_err(|_| format!("bad cell count in {spec:?}"))?;
    Axis::new(parse_number(lo)?, parse_number(hi)?, count).map_err(|e| e.to_string())
}

pub fn parse_grid(text: &str) -> Result<GridData, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or("empty grid file")?;
    let mut words = header.split_whitespace();
    if words.next() != Some("grid") {
        return Err("grid file must start with a `grid` header".into());
    }
    let (mut dim, mut axes) = (None, None);
    for w in words {
        match w.split_once('=') {
            Some(("dim", v)) => dim = Some(v.parse::<usize>().map_err(|_| format!("bad dim {v:?}"))?),
            Some(("axes", v)) => axes = Some(v.split(',').map(parse_axis).collect::<Result<Vec<_>, _>>()?),
            _ => return Err(format!("unknown header field {w:?}")),
        }
    }
    let dim = dim.ok_or("header lacks dim=")?;
    let axes = axes.ok_or("header lacks axes=")?;
    if axes.len() != dim {
        return Err(format!("dim={dim} but {} axes given", axes.len()));
    }
    let mut values = Vec::new();
    for line in lines {
        for tok in line.split_whitespace() {
            values.push(parse_number(tok)?);
        }
    }
    let expected: usize = axes.iter().map(|a| a.count).product();
    if values.len() != expected {
        return Err(format!("expected {expected} values, found {}", values.len()));
    }
    Ok(GridData { axes, values })
}

pub fn read_grid(path: &Path) -> Result<GridData, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_grid(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn format_grid(axes: &[Axis], values: &[f64]) -> String {
    let spec: Vec<String> = axes.iter().map(|a| format!("{}:{}:{}", a.lo, a.hi, a.count)).collect();
    let mut out = format!("grid dim={} axes={}\n", axes.len(), spec.join(","));
    let row = axes.last().map_or(1, |a| a.count);
    for chunk in values.chunks(row) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let axes = vec![Axis::new(-1.0, 1.0, 3).unwrap(), Axis::new(0.0, 2.0, 4).unwrap()];
        let values: Vec<f64> = (0..12).map(|i| i as f64 / 7.0).collect();
        let text = format_grid(&axes, &values);
        let back = parse_grid(&text).unwrap();
        assert_eq!(back.axes, axes);
        assert_eq!(back.values, values);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_grid("grid dim=1 axes=0:1:3\n1 2").is_err());
        assert!(parse_grid("grid dim=2 axes=0:1:3\n1 2 3").is_err());
        assert!(parse_grid("mesh dim=1 axes=0:1:3\n1 2 3").is_err());
        assert!(parse_grid("# c\ngrid dim=1 axes=-1/2:1/2:3\n1 2 3\n").is_ok());
    }
}
