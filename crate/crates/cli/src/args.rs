use std::fmt;

/// Errors in user input that clap cannot catch on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parses a decimal (`0.25`) or a fraction (`1/3`).
pub fn parse_number(s: &str) -> Result<f64, UsageError> {
    let s = s.trim();
    let bad = || UsageError(format!("cannot parse `{s}` as a number or fraction"));
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Inclusive grid `lo:hi:step`; never steps past `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn parse(s: &str) -> Result<Self, UsageError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(UsageError(format!("range `{s}` must look like lo:hi:step")));
        }
        let range = Range {
            lo: parse_number(parts[0])?,
            hi: parse_number(parts[1])?,
            step: parse_number(parts[2])?,
        };
        if !(range.step > 0.0) {
            return Err(UsageError(format!("range step must be > 0 in `{s}`")));
        }
        if range.hi < range.lo {
            return Err(UsageError(format!("range `{s}` has hi < lo")));
        }
        Ok(range)
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| snap(self.lo + self.step * i as f64))
            .collect()
    }
}

/// Drop accumulation noise so `0.1 + 2 * 0.1` prints as `0.3`.
fn snap(x: f64) -> f64 {
    let y = (x * 1e12).round() / 1e12;
    if (y - x).abs() <= 1e-15 * x.abs().max(1.0) {
        y
    } else {
        x
    }
}
