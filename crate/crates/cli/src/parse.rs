//! Small value grammars used by the flags.

use std::f64::consts::PI;

/// Parses a number that may carry a factor of π: `pi`, `-pi`, `pi/2`,
/// `3pi/4`, `0.5*pi`, or a plain float.
pub fn angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return s
            .parse::<f64>()
            .map_err(|_| format!("`{text}` is not a number or multiple of pi"));
    };
    let prefix = lower[..pos].trim_end_matches('*');
    let suffix = &lower[pos + 2..];
    let coeff = match prefix {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p
            .parse::<f64>()
            .map_err(|_| format!("bad coefficient `{p}` in `{text}`"))?,
    };
    let divisor = match suffix {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(|| format!("bad divisor in `{text}`"))?,
    };
    Ok(coeff * PI / divisor)
}

/// `lo:hi:steps`.
pub fn range(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(format!("`{text}` is not lo:hi:steps"));
    };
    let lo = angle(lo)?;
    let hi = angle(hi)?;
    let steps = steps
        .parse::<usize>()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| format!("step count in `{text}` must be a positive integer"))?;
    Ok((lo, hi, steps))
}

/// `lo:hi`.
pub fn interval(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("`{text}` is not lo:hi"))?;
    let (lo, hi) = (angle(lo)?, angle(hi)?);
    if !(hi > lo) {
        return Err(format!("interval `{text}` must have hi > lo"));
    }
    Ok((lo, hi))
}

/// A fixed height in µm or `at-dmin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Height {
    Value(f64),
    AtMinimum,
}

pub fn height(text: &str) -> Result<Height, String> {
    if text == "at-dmin" {
        Ok(Height::AtMinimum)
    } else {
        angle(text).map(Height::Value)
    }
}

/// Initial chain state: `center`, `site:K`, or `pair:N0[:THETA]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainInit {
    Center,
    Site(usize),
    Pair { n0: f64, theta0: f64 },
}

pub fn chain_init(text: &str) -> Result<ChainInit, String> {
    if text == "center" {
        return Ok(ChainInit::Center);
    }
    if let Some(k) = text.strip_prefix("site:") {
        return k
            .parse()
            .map(ChainInit::Site)
            .map_err(|_| format!("bad site index in `{text}`"));
    }
    if let Some(rest) = text.strip_prefix("pair:") {
        let (n0, theta0) = match rest.split_once(':') {
            Some((n, t)) => (angle(n)?, angle(t)?),
            None => (angle(rest)?, 0.0),
        };
        return Ok(ChainInit::Pair { n0, theta0 });
    }
    Err(format!("`{text}` is not center, site:K or pair:N0[:THETA]"))
}
