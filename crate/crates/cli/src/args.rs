//! Value parsers for flags that clap's stock parsers cannot express.
//!
//! Each parser returns `Err(String)` so clap renders the message as a usage
//! error (exit code 2).

use coaplan_core::PolicyKind;

/// Per-agent cap flag value: a positive integer or `auto`, which applies
/// floor(n_task / n_ag) + 10 to the scenario at hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmaxArg {
    Auto,
    Fixed(usize),
}

pub fn parse_tmax(s: &str) -> Result<TmaxArg, String> {
    if s == "auto" {
        return Ok(TmaxArg::Auto);
    }
    let n: usize = s
        .parse()
        .map_err(|_| format!("expected `auto` or a positive integer, got `{s}`"))?;
    if n == 0 {
        return Err("t_max must be at least 1".into());
    }
    Ok(TmaxArg::Fixed(n))
}

pub fn parse_coas(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("invalid COA count `{s}`"))?;
    if n < 2 {
        return Err(format!(
            "diversity is undefined for a pool of {n} COA(s); need at least 2"
        ));
    }
    Ok(n)
}

pub fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
        .map_err(|_| format!("unknown policy `{s}` (expected random, greedy, or exact)"))
}

/// A finite, strictly positive real (area, velocity).
pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("expected a positive number, got {v}"));
    }
    Ok(v)
}

/// A probability in [0, 1].
pub fn parse_prob(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("expected a probability in [0, 1], got {v}"));
    }
    Ok(v)
}

/// A finite, non-negative fitness weight.
pub fn parse_weight(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("expected a non-negative weight, got {v}"));
    }
    Ok(v)
}

/// A compatibility clamp in (0, 1].
pub fn parse_c_min(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !v.is_finite() || v <= 0.0 || v > 1.0 {
        return Err(format!("expected a clamp in (0, 1], got {v}"));
    }
    Ok(v)
}

/// `lo:hi` deadline range in seconds, both positive and ordered.
pub fn parse_deadline_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("invalid number `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("invalid number `{hi}`"))?;
    if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || hi < lo {
        return Err(format!("need 0 < lo <= hi, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Comma-separated percentages, each in [0, 100]. Wrapped so clap treats the
/// list as one flag value rather than a repeatable flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels(pub Vec<f64>);

pub fn parse_levels(s: &str) -> Result<Levels, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid percentage `{part}`"))?;
        if !(0.0..=100.0).contains(&v) {
            return Err(format!("noise level {v} is outside [0, 100]"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err("need at least one noise level".into());
    }
    Ok(Levels(out))
}

/// Inclusive `start:end:step` sweep over removal percentages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Sweep {
    /// `start, start + step, …` up to and including `end` (within float
    /// tolerance): `0:10:1` expands to the 11 integers 0..=10.
    pub fn expand(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

pub fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected `start:end:step`, got `{s}`"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse().map_err(|_| format!("invalid number `{p}`")))
        .collect::<Result<_, String>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !start.is_finite() || !end.is_finite() || !step.is_finite() {
        return Err("sweep bounds must be finite".into());
    }
    if !(0.0..=100.0).contains(&start) || !(0.0..=100.0).contains(&end) {
        return Err(format!("sweep range {start}:{end} is outside [0, 100]"));
    }
    if end < start || step <= 0.0 {
        return Err(format!("need start <= end and step > 0, got `{s}`"));
    }
    Ok(Sweep { start, end, step })
}
