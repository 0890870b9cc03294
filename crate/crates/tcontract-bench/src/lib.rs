//! Benchmark and verification harness for the tensor contraction library:
//! index-string parsing, random contraction generation, timing, and CSV
//! output. The `tcbench` binary is a thin CLI over this crate.

pub mod generate;
pub mod runner;
pub mod spec;

use tcontract::config::GemmConfig;

/// The contraction set measured in the library's benchmark figures, one
/// index string per line.
pub const BENCHMARK_SPECS: &str = include_str!("../data/benchmark-contractions.txt");

/// Parses the bundled benchmark list (ignores blank lines and `#` comments).
pub fn bundled_specs() -> Vec<String> {
    BENCHMARK_SPECS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// Parses blocking-parameter overrides in `key=value` text form. Valid keys:
/// `m_c`, `n_c`, `k_c`, `m_r`, `n_r`, `k_p`; `#` starts a comment. Missing
/// keys keep their defaults; the final configuration is validated.
pub fn parse_config_overrides(text: &str) -> Result<GemmConfig, String> {
    let mut cfg = GemmConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got '{line}'", lineno + 1))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| format!("line {}: '{}' is not a positive integer", lineno + 1, value))?;
        match key.trim() {
            "m_c" => cfg.m_c = value,
            "n_c" => cfg.n_c = value,
            "k_c" => cfg.k_c = value,
            "m_r" => cfg.m_r = value,
            "n_r" => cfg.n_r = value,
            "k_p" => cfg.k_p = value,
            other => return Err(format!("line {}: unknown key '{other}'", lineno + 1)),
        }
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Parses a `--lengths` argument of the form `a=48,b=24,c=32`.
pub fn parse_lengths(s: &str) -> Result<std::collections::BTreeMap<char, usize>, String> {
    let mut map = std::collections::BTreeMap::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (label, value) =
            part.split_once('=').ok_or_else(|| format!("expected label=length, got '{part}'"))?;
        let mut chars = label.trim().chars();
        let (Some(c), None) = (chars.next(), chars.next()) else {
            return Err(format!("label '{label}' must be a single character"));
        };
        let value: usize =
            value.trim().parse().map_err(|_| format!("'{value}' is not a valid length"))?;
        map.insert(c, value);
    }
    if map.is_empty() {
        return Err("no lengths given".to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_list_has_24_specs() {
        let specs = bundled_specs();
        assert_eq!(specs.len(), 24);
        assert!(specs.contains(&"abc-adec-ebd".to_string()));
        assert!(specs.contains(&"ab-ac-cb".to_string()));
    }

    #[test]
    fn config_overrides_parse_and_validate() {
        let cfg = parse_config_overrides("m_c = 48\nk_c=128 # depth\n\n").unwrap();
        assert_eq!((cfg.m_c, cfg.k_c, cfg.n_c), (48, 128, 4080));
        assert!(parse_config_overrides("m_c = 50").is_err()); // not a multiple of m_r
        assert!(parse_config_overrides("bogus = 3").is_err());
        assert!(parse_config_overrides("m_c: 48").is_err());
    }

    #[test]
    fn lengths_argument_parses() {
        let m = parse_lengths("a=48,b=24,c=32").unwrap();
        assert_eq!(m[&'a'], 48);
        assert_eq!(m.len(), 3);
        assert!(parse_lengths("ab=3").is_err());
        assert!(parse_lengths("a=x").is_err());
        assert!(parse_lengths("").is_err());
    }
}
