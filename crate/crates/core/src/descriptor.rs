//! Parser for compact `kind:key=value,...` descriptor strings.

use crate::error::{Error, Result};

/// `kind:key=value,key=value,positional,...`
#[derive(Clone, Debug, PartialEq)]
pub struct Descriptor {
    pub kind: String,
    pub pairs: Vec<(String, String)>,
    pub positional: Vec<String>,
}

impl Descriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k.trim(), r),
            None => (text, ""),
        };
        if kind.is_empty() {
            return Err(Error::InvalidInput(format!("empty kind in desc '{text}'")));
        }
        let mut pairs = Vec::new();
        let mut positional = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
                None => positional.push(item.to_string()),
            }
        }
        Ok(Descriptor { kind: kind.to_string(), pairs, positional })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| Error::InvalidInput(format!("'{key}' expects a number, got '{v}'"))))
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| Error::InvalidInput(format!("'{key}' expects an integer, got '{v}'"))))
            .transpose()
    }

    pub fn positional_f64(&self) -> Result<Vec<f64>> {
        self.positional
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::InvalidInput(format!("expected a number, got '{v}'"))))
            .collect()
    }

    /// Error if any key is outside `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidInput(format!("unknown key '{k}' for '{}'", self.kind)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_positionals() {
        let s = Descriptor::parse("ellipsoid:1,1,1.1").unwrap();
        assert_eq!(s.kind, "ellipsoid");
        assert_eq!(s.positional_f64().unwrap(), vec![1.0, 1.0, 1.1]);
        let s = Descriptor::parse("geodesic-sphere:kappa=1,alpha=2").unwrap();
        assert_eq!(s.get_f64("kappa").unwrap(), Some(1.0));
        assert_eq!(s.get("beta"), None);
        assert!(s.reject_unknown(&["kappa"]).is_err());
        let s = Descriptor::parse("metric").unwrap();
        assert!(s.pairs.is_empty() && s.positional.is_empty());
    }
}
