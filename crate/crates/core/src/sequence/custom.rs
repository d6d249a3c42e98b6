use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a custom table continues past its last row K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Extrapolation {
    /// Undefined past K. Tail conditions are inconclusive.
    None,
    /// σ_n = σ_K
    Hold,
    /// σ_n = σ_K (n/K)^exponent
    Power { exponent: f64 },
    /// σ_n = σ_K ratio^{n-K}
    Geometric { ratio: f64 },
}

impl Extrapolation {
    pub(crate) fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Extrapolation::None | Extrapolation::Hold => vec![],
            Extrapolation::Power { exponent } => vec![("exponent", *exponent)],
            Extrapolation::Geometric { ratio } => vec![("ratio", *ratio)],
        }
    }

    fn parse(words: &[&str]) -> Result<Self> {
        let num = |w: Option<&&str>| -> Result<f64> {
            w.ok_or_else(|| Error::Parse("extrapolation rule needs a parameter".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad extrapolation parameter: {e}")))
        };
        match words.first().map(|w| w.to_ascii_lowercase()).as_deref() {
            Some("none") => Ok(Extrapolation::None),
            Some("hold") | Some("constant") => Ok(Extrapolation::Hold),
            Some("power") => Ok(Extrapolation::Power {
                exponent: num(words.get(1))?,
            }),
            Some("geometric") => Ok(Extrapolation::Geometric {
                ratio: num(words.get(1))?,
            }),
            other => Err(Error::Parse(format!(
                "unknown extrapolation rule {other:?}"
            ))),
        }
    }
}

/// Tabulated σ_1..σ_K with an extrapolation rule.
///
/// Text format: one `n sigma_n` pair per line (whitespace or comma
/// separated, rows n = 1..K in order), `#` comments, and one stanza line
/// `extrapolate <none|hold|power b|geometric rho>` (an `=` after the keyword
/// is accepted). A missing stanza means `none`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomTable {
    values: Arc<Vec<f64>>,
    extrapolation: Extrapolation,
}

impl CustomTable {
    pub fn new(values: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        let t = Self {
            values: Arc::new(values),
            extrapolation,
        };
        t.validate()?;
        Ok(t)
    }

    /// Tabulates the first `len` values of another spec's σ.
    pub fn from_prefix(
        spec: &super::SequenceSpec,
        len: u64,
        extrapolation: Extrapolation,
    ) -> Result<Self> {
        let values = (1..=len)
            .map(|n| spec.sigma(n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, extrapolation)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut extrapolation = Extrapolation::None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',' || c == '=')
                .filter(|w| !w.is_empty())
                .collect();
            if words[0].eq_ignore_ascii_case("extrapolate") {
                extrapolation = Extrapolation::parse(&words[1..])?;
                continue;
            }
            if words.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected `n sigma_n`, got {line:?}",
                    lineno + 1
                )));
            }
            let n: u64 = words[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad index: {e}", lineno + 1)))?;
            let v: f64 = words[1]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad sigma: {e}", lineno + 1)))?;
            if n != values.len() as u64 + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected index {}, got {n}",
                    lineno + 1,
                    values.len() + 1
                )));
            }
            values.push(v);
        }
        Self::new(values, extrapolation)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{} {}\n", i + 1, v));
        }
        let rule = match self.extrapolation {
            Extrapolation::None => "none".to_string(),
            Extrapolation::Hold => "hold".to_string(),
            Extrapolation::Power { exponent } => format!("power {exponent}"),
            Extrapolation::Geometric { ratio } => format!("geometric {ratio}"),
        };
        out.push_str(&format!("extrapolate {rule}\n"));
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("table", "custom table is empty"));
        }
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::invalid(
                "table",
                format!("sigma_{} = {v} is not finite and positive", i + 1),
            ));
        }
        match self.extrapolation {
            Extrapolation::Power { exponent } if !exponent.is_finite() => {
                Err(Error::invalid("exponent", "must be finite"))
            }
            Extrapolation::Geometric { ratio } if !(ratio.is_finite() && ratio > 0.0) => {
                Err(Error::invalid("ratio", "must be finite and > 0"))
            }
            _ => Ok(()),
        }
    }

    fn last(&self) -> (u64, f64) {
        (self.values.len() as u64, self.values[self.values.len() - 1])
    }

    /// Caller guarantees n is within the table or an extrapolation exists.
    pub(crate) fn sigma(&self, n: u64) -> f64 {
        if n as usize <= self.values.len() {
            return self.values[n as usize - 1];
        }
        let (k, last) = self.last();
        match self.extrapolation {
            Extrapolation::None => f64::NAN,
            Extrapolation::Hold => last,
            Extrapolation::Power { exponent } => last * (n as f64 / k as f64).powf(exponent),
            Extrapolation::Geometric { ratio } => last * ratio.powf((n - k) as f64),
        }
    }

    pub(crate) fn ln_sigma(&self, n: u64) -> f64 {
        if n as usize <= self.values.len() {
            return self.values[n as usize - 1].ln();
        }
        let (k, last) = self.last();
        match self.extrapolation {
            Extrapolation::None => f64::NAN,
            Extrapolation::Hold => last.ln(),
            Extrapolation::Power { exponent } => last.ln() + exponent * (n as f64 / k as f64).ln(),
            Extrapolation::Geometric { ratio } => last.ln() + (n - k) as f64 * ratio.ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceSpec;

    #[test]
    fn parses_table_and_stanza() {
        let text = "# sigma table\n1 1.0\n2, 2.0\n3 4\nextrapolate = geometric 2\n";
        let t = CustomTable::parse(text).unwrap();
        assert_eq!(t.values(), &[1.0, 2.0, 4.0]);
        assert_eq!(t.extrapolation(), Extrapolation::Geometric { ratio: 2.0 });
        let spec = SequenceSpec::custom(t.clone(), 1.0).unwrap();
        assert_eq!(spec.sigma(5).unwrap(), 16.0);
        assert_eq!(CustomTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn rejects_gaps_and_bad_values() {
        assert!(CustomTable::parse("1 1\n3 1\n").is_err());
        assert!(CustomTable::parse("1 -1\n").is_err());
        assert!(CustomTable::parse("").is_err());
        assert!(CustomTable::parse("1 1\nextrapolate wobble\n").is_err());
    }

    #[test]
    fn no_extrapolation_stops_at_table_end() {
        let t = CustomTable::new(vec![1.0; 4], Extrapolation::None).unwrap();
        let spec = SequenceSpec::custom(t, 2.0).unwrap();
        assert_eq!(spec.walk().count(), 4);
        assert_eq!(spec.sigma(5), Err(Error::BeyondTable { n: 5, len: 4 }));
        assert!(spec.tau(4).is_ok());
    }

    #[test]
    fn power_extrapolation_continues_smoothly() {
        let base = SequenceSpec::power_law(1.5, 2.0).unwrap();
        let t =
            CustomTable::from_prefix(&base, 100, Extrapolation::Power { exponent: 1.5 }).unwrap();
        let spec = SequenceSpec::custom(t, 2.0).unwrap();
        for n in [101, 250, 1000] {
            let (a, b) = (spec.sigma(n).unwrap(), base.sigma(n).unwrap());
            assert!((a - b).abs() < 1e-12 * b);
        }
    }
}
