//! JSON distribution specifications.
//!
//! ```json
//! {
//!   "pairs": [
//!     { "id": "p0", "left_generators": ["x"], "right_generators": ["y"],
//!       "max_degree": 2,
//!       "moments": { "x": "1/2", "y": 0, "x x": 1, "x y": "1/3",
//!                    "y x": "1/3", "y y": 2 },
//!       "theta_moments": { "...": "..." } }
//!   ],
//!   "perturbations": { "x u": 1 }
//! }
//! ```
//!
//! Each pair carries exactly one of `moments` or `cumulants`. Words are
//! space-separated symbols, the empty string is the empty word, and values
//! are integers or `p/q` strings. `perturbations` is optional; it adds the
//! listed amounts to mixed moments of the bi-free product.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::bnc::PairId;
use crate::ncp::{Family, JointDistribution, PureDistribution, Word};
use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    pairs: Vec<RawPair>,
    #[serde(default)]
    perturbations: BTreeMap<String, RawRational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    id: String,
    left_generators: Vec<String>,
    right_generators: Vec<String>,
    max_degree: usize,
    moments: Option<BTreeMap<String, RawRational>>,
    cumulants: Option<BTreeMap<String, RawRational>>,
    theta_moments: Option<BTreeMap<String, RawRational>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawRational {
    Int(i64),
    Text(String),
}

impl RawRational {
    fn value(&self) -> Result<Rational> {
        match self {
            RawRational::Int(n) => Ok(rational::int(*n)),
            RawRational::Text(s) => rational::parse(s),
        }
    }
}

/// A parsed specification: the family of pairs and optional perturbations.
#[derive(Debug, Clone)]
pub struct DistributionSpec {
    pub family: Family,
    pub perturbations: BTreeMap<Word, Rational>,
}

fn table(
    pair: &RawPair,
    parse: &dyn Fn(&str) -> Result<Word>,
    raw: &BTreeMap<String, RawRational>,
) -> Result<HashMap<Word, Rational>> {
    let mut out = HashMap::new();
    for (key, value) in raw {
        let w = parse(key)?;
        let v = value.value().map_err(|e| Error::Spec(format!("pair `{}`, word `{key}`: {e}", pair.id)))?;
        if out.insert(w, v).is_some() {
            return Err(Error::Spec(format!("pair `{}`: word `{key}` listed twice", pair.id)));
        }
    }
    Ok(out)
}

fn build_pure(raw: &RawPair) -> Result<PureDistribution> {
    let id = PairId::new(&raw.id);
    if raw.id.is_empty() {
        return Err(Error::Spec("pair id must be nonempty".into()));
    }
    let left: Vec<&str> = raw.left_generators.iter().map(String::as_str).collect();
    let right: Vec<&str> = raw.right_generators.iter().map(String::as_str).collect();
    // A placeholder pair resolves table keys against this pair's symbols.
    let probe = PureDistribution::from_cumulants(&id, &left, &right, raw.max_degree.max(1), HashMap::new())?;
    let parse = |s: &str| -> Result<Word> {
        s.split_whitespace()
            .map(|sym| {
                probe.letter(sym).map_err(|_| {
                    Error::Spec(format!("pair `{}`: `{sym}` is not one of its generators", raw.id))
                })
            })
            .collect()
    };
    let pure = match (&raw.moments, &raw.cumulants) {
        (Some(m), None) => PureDistribution::from_moments(&id, &left, &right, raw.max_degree, table(raw, &parse, m)?)?,
        (None, Some(c)) => {
            let c = table(raw, &parse, c)?;
            if c.contains_key(&Word::empty()) {
                return Err(Error::Spec(format!("pair `{}`: the empty word has no cumulant", raw.id)));
            }
            PureDistribution::from_cumulants(&id, &left, &right, raw.max_degree, c)?
        }
        _ => {
            return Err(Error::Spec(format!("pair `{}` needs exactly one of `moments` or `cumulants`", raw.id)));
        }
    };
    match &raw.theta_moments {
        Some(t) => {
            let t = table(raw, &parse, t)?;
            if t.get(&Word::empty()).is_some_and(|v| v != &rational::one()) {
                return Err(Error::Spec(format!("pair `{}`: theta of the empty word must be 1", raw.id)));
            }
            pure.with_theta(t)
        }
        None => Ok(pure),
    }
}

impl DistributionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        if raw.pairs.is_empty() {
            return Err(Error::Spec("`pairs` is empty".into()));
        }
        let pures = raw.pairs.iter().map(build_pure).collect::<Result<Vec<_>>>()?;
        let family = Family::new(pures)?;
        let mut perturbations = BTreeMap::new();
        for (key, value) in &raw.perturbations {
            let w = family.parse_word(key).map_err(|e| Error::Spec(format!("perturbation `{key}`: {e}")))?;
            if w.is_pure() {
                return Err(Error::Spec(format!("perturbation `{key}` is not a mixed word")));
            }
            perturbations.insert(w, value.value()?);
        }
        Ok(Self { family, perturbations })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("cannot read `{}`: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The bi-free product, with perturbations applied when present.
    pub fn joint(&self) -> JointDistribution {
        if self.perturbations.is_empty() {
            JointDistribution::bifree_product(self.family.clone())
        } else {
            JointDistribution::perturbed(self.family.clone(), self.perturbations.clone())
                .expect("perturbation words were resolved against the family")
        }
    }

    /// The conditionally bi-free product; every pair needs a θ-layer.
    pub fn conditional(&self) -> Result<JointDistribution> {
        JointDistribution::conditional_product(self.family.clone())
    }
}
