//! Update-family data model: validation, canonical form, derived metrics,
//! the named model generators, and the line-oriented file format.

use crate::geometry::{GeometryError, LatticePoint, COORD_LIMIT};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("invalid family: {}", format_violations(.0))]
    Invalid(Vec<FamilyViolation>),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown family name `{0}`")]
    UnknownFamily(String),
    #[error("bad family parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyViolation {
    EmptyFamily,
    EmptyRule { rule: usize },
    OriginInRule { rule: usize },
    CoordinateOutOfRange { rule: usize, site: LatticePoint },
}

impl fmt::Display for FamilyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyViolation::EmptyFamily => write!(f, "family has no rules"),
            FamilyViolation::EmptyRule { rule } => write!(f, "rule {rule} is empty"),
            FamilyViolation::OriginInRule { rule } => {
                write!(f, "rule {rule} contains the origin")
            }
            FamilyViolation::CoordinateOutOfRange { rule, site } => {
                write!(f, "rule {rule} site {site} exceeds the coordinate range")
            }
        }
    }
}

fn format_violations(v: &[FamilyViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Non-fatal canonicalization notes produced by validation or parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyWarning {
    DuplicateSite { rule: usize },
    DuplicateRule { rule: usize },
}

/// A rule: finite set of nonzero lattice offsets, deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    sites: Vec<LatticePoint>,
}

impl Rule {
    pub fn sites(&self) -> &[LatticePoint] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn norm_inf(&self) -> i64 {
        self.sites.iter().map(|s| s.norm_inf()).max().unwrap_or(0)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.sites {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A validated bootstrap percolation update family in canonical form:
/// rules deduplicated and sorted, sites within each rule deduplicated and
/// sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UpdateFamily {
    rules: Vec<Rule>,
}

impl UpdateFamily {
    /// Validates a raw rule list. Violations are reported together with the
    /// offending rule index; duplicates are canonicalized with a warning.
    pub fn validate(
        raw: &[Vec<LatticePoint>],
    ) -> Result<(UpdateFamily, Vec<FamilyWarning>), FamilyError> {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();
        if raw.is_empty() {
            violations.push(FamilyViolation::EmptyFamily);
        }
        let mut rules = Vec::with_capacity(raw.len());
        for (i, sites) in raw.iter().enumerate() {
            if sites.is_empty() {
                violations.push(FamilyViolation::EmptyRule { rule: i });
                continue;
            }
            if sites.iter().any(|s| s.is_origin()) {
                violations.push(FamilyViolation::OriginInRule { rule: i });
            }
            for s in sites {
                if s.norm_inf() > COORD_LIMIT {
                    violations.push(FamilyViolation::CoordinateOutOfRange { rule: i, site: *s });
                }
            }
            let mut sorted = sites.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != sites.len() {
                warnings.push(FamilyWarning::DuplicateSite { rule: i });
            }
            rules.push(Rule { sites: sorted });
        }
        if !violations.is_empty() {
            return Err(FamilyError::Invalid(violations));
        }
        rules.sort();
        let before = rules.len();
        rules.dedup();
        if rules.len() != before {
            warnings.push(FamilyWarning::DuplicateRule { rule: 0 });
        }
        Ok((UpdateFamily { rules }, warnings))
    }

    /// Validates and discards warnings; convenience for generated families.
    pub fn new(raw: Vec<Vec<LatticePoint>>) -> Result<UpdateFamily, FamilyError> {
        Ok(UpdateFamily::validate(&raw)?.0)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn total_sites(&self) -> usize {
        self.rules.iter().map(|r| r.len()).sum()
    }

    /// Family diameter: twice the largest l-infinity norm over all rule sites.
    pub fn diameter(&self) -> i64 {
        2 * self.rules.iter().map(|r| r.norm_inf()).max().unwrap_or(0)
    }

    /// Input size `ln(D) * sum |U|`. The logarithm base (natural) only fixes
    /// the unit; the quantity matters up to a constant factor.
    pub fn input_size(&self) -> f64 {
        (self.diameter() as f64).ln() * self.total_sites() as f64
    }

    /// Serializes to the line-oriented text format: one rule per line, sites
    /// as `x,y` pairs separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses either the line-oriented text format (with `#` comments) or the
    /// equivalent JSON object `{"rules": [[[x,y], ...], ...]}`.
    pub fn parse(text: &str) -> Result<(UpdateFamily, Vec<FamilyWarning>), FamilyError> {
        if text.trim_start().starts_with('{') {
            return Self::parse_json(text);
        }
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut sites = Vec::new();
            for tok in line.split_whitespace() {
                let (xs, ys) = tok.split_once(',').ok_or(FamilyError::Parse {
                    line: lineno + 1,
                    message: format!("expected `x,y`, got `{tok}`"),
                })?;
                let x: i64 = xs.trim().parse().map_err(|_| FamilyError::Parse {
                    line: lineno + 1,
                    message: format!("malformed coordinate `{xs}`"),
                })?;
                let y: i64 = ys.trim().parse().map_err(|_| FamilyError::Parse {
                    line: lineno + 1,
                    message: format!("malformed coordinate `{ys}`"),
                })?;
                sites.push(LatticePoint::new(x, y));
            }
            raw.push(sites);
        }
        UpdateFamily::validate(&raw)
    }

    fn parse_json(text: &str) -> Result<(UpdateFamily, Vec<FamilyWarning>), FamilyError> {
        #[derive(Deserialize)]
        struct RawFamily {
            rules: Vec<Vec<(i64, i64)>>,
        }
        let raw: RawFamily = serde_json::from_str(text).map_err(|e| FamilyError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let rules: Vec<Vec<LatticePoint>> = raw
            .rules
            .into_iter()
            .map(|r| r.into_iter().map(|(x, y)| LatticePoint::new(x, y)).collect())
            .collect();
        UpdateFamily::validate(&rules)
    }

    pub fn to_json(&self) -> String {
        let rules: Vec<Vec<(i64, i64)>> = self
            .rules
            .iter()
            .map(|r| r.sites.iter().map(|s| (s.x, s.y)).collect())
            .collect();
        serde_json::json!({ "rules": rules }).to_string()
    }
}

impl fmt::Display for UpdateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rules, D = {}", self.rule_count(), self.diameter())
    }
}

fn pt(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y)
}

/// Builds one of the named models.
///
/// Recognized names: `east`, `north_east`, `modified_two_neighbour`, `toy`,
/// `two_neighbour`, `appendix_uk` (requires `param >= 2`).
pub fn named_family(name: &str, param: Option<i64>) -> Result<UpdateFamily, FamilyError> {
    let raw: Vec<Vec<LatticePoint>> = match name {
        "east" => vec![vec![pt(-1, 0)], vec![pt(0, -1)]],
        "north_east" => vec![vec![pt(-1, 0), pt(0, -1)]],
        "modified_two_neighbour" => vec![
            vec![pt(1, 0), pt(0, -1)],
            vec![pt(0, -1), pt(-1, 0)],
            vec![pt(-1, 0), pt(0, 1)],
            vec![pt(0, 1), pt(1, 0)],
        ],
        "toy" => vec![
            vec![pt(-1, 0), pt(-2, 0), pt(0, -1), pt(0, -2)],
            vec![pt(-1, 0), pt(-2, 0), pt(0, 1)],
            vec![pt(1, 0), pt(2, 0), pt(0, -1), pt(0, -2)],
        ],
        "two_neighbour" => {
            let n = [pt(1, 0), pt(-1, 0), pt(0, 1), pt(0, -1)];
            let mut rules = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    rules.push(vec![n[i], n[j]]);
                }
            }
            rules
        }
        "appendix_uk" => {
            let k = param.ok_or_else(|| {
                FamilyError::BadParameter("appendix_uk requires a parameter k >= 2".into())
            })?;
            if k < 2 {
                return Err(FamilyError::BadParameter(format!(
                    "appendix_uk requires k >= 2, got {k}"
                )));
            }
            vec![
                vec![pt(0, -1), pt(k, 0), pt(k - 1, 0)],
                vec![pt(0, -1), pt(-k, 0), pt(-k + 1, 0)],
            ]
        }
        other => return Err(FamilyError::UnknownFamily(other.into())),
    };
    UpdateFamily::new(raw)
}
