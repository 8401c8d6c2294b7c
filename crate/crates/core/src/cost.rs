//! Elicitation cost model.
//!
//! An *assessment* is one free probability an expert has to supply; a row of
//! a `q`-outcome node costs `q - 1`. For each special case the model gives the
//! number of assessments under general reassessment and under the special
//! case. Where the closed forms use `n^c` for the conditioning set, this module
//! uses the product of the actual outcome counts, so heterogeneous parents are
//! handled directly.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("{0} must be at least {1}")]
    TooSmall(&'static str, u64),
    #[error("successor role needs p, the successor's outcome count")]
    MissingP,
    #[error("radix {0} is invalid; every outcome count must be at least 1")]
    BadRadix(usize),
    #[error("assessment count overflows u64")]
    Overflow,
    #[error("unknown {what} `{value}`")]
    Parse { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    IgnoredOutcome,
    SplitOutcome,
    AssumedConstant,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::IgnoredOutcome, Case::SplitOutcome, Case::AssumedConstant];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// The node whose outcome space changed (or the newly added variable).
    ChangedNode,
    /// A direct successor of the changed node.
    Successor,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::ChangedNode, Role::Successor];
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::IgnoredOutcome => "ignored",
            Case::SplitOutcome => "split",
            Case::AssumedConstant => "assumed-constant",
        })
    }
}

impl FromStr for Case {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ignored" | "ignored-outcome" => Ok(Case::IgnoredOutcome),
            "split" | "split-outcome" => Ok(Case::SplitOutcome),
            "assumed-constant" | "constant" => Ok(Case::AssumedConstant),
            _ => Err(CostError::Parse {
                what: "case",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::ChangedNode => "changed",
            Role::Successor => "successor",
        })
    }
}

impl FromStr for Role {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "changed" | "changed-node" => Ok(Role::ChangedNode),
            "successor" => Ok(Role::Successor),
            _ => Err(CostError::Parse {
                what: "role",
                value: s.to_string(),
            }),
        }
    }
}

/// Parameters of one cost question.
///
/// `m` is the changed node's original outcome count and `k` the number of
/// new outcomes (ignored), parts (split) or the added variable's outcome
/// count (assumed constant). `radices` are the outcome counts of the
/// conditioning set: the changed node's parents for [`Role::ChangedNode`],
/// the successor's other parents for [`Role::Successor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostQuery {
    pub case: Case,
    pub role: Role,
    pub m: u64,
    pub k: u64,
    pub p: Option<u64>,
    pub radices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostResult {
    pub general: u64,
    pub special: u64,
    /// `special / general`; `None` when both counts are zero.
    pub ratio: Option<f64>,
}

impl fmt::Display for CostResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "general={}, special={}, ratio=", self.general, self.special)?;
        match self.ratio {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "undefined"),
        }
    }
}

fn mul(values: &[u64]) -> Result<u64, CostError> {
    values
        .iter()
        .try_fold(1u64, |acc, &v| acc.checked_mul(v))
        .ok_or(CostError::Overflow)
}

fn sub(a: u64, b: u64) -> Result<u64, CostError> {
    a.checked_sub(b).ok_or(CostError::Overflow)
}

fn add(a: u64, b: u64) -> Result<u64, CostError> {
    a.checked_add(b).ok_or(CostError::Overflow)
}

/// Product of the conditioning-set outcome counts.
pub fn combinations(radices: &[usize]) -> Result<u64, CostError> {
    radices.iter().try_fold(1u64, |acc, &r| {
        if r == 0 {
            return Err(CostError::BadRadix(r));
        }
        acc.checked_mul(r as u64).ok_or(CostError::Overflow)
    })
}

pub fn assessment_cost(q: &CostQuery) -> Result<CostResult, CostError> {
    if q.m < 1 {
        return Err(CostError::TooSmall("m", 1));
    }
    if q.k < 1 {
        return Err(CostError::TooSmall("k", 1));
    }
    let combos = combinations(&q.radices)?;
    let (m, k) = (q.m, q.k);

    let (general, special) = match q.role {
        Role::ChangedNode => match q.case {
            // all but one of the m+k outcomes, versus only the k new ones
            Case::IgnoredOutcome => (mul(&[sub(add(m, k)?, 1)?, combos])?, mul(&[k, combos])?),
            // the node now has m+k-1 outcomes
            Case::SplitOutcome => (
                mul(&[sub(add(m, k)?, 2)?, combos])?,
                mul(&[k - 1, combos])?,
            ),
            // the added variable's own table is never reduced
            Case::AssumedConstant => {
                let n = mul(&[k - 1, combos])?;
                (n, n)
            }
        },
        Role::Successor => {
            let p = q.p.ok_or(CostError::MissingP)?;
            if p < 2 {
                return Err(CostError::TooSmall("p", 2));
            }
            let free = p - 1;
            match q.case {
                Case::IgnoredOutcome => (
                    mul(&[add(m, k)?, free, combos])?,
                    mul(&[k, free, combos])?,
                ),
                Case::SplitOutcome => (
                    mul(&[sub(add(m, k)?, 1)?, free, combos])?,
                    mul(&[k, free, combos])?,
                ),
                Case::AssumedConstant => (mul(&[k, free, combos])?, mul(&[k - 1, free, combos])?),
            }
        }
    };

    let ratio = if q.case == Case::AssumedConstant && q.role == Role::ChangedNode {
        Some(1.0)
    } else if general == 0 {
        None
    } else {
        Some(special as f64 / general as f64)
    };
    Ok(CostResult {
        general,
        special,
        ratio,
    })
}

/// One point of a ratio curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub case: Case,
    pub role: Role,
    pub m: u64,
    pub k: u64,
    pub ratio: Option<f64>,
}

/// Special/general ratio for every `(m, k)` pair, `m` outer and `k` inner,
/// both in the order given. The conditioning-set size cancels out of every
/// ratio, so the table is evaluated with an empty conditioning set and a
/// binary successor.
pub fn ratio_curves(
    case: Case,
    role: Role,
    m_values: &[u64],
    k_values: &[u64],
) -> Result<Vec<CurvePoint>, CostError> {
    if m_values.is_empty() {
        return Err(CostError::TooSmall("number of m values", 1));
    }
    if k_values.is_empty() {
        return Err(CostError::TooSmall("number of k values", 1));
    }
    let mut out = Vec::with_capacity(m_values.len() * k_values.len());
    for &m in m_values {
        for &k in k_values {
            let result = assessment_cost(&CostQuery {
                case,
                role,
                m,
                k,
                p: Some(2),
                radices: Vec::new(),
            })?;
            out.push(CurvePoint {
                case,
                role,
                m,
                k,
                ratio: result.ratio,
            });
        }
    }
    Ok(out)
}

pub const CURVES_HEADER: &str = "case,role,m,k,ratio";

/// CSV rendering of curve points; undefined ratios are left empty.
pub fn curves_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for pt in points {
        let ratio = pt.ratio.map(|r| r.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{}\n", pt.case, pt.role, pt.m, pt.k, ratio));
    }
    out
}
