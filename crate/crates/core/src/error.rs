use std::fmt;

use thiserror::Error;

/// One failed check reported by [`crate::tiling::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    /// Expansion has an eigenvalue of modulus `modulus` ≤ 1.
    NotExpansive { modulus: f64 },
    /// det(L)·vol(T_parent) differs from the summed child volumes.
    VolumeIdentity { parent: usize, expected: f64, actual: f64 },
    /// Substitution matrix is not primitive.
    NotPrimitive,
    /// Two children of `parent` overlap in their interiors.
    Overlap { parent: usize, first: usize, second: usize },
    /// A child of `parent` pokes out of L(supp(T_parent)).
    ChildOutside { parent: usize, child: usize },
    /// Perron eigenvalue of the substitution matrix disagrees with |det L|.
    PerronMismatch { theta: f64, det: f64 },
    /// Prototile geometry is degenerate or non-convex.
    BadPrototile { tile: usize, reason: String },
    /// A child references an unknown prototile.
    UnknownType { parent: usize, child: usize, kind: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotExpansive { modulus } => {
                write!(f, "expansion has an eigenvalue of modulus {modulus} inside the closed unit disk")
            }
            Self::VolumeIdentity { parent, expected, actual } => write!(
                f,
                "volume identity fails on parent {parent}: det(L)*vol = {expected}, children sum to {actual}"
            ),
            Self::NotPrimitive => write!(f, "substitution matrix is not primitive"),
            Self::Overlap { parent, first, second } => {
                write!(f, "children {first} and {second} of parent {parent} overlap")
            }
            Self::ChildOutside { parent, child } => {
                write!(f, "child {child} of parent {parent} lies outside the expanded parent support")
            }
            Self::PerronMismatch { theta, det } => {
                write!(f, "Perron eigenvalue {theta} does not match |det L| = {det}")
            }
            Self::BadPrototile { tile, reason } => write!(f, "prototile {tile}: {reason}"),
            Self::UnknownType { parent, child, kind } => {
                write!(f, "child {child} of parent {parent} references unknown type {kind}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("root finder did not certify all roots (residual {residual:e}): {message}")]
    Convergence { message: String, residual: f64 },
    #[error("unsupported degree {degree} (limit {limit})")]
    UnsupportedDegree { degree: usize, limit: usize },
    #[error("spectrum element {value} lies in the closed unit disk")]
    Expansiveness { value: String },
    #[error("precision: {0}")]
    Precision(String),
    #[error("polynomial must be monic: {0}")]
    Normalization(String),
    #[error("rule validation failed: {}", join_issues(.0))]
    Validation(Vec<ValidationIssue>),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("patch does not cover the requested region: {message}")]
    Coverage { message: String, minimal_order: Option<usize> },
    #[error("missing genealogy: {0}")]
    Annotation(String),
    #[error("generator set inadequate: {0}")]
    NonIntegrality(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
