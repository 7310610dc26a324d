//! Exact integer polynomials and matrices, certified complex roots,
//! factorization and Pisot-family classification.

mod classify;
mod factor;
mod matrix;
mod poly;
mod roots;

pub use classify::{
    classify_family, group_spectrum, perron_check, single_root_group, AlgebraicSpectrumReport, FamilyVerdict,
    GroupReport, GroupVerdict, PerronCheck, SpectrumGroup,
};
pub use factor::{companion, height, irreducible_factors, CompanionData, Factorization, MAX_FACTOR_DEGREE};
pub use matrix::IntMatrix;
pub use poly::IntPolynomial;
pub use roots::{complex_roots, RootCluster};

/// det(xI − M).
pub fn char_poly(m: &IntMatrix) -> crate::Result<IntPolynomial> {
    m.char_poly()
}

/// Lowest-degree monic integer polynomial annihilating `m`.
pub fn min_poly(m: &IntMatrix) -> crate::Result<IntPolynomial> {
    m.min_poly()
}
