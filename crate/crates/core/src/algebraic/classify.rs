use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use super::factor::{factor_key, irreducible_factors};
use super::poly::IntPolynomial;
use super::roots::{complex_roots, sort_clusters, RootCluster};
use crate::error::{Error, Result};

/// Certified radius requested from the root finder for classification.
const CLASSIFY_TOL: f64 = 1e-10;
/// Relative distance under which a numerically computed eigenvalue is
/// identified with a certified root of a candidate polynomial.
const MATCH_TOL: f64 = 1e-6;

/// Spectrum elements sharing one minimal polynomial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGroup {
    pub min_poly: IntPolynomial,
    pub members: Vec<RootCluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GroupVerdict {
    PisotFamily,
    NonPisot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyVerdict {
    PisotFamily,
    NonPisot,
    TotallyNonPisot,
    StronglyTotallyNonPisot,
    Mixed,
}

impl FamilyVerdict {
    pub fn is_totally_non_pisot(self) -> bool {
        matches!(self, Self::TotallyNonPisot | Self::StronglyTotallyNonPisot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub min_poly: IntPolynomial,
    /// Group members, re-centred on certified roots of the minimal polynomial.
    pub members: Vec<RootCluster>,
    /// Galois conjugates that are not members of the group.
    pub outside_conjugates: Vec<RootCluster>,
    pub verdict: GroupVerdict,
    /// Some outside conjugate has modulus > 1.
    pub has_expanding_outside_conjugate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronCheck {
    pub ok: bool,
    /// (eigenvalue, conjugate) violating the condition, when `ok` is false.
    pub witness: Option<(Complex64, Complex64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraicSpectrumReport {
    pub factors: Vec<(IntPolynomial, usize)>,
    pub groups: Vec<GroupReport>,
    pub verdict: FamilyVerdict,
    pub perron_ok: bool,
    pub perron_witness: Option<(Complex64, Complex64)>,
}

/// Pisot-family classification of an expansive spectrum.
///
/// The result does not depend on the order of groups or members.
pub fn classify_family(spectrum: &[SpectrumGroup]) -> Result<AlgebraicSpectrumReport> {
    let groups = canonical_groups(spectrum)?;
    let mut reports = Vec::with_capacity(groups.len());
    for (group, conjugates) in &groups {
        for m in &group.members {
            match m.compare_modulus(1.0) {
                Some(Ordering::Greater) => {}
                Some(_) => return Err(Error::Expansiveness { value: m.center.to_string() }),
                None => {
                    return Err(Error::Precision(format!(
                        "cannot certify |{}| > 1 within radius {:e}",
                        m.center, m.radius
                    )))
                }
            }
        }
        let outside: Vec<RootCluster> = conjugates
            .iter()
            .filter(|c| !group.members.iter().any(|m| m.overlaps(c)))
            .copied()
            .collect();
        let mut all_inside = true;
        let mut expanding = false;
        for c in &outside {
            match c.compare_modulus(1.0) {
                Some(Ordering::Less) => {}
                Some(_) => {
                    all_inside = false;
                    expanding = true;
                }
                None => {
                    return Err(Error::Precision(format!(
                        "conjugate {} of {} straddles the unit circle within radius {:e}",
                        c.center, group.min_poly, c.radius
                    )))
                }
            }
        }
        reports.push(GroupReport {
            min_poly: group.min_poly.clone(),
            members: group.members.clone(),
            outside_conjugates: outside,
            verdict: if all_inside { GroupVerdict::PisotFamily } else { GroupVerdict::NonPisot },
            has_expanding_outside_conjugate: expanding,
        });
    }
    let verdict = if reports.iter().all(|g| g.verdict == GroupVerdict::PisotFamily) {
        FamilyVerdict::PisotFamily
    } else if reports.iter().all(|g| g.verdict == GroupVerdict::NonPisot) {
        if reports.iter().all(|g| g.has_expanding_outside_conjugate) {
            FamilyVerdict::StronglyTotallyNonPisot
        } else {
            FamilyVerdict::TotallyNonPisot
        }
    } else {
        FamilyVerdict::Mixed
    };
    let perron = perron_from_canonical(&groups)?;
    let factors = groups
        .iter()
        .map(|(g, _)| (g.min_poly.clone(), g.members.iter().map(|m| m.multiplicity).sum()))
        .collect();
    Ok(AlgebraicSpectrumReport {
        factors,
        groups: reports,
        verdict,
        perron_ok: perron.ok,
        perron_witness: perron.witness,
    })
}

/// Condition on a diagonalizable expansion: for every eigenvalue λ₁ of
/// multiplicity k₁ and every conjugate λ₂ ≠ λ₁ of multiplicity k₂ (0 when
/// not an eigenvalue), either |λ₁| > |λ₂| or k₂ ≥ k₁.
pub fn perron_check(spectrum: &[SpectrumGroup]) -> Result<PerronCheck> {
    perron_from_canonical(&canonical_groups(spectrum)?)
}

fn perron_from_canonical(groups: &[(SpectrumGroup, Vec<RootCluster>)]) -> Result<PerronCheck> {
    for (group, conjugates) in groups {
        for l1 in &group.members {
            for l2 in conjugates {
                if l2.overlaps(l1) {
                    continue;
                }
                let k2 = group
                    .members
                    .iter()
                    .find(|m| m.overlaps(l2))
                    .map_or(0, |m| m.multiplicity);
                if k2 >= l1.multiplicity {
                    continue;
                }
                let gap = l1.modulus() - l2.modulus();
                let slack = l1.radius + l2.radius;
                let dominates = if gap > slack {
                    true
                } else if gap < -slack || l2.center == l1.center.conj() {
                    false
                } else {
                    return Err(Error::Precision(format!(
                        "cannot compare |{}| and |{}| within certified radii",
                        l1.center, l2.center
                    )));
                };
                if !dominates {
                    return Ok(PerronCheck { ok: false, witness: Some((l1.center, l2.center)) });
                }
            }
        }
    }
    Ok(PerronCheck { ok: true, witness: None })
}

/// Merges groups with equal minimal polynomials, snaps members onto
/// certified roots and sorts everything canonically.
fn canonical_groups(spectrum: &[SpectrumGroup]) -> Result<Vec<(SpectrumGroup, Vec<RootCluster>)>> {
    let mut merged: Vec<SpectrumGroup> = Vec::new();
    for g in spectrum {
        if g.min_poly.degree() == 0 {
            return Err(Error::Domain("minimal polynomial must have degree at least 1".into()));
        }
        let key = g.min_poly.primitive_part();
        match merged.iter_mut().find(|m| m.min_poly == key) {
            Some(m) => m.members.extend(g.members.iter().copied()),
            None => merged.push(SpectrumGroup { min_poly: key, members: g.members.clone() }),
        }
    }
    merged.sort_by_key(|a| factor_key(&a.min_poly));
    let mut out = Vec::with_capacity(merged.len());
    for g in merged {
        let conjugates = complex_roots(&g.min_poly, CLASSIFY_TOL)?;
        if conjugates.iter().any(|c| c.multiplicity != 1) {
            return Err(Error::Domain(format!("{} is not square-free, so it is not a minimal polynomial", g.min_poly)));
        }
        let mut members: Vec<RootCluster> = Vec::new();
        for m in &g.members {
            let root = nearest_root(&conjugates, m.center).ok_or_else(|| {
                Error::Domain(format!("{} is not a root of {}", m.center, g.min_poly))
            })?;
            match members.iter_mut().find(|x| x.center == root.center) {
                Some(x) => x.multiplicity += m.multiplicity,
                None => members.push(RootCluster { multiplicity: m.multiplicity, ..root }),
            }
        }
        sort_clusters(&mut members);
        out.push((SpectrumGroup { min_poly: g.min_poly, members }, conjugates));
    }
    Ok(out)
}

fn nearest_root(roots: &[RootCluster], z: Complex64) -> Option<RootCluster> {
    roots
        .iter()
        .min_by(|a, b| (a.center - z).norm().total_cmp(&(b.center - z).norm()))
        .filter(|r| (r.center - z).norm() <= r.radius + MATCH_TOL * (1.0 + z.norm()))
        .copied()
}

/// Groups numerically computed eigenvalues (listed with repetition) by the
/// irreducible factor of `candidate` they are roots of.
///
/// `candidate` must be an integer polynomial vanishing on every eigenvalue,
/// such as the characteristic polynomial of a generator matrix M with LV = VM.
pub fn group_spectrum(eigenvalues: &[Complex64], candidate: &IntPolynomial) -> Result<Vec<SpectrumGroup>> {
    let factorization = irreducible_factors(candidate)?;
    let mut groups: Vec<SpectrumGroup> = Vec::new();
    let factor_roots: Vec<(IntPolynomial, Vec<RootCluster>)> = factorization
        .factors
        .iter()
        .map(|(f, _)| Ok((f.clone(), complex_roots(f, CLASSIFY_TOL)?)))
        .collect::<Result<_>>()?;
    for &z in eigenvalues {
        let (poly, root) = factor_roots
            .iter()
            .filter_map(|(f, roots)| nearest_root(roots, z).map(|r| (f, r)))
            .min_by(|a, b| (a.1.center - z).norm().total_cmp(&(b.1.center - z).norm()))
            .ok_or_else(|| Error::Domain(format!("eigenvalue {z} is not a root of {candidate}")))?;
        let member = RootCluster { multiplicity: 1, ..root };
        match groups.iter_mut().find(|g| g.min_poly == *poly) {
            Some(g) => g.members.push(member),
            None => groups.push(SpectrumGroup { min_poly: poly.clone(), members: vec![member] }),
        }
    }
    Ok(groups)
}

/// Spectrum of a single real algebraic number given by its minimal polynomial
/// and an approximation of the chosen root.
pub fn single_root_group(min_poly: &IntPolynomial, approx: f64) -> SpectrumGroup {
    SpectrumGroup {
        min_poly: min_poly.clone(),
        members: vec![RootCluster { center: Complex64::new(approx, 0.0), radius: 0.0, multiplicity: 1 }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn golden_mean_is_pisot() {
        let g = single_root_group(&p(&[-1, -1, 1]), 1.618_033_988_749_895);
        let r = classify_family(&[g]).unwrap();
        assert_eq!(r.verdict, FamilyVerdict::PisotFamily);
        assert!(r.perron_ok);
    }

    #[test]
    fn np13_is_strongly_totally_non_pisot() {
        let g = single_root_group(&p(&[-3, -1, 1]), (1.0 + 13f64.sqrt()) / 2.0);
        let r = classify_family(&[g]).unwrap();
        assert_eq!(r.verdict, FamilyVerdict::StronglyTotallyNonPisot);
        assert_eq!(r.groups[0].verdict, GroupVerdict::NonPisot);
        assert!(r.perron_ok);
    }

    #[test]
    fn integer_expansion_has_no_conjugates() {
        let g = single_root_group(&p(&[-2, 1]), 2.0);
        assert_eq!(classify_family(&[g]).unwrap().verdict, FamilyVerdict::PisotFamily);
    }

    #[test]
    fn contracting_member_is_an_error() {
        let g = single_root_group(&p(&[-1, -1, 1]), -0.618_033_988_749_895);
        assert!(matches!(classify_family(&[g]), Err(Error::Expansiveness { .. })));
    }

    #[test]
    fn both_conjugates_present_is_pisot_and_perron() {
        let s = 13f64.sqrt();
        let g = SpectrumGroup {
            min_poly: p(&[-3, -1, 1]),
            members: vec![
                RootCluster { center: Complex64::new((1.0 + s) / 2.0, 0.0), radius: 0.0, multiplicity: 1 },
                RootCluster { center: Complex64::new((1.0 - s) / 2.0, 0.0), radius: 0.0, multiplicity: 1 },
            ],
        };
        let r = classify_family(&[g]).unwrap();
        assert_eq!(r.verdict, FamilyVerdict::PisotFamily);
        assert!(r.perron_ok);
    }

    #[test]
    fn perron_violation_names_the_pair() {
        // Only the smaller root of x² − x − 3 is an eigenvalue.
        let s = 13f64.sqrt();
        let g = single_root_group(&p(&[-3, -1, 1]), (1.0 - s) / 2.0);
        let c = perron_check(&[g]).unwrap();
        assert!(!c.ok);
        let (a, b) = c.witness.unwrap();
        assert!((a.re - (1.0 - s) / 2.0).abs() < 1e-9);
        assert!((b.re - (1.0 + s) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn grouping_eigenvalues_of_a_product_expansion() {
        let l13 = (1.0 + 13f64.sqrt()) / 2.0;
        let l21 = (1.0 + 21f64.sqrt()) / 2.0;
        let cand = &p(&[-3, -1, 1]) * &p(&[-5, -1, 1]);
        let groups = group_spectrum(&[Complex64::new(l21, 0.0), Complex64::new(l13, 0.0)], &cand).unwrap();
        let r = classify_family(&groups).unwrap();
        assert_eq!(r.groups.len(), 2);
        assert_eq!(r.verdict, FamilyVerdict::StronglyTotallyNonPisot);
        assert!(r.verdict.is_totally_non_pisot());
    }
}
