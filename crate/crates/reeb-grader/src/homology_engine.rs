//! Assembly of the graded ranks of cylindrical contact homology and
//! comparison of contact structures by their gradings.
//!
//! Every builder-produced spec emits only even degrees, so the differential
//! vanishes and chain ranks equal homology ranks; `compute` is therefore a
//! pure enumeration of generator degrees.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;

use crate::boothby_wang::{
    first_chern_xi, generator_degree, well_definedness, BundleSpec, ChernClass, Convention,
    GeneratorKey,
};
use crate::orbifold_base::product_projective;
use crate::{Error, Result};

/// Graded ranks with generator provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedRanks {
    pub ranks: BTreeMap<i64, u64>,
    pub provenance: BTreeMap<i64, Vec<GeneratorKey>>,
    /// Inclusive computation cutoff.
    pub max_degree: i64,
    pub convention: Convention,
    /// Smallest generator degree dropped by the cutoff, when any.
    pub smallest_omitted: Option<i64>,
}

impl GradedRanks {
    pub fn rank(&self, degree: i64) -> u64 {
        self.ranks.get(&degree).copied().unwrap_or(0)
    }
}

/// Enumerates all generators `(stratum, m, d)` of degree at most `max_degree`
/// and tallies ranks per degree. Fails the well-definedness gate unless
/// `override_gate` is set; termination requires a positive Chern pairing on
/// every stratum.
pub fn compute(spec: &BundleSpec, max_degree: i64, override_gate: bool) -> Result<GradedRanks> {
    if max_degree < 2 {
        return Err(Error::Input("max_degree must be >= 2".into()));
    }
    for s in &spec.base.strata {
        if s.chern_pairing <= Rational64::zero() {
            return Err(Error::NonTerminating(s.name.clone()));
        }
    }
    let gate = well_definedness(spec)?;
    if !gate.sufficient && !override_gate {
        return Err(Error::GateFailed {
            sum: spec.base.sum_w_tilde(),
        });
    }

    let mut ranks: BTreeMap<i64, u64> = BTreeMap::new();
    let mut provenance: BTreeMap<i64, Vec<GeneratorKey>> = BTreeMap::new();
    let mut smallest_omitted: Option<i64> = None;
    let omit = |degree: i64, cur: &mut Option<i64>| {
        *cur = Some(cur.map_or(degree, |d| d.min(degree)));
    };

    for (si, stratum) in spec.base.strata.iter().enumerate() {
        let mut m = 1;
        loop {
            let base_key = GeneratorKey { stratum: si, m, d: 0 };
            let floor_degree = generator_degree(spec, base_key)?;
            if floor_degree > max_degree {
                omit(floor_degree, &mut smallest_omitted);
                break;
            }
            for (half_d, &b) in stratum.betti.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let key = GeneratorKey {
                    stratum: si,
                    m,
                    d: 2 * half_d as u64,
                };
                let degree = generator_degree(spec, key)?;
                if degree > max_degree {
                    omit(degree, &mut smallest_omitted);
                    continue;
                }
                *ranks.entry(degree).or_insert(0) += b;
                provenance
                    .entry(degree)
                    .or_default()
                    .extend(std::iter::repeat(key).take(b as usize));
            }
            m += 1;
        }
    }
    for keys in provenance.values_mut() {
        keys.sort();
    }
    Ok(GradedRanks {
        ranks,
        provenance,
        max_degree,
        convention: spec.convention,
        smallest_omitted,
    })
}

/// Outcome of a degree-by-degree rank comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonVerdict {
    pub equal_up_to_cutoff: bool,
    /// `(degree, rank_a, rank_b)` at the first differing degree.
    pub first_difference: Option<(i64, u64, u64)>,
}

/// Compares graded ranks of two specs up to `max_degree`. Both must use the
/// same convention.
pub fn compare(spec_a: &BundleSpec, spec_b: &BundleSpec, max_degree: i64) -> Result<ComparisonVerdict> {
    if spec_a.convention != spec_b.convention {
        return Err(Error::Input(
            "comparison requires both specs to use the same grading convention".into(),
        ));
    }
    let a = compute(spec_a, max_degree, false)?;
    let b = compute(spec_b, max_degree, false)?;
    Ok(compare_ranks(&a, &b))
}

/// Degree-by-degree comparison of already-computed ranks.
pub fn compare_ranks(a: &GradedRanks, b: &GradedRanks) -> ComparisonVerdict {
    let mut degrees: Vec<i64> = a.ranks.keys().chain(b.ranks.keys()).copied().collect();
    degrees.sort_unstable();
    degrees.dedup();
    for d in degrees {
        let (ra, rb) = (a.rank(d), b.rank(d));
        if ra != rb {
            return ComparisonVerdict {
                equal_up_to_cutoff: false,
                first_difference: Some((d, ra, rb)),
            };
        }
    }
    ComparisonVerdict {
        equal_up_to_cutoff: true,
        first_difference: None,
    }
}

/// One member of a Wang-Ziller family table.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub k: i64,
    pub l: i64,
    pub chern: ChernClass,
}

/// Pairwise verdicts for the family `k - l = c`, `gcd(k, l) = 1`, `k <= bound`.
#[derive(Debug, Clone)]
pub struct FamilyTable {
    pub c: i64,
    pub members: Vec<FamilyMember>,
    /// `(index_a, index_b, verdict)` for each pair `a < b`.
    pub verdicts: Vec<(usize, usize, ComparisonVerdict)>,
}

/// Enumerates the Wang-Ziller family with fixed Chern difference `c` and
/// compares all members pairwise. Errors if two members with distinct `k + l`
/// fail to be distinguished below the cutoff.
pub fn enumerate_family(c: i64, bound: i64, max_degree: i64) -> Result<FamilyTable> {
    if c < 0 || bound < c + 1 {
        return Err(Error::Input("enumerate_family requires c >= 0 and bound >= c + 1".into()));
    }
    let mut members = Vec::new();
    let mut specs = Vec::new();
    for l in 1..=bound - c {
        let k = l + c;
        if num_integer::gcd(k, l) != 1 {
            continue;
        }
        let base = product_projective(&[(1, k), (1, l)])?;
        let spec = BundleSpec::new(base, Convention::Unreduced)?;
        let chern = first_chern_xi(&spec)?;
        members.push(FamilyMember { k, l, chern });
        specs.push(spec);
    }
    let mut verdicts = Vec::new();
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            let v = compare(&specs[i], &specs[j], max_degree)?;
            let (a, b) = (&members[i], &members[j]);
            if a.k + a.l != b.k + b.l && v.equal_up_to_cutoff {
                return Err(Error::Input(format!(
                    "family members ({},{}) and ({},{}) with distinct k+l were not \
                     distinguished below degree {max_degree}; raise the cutoff",
                    a.k, a.l, b.k, b.l
                )));
            }
            verdicts.push((i, j, v));
        }
    }
    Ok(FamilyTable { c, members, verdicts })
}

/// Canonical polynomial string for graded ranks, e.g. `q^2 + 2*q^4`.
pub fn poincare_series(g: &GradedRanks) -> String {
    if g.ranks.is_empty() {
        return "0".into();
    }
    g.ranks
        .iter()
        .map(|(&d, &r)| {
            if r == 1 {
                format!("q^{d}")
            } else {
                format!("{r}*q^{d}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbifold_base::{custom, weighted_projective, Stratum};

    fn spec(base: crate::orbifold_base::OrbifoldBase) -> BundleSpec {
        BundleSpec::new(base, Convention::Unreduced).unwrap()
    }

    #[test]
    fn sphere_cp1_ranks() {
        let s = spec(product_projective(&[(1, 1)]).unwrap());
        let g = compute(&s, 12, false).unwrap();
        for d in [2, 4, 6, 8, 10, 12] {
            assert_eq!(g.rank(d), 1, "degree {d}");
        }
        assert_eq!(g.ranks.values().sum::<u64>(), 6);
    }

    #[test]
    fn sphere_cp2_ranks() {
        let s = spec(product_projective(&[(2, 1)]).unwrap());
        let g = compute(&s, 14, false).unwrap();
        for d in [4, 6, 8, 10, 12, 14] {
            assert_eq!(g.rank(d), 1, "degree {d}");
        }
        assert_eq!(g.ranks.values().sum::<u64>(), 6);
    }

    #[test]
    fn wang_ziller_1_2_ranks() {
        let s = spec(product_projective(&[(1, 1), (1, 2)]).unwrap());
        let g = compute(&s, 14, false).unwrap();
        assert_eq!(g.rank(10), 1);
        assert_eq!(g.rank(12), 2);
        assert_eq!(g.rank(14), 1); // only (m=1, d=4); m=2 starts at 22
        assert_eq!(g.ranks.len(), 3);
        assert_eq!(g.smallest_omitted, Some(22));
    }

    #[test]
    fn provenance_lengths_match_ranks() {
        let s = spec(weighted_projective(&[1, 2], 1).unwrap());
        let g = compute(&s, 30, false).unwrap();
        for (d, &r) in &g.ranks {
            assert_eq!(g.provenance[d].len() as u64, r);
        }
    }

    #[test]
    fn gate_blocks_without_override() {
        let base = custom(
            2,
            vec![Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1],
                chern_pairing: Rational64::from_integer(1),
            }],
            vec![1],
            vec![Rational64::new(1, 2)],
        )
        .unwrap();
        let s = spec(base);
        assert!(matches!(
            compute(&s, 10, false),
            Err(Error::GateFailed { .. })
        ));
        assert!(compute(&s, 10, true).is_ok());
    }

    #[test]
    fn nonpositive_pairing_refused() {
        let base = custom(
            2,
            vec![Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1],
                chern_pairing: Rational64::from_integer(-1),
            }],
            vec![1],
            vec![Rational64::from_integer(2)],
        )
        .unwrap();
        let s = spec(base);
        assert!(matches!(
            compute(&s, 10, false),
            Err(Error::NonTerminating(_))
        ));
    }

    #[test]
    fn compare_wang_ziller() {
        let a = spec(product_projective(&[(1, 2), (1, 1)]).unwrap());
        let b = spec(product_projective(&[(1, 3), (1, 2)]).unwrap());
        let v = compare(&a, &b, 20).unwrap();
        assert!(!v.equal_up_to_cutoff);
        assert_eq!(v.first_difference, Some((10, 1, 0)));

        let v = compare(&a, &a, 20).unwrap();
        assert!(v.equal_up_to_cutoff);

        // The grading depends on k + l only: (1,2) and (2,1) agree.
        let c = spec(product_projective(&[(1, 1), (1, 2)]).unwrap());
        let d = spec(product_projective(&[(1, 2), (1, 1)]).unwrap());
        let v = compare(&c, &d, 40).unwrap();
        assert!(v.equal_up_to_cutoff);
    }

    #[test]
    fn compare_is_antisymmetric() {
        let a = spec(product_projective(&[(1, 2), (1, 1)]).unwrap());
        let b = spec(product_projective(&[(1, 3), (1, 2)]).unwrap());
        let ab = compare(&a, &b, 30).unwrap();
        let ba = compare(&b, &a, 30).unwrap();
        let (d, ra, rb) = ab.first_difference.unwrap();
        assert_eq!(ba.first_difference, Some((d, rb, ra)));
    }

    #[test]
    fn convention_mismatch_rejected() {
        let a = BundleSpec::new(product_projective(&[(1, 1)]).unwrap(), Convention::Unreduced)
            .unwrap();
        let b =
            BundleSpec::new(product_projective(&[(1, 1)]).unwrap(), Convention::Reduced).unwrap();
        assert!(compare(&a, &b, 10).is_err());
    }

    #[test]
    fn family_c1() {
        let t = enumerate_family(1, 5, 60).unwrap();
        let pairs: Vec<(i64, i64)> = t.members.iter().map(|m| (m.k, m.l)).collect();
        assert_eq!(pairs, vec![(2, 1), (3, 2), (4, 3), (5, 4)]);
        for m in &t.members {
            assert_eq!(m.chern.free, vec![2]);
        }
        for (i, j, v) in &t.verdicts {
            assert!(!v.equal_up_to_cutoff, "pair {i},{j}");
        }
        // Minimal degrees 10, 18, 26, 34.
        let first = t
            .verdicts
            .iter()
            .find(|(i, j, _)| *i == 0 && *j == 1)
            .unwrap();
        assert_eq!(first.2.first_difference.map(|f| f.0), Some(10));
    }

    #[test]
    fn family_c0_singleton() {
        let t = enumerate_family(0, 1, 20).unwrap();
        let pairs: Vec<(i64, i64)> = t.members.iter().map(|m| (m.k, m.l)).collect();
        assert_eq!(pairs, vec![(1, 1)]);
        assert!(t.verdicts.is_empty());
    }

    #[test]
    fn family_c2() {
        let t = enumerate_family(2, 5, 40).unwrap();
        let pairs: Vec<(i64, i64)> = t.members.iter().map(|m| (m.k, m.l)).collect();
        assert_eq!(pairs, vec![(3, 1), (5, 3)]);
        let v = &t.verdicts[0].2;
        assert_eq!(v.first_difference.map(|f| f.0), Some(14)); // 4*4 - 2
    }

    #[test]
    fn poincare_series_format() {
        let s = spec(product_projective(&[(1, 1)]).unwrap());
        let g = compute(&s, 6, false).unwrap();
        assert_eq!(poincare_series(&g), "q^2 + q^4 + q^6");

        let s = spec(product_projective(&[(1, 1), (1, 1)]).unwrap());
        let g = compute(&s, 10, false).unwrap();
        assert_eq!(poincare_series(&g), "q^6 + 2*q^8 + q^10");

        let empty = GradedRanks {
            ranks: BTreeMap::new(),
            provenance: BTreeMap::new(),
            max_degree: 10,
            convention: Convention::Unreduced,
            smallest_omitted: None,
        };
        assert_eq!(poincare_series(&empty), "0");
    }

    #[test]
    fn all_degrees_even_for_builders() {
        for base in [
            product_projective(&[(1, 1), (1, 2)]).unwrap(),
            product_projective(&[(3, 2)]).unwrap(),
            weighted_projective(&[1, 2, 6, 5], 2).unwrap(),
        ] {
            let s = spec(base);
            let g = compute(&s, 60, false).unwrap();
            assert!(g.ranks.keys().all(|d| d % 2 == 0));
        }
    }

    #[test]
    fn copies_of_homology_window() {
        // For single-stratum bases every multiplicity contributes the full
        // Betti total inside its degree window.
        let s = spec(product_projective(&[(1, 2), (1, 3)]).unwrap());
        let g = compute(&s, 200, false).unwrap();
        let total = s.base.top().total_betti();
        for m in 1..5i64 {
            let lo = 4 * m * 5 - 2;
            let hi = lo + s.base.top().dim as i64;
            let window: u64 = g
                .ranks
                .iter()
                .filter(|(&d, _)| d >= lo && d <= hi)
                .map(|(_, &r)| r)
                .sum();
            assert_eq!(window, total);
        }
    }
}
