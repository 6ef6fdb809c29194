//! Grading engine for Boothby-Wang bundles: Maslov indices of Reeb orbit
//! spaces, generator degrees, the well-definedness gate, and the first Chern
//! class of the contact distribution in the quotient lattice.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::orbifold_base::{OrbifoldBase, Stratum};
use crate::{Error, Result};

/// Grading convention. The reduced convention shifts every degree by `n - 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Unreduced,
    Reduced,
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Convention::Unreduced => write!(f, "unreduced"),
            Convention::Reduced => write!(f, "reduced"),
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unreduced" => Ok(Convention::Unreduced),
            "reduced" => Ok(Convention::Reduced),
            other => Err(format!("unknown convention '{other}'")),
        }
    }
}

/// A base together with the grading convention in force.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleSpec {
    pub base: OrbifoldBase,
    pub convention: Convention,
}

impl BundleSpec {
    pub fn new(base: OrbifoldBase, convention: Convention) -> Result<Self> {
        base.validate()?;
        Ok(BundleSpec { base, convention })
    }
}

/// Identifies one generator: stratum index, orbit multiplicity, and Morse
/// degree within the stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorKey {
    pub stratum: usize,
    pub m: u64,
    pub d: u64,
}

/// Maslov index of a multiplicity-`m` Reeb orbit over a stratum:
/// `2 m chern_pairing / gamma_order`, which is always an integer for
/// consistent base data.
pub fn maslov_index(spec: &BundleSpec, stratum: &Stratum, m: u64) -> Result<i64> {
    let _ = spec;
    if m == 0 {
        return Err(Error::Input("multiplicity m must be >= 1".into()));
    }
    let value = Rational64::from_integer(2 * m as i64) * stratum.chern_pairing
        / Rational64::from_integer(stratum.gamma_order as i64);
    if !value.is_integer() {
        return Err(Error::IntegralityViolation {
            stratum: stratum.name.clone(),
            m,
            pairing: stratum.chern_pairing,
            gamma: stratum.gamma_order,
        });
    }
    Ok(value.to_integer())
}

/// Degree of the generator `(stratum, m, d)`: `maslov - 2 + d`, plus `n - 3`
/// under the reduced convention.
///
/// This is the Boothby-Wang degree shift (copies of the stratum homology
/// shifted by `2mc - 2`). Equivalently, the Robbin-Salamon index of the
/// Morse-Bott orbit family is `maslov - 2 + dim/2`, and the Morse-Bott
/// grading `mu_family - dim/2 + d` collapses to the form used here.
pub fn generator_degree(spec: &BundleSpec, key: GeneratorKey) -> Result<i64> {
    let stratum = spec
        .base
        .strata
        .get(key.stratum)
        .ok_or_else(|| Error::Input(format!("no stratum with index {}", key.stratum)))?;
    if key.d % 2 != 0 || key.d > stratum.dim {
        return Err(Error::Input(format!(
            "Morse degree {} invalid for stratum '{}' of dimension {}",
            key.d, stratum.name, stratum.dim
        )));
    }
    let mu = maslov_index(spec, stratum, key.m)?;
    let mut degree = mu - 2 + key.d as i64;
    if spec.convention == Convention::Reduced {
        degree += spec.base.n as i64 - 3;
    }
    Ok(degree)
}

/// The class of `w_tilde` in `Z^k` modulo the rank-1 sublattice generated by
/// `w`, in the presentation `U w = (g, 0, ..., 0)` for unimodular `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChernClass {
    /// First coordinate modulo `g = gcd(w)`, reduced to `[0, g)`.
    pub torsion: i64,
    pub torsion_modulus: i64,
    /// Remaining `k - 1` free coordinates, sign-normalized so the first
    /// nonzero entry is positive.
    pub free: Vec<i64>,
}

impl ChernClass {
    pub fn is_zero(&self) -> bool {
        self.torsion == 0 && self.free.iter().all(|&x| x == 0)
    }
}

impl std::fmt::Display for ChernClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.torsion != 0 {
            parts.push(format!("{} (mod {})", self.torsion, self.torsion_modulus));
        }
        for x in &self.free {
            parts.push(x.to_string());
        }
        write!(f, "({})", parts.join(", "))
    }
}

/// First Chern class of the contact distribution, computed from the builder's
/// unit-generator presentation (falling back to integral `(w, w_tilde)`).
pub fn first_chern_xi(spec: &BundleSpec) -> Result<ChernClass> {
    let (w, mut wt): (Vec<i64>, Vec<i64>) = match &spec.base.c1_presentation {
        Some(p) => (p.w.clone(), p.w_tilde.clone()),
        None => {
            let w = spec.base.w.clone();
            let mut wt = Vec::with_capacity(spec.base.w_tilde.len());
            for r in &spec.base.w_tilde {
                if !r.is_integer() {
                    return Err(Error::NonIntegralWeights(format!(
                        "w_tilde entry {r} is not an integer"
                    )));
                }
                wt.push(r.to_integer());
            }
            (w, wt)
        }
    };
    if w.iter().all(|&x| x == 0) {
        return Err(Error::Input("curvature weights w must be nonzero".into()));
    }

    // Unimodular column reduction of w to (g, 0, ..., 0), applying the same
    // operations to w_tilde (Smith-normal-form reduction of the 1-column
    // relation matrix).
    let mut w = w;
    for i in 1..w.len() {
        if w[i] == 0 {
            continue;
        }
        let e = i64::extended_gcd(&w[0], &w[i]);
        let (g, s, t) = (e.gcd, e.x, e.y);
        let (a0, ai) = (w[0], w[i]);
        w[0] = g;
        w[i] = 0;
        let (b0, bi) = (wt[0], wt[i]);
        wt[0] = s * b0 + t * bi;
        wt[i] = -(ai / g) * b0 + (a0 / g) * bi;
    }
    let g = w[0].abs();

    let torsion = if g == 0 { wt[0] } else { wt[0].rem_euclid(g) };
    let mut free: Vec<i64> = wt[1..].to_vec();
    if let Some(first) = free.iter().find(|&&x| x != 0) {
        if first.is_negative() {
            for x in &mut free {
                *x = -*x;
            }
        }
    }
    Ok(ChernClass {
        torsion,
        torsion_modulus: g,
        free,
    })
}

/// Result of the well-definedness scan.
#[derive(Debug, Clone, PartialEq)]
pub struct WellDefinedness {
    /// Whether the sufficient condition `sum w_tilde > 1` holds.
    pub sufficient: bool,
    /// Generator degrees found in `{-1, 0, 1}`.
    pub bad_degrees: Vec<(GeneratorKey, i64)>,
}

/// Checks the sufficient condition and scans for generators of degree
/// -1, 0, or 1. Degrees increase with `m` when the pairing is positive, so
/// the scan stops as soon as every degree of a multiplicity exceeds 1.
pub fn well_definedness(spec: &BundleSpec) -> Result<WellDefinedness> {
    let sufficient = spec.base.sum_w_tilde() > Rational64::from_integer(1);
    let mut bad = Vec::new();
    for (si, stratum) in spec.base.strata.iter().enumerate() {
        let positive = stratum.chern_pairing > Rational64::zero();
        // With a positive pairing the scan terminates on its own; otherwise
        // degrees do not grow and a fixed window is all we can inspect.
        let m_cap = if positive { u64::MAX } else { 64 };
        let mut m = 1;
        while m <= m_cap {
            let mut min_degree = i64::MAX;
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
                min_degree = min_degree.min(degree);
                if (-1..=1).contains(&degree) {
                    bad.push((key, degree));
                }
            }
            if positive && min_degree > 1 {
                break;
            }
            m += 1;
        }
    }
    Ok(WellDefinedness {
        sufficient,
        bad_degrees: bad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbifold_base::{custom, product_projective, weighted_projective};

    fn spec(base: OrbifoldBase) -> BundleSpec {
        BundleSpec::new(base, Convention::Unreduced).unwrap()
    }

    #[test]
    fn maslov_wang_ziller() {
        let s = spec(product_projective(&[(1, 1), (1, 2)]).unwrap());
        let mu = maslov_index(&s, s.base.top(), 1).unwrap();
        assert_eq!(mu, 12); // 4m(k+l) with m=1, k+l=3
    }

    #[test]
    fn maslov_cp1_multiplicity() {
        let s = spec(product_projective(&[(1, 1)]).unwrap());
        let mu = maslov_index(&s, s.base.top(), 3).unwrap();
        assert_eq!(mu, 12); // 2*3*2
    }

    #[test]
    fn maslov_integrality_gate() {
        let base = custom(
            2,
            vec![crate::orbifold_base::Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1],
                chern_pairing: Rational64::new(1, 3),
            }],
            vec![1],
            vec![Rational64::from_integer(2)],
        )
        .unwrap();
        let s = spec(base);
        assert!(matches!(
            maslov_index(&s, s.base.top(), 1),
            Err(Error::IntegralityViolation { .. })
        ));
    }

    #[test]
    fn degree_formulas() {
        // Wang-Ziller: 4m(k+l) - 2 + d.
        let s = spec(product_projective(&[(1, 2), (1, 3)]).unwrap());
        for m in 1..5 {
            for d in [0u64, 2, 4] {
                let key = GeneratorKey { stratum: 0, m, d };
                assert_eq!(
                    generator_degree(&s, key).unwrap(),
                    4 * m as i64 * 5 - 2 + d as i64
                );
            }
        }

        // CP^1 base, m=1, d=0: degree 2.
        let s = spec(product_projective(&[(1, 1)]).unwrap());
        let key = GeneratorKey { stratum: 0, m: 1, d: 0 };
        assert_eq!(generator_degree(&s, key).unwrap(), 2);

        // Reduced and unreduced differ by exactly n - 3.
        let base = product_projective(&[(1, 1), (1, 2)]).unwrap();
        let unred = BundleSpec::new(base.clone(), Convention::Unreduced).unwrap();
        let red = BundleSpec::new(base, Convention::Reduced).unwrap();
        let key = GeneratorKey { stratum: 0, m: 1, d: 0 };
        assert_eq!(
            generator_degree(&red, key).unwrap() - generator_degree(&unred, key).unwrap(),
            red.base.n as i64 - 3
        );
    }

    #[test]
    fn chern_class_wang_ziller() {
        // Unit-generator presentation w=(k,l), w_tilde=(2,2): invariant 2k-2l
        // up to sign.
        for (k, l, expect) in [(1i64, 2i64, 2i64), (2, 1, 2), (3, 2, 2), (2, 3, 2), (5, 2, 6)] {
            let s = spec(product_projective(&[(1, k), (1, l)]).unwrap());
            let c = first_chern_xi(&s).unwrap();
            assert_eq!(c.torsion, 0);
            assert_eq!(c.free, vec![expect], "(k,l)=({k},{l})");
        }
        // (1,1): trivial class.
        let s = spec(product_projective(&[(1, 1), (1, 1)]).unwrap());
        assert!(first_chern_xi(&s).unwrap().is_zero());
    }

    #[test]
    fn chern_class_weighted_projective_vanishes() {
        for (a, k) in [(vec![1u64, 1], 1i64), (vec![1, 2], 1), (vec![1, 2, 6, 5], 3)] {
            let s = spec(weighted_projective(&a, k).unwrap());
            assert!(first_chern_xi(&s).unwrap().is_zero());
        }
    }

    #[test]
    fn chern_class_proportional_dies() {
        // w_tilde = lambda * w dies in the quotient.
        let base = custom(
            3,
            vec![crate::orbifold_base::Stratum {
                name: "top".into(),
                dim: 4,
                gamma_order: 1,
                betti: vec![1, 2, 1],
                chern_pairing: Rational64::from_integer(5),
            }],
            vec![2, 3],
            vec![Rational64::from_integer(6), Rational64::from_integer(9)],
        )
        .unwrap();
        let s = spec(base);
        assert!(first_chern_xi(&s).unwrap().is_zero());
    }

    #[test]
    fn chern_class_rejects_non_integral() {
        let base = custom(
            2,
            vec![crate::orbifold_base::Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1],
                chern_pairing: Rational64::from_integer(2),
            }],
            vec![1],
            vec![Rational64::new(3, 2)],
        )
        .unwrap();
        let s = spec(base);
        assert!(matches!(
            first_chern_xi(&s),
            Err(Error::NonIntegralWeights(_))
        ));
    }

    #[test]
    fn well_definedness_examples() {
        let s = spec(product_projective(&[(1, 1), (1, 2)]).unwrap());
        let r = well_definedness(&s).unwrap();
        assert!(r.sufficient);
        assert!(r.bad_degrees.is_empty());

        let s = spec(product_projective(&[(1, 1)]).unwrap());
        let r = well_definedness(&s).unwrap();
        assert!(r.sufficient); // sum w_tilde = 2
        assert!(r.bad_degrees.is_empty()); // minimal degree 2

        // Boundary case: sum w_tilde = 1 is not sufficient.
        let base = custom(
            2,
            vec![crate::orbifold_base::Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1],
                chern_pairing: Rational64::from_integer(1),
            }],
            vec![1],
            vec![Rational64::from_integer(1)],
        )
        .unwrap();
        let s = spec(base);
        let r = well_definedness(&s).unwrap();
        assert!(!r.sufficient);
        // Degree of (m=1, d=0) is 2*1*1 - 2 + 0 = 0: flagged.
        assert!(!r.bad_degrees.is_empty());
    }

    #[test]
    fn parity_and_monotonicity() {
        for base in [
            product_projective(&[(1, 1), (1, 2)]).unwrap(),
            product_projective(&[(2, 3)]).unwrap(),
            weighted_projective(&[1, 2, 3], 2).unwrap(),
        ] {
            let s = spec(base);
            for (si, stratum) in s.base.strata.iter().enumerate() {
                let mut prev: Option<i64> = None;
                for m in 1..=6 {
                    let key = GeneratorKey { stratum: si, m, d: 0 };
                    let deg = generator_degree(&s, key).unwrap();
                    assert_eq!(deg.rem_euclid(2), 0, "odd degree on '{}'", stratum.name);
                    if let Some(p) = prev {
                        assert!(deg > p);
                    }
                    prev = Some(deg);
                }
            }
        }
    }
}
