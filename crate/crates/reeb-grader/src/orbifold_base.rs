//! The symplectic (orbifold) base of a Boothby-Wang fibration.
//!
//! Only the data the grading consumes is modeled: strata with their
//! uniformizing group orders, even-degree Betti numbers, and a Chern pairing
//! rational per stratum, plus the curvature and anticanonical weights of the
//! bundle. Cohomology rings are never constructed symbolically.

use num_integer::Integer;
use num_rational::Rational64;

use crate::{Error, Result};

/// One orbit space of the Reeb flow: an even-dimensional Kaehler suborbifold
/// of the base.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum {
    pub name: String,
    /// Real dimension (even).
    pub dim: u64,
    /// Order of the local uniformizing group.
    pub gamma_order: u64,
    /// Ranks of H_d over C for even d = 0, 2, ..., dim.
    pub betti: Vec<u64>,
    /// Pairing of the restricted first Chern class of the tangent bundle
    /// against the diagonal sphere class, before dividing by `gamma_order`.
    pub chern_pairing: Rational64,
}

impl Stratum {
    pub fn total_betti(&self) -> u64 {
        self.betti.iter().sum()
    }

    fn check(&self, top: bool, max_dim: u64, errors: &mut Vec<String>) {
        if self.dim % 2 != 0 {
            errors.push(format!("stratum '{}': dimension {} is odd", self.name, self.dim));
        }
        if self.dim > max_dim {
            errors.push(format!(
                "stratum '{}': dimension {} exceeds base dimension {}",
                self.name, self.dim, max_dim
            ));
        }
        if self.gamma_order == 0 {
            errors.push(format!("stratum '{}': gamma_order must be positive", self.name));
        }
        if top && self.gamma_order != 1 {
            errors.push(format!(
                "stratum '{}': top (generic) stratum must have gamma_order 1, got {}",
                self.name, self.gamma_order
            ));
        }
        let expected = (self.dim / 2 + 1) as usize;
        if self.betti.len() != expected {
            errors.push(format!(
                "stratum '{}': betti list has length {}, expected {} for dimension {}",
                self.name,
                self.betti.len(),
                expected,
                self.dim
            ));
        } else if self.betti[0] == 0 {
            errors.push(format!(
                "stratum '{}': betti[0] must be >= 1 for a nonempty connected stratum",
                self.name
            ));
        }
    }
}

/// Presentation of the quotient lattice used for the first Chern class of the
/// contact distribution: coordinates of the curvature and anticanonical
/// classes in a fixed unit-generator basis of `H^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernPresentation {
    pub w: Vec<i64>,
    pub w_tilde: Vec<i64>,
}

/// The full base `Z`: strata, generator count, curvature weights `w`
/// (`d alpha = sum w_j pi* c_j`) and anticanonical weights `w_tilde`
/// (`c_1(TZ) = sum w_tilde_i c_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbifoldBase {
    /// Contact manifold dimension is `2n - 1`; base real dimension `2n - 2`.
    pub n: u64,
    /// First entry is the top (generic) stratum of dimension `2n - 2`.
    pub strata: Vec<Stratum>,
    pub w: Vec<i64>,
    pub w_tilde: Vec<Rational64>,
    /// Unit-generator presentation for the quotient-lattice Chern class.
    /// Builders own this; defaults to integral `(w, w_tilde)` when absent.
    pub c1_presentation: Option<ChernPresentation>,
}

impl OrbifoldBase {
    pub fn top(&self) -> &Stratum {
        &self.strata[0]
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.n < 2 {
            errors.push("n must be >= 2".into());
        }
        if self.strata.is_empty() {
            errors.push("strata list must be nonempty".into());
        } else {
            let max_dim = 2 * self.n.saturating_sub(1);
            if self.strata[0].dim != max_dim {
                errors.push(format!(
                    "top stratum must have dimension {}, got {}",
                    max_dim, self.strata[0].dim
                ));
            }
            for (i, s) in self.strata.iter().enumerate() {
                s.check(i == 0, max_dim, &mut errors);
            }
            let mut names: Vec<&str> = self.strata.iter().map(|s| s.name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            if names.len() != self.strata.len() {
                errors.push("stratum names must be distinct".into());
            }
        }
        if self.w.is_empty() || self.w.len() != self.w_tilde.len() {
            errors.push(format!(
                "weight lists must be nonempty and of equal length (w: {}, w_tilde: {})",
                self.w.len(),
                self.w_tilde.len()
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    /// Sum of the anticanonical weights; the well-definedness gate requires
    /// this to exceed 1.
    pub fn sum_w_tilde(&self) -> Rational64 {
        self.w_tilde.iter().sum()
    }
}

/// Builder for products of (weighted multiples of) projective spaces:
/// a single-stratum manifold base. `factors` lists `(complex_dim, weight)`;
/// the curvature form is `sum weight_i * c_i` in unit generators and the
/// anticanonical weights come out as `weight_i * (complex_dim_i + 1)`.
pub fn product_projective(factors: &[(u64, i64)]) -> Result<OrbifoldBase> {
    if factors.is_empty() {
        return Err(Error::Input("product_projective requires at least one factor".into()));
    }
    if factors.iter().any(|&(d, w)| d == 0 || w <= 0) {
        return Err(Error::Input(
            "factors require positive complex dimension and positive weight".into(),
        ));
    }
    let total_cplx: u64 = factors.iter().map(|&(d, _)| d).sum();
    let dim = 2 * total_cplx;

    // Even Betti numbers of the product: coefficients of
    // prod_i (1 + t^2 + ... + t^(2 dim_i)).
    let mut betti: Vec<u64> = vec![1];
    for &(d, _) in factors {
        let mut next = vec![0u64; betti.len() + d as usize];
        for (i, &b) in betti.iter().enumerate() {
            for j in 0..=d as usize {
                next[i + j] += b;
            }
        }
        betti = next;
    }

    let w: Vec<i64> = factors.iter().map(|&(_, wt)| wt).collect();
    let w_tilde: Vec<Rational64> = factors
        .iter()
        .map(|&(d, wt)| Rational64::from_integer(wt * (d as i64 + 1)))
        .collect();
    let chern_pairing: Rational64 = w_tilde.iter().sum();

    let base = OrbifoldBase {
        n: total_cplx + 1,
        strata: vec![Stratum {
            name: "top".into(),
            dim,
            gamma_order: 1,
            betti,
            chern_pairing,
        }],
        w,
        w_tilde,
        c1_presentation: Some(ChernPresentation {
            w: factors.iter().map(|&(_, wt)| wt).collect(),
            w_tilde: factors.iter().map(|&(d, _)| d as i64 + 1).collect(),
        }),
    };
    base.validate()?;
    Ok(base)
}

/// Builder for weighted projective spaces `CP^{n-1}(a_0, ..., a_{n-1})` with
/// curvature `k` times the standard class. Singular strata are indexed by the
/// maximal weight-subsets sharing a gcd greater than 1.
pub fn weighted_projective(a: &[u64], k: i64) -> Result<OrbifoldBase> {
    if a.is_empty() || k < 1 {
        return Err(Error::Input(
            "weighted_projective requires nonempty weights and k >= 1".into(),
        ));
    }
    if a.iter().any(|&x| x == 0) {
        return Err(Error::Input("weights must be positive".into()));
    }
    let overall = a.iter().fold(0u64, |g, &x| g.gcd(&x));
    if a.len() > 1 && overall > 1 {
        return Err(Error::Input(format!(
            "weights share a common factor {overall}; the action is not effective, rescale first"
        )));
    }
    let n = a.len() as u64;

    // The Satake integration over the diagonal sphere class sums the weight
    // contributions of all strata and divides by the uniformizing orders, so
    // every orbit space sees the same orbifold Chern number: the Maslov index
    // of a multiplicity-m orbit is 2 m k sum(a) regardless of its stratum.
    // Per stratum we record the pairing before the division by gamma.
    let anticanonical: i64 = a.iter().map(|&x| x as i64).sum();
    let pairing = |gamma: u64| Rational64::from_integer(k * anticanonical * gamma as i64);

    let mut strata = Vec::new();
    strata.push(Stratum {
        name: "top".into(),
        dim: 2 * (n - 1),
        gamma_order: 1,
        betti: vec![1; n as usize],
        chern_pairing: pairing(1),
    });

    // For each divisor g > 1 of some weight, the maximal subset it divides;
    // keep each maximal subset once, labeled by the gcd it realizes.
    let mut divisors: Vec<u64> = a
        .iter()
        .flat_map(|&x| (2..=x).filter(move |d| x % d == 0))
        .collect();
    divisors.sort_unstable();
    divisors.dedup();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for g in divisors {
        let subset: Vec<usize> = (0..a.len()).filter(|&i| a[i] % g == 0).collect();
        if subset.is_empty() || subset.len() == a.len() || seen.contains(&subset) {
            continue;
        }
        let actual_gcd = subset.iter().fold(0u64, |acc, &i| acc.gcd(&a[i]));
        if actual_gcd != g {
            continue; // labeled by a proper divisor of its true gcd; skip
        }
        seen.push(subset.clone());
        strata.push(Stratum {
            name: format!("gcd{g}"),
            dim: 2 * (subset.len() as u64 - 1),
            gamma_order: g,
            betti: vec![1; subset.len()],
            chern_pairing: pairing(g),
        });
    }

    let w_tilde_sum: i64 = a.iter().map(|&x| x as i64).sum();
    let base = OrbifoldBase {
        n,
        strata,
        w: vec![k],
        w_tilde: vec![Rational64::from_integer(w_tilde_sum)],
        // The contact distribution over a weighted projective space has
        // vanishing first Chern invariant; present the quotient trivially.
        c1_presentation: Some(ChernPresentation {
            w: vec![1],
            w_tilde: vec![w_tilde_sum],
        }),
    };
    base.validate()?;
    Ok(base)
}

/// Directly supplied base data (e.g. homogeneous bases `G/P` with known Betti
/// numbers). Validates every type invariant and reports all failures.
pub fn custom(
    n: u64,
    strata: Vec<Stratum>,
    w: Vec<i64>,
    w_tilde: Vec<Rational64>,
) -> Result<OrbifoldBase> {
    let base = OrbifoldBase {
        n,
        strata,
        w,
        w_tilde,
        c1_presentation: None,
    };
    base.validate()?;
    Ok(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wang_ziller_base() {
        // CP^1 x CP^1 with weights (k, l) = (1, 2).
        let b = product_projective(&[(1, 1), (1, 2)]).unwrap();
        assert_eq!(b.n, 3);
        assert_eq!(b.strata.len(), 1);
        let top = b.top();
        assert_eq!(top.dim, 4);
        assert_eq!(top.betti, vec![1, 2, 1]);
        assert_eq!(top.chern_pairing, Rational64::from_integer(6));
        assert_eq!(b.sum_w_tilde(), Rational64::from_integer(6));
    }

    #[test]
    fn cp1_base() {
        let b = product_projective(&[(1, 1)]).unwrap();
        assert_eq!(b.top().betti, vec![1, 1]);
        assert_eq!(b.top().chern_pairing, Rational64::from_integer(2));
        assert_eq!(b.sum_w_tilde(), Rational64::from_integer(2));
    }

    #[test]
    fn cp2_base() {
        let b = product_projective(&[(2, 1)]).unwrap();
        assert_eq!(b.top().betti, vec![1, 1, 1]);
        assert_eq!(b.top().chern_pairing, Rational64::from_integer(3));
        assert_eq!(b.sum_w_tilde(), Rational64::from_integer(3));
    }

    #[test]
    fn weighted_smooth_cases() {
        let b = weighted_projective(&[1, 1], 1).unwrap();
        assert_eq!(b.strata.len(), 1);
        assert_eq!(b.top().gamma_order, 1);

        let b = weighted_projective(&[1, 1, 1], 1).unwrap();
        assert_eq!(b.strata.len(), 1);
        assert_eq!(b.top().betti, vec![1, 1, 1]);
    }

    #[test]
    fn weighted_with_isotropy_point() {
        let b = weighted_projective(&[1, 2], 1).unwrap();
        assert_eq!(b.strata.len(), 2);
        assert_eq!(b.strata[0].dim, 2);
        assert_eq!(b.strata[0].gamma_order, 1);
        assert_eq!(b.strata[1].dim, 0);
        assert_eq!(b.strata[1].gamma_order, 2);
    }

    #[test]
    fn weighted_merges_equal_gcd_subsets() {
        // (2, 4, 3): divisor 2 divides both 2 and 4, giving one stratum of
        // real dimension 2 with gamma 2; divisors 3 and 4 each pick out a
        // single point. The nested subset {4} under divisor 2 is absorbed.
        let b = weighted_projective(&[2, 4, 3], 1).unwrap();
        let names: Vec<&str> = b.strata.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["top", "gcd2", "gcd3", "gcd4"]);
        assert_eq!(b.strata[1].dim, 2);
        assert_eq!(b.strata[1].gamma_order, 2);
        assert_eq!(b.strata[2].dim, 0);
        assert_eq!(b.strata[2].gamma_order, 3);
        assert_eq!(b.strata[3].dim, 0);
        assert_eq!(b.strata[3].gamma_order, 4);
    }

    #[test]
    fn weighted_rejects_common_factor() {
        assert!(weighted_projective(&[2, 4], 1).is_err());
    }

    #[test]
    fn custom_validation_errors() {
        // Valid Wang-Ziller (1,1) data.
        let ok = custom(
            3,
            vec![Stratum {
                name: "top".into(),
                dim: 4,
                gamma_order: 1,
                betti: vec![1, 2, 1],
                chern_pairing: Rational64::from_integer(4),
            }],
            vec![1, 1],
            vec![Rational64::from_integer(2), Rational64::from_integer(2)],
        );
        assert!(ok.is_ok());

        // Betti length mismatch.
        let bad = custom(
            2,
            vec![Stratum {
                name: "top".into(),
                dim: 2,
                gamma_order: 1,
                betti: vec![1, 1, 0],
                chern_pairing: Rational64::from_integer(2),
            }],
            vec![1],
            vec![Rational64::from_integer(2)],
        );
        assert!(matches!(bad, Err(Error::Validation(_))));

        // Top stratum with nontrivial uniformizing group.
        let bad = custom(
            3,
            vec![Stratum {
                name: "top".into(),
                dim: 4,
                gamma_order: 2,
                betti: vec![1, 2, 1],
                chern_pairing: Rational64::from_integer(4),
            }],
            vec![1, 1],
            vec![Rational64::from_integer(2), Rational64::from_integer(2)],
        );
        assert!(matches!(bad, Err(Error::Validation(_))));
    }

    #[test]
    fn product_matches_weighted_in_smooth_case() {
        let p = product_projective(&[(2, 1)]).unwrap();
        let w = weighted_projective(&[1, 1, 1], 1).unwrap();
        assert_eq!(p.strata.len(), w.strata.len());
        let (pt, wt) = (p.top(), w.top());
        assert_eq!(pt.dim, wt.dim);
        assert_eq!(pt.gamma_order, wt.gamma_order);
        assert_eq!(pt.betti, wt.betti);
        assert_eq!(pt.chern_pairing, wt.chern_pairing);
    }

    #[test]
    fn weighted_betti_totals() {
        let b = weighted_projective(&[1, 2, 6, 5], 2).unwrap();
        for s in &b.strata {
            assert_eq!(s.total_betti(), s.dim / 2 + 1);
        }
    }
}
