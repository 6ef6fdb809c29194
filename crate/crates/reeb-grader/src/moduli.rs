//! Virtual dimensions of punctured-sphere moduli problems, regularity
//! inequalities for integrable almost complex structures, and the
//! no-rigid-cylinders certificate behind the vanishing differential.

use num_rational::Rational64;
use rayon::prelude::*;

use crate::boothby_wang::{maslov_index, BundleSpec};
use crate::{Error, Result};

/// One punctured-sphere curve-counting problem: a single positive orbit-space
/// asymptotic, a list of negative ones, and the relative Chern term of the
/// chosen capping class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuliProblem {
    /// Positive asymptotics as (stratum index, multiplicity); exactly one for
    /// cylindrical problems.
    pub positive: Vec<(usize, u64)>,
    pub negative: Vec<(usize, u64)>,
    /// `2 c_1(xi, Sigma)` for the capping class; 0 for the builders'
    /// canonical choices.
    pub rel_chern: i64,
}

impl ModuliProblem {
    pub fn cylinder(pos: (usize, u64), neg: (usize, u64)) -> Self {
        ModuliProblem {
            positive: vec![pos],
            negative: vec![neg],
            rel_chern: 0,
        }
    }
}

/// Virtual dimension of the genus-0 moduli problem:
/// `(n-3)(1-s) + mu+ + dim+/2 - sum(mu_i - dim_i/2) + rel_chern`,
/// `s` the number of negative punctures. With one negative puncture over the
/// full base this reduces to `mu+ - mu- + 2n - 2 + rel_chern`.
pub fn virtual_dimension(spec: &BundleSpec, p: &ModuliProblem) -> Result<i64> {
    if p.positive.len() != 1 {
        return Err(Error::Input(
            "exactly one positive puncture is supported".into(),
        ));
    }
    let stratum = |idx: usize| {
        spec.base
            .strata
            .get(idx)
            .ok_or_else(|| Error::Input(format!("no stratum with index {idx}")))
    };
    let n = spec.base.n as i64;
    let s = p.negative.len() as i64;
    let (pi, pm) = p.positive[0];
    let sp = stratum(pi)?;
    let mut dim = (n - 3) * (1 - s) + maslov_index(spec, sp, pm)? + (sp.dim / 2) as i64;
    for &(ni, nm) in &p.negative {
        let sn = stratum(ni)?;
        dim -= maslov_index(spec, sn, nm)? - (sn.dim / 2) as i64;
    }
    Ok(dim + p.rel_chern)
}

/// Dimension after quotienting by the translation action on the
/// symplectization; curves are counted when this is 0.
pub fn quotient_dimension(spec: &BundleSpec, p: &ModuliProblem) -> Result<i64> {
    Ok(virtual_dimension(spec, p)? - 1)
}

/// Input to the regularity criterion: the line-bundle splitting of the pulled
/// back contact distribution, puncture counts, and branch-divisor terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityInput {
    /// `c_1(L_j)` for the splitting of `u* xi` into line bundles.
    pub line_chern: Vec<i64>,
    /// Positive punctures.
    pub s: u64,
    /// Negative punctures.
    pub t: u64,
    /// `(m_alpha, c_1(O(D_alpha)))` per branch divisor.
    pub branch_terms: Vec<(u64, Rational64)>,
}

/// Regularity of the linearized Cauchy-Riemann operator for integrable `J`.
///
/// Manifold mode: every `c_1(L_j) >= -2 + s - t`. Orbifold mode: every
/// `c_1(L_j) >= sum (1 - 1/m_alpha) c_1(O(D_alpha)) - 2 - s - t`, evaluated
/// in exact rational arithmetic. Absent branch terms the two thresholds
/// differ by `2s`; both are kept verbatim.
pub fn regularity_check(r: &RegularityInput, orbifold: bool) -> Result<bool> {
    if r.s + r.t == 0 {
        return Err(Error::Input("at least one puncture is required".into()));
    }
    let s = r.s as i64;
    let t = r.t as i64;
    let threshold = if orbifold {
        let mut branch = Rational64::from_integer(0);
        for &(m_alpha, div_chern) in &r.branch_terms {
            if m_alpha < 2 {
                return Err(Error::Input(format!(
                    "branch multiplicity must be >= 2, got {m_alpha}"
                )));
            }
            branch += (Rational64::from_integer(1)
                - Rational64::new(1, m_alpha as i64))
                * div_chern;
        }
        branch + Rational64::from_integer(-2 - s - t)
    } else {
        Rational64::from_integer(-2 + s - t)
    };
    Ok(r
        .line_chern
        .iter()
        .all(|&c| Rational64::from_integer(c) >= threshold))
}

/// Outcome of the rigid-cylinder scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderCertificate {
    pub holds: bool,
    /// Problems with a 0-dimensional quotient, if any.
    pub witnesses: Vec<ModuliProblem>,
    pub m_max: u64,
}

pub const DEFAULT_M_MAX: u64 = 25;

/// Scans every ordered stratum pair and multiplicity pair `m- < m+ <= m_max`
/// with `rel_chern = 0`, and certifies that no nontrivial cylinder problem
/// has a 0-dimensional quotient.
pub fn no_rigid_cylinders(spec: &BundleSpec, m_max: u64) -> Result<CylinderCertificate> {
    let k = spec.base.strata.len();
    let problems: Vec<ModuliProblem> = (0..k)
        .flat_map(|sp| (0..k).map(move |sn| (sp, sn)))
        .flat_map(|(sp, sn)| {
            (1..=m_max).flat_map(move |mn| {
                (mn + 1..=m_max).map(move |mp| ModuliProblem::cylinder((sp, mp), (sn, mn)))
            })
        })
        .collect();
    let witnesses: Vec<ModuliProblem> = problems
        .par_iter()
        .map(|p| quotient_dimension(spec, p).map(|q| (p, q)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&(_, q)| q == 0)
        .map(|(p, _)| p.clone())
        .collect();
    Ok(CylinderCertificate {
        holds: witnesses.is_empty(),
        witnesses,
        m_max,
    })
}
