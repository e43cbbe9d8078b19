//! Exact feasibility analysis for two qubits restricted to X-states.
//!
//! The initial state is the cooled product `τ_A(β_I) ⊗ τ_B(β_I)`, given by
//! its ground-state probabilities `a_I`, `b_I`; the targets are thermal
//! marginals with ground-state probabilities `a`, `b`. A final X-state
//!
//! ```text
//! ρ00   0    0   d2
//!  0   ρ01  d1    0
//!  0   d1*  ρ10   0
//! d2*   0    0   ρ11
//! ```
//!
//! with `ρ00 + ρ01 = a` and `ρ00 + ρ10 = b` has eigenvalues
//! `λ1,4 = ρ00 + c ± sqrt(c² + |d2|²)` with `c = (1 − a − b)/2` and
//! `λ2,3 = (a + b)/2 − ρ00 ± sqrt(((a − b)/2)² + |d1|²)`. It lies on the
//! unitary orbit of the initial state iff these match the initial diagonal
//! for one of the six orderings with `λ4 ≤ λ1` and `λ3 ≤ λ2`. For a fixed
//! ordering everything is linear or quadratic without square roots, so the
//! whole analysis runs in exact rational arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Certificate, FeasibilityStatus, FeasibilityVerdict};
use crate::error::{Error, Result};

pub type Rational = BigRational;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Ground-state probabilities of the cooled initial marginals (`a_I`, `b_I`)
/// and of the thermal targets (`a`, `b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XStateProblem {
    pub a_i: Rational,
    pub b_i: Rational,
    pub a: Rational,
    pub b: Rational,
}

/// A problem built from floating-point gaps and temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct Rationalized {
    pub problem: XStateProblem,
    /// Largest distance between a Boltzmann factor and its rational stand-in.
    pub max_error: f64,
    pub warnings: Vec<String>,
}

impl XStateProblem {
    pub fn new(a_i: Rational, b_i: Rational, a: Rational, b: Rational) -> Result<Self> {
        let half = rat(1, 2);
        let one = Rational::one();
        for (name, v) in [("a_I", &a_i), ("b_I", &b_i), ("a", &a), ("b", &b)] {
            if *v < half || *v > one {
                return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [1/2, 1]")));
            }
        }
        if a_i < a || b_i < b {
            return Err(Error::InvalidParameter(
                "cooled populations must dominate the targets (a_I >= a, b_I >= b)".into(),
            ));
        }
        Ok(Self { a_i, b_i, a, b })
    }

    /// Builds the problem from gaps and inverse temperatures, replacing each
    /// Boltzmann factor `exp(−βω)` by the simplest rational within `1e-12`.
    pub fn from_gaps(omega_a: f64, omega_b: f64, beta: f64, beta_i: f64) -> Result<Rationalized> {
        for (name, v) in [("omega_a", omega_a), ("omega_b", omega_b), ("beta", beta)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !(beta_i >= beta) {
            return Err(Error::InvalidTemperature(format!("beta_I = {beta_i} must be at least beta = {beta}")));
        }
        let mut max_error = 0.0f64;
        let mut ground = |exponent: f64| -> Rational {
            let x = (-exponent).exp();
            let q = rationalize(x, 1e-12);
            max_error = max_error.max((q.to_f64().unwrap_or(f64::NAN) - x).abs());
            Rational::one() / (Rational::one() + q)
        };
        let a_i = ground(beta_i * omega_a);
        let b_i = ground(beta_i * omega_b);
        let a = ground(beta * omega_a);
        let b = ground(beta * omega_b);
        let mut warnings = Vec::new();
        if max_error > 4.0 * f64::EPSILON {
            warnings.push(format!("Boltzmann factors rationalised with error up to {max_error:e}"));
        }
        Ok(Rationalized { problem: Self::new(a_i, b_i, a, b)?, max_error, warnings })
    }

    /// Diagonal of `τ_A(β_I) ⊗ τ_B(β_I)` in the order |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn initial_diagonal(&self) -> [Rational; 4] {
        let one = Rational::one();
        [
            &self.a_i * &self.b_i,
            &self.a_i * (&one - &self.b_i),
            (&one - &self.a_i) * &self.b_i,
            (&one - &self.a_i) * (&one - &self.b_i),
        ]
    }

    /// Range of `ρ00` for which all four diagonal entries of the X-state are
    /// non-negative; equivalently `λ3, λ4 ≥ 0` can hold.
    pub fn admissible_interval(&self) -> (Rational, Rational) {
        let lo = (&self.a + &self.b - Rational::one()).max(Rational::zero());
        let hi = self.a.clone().min(self.b.clone());
        (lo, hi)
    }
}

/// Simplest rational within `tol` of `x ≥ 0`, by continued fractions.
pub fn rationalize(x: f64, tol: f64) -> Rational {
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = BigInt::from(a as i64);
        let h_next = &ai * &h + &h_prev;
        let k_next = &ai * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let approx = Rational::new(h.clone(), k.clone());
        if (approx.to_f64().unwrap_or(f64::NAN) - x).abs() <= tol {
            return approx;
        }
        let frac = r - a;
        if frac <= f64::MIN_POSITIVE {
            return approx;
        }
        r = 1.0 / frac;
    }
    Rational::new(h, k)
}

/// Ascending order of the four eigenvalue labels, e.g. `[4, 1, 3, 2]` for
/// `λ4 ≤ λ1 ≤ λ3 ≤ λ2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EigenOrdering(pub [u8; 4]);

impl EigenOrdering {
    /// Whether the labels are a permutation of 1..=4 with `λ4` before `λ1`
    /// and `λ3` before `λ2`.
    pub fn is_admissible(&self) -> bool {
        let pos = |label: u8| self.0.iter().position(|&l| l == label);
        let mut seen = self.0;
        seen.sort_unstable();
        seen == [1, 2, 3, 4] && pos(4) < pos(1) && pos(3) < pos(2)
    }

    /// Assigns ascending `sorted` values to `λ1..λ4` (index 0 is `λ1`).
    fn assign<'a, T>(&self, sorted: &'a [T; 4]) -> [&'a T; 4] {
        let mut out = [&sorted[0]; 4];
        for (rank, &label) in self.0.iter().enumerate() {
            out[(label - 1) as usize] = &sorted[rank];
        }
        out
    }
}

impl fmt::Display for EigenOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| format!("l{l}")).collect();
        write!(f, "{}", parts.join("<"))
    }
}

/// The six orderings compatible with `λ4 ≤ λ1` and `λ3 ≤ λ2`: each is fixed
/// by the two slots taken by the pair (λ4, λ1).
pub fn admissible_orderings() -> Vec<EigenOrdering> {
    let mut out = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut labels = [0u8; 4];
            labels[i] = 4;
            labels[j] = 1;
            let mut rest = [3u8, 2].into_iter();
            for slot in labels.iter_mut().filter(|l| **l == 0) {
                *slot = rest.next().unwrap();
            }
            out.push(EigenOrdering(labels));
        }
    }
    out
}

/// Exact X-state certificate: the final state is fixed by `ρ00` and the
/// target marginals up to the (irrelevant) phases of `d1`, `d2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XStateCertificate {
    pub ordering: EigenOrdering,
    pub rho00: Rational,
    pub d1_sq: Rational,
    pub d2_sq: Rational,
}

/// One row of the case analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSolution {
    pub ordering: EigenOrdering,
    pub rho00: Rational,
    pub d1_sq: Rational,
    pub d2_sq: Rational,
    pub in_interval: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XStateAnalysis {
    pub problem: XStateProblem,
    pub diagonal: [Rational; 4],
    pub candidates: Vec<CandidateSolution>,
    pub interval: (Rational, Rational),
    pub verdict: FeasibilityVerdict,
}

impl XStateAnalysis {
    pub fn certificate(&self) -> Option<&XStateCertificate> {
        match &self.verdict.certificate {
            Some(Certificate::XState(c)) => Some(c),
            _ => None,
        }
    }
}

/// Solves the X-state matching problem exactly for all six orderings.
///
/// Among feasible orderings the certificate with the smallest
/// `|d1|² + |d2|²` is returned (first ordering on ties), so the identity is
/// reported when the initial state already has the target marginals.
pub fn xstate_feasibility(p: &XStateProblem) -> XStateAnalysis {
    let diagonal = p.initial_diagonal();
    let mut sorted = diagonal.clone();
    sorted.sort();
    let interval = p.admissible_interval();

    let two = rat(2, 1);
    let c = (Rational::one() - &p.a - &p.b) / &two;
    let half_diff = (&p.a - &p.b) / &two;

    let mut candidates = Vec::with_capacity(6);
    for ordering in admissible_orderings() {
        let [l1, l2, l3, l4] = ordering.assign(&sorted);
        // λ1 + λ4 = 2ρ00 + 2c eliminates d2; λ2 + λ3 = a + b − 2ρ00 then holds by normalisation
        let rho00 = (l1 + l4) / &two - &c;
        debug_assert_eq!(l2 + l3, &p.a + &p.b - &rho00 * &two);
        let half_gap_14 = (l1 - l4) / &two;
        let half_gap_23 = (l2 - l3) / &two;
        let d2_sq = &half_gap_14 * &half_gap_14 - &c * &c;
        let d1_sq = &half_gap_23 * &half_gap_23 - &half_diff * &half_diff;
        let in_interval = rho00 >= interval.0 && rho00 <= interval.1;
        let feasible = in_interval && !d1_sq.is_negative() && !d2_sq.is_negative();
        candidates.push(CandidateSolution { ordering, rho00, d1_sq, d2_sq, in_interval, feasible });
    }

    let best = candidates
        .iter()
        .filter(|c| c.feasible)
        .min_by(|x, y| (&x.d1_sq + &x.d2_sq).cmp(&(&y.d1_sq + &y.d2_sq)));
    let verdict = match best {
        Some(c) => FeasibilityVerdict {
            status: FeasibilityStatus::FeasibleCertified,
            certificate: Some(Certificate::XState(XStateCertificate {
                ordering: c.ordering,
                rho00: c.rho00.clone(),
                d1_sq: c.d1_sq.clone(),
                d2_sq: c.d2_sq.clone(),
            })),
            violated_constraint: None,
            residual: None,
        },
        None => {
            let values: Vec<String> = candidates.iter().map(|c| c.rho00.to_string()).collect();
            FeasibilityVerdict {
                status: FeasibilityStatus::InfeasibleWithinAnsatz,
                certificate: None,
                violated_constraint: Some(format!(
                    "no ordering yields rho00 in [{}, {}] with |d1|^2, |d2|^2 >= 0 (candidates: {})",
                    interval.0,
                    interval.1,
                    values.join(", ")
                )),
                residual: None,
            }
        }
    };
    XStateAnalysis { problem: p.clone(), diagonal, candidates, interval, verdict }
}

/// Re-checks a certificate without the closed-form eigenvalues: each 2×2
/// block must have the assigned eigenvalue pair as its trace and
/// determinant, all entries must be valid, and the marginals must match.
pub fn verify_certificate(p: &XStateProblem, cert: &XStateCertificate) -> bool {
    if !cert.ordering.is_admissible() || cert.d1_sq.is_negative() || cert.d2_sq.is_negative() {
        return false;
    }
    let mut sorted = p.initial_diagonal();
    sorted.sort();
    let [l1, l2, l3, l4] = cert.ordering.assign(&sorted);
    let rho00 = &cert.rho00;
    let rho01 = &p.a - rho00;
    let rho10 = &p.b - rho00;
    let rho11 = Rational::one() + rho00 - &p.a - &p.b;
    if [rho00, &rho01, &rho10, &rho11].iter().any(|v| v.is_negative()) {
        return false;
    }
    let outer_ok = l1 + l4 == rho00 + &rho11 && l1 * l4 == rho00 * &rho11 - &cert.d2_sq;
    let inner_ok = l2 + l3 == &rho01 + &rho10 && l2 * l3 == &rho01 * &rho10 - &cert.d1_sq;
    let marginals_ok = rho00 + &rho01 == p.a && rho00 + &rho10 == p.b;
    outer_ok && inner_ok && marginals_ok
}
