//! Hamiltonians, density matrices and the entropic functionals built on them.
//!
//! Energies are in units with ħ = k_B = 1 and all entropies are in nats.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, Complex64};

/// Hermiticity tolerance for density matrices and interaction terms.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues in `[-EIGEN_FLOOR, 0)` are clipped to zero; below is an error.
pub const EIGEN_FLOOR: f64 = 1e-10;
/// Eigenvalues below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Energies closer than this to the ground level belong to the ground space.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Energies of a Hamiltonian together with the basis that diagonalises it.
///
/// `basis == None` means the Hamiltonian is diagonal in the working basis and
/// `energies[k]` belongs to basis state `k`. Otherwise column `k` of `basis`
/// is the eigenvector with energy `energies[k]`.
#[derive(Debug, Clone)]
pub struct EnergyBasis {
    pub energies: Vec<f64>,
    pub basis: Option<CMat>,
}

impl EnergyBasis {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Expresses a working-basis operator in the energy eigenbasis.
    pub fn to_energy_frame(&self, m: &CMat) -> CMat {
        match &self.basis {
            None => m.clone(),
            Some(v) => v.adjoint() * m * v,
        }
    }

    /// Inverse of [`EnergyBasis::to_energy_frame`].
    pub fn to_working_frame(&self, m: &CMat) -> CMat {
        match &self.basis {
            None => m.clone(),
            Some(v) => v * m * v.adjoint(),
        }
    }

    /// Index order of the energies, ascending, ties broken by index.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| self.energies[i].total_cmp(&self.energies[j]).then(i.cmp(&j)));
        order
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Anything with a finite spectrum that can price and thermalise states.
pub trait Hamiltonian {
    fn dim(&self) -> usize;
    fn energy_basis(&self) -> EnergyBasis;
    fn matrix(&self) -> CMat;

    /// `Re Tr(H ρ)`.
    fn expectation(&self, rho: &CMat) -> f64 {
        linalg::trace_of_product(&self.matrix(), rho)
    }
}

/// Spectrum of a single subsystem, diagonal in its working basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHamiltonian {
    levels: Vec<f64>,
}

impl LocalHamiltonian {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidHamiltonian("at least one level is required".into()));
        }
        if let Some(bad) = levels.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidHamiltonian(format!("non-finite level {bad}")));
        }
        if let Some(k) = levels.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidHamiltonian(format!(
                "levels must be non-decreasing (level {} = {} follows {})",
                k + 1,
                levels[k + 1],
                levels[k]
            )));
        }
        Ok(Self { levels })
    }

    /// Two-level system with ground energy 0 and the given gap.
    pub fn qubit(gap: f64) -> Result<Self> {
        Self::new(vec![0.0, gap])
    }

    /// `d` levels spaced by `gap`, starting at 0.
    pub fn equally_spaced(d: usize, gap: f64) -> Result<Self> {
        Self::new((0..d).map(|k| k as f64 * gap).collect())
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Smallest strictly positive gap above the ground level, if any.
    pub fn min_gap(&self) -> Option<f64> {
        let g = self.levels[0];
        self.levels.iter().map(|e| e - g).filter(|&d| d > DEGENERACY_TOL).fold(None, |acc, d| {
            Some(acc.map_or(d, |a: f64| a.min(d)))
        })
    }
}

impl Hamiltonian for LocalHamiltonian {
    fn dim(&self) -> usize {
        self.levels.len()
    }

    fn energy_basis(&self) -> EnergyBasis {
        EnergyBasis { energies: self.levels.clone(), basis: None }
    }

    fn matrix(&self) -> CMat {
        linalg::diag(&self.levels)
    }

    fn expectation(&self, rho: &CMat) -> f64 {
        self.levels.iter().enumerate().map(|(k, e)| e * rho[(k, k)].re).sum()
    }
}

/// `H_A ⊗ 1 + 1 ⊗ H_B`, optionally plus a Hermitian interaction term.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHamiltonian {
    left: LocalHamiltonian,
    right: LocalHamiltonian,
    interaction: Option<CMat>,
}

impl JointHamiltonian {
    pub fn noninteracting(left: LocalHamiltonian, right: LocalHamiltonian) -> Self {
        Self { left, right, interaction: None }
    }

    pub fn with_interaction(left: LocalHamiltonian, right: LocalHamiltonian, interaction: CMat) -> Result<Self> {
        let d = left.dim() * right.dim();
        if interaction.nrows() != d || interaction.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: interaction.nrows() });
        }
        let defect = linalg::hermiticity_defect(&interaction);
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidHamiltonian(format!("interaction is not Hermitian (defect {defect:e})")));
        }
        Ok(Self { left, right, interaction: Some(interaction) })
    }

    pub fn left(&self) -> &LocalHamiltonian {
        &self.left
    }

    pub fn right(&self) -> &LocalHamiltonian {
        &self.right
    }

    pub fn interaction(&self) -> Option<&CMat> {
        self.interaction.as_ref()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.left.dim(), self.right.dim())
    }

    /// Product-basis energies `E_m^A + E_n^B` at index `m·d_B + n`.
    pub fn product_energies(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.left.dim() * self.right.dim());
        for ea in self.left.levels() {
            for eb in self.right.levels() {
                out.push(ea + eb);
            }
        }
        out
    }
}

impl Hamiltonian for JointHamiltonian {
    fn dim(&self) -> usize {
        self.left.dim() * self.right.dim()
    }

    fn energy_basis(&self) -> EnergyBasis {
        match &self.interaction {
            None => EnergyBasis { energies: self.product_energies(), basis: None },
            Some(_) => {
                let e = linalg::eigh(&self.matrix());
                EnergyBasis { energies: e.values, basis: Some(e.vectors) }
            }
        }
    }

    fn matrix(&self) -> CMat {
        let free = linalg::diag(&self.product_energies());
        match &self.interaction {
            None => free,
            Some(v) => free + v,
        }
    }

    fn expectation(&self, rho: &CMat) -> f64 {
        let free: f64 = self.product_energies().iter().enumerate().map(|(k, e)| e * rho[(k, k)].re).sum();
        match &self.interaction {
            None => free,
            Some(v) => free + linalg::trace_of_product(v, rho),
        }
    }
}

/// Inverse temperature `β ≥ 0`, with zero temperature as a distinct value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

impl InverseTemperature {
    /// Accepts any `β ≥ 0`; `f64::INFINITY` maps to [`InverseTemperature::Infinite`].
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidTemperature(format!("beta must be non-negative, got {beta}")));
        }
        if beta.is_infinite() {
            Ok(Self::Infinite)
        } else {
            Ok(Self::Finite(beta))
        }
    }

    pub fn from_temperature(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidTemperature(format!("temperature must be non-negative, got {t}")));
        }
        if t == 0.0 {
            Ok(Self::Infinite)
        } else {
            Self::new(1.0 / t)
        }
    }

    /// The numeric value, `f64::INFINITY` at zero temperature.
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(b) => b,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(b) => Some(b),
            Self::Infinite => None,
        }
    }
}

impl From<InverseTemperature> for f64 {
    fn from(b: InverseTemperature) -> f64 {
        b.value()
    }
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity. Eigenvalues in
    /// `[-1e-10, 0)` are clipped to zero without renormalising.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidState(format!("matrix must be square and non-empty, got {}x{}", mat.nrows(), mat.ncols())));
        }
        let defect = linalg::hermiticity_defect(&mat);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let mat = linalg::hermitian_part(&mat);
        let tr = linalg::real_trace(&mat);
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let e = linalg::eigh(&mat);
        let min = e.values[0];
        if min < -EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        if min < 0.0 {
            let clipped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
            let rebuilt = &e.vectors * linalg::diag(&clipped) * e.vectors.adjoint();
            return Ok(Self { mat: linalg::hermitian_part(&rebuilt) });
        }
        Ok(Self { mat })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(populations))
    }

    /// `|ψ⟩⟨ψ|` for the normalised `psi`.
    pub fn from_pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero or non-finite norm".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self::trusted(&v * v.adjoint()))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::trusted(CMat::identity(d, d).unscale(d as f64))
    }

    /// Wraps a matrix known to be a state up to rounding (e.g. a unitary
    /// conjugate of a validated state); only Hermiticity is enforced.
    pub(crate) fn trusted(mat: CMat) -> Self {
        Self { mat: linalg::hermitian_part(&mat) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Diagonal entries in the working basis.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.mat[(k, k)].re).collect()
    }

    /// Eigenvalues, ascending, with rounding negatives clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat).into_iter().map(|v| v.max(0.0)).collect()
    }

    /// `U ρ U†`; `u` is validated to be unitary within 1e-10.
    pub fn evolve(&self, u: &CMat) -> Result<Self> {
        check_unitary(u, self.dim())?;
        Ok(self.evolve_unchecked(u))
    }

    pub(crate) fn evolve_unchecked(&self, u: &CMat) -> Self {
        Self::trusted(linalg::conjugate(u, &self.mat))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::trusted(linalg::kron(&self.mat, &other.mat))
    }
}

/// Unitarity tolerance on `max |U†U − 1|`.
pub const UNITARY_TOL: f64 = 1e-10;

pub(crate) fn check_unitary(u: &CMat, dim: usize) -> Result<()> {
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: u.nrows() });
    }
    let deviation = linalg::unitarity_defect(u);
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A state on `C^{d_A} ⊗ C^{d_B}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    state: DensityMatrix,
    d_a: usize,
    d_b: usize,
}

impl BipartiteState {
    pub fn new(state: DensityMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || d_a * d_b != state.dim() {
            return Err(Error::DimensionMismatch { expected: d_a * d_b, got: state.dim() });
        }
        Ok(Self { state, d_a, d_b })
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self { state: a.tensor(b), d_a: a.dim(), d_b: b.dim() }
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn marginal(&self, keep: Side) -> DensityMatrix {
        partial_trace(self, keep)
    }

    pub fn evolve(&self, u: &CMat) -> Result<Self> {
        Ok(Self { state: self.state.evolve(u)?, d_a: self.d_a, d_b: self.d_b })
    }

    pub(crate) fn evolve_unchecked(&self, u: &CMat) -> Self {
        Self { state: self.state.evolve_unchecked(u), d_a: self.d_a, d_b: self.d_b }
    }
}

/// Gibbs state `exp(−βH)/Z`. At `β = ∞` the result is maximally mixed over
/// the ground space.
pub fn thermal_state<H: Hamiltonian + ?Sized>(h: &H, beta: InverseTemperature) -> DensityMatrix {
    let basis = h.energy_basis();
    let pops = thermal_populations(&basis.energies, beta);
    let diag = linalg::diag(&pops);
    DensityMatrix::trusted(basis.to_working_frame(&diag))
}

/// Boltzmann weights for `energies` normalised to one, evaluated from
/// differences to the ground energy so nothing overflows.
pub fn thermal_populations(energies: &[f64], beta: InverseTemperature) -> Vec<f64> {
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = match beta {
        InverseTemperature::Infinite => energies
            .iter()
            .map(|&e| if e - ground <= DEGENERACY_TOL { 1.0 } else { 0.0 })
            .collect(),
        InverseTemperature::Finite(b) => energies.iter().map(|&e| (-b * (e - ground)).exp()).collect(),
    };
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// `Z = Σ_n exp(−βE_n)`.
pub fn partition_function<H: Hamiltonian + ?Sized>(h: &H, beta: InverseTemperature) -> Result<f64> {
    let b = beta
        .finite()
        .ok_or_else(|| Error::InvalidTemperature("partition function is undefined at infinite beta".into()))?;
    let energies = h.energy_basis().energies;
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: f64 = energies.iter().map(|&e| (-b * (e - ground)).exp()).sum();
    Ok((-b * ground).exp() * shifted)
}

/// Reduced state on the kept side.
pub fn partial_trace(s: &BipartiteState, keep: Side) -> DensityMatrix {
    let dims = [s.d_a, s.d_b];
    let kept = match keep {
        Side::Left => 0,
        Side::Right => 1,
    };
    DensityMatrix::trusted(linalg::partial_trace(s.state.matrix(), &dims, &[kept]))
}

/// `−Σ λ ln λ` over the spectrum, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Shannon entropy (nats) of a probability vector; non-positive entries
/// contribute nothing.
pub fn entropy_of_spectrum(p: &[f64]) -> f64 {
    let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    s.max(0.0)
}

/// A relative entropy, which is infinite off support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn value(self) -> f64 {
        match self {
            Divergence::Finite(v) => v,
            Divergence::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Divergence::Finite(_))
    }
}

/// `S(σ‖ρ) = −S(σ) − Tr(σ ln ρ)`.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<Divergence> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() });
    }
    let e = linalg::eigh(rho.matrix());
    let mut cross = 0.0;
    for (k, &r) in e.values.iter().enumerate() {
        let v = e.vectors.column(k);
        let weight = (v.adjoint() * sigma.matrix() * v)[(0, 0)].re;
        if r < SUPPORT_TOL {
            if weight >= SUPPORT_TOL {
                return Ok(Divergence::Infinite);
            }
            continue;
        }
        cross += weight * r.ln();
    }
    let value = -von_neumann_entropy(sigma) - cross;
    Ok(Divergence::Finite(value.max(0.0)))
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(s: &BipartiteState) -> f64 {
    let sa = von_neumann_entropy(&s.marginal(Side::Left));
    let sb = von_neumann_entropy(&s.marginal(Side::Right));
    let sab = von_neumann_entropy(s.state());
    (sa + sb - sab).max(0.0)
}

/// Conditional entropy together with the entanglement flag its sign gives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalEntropy {
    pub value: f64,
    pub entangled: bool,
}

/// `S(ρ_A) − I(A:B)`; negative values certify entanglement.
pub fn conditional_entropy(s: &BipartiteState) -> ConditionalEntropy {
    let sa = von_neumann_entropy(&s.marginal(Side::Left));
    let sb = von_neumann_entropy(&s.marginal(Side::Right));
    let sab = von_neumann_entropy(s.state());
    let value = sa - (sa + sb - sab);
    ConditionalEntropy { value, entangled: value < -EIGEN_FLOOR }
}

/// `E = Tr(Hρ)`.
pub fn internal_energy<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    Ok(h.expectation(rho.matrix()))
}

/// `F = E − T S` at temperature `T > 0`.
pub fn free_energy<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidTemperature(format!("free energy needs a positive finite temperature, got {temperature}")));
    }
    Ok(internal_energy(rho, h)? - temperature * von_neumann_entropy(rho))
}

/// Pure state `Z^{-1/2} Σ_n exp(−γ ε_n / 2) |n, n⟩` whose marginals are
/// thermal at `β_A = μ_A γ` and `β_B = μ_B γ`. Requires
/// `μ_A E_n^A = μ_B E_n^B` for every level.
pub fn pure_bithermal_state(
    h_a: &LocalHamiltonian,
    h_b: &LocalHamiltonian,
    gamma: f64,
    mu_a: f64,
    mu_b: f64,
) -> Result<BipartiteState> {
    for (name, v) in [("gamma", gamma), ("mu_a", mu_a), ("mu_b", mu_b)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let d = h_a.dim();
    if h_b.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: h_b.dim() });
    }
    let mut scaled = Vec::with_capacity(d);
    for (n, (ea, eb)) in h_a.levels().iter().zip(h_b.levels()).enumerate() {
        let (left, right) = (mu_a * ea, mu_b * eb);
        if (left - right).abs() > 1e-10 {
            return Err(Error::ScaledSpectrumMismatch { index: n, left, right });
        }
        scaled.push(0.5 * (left + right));
    }
    let ground = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let mut psi = CVec::zeros(d * d);
    for (n, eps) in scaled.iter().enumerate() {
        psi[n * d + n] = Complex64::new((-0.5 * gamma * (eps - ground)).exp(), 0.0);
    }
    BipartiteState::new(DensityMatrix::from_pure(&psi)?, d, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_ln2() -> LocalHamiltonian {
        LocalHamiltonian::qubit(std::f64::consts::LN_2).unwrap()
    }

    fn bell() -> BipartiteState {
        let mut psi = CVec::zeros(4);
        psi[0] = Complex64::new(1.0, 0.0);
        psi[3] = Complex64::new(1.0, 0.0);
        BipartiteState::new(DensityMatrix::from_pure(&psi).unwrap(), 2, 2).unwrap()
    }

    #[test]
    fn local_hamiltonian_rejects_bad_levels() {
        assert!(LocalHamiltonian::new(vec![]).is_err());
        assert!(LocalHamiltonian::new(vec![1.0, 0.0]).is_err());
        assert!(LocalHamiltonian::new(vec![0.0, f64::NAN]).is_err());
        assert!(LocalHamiltonian::new(vec![0.0, 0.0, 2.0]).is_ok());
    }

    #[test]
    fn inverse_temperature_rejects_negative() {
        assert!(InverseTemperature::new(-1.0).is_err());
        assert!(InverseTemperature::new(f64::NAN).is_err());
        assert_eq!(InverseTemperature::new(f64::INFINITY).unwrap(), InverseTemperature::Infinite);
        assert_eq!(InverseTemperature::from_temperature(0.0).unwrap(), InverseTemperature::Infinite);
    }

    #[test]
    fn qubit_thermal_state_at_ln2() {
        let tau = thermal_state(&qubit_ln2(), InverseTemperature::Finite(1.0));
        let p = tau.populations();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        let z = partition_function(&qubit_ln2(), InverseTemperature::Finite(1.0)).unwrap();
        assert!((z - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_temperature_is_ground_projector() {
        let tau = thermal_state(&LocalHamiltonian::qubit(1.0).unwrap(), InverseTemperature::Infinite);
        assert_eq!(tau.populations(), vec![1.0, 0.0]);
        let degenerate = LocalHamiltonian::new(vec![0.0, 0.0, 1.0]).unwrap();
        let tau = thermal_state(&degenerate, InverseTemperature::Infinite);
        assert_eq!(tau.populations(), vec![0.5, 0.5, 0.0]);
        assert!(partition_function(&degenerate, InverseTemperature::Infinite).is_err());
    }

    #[test]
    fn huge_beta_does_not_overflow() {
        let h = LocalHamiltonian::new(vec![-1e3, 0.0, 5e2]).unwrap();
        let tau = thermal_state(&h, InverseTemperature::Finite(1e3));
        let p = tau.populations();
        assert_eq!(p[0], 1.0);
        assert!(p.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn partition_function_at_zero_beta_is_dimension() {
        let h = LocalHamiltonian::new(vec![0.0, 0.3, 1.7, 2.0]).unwrap();
        assert_eq!(partition_function(&h, InverseTemperature::Finite(0.0)).unwrap(), 4.0);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::from_populations(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::from_populations(&[1.1, -0.1]).is_err());
        // rounding-level negative eigenvalue is clipped
        let rho = DensityMatrix::from_populations(&[1.0 + 5e-13, -5e-13]).unwrap();
        assert!(rho.eigenvalues().iter().all(|&v| v >= 0.0));
        let mut m = linalg::diag(&[0.5, 0.5]);
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn bell_state_entropies() {
        let s = bell();
        let a = s.marginal(Side::Left);
        assert!((a.populations()[0] - 0.5).abs() < 1e-15);
        assert!(von_neumann_entropy(s.state()).abs() < 1e-12);
        assert!((mutual_information(&s) - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let ce = conditional_entropy(&s);
        assert!((ce.value + std::f64::consts::LN_2).abs() < 1e-12);
        assert!(ce.entangled);
    }

    #[test]
    fn classical_correlation_has_ln2_information() {
        let rho = DensityMatrix::from_populations(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        let s = BipartiteState::new(rho, 2, 2).unwrap();
        assert!((mutual_information(&s) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(!conditional_entropy(&s).entangled);
    }

    #[test]
    fn entropy_of_two_thirds_one_third() {
        let rho = DensityMatrix::from_populations(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let expected = 3f64.ln() - 2.0 / 3.0 * 2f64.ln();
        assert!((von_neumann_entropy(&rho) - expected).abs() < 1e-15);
        assert!((expected - 0.636514).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_support_and_zero() {
        let zero = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        let one = DensityMatrix::from_populations(&[0.0, 1.0]).unwrap();
        assert_eq!(relative_entropy(&one, &zero).unwrap(), Divergence::Infinite);
        assert_eq!(relative_entropy(&zero, &zero).unwrap(), Divergence::Finite(0.0));
        let mixed = DensityMatrix::maximally_mixed(2);
        // a pure state relative to a full-rank one is finite
        assert!((relative_entropy(&zero, &mixed).unwrap().value() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(relative_entropy(&zero, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn free_energy_examples() {
        let h = LocalHamiltonian::qubit(2.0).unwrap();
        let ground = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        assert_eq!(internal_energy(&ground, &h).unwrap(), 0.0);
        assert_eq!(free_energy(&ground, &h, 0.7).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(2);
        let f = free_energy(&mixed, &h, 0.7).unwrap();
        assert!((f - (1.0 - 0.7 * std::f64::consts::LN_2)).abs() < 1e-14);
        assert!(free_energy(&mixed, &h, 0.0).is_err());
        assert!(free_energy(&mixed, &h, -1.0).is_err());
    }

    #[test]
    fn bithermal_qubit_example() {
        let h_a = LocalHamiltonian::qubit(std::f64::consts::LN_2).unwrap();
        let h_b = LocalHamiltonian::qubit(std::f64::consts::LN_2 / 2.0).unwrap();
        let s = pure_bithermal_state(&h_a, &h_b, 1.0, 1.0, 2.0).unwrap();
        let p = s.state().populations();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((p[3] - 1.0 / 3.0).abs() < 1e-14);
        let tau_a = thermal_state(&h_a, InverseTemperature::Finite(1.0));
        assert!((s.marginal(Side::Left).matrix() - tau_a.matrix()).norm() < 1e-14);
        let tau_b = thermal_state(&h_b, InverseTemperature::Finite(2.0));
        assert!((s.marginal(Side::Right).matrix() - tau_b.matrix()).norm() < 1e-14);
        let sa = von_neumann_entropy(&s.marginal(Side::Left));
        assert!((mutual_information(&s) - 2.0 * sa).abs() < 1e-12);
    }

    #[test]
    fn bithermal_ground_limit_and_mismatch() {
        let h = LocalHamiltonian::equally_spaced(3, 1.0).unwrap();
        let s = pure_bithermal_state(&h, &h, 1e3, 1.0, 1.0).unwrap();
        assert!(mutual_information(&s) < 1e-12);
        assert!((s.state().populations()[0] - 1.0).abs() < 1e-12);

        let other = LocalHamiltonian::new(vec![0.0, 1.0, 2.5]).unwrap();
        match pure_bithermal_state(&h, &other, 1.0, 1.0, 1.0) {
            Err(Error::ScaledSpectrumMismatch { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn interacting_thermal_state_commutes_with_hamiltonian() {
        let q = LocalHamiltonian::qubit(1.0).unwrap();
        let mut v = CMat::zeros(4, 4);
        v[(1, 2)] = Complex64::new(0.3, 0.0);
        v[(2, 1)] = Complex64::new(0.3, 0.0);
        let h = JointHamiltonian::with_interaction(q.clone(), q, v).unwrap();
        let tau = thermal_state(&h, InverseTemperature::Finite(0.8));
        let hm = h.matrix();
        let comm = &hm * tau.matrix() - tau.matrix() * &hm;
        assert!(comm.norm() < 1e-13);
        assert!((linalg::real_trace(tau.matrix()) - 1.0).abs() < 1e-13);
    }
}
