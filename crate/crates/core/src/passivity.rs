//! Work extraction by cyclic unitaries: ergotropy, passive states and the
//! thermality test that decides complete passivity.

use crate::error::Result;
use crate::linalg::{self, CMat};
use crate::states::{self, DensityMatrix, EnergyBasis, Hamiltonian, InverseTemperature, DEGENERACY_TOL};

/// Default tolerance of [`is_passive`].
pub const PASSIVITY_TOL: f64 = 1e-10;
/// Default tolerance on log-population residuals in [`is_completely_passive`].
pub const THERMAL_FIT_TOL: f64 = 1e-8;
/// Populations at or below this are treated as vanishing when fitting.
const VANISHING_POPULATION: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct ErgotropyResult {
    pub value: f64,
    pub passive_state: DensityMatrix,
    /// `optimal_permutation[j]` is the energy index (in the Hamiltonian's
    /// eigenbasis order) that receives the `j`-th largest eigenvalue of the
    /// input state.
    pub optimal_permutation: Vec<usize>,
}

/// `Tr(ρH) − Tr(UρU†H)`; negative values mean work was stored.
pub fn extractable_work_under_unitary<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H, u: &CMat) -> Result<f64> {
    let before = states::internal_energy(rho, h)?;
    let after = states::internal_energy(&rho.evolve(u)?, h)?;
    Ok(before - after)
}

/// Eigenvalues sorted descending, ties kept in ascending-solver order.
fn descending_spectrum(rho: &DensityMatrix) -> Vec<f64> {
    let mut r = rho.eigenvalues();
    r.reverse();
    r
}

/// Maximal work extractable by any unitary, with the passive state that
/// attains it.
pub fn ergotropy<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H) -> Result<ErgotropyResult> {
    let energy = states::internal_energy(rho, h)?;
    let basis = h.energy_basis();
    let order = basis.ascending_order();
    let spectrum = descending_spectrum(rho);

    let mut pops = vec![0.0; basis.dim()];
    let mut passive_energy = 0.0;
    for (j, &level) in order.iter().enumerate() {
        pops[level] = spectrum[j];
        passive_energy += spectrum[j] * basis.energies[level];
    }
    let passive_state = DensityMatrix::trusted(basis.to_working_frame(&linalg::diag(&pops)));
    Ok(ErgotropyResult { value: (energy - passive_energy).max(0.0), passive_state, optimal_permutation: order })
}

/// Groups indices of the energy basis into degenerate blocks, ordered by
/// ascending energy.
fn degenerate_blocks(basis: &EnergyBasis) -> Vec<Vec<usize>> {
    let order = basis.ascending_order();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match blocks.last_mut() {
            Some(block) if basis.energies[idx] - basis.energies[block[0]] <= DEGENERACY_TOL => block.push(idx),
            _ => blocks.push(vec![idx]),
        }
    }
    blocks
}

fn block_matrix(m: &CMat, block: &[usize]) -> CMat {
    CMat::from_fn(block.len(), block.len(), |i, j| m[(block[i], block[j])])
}

/// Passive iff block-diagonal over degenerate energy blocks with no
/// population inversion between blocks. Coherence inside a degenerate block
/// is allowed.
pub fn is_passive<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H, tol: f64) -> Result<bool> {
    states::internal_energy(rho, h)?;
    let basis = h.energy_basis();
    let m = basis.to_energy_frame(rho.matrix());
    let blocks = degenerate_blocks(&basis);

    for (bi, a) in blocks.iter().enumerate() {
        for b in &blocks[bi + 1..] {
            for &i in a {
                for &j in b {
                    if m[(i, j)].norm() > tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    // every eigenvalue of a lower block must dominate every eigenvalue of a higher one
    let mut floor_so_far = f64::INFINITY;
    for block in &blocks {
        let spec = linalg::eigvalsh(&block_matrix(&m, block));
        let (lo, hi) = (spec[0], spec[spec.len() - 1]);
        if hi > floor_so_far + tol {
            return Ok(false);
        }
        floor_so_far = floor_so_far.min(lo);
    }
    Ok(true)
}

/// Outcome of the thermality fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalFit {
    pub thermal: bool,
    /// Fitted inverse temperature; `None` when the state is not thermal.
    pub beta: Option<InverseTemperature>,
    /// Largest log-population residual of the fit (0 for exact patterns,
    /// infinite when the state is not even passive).
    pub residual: f64,
}

impl ThermalFit {
    fn rejected(residual: f64) -> Self {
        Self { thermal: false, beta: None, residual }
    }
}

/// Completely passive iff thermal: the energy-basis populations must be
/// `exp(−βE_n)/Z` for some `β ≥ 0`, decided by a least-squares fit of
/// `ln p` against `E`.
pub fn is_completely_passive<H: Hamiltonian + ?Sized>(rho: &DensityMatrix, h: &H, tol: f64) -> Result<ThermalFit> {
    if !is_passive(rho, h, tol)? {
        return Ok(ThermalFit::rejected(f64::INFINITY));
    }
    let basis = h.energy_basis();
    let m = basis.to_energy_frame(rho.matrix());
    let blocks = degenerate_blocks(&basis);

    // one population and one energy per distinct level
    let mut levels: Vec<(f64, f64)> = Vec::with_capacity(blocks.len());
    let mut block_spread = 0.0f64;
    for block in &blocks {
        let sub = block_matrix(&m, block);
        let mean = linalg::real_trace(&sub) / block.len() as f64;
        let deviation = (&sub - CMat::identity(block.len(), block.len()).scale(mean))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        block_spread = block_spread.max(deviation);
        levels.push((basis.energies[block[0]], mean));
    }
    if block_spread > tol {
        return Ok(ThermalFit::rejected(block_spread));
    }

    let vanishing: Vec<bool> = levels.iter().map(|&(_, p)| p <= VANISHING_POPULATION).collect();
    if vanishing.iter().any(|&v| v) {
        // only the zero-temperature pattern can have empty levels
        let ground_only = !vanishing[0] && vanishing[1..].iter().all(|&v| v);
        return Ok(if ground_only {
            ThermalFit { thermal: true, beta: Some(InverseTemperature::Infinite), residual: 0.0 }
        } else {
            ThermalFit::rejected(f64::INFINITY)
        });
    }
    if levels.len() == 1 {
        return Ok(ThermalFit { thermal: true, beta: Some(InverseTemperature::Finite(0.0)), residual: 0.0 });
    }

    let n = levels.len() as f64;
    let xs: Vec<f64> = levels.iter().map(|&(e, _)| e).collect();
    let ys: Vec<f64> = levels.iter().map(|&(_, p)| p.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (y_mean + slope * (x - x_mean))).abs())
        .fold(0.0, f64::max);
    let beta = -slope;
    if residual <= tol && beta >= -tol {
        Ok(ThermalFit { thermal: true, beta: Some(InverseTemperature::Finite(beta.max(0.0))), residual })
    } else {
        Ok(ThermalFit::rejected(residual))
    }
}
