//! Excitation-subspace bases, Hamiltonian assembly and exact propagation.
//!
//! All evolution is dense and exact: U(t) = e^{−iHt} through a Hermitian
//! eigendecomposition. Dimensions stay desk-scale (≤ ~1000 for the two-
//! excitation sector), so exactness wins over sparse or series methods.
//! The zero-excitation (vacuum) amplitude is carried as a scalar outside
//! the matrix; the vacuum energy is 0 by convention, which makes the
//! vacuum-relative phase of any site amplitude a physical observable.

use crate::network::NetworkSpec;
use crate::{wrap_angle, Error, Result, C64};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Enumerated basis of the k-excitation sector. k = 1 lists singletons in
/// site order; k = 2 lists pairs {a, b}, a < b, in lexicographic order so
/// golden files stay stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationBasis {
    pub k: usize,
    pub states: Vec<Vec<usize>>,
}

impl ExcitationBasis {
    pub fn new(n_sites: usize, k: usize) -> Result<Self> {
        let states = match k {
            1 => (1..=n_sites).map(|n| vec![n]).collect(),
            2 => {
                let mut v = Vec::with_capacity(n_sites * (n_sites - 1) / 2);
                for a in 1..=n_sites {
                    for b in (a + 1)..=n_sites {
                        v.push(vec![a, b]);
                    }
                }
                v
            }
            _ => return Err(Error::InvalidExcitationNumber(k)),
        };
        Ok(ExcitationBasis { k, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Index of the pair {a, b} in the k = 2 basis.
    pub fn pair_index(&self, a: usize, b: usize) -> Option<usize> {
        let (a, b) = (a.min(b), a.max(b));
        self.states.iter().position(|s| s[0] == a && s[1] == b)
    }
}

/// Dense Hermitian operator over an excitation-subspace basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceOperator {
    mat: DMatrix<C64>,
}

impl SubspaceOperator {
    /// Wrap a matrix, enforcing Hermiticity to 1e−12 relative.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { op: mat.nrows(), state: mat.ncols() });
        }
        let scale = mat.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let dev = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if dev > 1e-12 * scale.max(1e-300) {
            return Err(Error::Numerical(format!("matrix not Hermitian: deviation {dev:.3e}")));
        }
        Ok(SubspaceOperator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// Eigendecomposition (ascending eigenvalues): H = V diag(e) V†.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let se = nalgebra::SymmetricEigen::new(self.mat.clone());
        let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
        let dim = self.dim();
        let mut vecs = DMatrix::zeros(dim, dim);
        for (col, &i) in idx.iter().enumerate() {
            vecs.set_column(col, &se.eigenvectors.column(i));
        }
        (vals, vecs)
    }

    /// U(t) = e^{−iHt}.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let (vals, vecs) = self.eigen();
        let phases = DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&e| C64::from_polar(1.0, -e * t)),
        );
        let mut scaled = vecs.clone();
        for (c, phase) in phases.iter().enumerate() {
            let col = scaled.column(c) * *phase;
            scaled.set_column(c, &col);
        }
        scaled * vecs.adjoint()
    }

    /// Largest eigenvalue and an orthonormal basis of its eigenspace
    /// (eigenvalues within `tol` of the top are grouped together).
    pub fn top_eigenspace(&self, tol: f64) -> (f64, DMatrix<C64>) {
        let (vals, vecs) = self.eigen();
        let top = *vals.last().unwrap();
        let first = vals.iter().position(|&e| e > top - tol).unwrap();
        let dim = self.dim();
        let cols = dim - first;
        let mut space = DMatrix::zeros(dim, cols);
        for c in 0..cols {
            space.set_column(c, &vecs.column(first + c));
        }
        (top, space)
    }

    /// Same operator with `diag` added to the diagonal.
    pub fn with_diagonal(&self, diag: &[f64]) -> Result<Self> {
        if diag.len() != self.dim() {
            return Err(Error::DimensionMismatch { op: self.dim(), state: diag.len() });
        }
        let mut mat = self.mat.clone();
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] += C64::new(d, 0.0);
        }
        SubspaceOperator::new(mat)
    }

    /// Uniform diagonal shift (used for field offsets).
    pub fn with_uniform_shift(&self, shift: f64) -> Self {
        let mut mat = self.mat.clone();
        for i in 0..mat.nrows() {
            mat[(i, i)] += C64::new(shift, 0.0);
        }
        SubspaceOperator { mat }
    }
}

/// State over an excitation basis plus the decoupled vacuum amplitude that
/// serves as the interferometric phase reference.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub vacuum: C64,
    pub amps: DVector<C64>,
}

impl StateVector {
    /// Unit excitation on basis state `index` (1-based), no vacuum component.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[index - 1] = C64::new(1.0, 0.0);
        StateVector { vacuum: C64::new(0.0, 0.0), amps }
    }

    /// (|vac⟩ + |index⟩)/√2, the standard interferometric input.
    pub fn vacuum_superposition(dim: usize, index: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = DVector::zeros(dim);
        amps[index - 1] = C64::new(s, 0.0);
        StateVector { vacuum: C64::new(s, 0.0), amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        (self.vacuum.norm_sqr() + self.amps.norm_squared()).sqrt()
    }

    /// Σ |amplitude|² over the given 1-based basis indices.
    pub fn arrival_probability(&self, sites: &[usize]) -> f64 {
        sites.iter().map(|&s| self.amps[s - 1].norm_sqr()).sum()
    }

    /// Magnitude and vacuum-relative phase (in (−π, π]) of one amplitude.
    pub fn site_amplitude_phase(&self, site: usize) -> Result<(f64, f64)> {
        if self.vacuum.norm() <= 1e-9 {
            return Err(Error::VanishingVacuum);
        }
        let a = self.amps[site - 1];
        Ok((a.norm(), wrap_angle(a.arg() - self.vacuum.arg())))
    }

    /// The amplitude at `site` divided by the vacuum amplitude: the complex
    /// fringe amplitude seen by the interference measurement.
    pub fn relative_amplitude(&self, site: usize) -> Result<C64> {
        if self.vacuum.norm() <= 1e-9 {
            return Err(Error::VanishingVacuum);
        }
        Ok(self.amps[site - 1] / self.vacuum)
    }

    pub fn to_json(&self, basis: &ExcitationBasis) -> Result<String> {
        let snap = StateSnapshot {
            k: basis.k,
            states: basis.states.clone(),
            vacuum: (self.vacuum.re, self.vacuum.im),
            amps: self.amps.iter().map(|z| (z.re, z.im)).collect(),
        };
        Ok(serde_json::to_string_pretty(&snap)?)
    }

    pub fn from_json(s: &str) -> Result<(Self, ExcitationBasis)> {
        let snap: StateSnapshot = serde_json::from_str(s)?;
        let basis = ExcitationBasis { k: snap.k, states: snap.states };
        let amps = DVector::from_iterator(
            snap.amps.len(),
            snap.amps.iter().map(|&(re, im)| C64::new(re, im)),
        );
        let sv = StateVector { vacuum: C64::new(snap.vacuum.0, snap.vacuum.1), amps };
        Ok((sv, basis))
    }
}

#[derive(Serialize, Deserialize)]
struct StateSnapshot {
    k: usize,
    states: Vec<Vec<usize>>,
    vacuum: (f64, f64),
    amps: Vec<(f64, f64)>,
}

/// Ordered (Hamiltonian, duration) segments.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub segments: Vec<(SubspaceOperator, f64)>,
}

impl Schedule {
    pub fn new(segments: Vec<(SubspaceOperator, f64)>) -> Result<Self> {
        if segments.iter().any(|&(_, t)| t < 0.0 || !t.is_finite()) {
            return Err(Error::Numerical("schedule durations must be >= 0".into()));
        }
        Ok(Schedule { segments })
    }
}

/// Assemble the k-excitation Hamiltonian of a network.
///
/// k = 1: H[i][j] couples sites i and j with the edge hop element, diagonal
/// from the on-site energies. k = 2: XY-model occupation basis over pairs;
/// ⟨{a,c}|H|{a,b}⟩ = hop(b→c) for c ∉ {a,b}, diagonal the sum of the two
/// on-site energies. No extra sign factors: the fermionic exchange phase
/// emerges from the dynamics, not the basis.
pub fn assemble(spec: &NetworkSpec, k: usize) -> Result<SubspaceOperator> {
    spec.validate()?;
    let basis = ExcitationBasis::new(spec.n_sites, k)?;
    let dim = basis.dim();
    let mut mat: DMatrix<C64> = DMatrix::zeros(dim, dim);
    match k {
        1 => {
            for &(i, j, a) in &spec.edges {
                // hop i -> j lands in row j
                mat[(j - 1, i - 1)] = a;
                mat[(i - 1, j - 1)] = a.conj();
            }
            for &(i, e) in &spec.onsite {
                mat[(i - 1, i - 1)] += C64::new(e, 0.0);
            }
        }
        2 => {
            if spec.n_sites < 2 {
                return Err(Error::InvalidSize("k = 2 needs at least 2 sites".into()));
            }
            // hop(from, to) with Hermitian completion of the stored edges
            let hop = |from: usize, to: usize| -> C64 {
                for &(i, j, a) in &spec.edges {
                    if i == from && j == to {
                        return a;
                    }
                    if j == from && i == to {
                        return a.conj();
                    }
                }
                C64::new(0.0, 0.0)
            };
            for (col, pq) in basis.states.iter().enumerate() {
                let (a, b) = (pq[0], pq[1]);
                mat[(col, col)] = C64::new(spec.onsite_energy(a) + spec.onsite_energy(b), 0.0);
                // one constituent hops: {a,b} -> {a,c} via b -> c, etc.
                for (moving, fixed) in [(b, a), (a, b)] {
                    for c in 1..=spec.n_sites {
                        if c == a || c == b {
                            continue;
                        }
                        let t = hop(moving, c);
                        if t.norm() > 0.0 {
                            let row = basis.pair_index(fixed, c).unwrap();
                            mat[(row, col)] += t;
                        }
                    }
                }
            }
        }
        _ => return Err(Error::InvalidExcitationNumber(k)),
    }
    SubspaceOperator::new(mat)
}

/// Apply e^{−iHt}; the vacuum amplitude is untouched (vacuum energy 0).
pub fn propagate(h: &SubspaceOperator, t: f64, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { op: h.dim(), state: psi.dim() });
    }
    let amps = h.propagator(t) * &psi.amps;
    Ok(StateVector { vacuum: psi.vacuum, amps })
}

/// Apply the segments of a schedule in order.
pub fn run_schedule(sched: &Schedule, psi0: &StateVector) -> Result<StateVector> {
    let mut psi = psi0.clone();
    for (h, t) in &sched.segments {
        psi = propagate(h, *t, &psi)?;
    }
    Ok(psi)
}

/// Total propagator of a parameterized Hamiltonian H(s), s ∈ [0, 1], over
/// total time T: the product of midpoint piecewise-constant exponentials
/// Π_m exp(−i H((m−½)/steps) T/steps). Second-order accurate in 1/steps.
pub fn evolve_time_dependent<F>(h: F, total_time: f64, steps: usize) -> Result<DMatrix<C64>>
where
    F: Fn(f64) -> SubspaceOperator,
{
    if steps == 0 || total_time <= 0.0 {
        return Err(Error::Numerical("need steps >= 1 and T > 0".into()));
    }
    let dt = total_time / steps as f64;
    let mut u: Option<DMatrix<C64>> = None;
    for m in 1..=steps {
        let s = (m as f64 - 0.5) / steps as f64;
        let step = h(s).propagator(dt);
        u = Some(match u {
            None => step,
            Some(acc) => step * acc,
        });
    }
    Ok(u.unwrap())
}

/// Σ over port sites of |amplitude|² (k = 1 sector).
pub fn arrival_probability(psi: &StateVector, sites: &[usize]) -> f64 {
    psi.arrival_probability(sites)
}
