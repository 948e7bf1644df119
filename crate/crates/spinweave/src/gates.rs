//! Logical gates realized by network topology: dual-rail gate extraction,
//! the AB phase gate, the Hadamard and arbitrary-rotation networks,
//! the chain-mediated CNOT, two-excitation exchange phases, and the
//! non-abelian holonomic Hadamard on linked chains.
//!
//! Logical basis convention: |0_L⟩ is the excitation on rail 0, |1_L⟩ on
//! rail 1, with rails named by the `DualRailPorts` sites.

use crate::dynamics::{
    assemble, evolve_time_dependent, propagate, ExcitationBasis, StateVector, SubspaceOperator,
};
use crate::network::{
    attach_onsite_block, binomial_top_state, build_hadamard_unit, build_linked_chains,
    build_pst_chain, gradient_diagonal, pst_hop, DualRailPorts, NetworkSpec,
};
use crate::{binomial, Error, Result, C64};
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Logical 2×2 action of a dual-rail network at a fixed time, plus the
/// worst-case probability of finding the excitation on the output ports.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalUnitary {
    pub matrix: Matrix2<C64>,
    pub arrival_probability: f64,
}

impl LogicalUnitary {
    /// Fidelity to a target up to a global phase: |tr(T†M)| / 2.
    pub fn fidelity_to(&self, target: &Matrix2<C64>) -> f64 {
        (target.adjoint() * self.matrix).trace().norm() / 2.0
    }

    pub fn report_json(&self, fidelity_to_target: f64, leakage: f64) -> Result<String> {
        let m = &self.matrix;
        let report = GateReport {
            matrix: [
                (m[(0, 0)].re, m[(0, 0)].im),
                (m[(0, 1)].re, m[(0, 1)].im),
                (m[(1, 0)].re, m[(1, 0)].im),
                (m[(1, 1)].re, m[(1, 1)].im),
            ],
            arrival: self.arrival_probability,
            fidelity_to_target,
            leakage,
        };
        Ok(serde_json::to_string_pretty(&report)?)
    }
}

/// Serialized gate report: row-major matrix entries as (re, im).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateReport {
    pub matrix: [(f64, f64); 4],
    pub arrival: f64,
    pub fidelity_to_target: f64,
    pub leakage: f64,
}

pub fn hadamard_matrix() -> Matrix2<C64> {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(s, s, s, -s)
}

/// diag(1, e^{ix}) — the dual-rail phase gate.
pub fn phase_diag(x: f64) -> Matrix2<C64> {
    Matrix2::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, x),
    )
}

/// Global-phase-aligned distance ‖A·e^{iα*} − B‖_F / 2 with α* chosen to
/// maximize Re tr(B†A e^{iα}); 0 iff A = B up to a global phase.
pub fn gate_distance(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    let t = (b.adjoint() * a).trace();
    let alpha = if t.norm() > 0.0 { -t.arg() } else { 0.0 };
    let aligned = a * C64::from_polar(1.0, alpha);
    (aligned - b).norm() / 2.0
}

/// Extract the logical action of a dual-rail network: columns are the
/// output-port amplitudes reached from |0_L⟩ and |1_L⟩ after time `t`.
pub fn logical_unitary(spec: &NetworkSpec, ports: &DualRailPorts, t: f64) -> Result<LogicalUnitary> {
    ports.validate(spec.n_sites)?;
    let h = assemble(spec, 1)?;
    let u = h.propagator(t);
    let col = |input: usize| {
        (
            u[(ports.rail0_out - 1, input - 1)],
            u[(ports.rail1_out - 1, input - 1)],
        )
    };
    let (a00, a10) = col(ports.rail0_in);
    let (a01, a11) = col(ports.rail1_in);
    let matrix = Matrix2::new(a00, a01, a10, a11);
    let arrival = (a00.norm_sqr() + a10.norm_sqr()).min(a01.norm_sqr() + a11.norm_sqr());
    Ok(LogicalUnitary { matrix, arrival_probability: arrival })
}

/// Perfect-transfer ring between ports A and B whose directed hops toward B
/// each carry e^{iδ} with δ = φ/(N−1): both branches are phased consistently
/// with the A→B transport direction (the H = cos δ Jx + sin δ Jy picture), so
/// the enclosed flux is zero, transfer stays perfect, and the arriving
/// amplitude gains exactly e^{iφ}.
pub fn build_transport_ring(n_sites: usize, lambda: f64, phi: f64) -> Result<NetworkSpec> {
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("transport ring needs N >= 3, got {n_sites}")));
    }
    let inner = n_sites - 2;
    let a = 1;
    let b = inner + 2;
    let upper = |k: usize| 1 + k;
    let lower = |k: usize| inner + 2 + k;
    let delta = phi / (n_sites as f64 - 1.0);
    let ph = C64::from_polar(1.0, delta);
    let sqrt2 = 2f64.sqrt();
    let mut spec = NetworkSpec::new(2 + 2 * inner);
    // both branches oriented A -> B
    spec.add_edge(a, upper(1), C64::new(pst_hop(n_sites, 1, lambda) / sqrt2, 0.0) * ph);
    spec.add_edge(a, lower(1), C64::new(pst_hop(n_sites, 1, lambda) / sqrt2, 0.0) * ph);
    for k in 1..inner {
        spec.add_edge(upper(k), upper(k + 1), C64::new(pst_hop(n_sites, k + 1, lambda), 0.0) * ph);
        spec.add_edge(lower(k), lower(k + 1), C64::new(pst_hop(n_sites, k + 1, lambda), 0.0) * ph);
    }
    spec.add_edge(upper(inner), b, C64::new(pst_hop(n_sites, n_sites - 1, lambda) / sqrt2, 0.0) * ph);
    spec.add_edge(lower(inner), b, C64::new(pst_hop(n_sites, n_sites - 1, lambda) / sqrt2, 0.0) * ph);
    spec.set_port("in", vec![a]);
    spec.set_port("out", vec![b]);
    Ok(spec)
}

/// AB phase gate: rail 0 is a plain N-site perfect chain, rail 1 the
/// transport-phased ring; at t = π/λ the logical action is
/// diag(1, e^{iφ}) up to the common transfer phase.
pub fn ab_phase_gate(n_sites: usize, lambda: f64, phi: f64) -> Result<(LogicalUnitary, NetworkSpec)> {
    let mut spec = build_pst_chain(n_sites, lambda)?;
    let ring = build_transport_ring(n_sites, lambda, phi)?;
    let offset = spec.disjoint_union(&ring, "ring_");
    let ports = DualRailPorts {
        rail0_in: 1,
        rail1_in: offset + 1,
        rail0_out: n_sites,
        rail1_out: offset + n_sites, // ring port B = offset + (N - 2) + 2
    };
    spec.set_port("rail0_in", vec![ports.rail0_in]);
    spec.set_port("rail1_in", vec![ports.rail1_in]);
    spec.set_port("rail0_out", vec![ports.rail0_out]);
    spec.set_port("rail1_out", vec![ports.rail1_out]);
    let gate = logical_unitary(&spec, &ports, PI / lambda)?;
    Ok((gate, spec))
}

/// Hadamard gate from the 4-site unit run on its own. In the |±⟩ basis the
/// unit at scale s decouples into two 2-site chains of strength s√2, which
/// transfer fully at t = π/(2√2·s); the unit is built at scale λ/2 and run
/// for exactly that time.
pub fn hadamard_gate(lambda: f64) -> Result<(LogicalUnitary, NetworkSpec)> {
    let scale = 0.5 * lambda;
    let spec = build_hadamard_unit(scale)?;
    let ports = DualRailPorts { rail0_in: 1, rail1_in: 2, rail0_out: 4, rail1_out: 3 };
    let t = PI / (2.0 * 2f64.sqrt() * scale);
    let gate = logical_unitary(&spec, &ports, t)?;
    Ok((gate, spec))
}

/// Basis index (1-based) of |n, b⟩ in the chain ⊗ target basis: the b = 0
/// block first, then b = 1.
pub fn cnot_index(n_sites: usize, n: usize, b: usize) -> usize {
    n + b * n_sites
}

/// Chain-mediated CNOT Hamiltonian over {|n, b⟩}: hop elements 2K_i =
/// (λ/2)√(i(2N−i)) within each target block and −2η = −λN/2 between |N,0⟩
/// and |N,1⟩ (the σ_z^N ⊗ σ_x − σ_x coupling vanishes off n = N).
pub fn cnot_operator(n_sites: usize, lambda: f64) -> Result<SubspaceOperator> {
    if n_sites == 0 {
        return Err(Error::InvalidSize("CNOT needs N >= 1".into()));
    }
    let dim = 2 * n_sites;
    let mut mat: DMatrix<C64> = DMatrix::zeros(dim, dim);
    for b in 0..2 {
        for i in 1..n_sites {
            let hop = 0.5 * lambda * ((i * (2 * n_sites - i)) as f64).sqrt();
            let r = cnot_index(n_sites, i, b) - 1;
            let c = cnot_index(n_sites, i + 1, b) - 1;
            mat[(r, c)] = C64::new(hop, 0.0);
            mat[(c, r)] = C64::new(hop, 0.0);
        }
    }
    let eta2 = -0.5 * lambda * n_sites as f64;
    let r = cnot_index(n_sites, n_sites, 0) - 1;
    let c = cnot_index(n_sites, n_sites, 1) - 1;
    mat[(r, c)] = C64::new(eta2, 0.0);
    mat[(c, r)] = C64::new(eta2, 0.0);
    SubspaceOperator::new(mat)
}

/// Closed-form target-flip probability (λ = 1):
/// p(t) = Σ_{n=N+1}^{2N} C(2N−1, n−1) sin^{2n−2}(t/2) cos^{4N−2n}(t/2).
pub fn cnot_flip_probability_closed(n_sites: usize, t: f64) -> f64 {
    let (s, c) = ((t / 2.0).sin(), (t / 2.0).cos());
    (n_sites + 1..=2 * n_sites)
        .map(|n| {
            binomial(2 * n_sites - 1, n - 1)
                * s.powi(2 * n as i32 - 2)
                * c.powi(4 * n_sites as i32 - 2 * n as i32)
        })
        .sum()
}

/// Evolve |1, 0⟩ under the CNOT Hamiltonian (λ = 1) for time t; returns the
/// probability that the target has flipped and the final state.
pub fn simulate_cnot(n_sites: usize, t: f64) -> Result<(f64, StateVector)> {
    let h = cnot_operator(n_sites, 1.0)?;
    let psi0 = StateVector::basis_state(2 * n_sites, cnot_index(n_sites, 1, 0));
    let out = propagate(&h, t, &psi0)?;
    let p_flip: f64 = (1..=n_sites)
        .map(|n| out.amps[cnot_index(n_sites, n, 1) - 1].norm_sqr())
        .sum();
    Ok((p_flip, out))
}

///// Sharpness of the flip: the measure of t ∈ [0, 2π] where the closed-form
/// flip probability sits in the transition band (0.1, 0.9). The half-maximum
/// window is exactly π for every N (p ≥ ½ iff sin²(λt/2) ≥ ½, a binomial
/// median identity), so the 10–90% rise width is what shrinks as the flip
/// sharpens with growing N.
pub fn cnot_flip_width(n_sites: usize, samples: usize) -> f64 {
    let dt = 2.0 * PI / samples as f64;
    (0..samples)
        .filter(|&k| {
            let p = cnot_flip_probability_closed(n_sites, (k as f64 + 0.5) * dt);
            p > 0.1 && p < 0.9
        })
        .count() as f64
        * dt
}

/// Exchange phases of every two-excitation pair sent through the chain for
/// t₀ = π/λ: each entry is ((i, j), ratio) where ratio is the {i,j} →
/// {N+1−j, N+1−i} amplitude divided by the squared single-excitation
/// transfer phase ((−i)^{N−1})². Hard-core statistics make every ratio −1.
pub fn two_excitation_exchange(n_sites: usize, lambda: f64) -> Result<Vec<((usize, usize), C64)>> {
    let spec = build_pst_chain(n_sites, lambda)?;
    let h2 = assemble(&spec, 2)?;
    let basis = ExcitationBasis::new(n_sites, 2)?;
    let u = h2.propagator(PI / lambda);
    let single = C64::new(0.0, -1.0).powu(n_sites as u32 - 1);
    let denom = single * single;
    let mut out = Vec::with_capacity(basis.dim());
    for i in 1..=n_sites {
        for j in (i + 1)..=n_sites {
            let from = basis.pair_index(i, j).unwrap();
            let to = basis.pair_index(n_sites + 1 - j, n_sites + 1 - i).unwrap();
            out.push(((i, j), u[(to, from)] / denom));
        }
    }
    Ok(out)
}

/// Diagonal of the induced dual-rail two-qubit gate: |00⟩, |01⟩, |10⟩ ride
/// separate chains (product of single transfers), |11⟩ sends both
/// excitations down the shared chain (pair transfer picks up the exchange
/// sign). Equals CZ up to a global phase.
pub fn exchange_cphase_gate(n_sites: usize, lambda: f64) -> Result<[C64; 4]> {
    let spec = build_pst_chain(n_sites, lambda)?;
    let h1 = assemble(&spec, 1)?;
    let s = h1.propagator(PI / lambda)[(n_sites - 1, 0)];
    let h2 = assemble(&spec, 2)?;
    let basis = ExcitationBasis::new(n_sites, 2)?;
    let from = basis.pair_index(1, 2).unwrap();
    let to = basis.pair_index(n_sites - 1, n_sites).unwrap();
    let pair = h2.propagator(PI / lambda)[(to, from)];
    Ok([s * s, s * s, s * s, pair])
}

/// Local-z-invariant of a diagonal two-qubit gate: d00·d11/(d01·d10);
/// −1 iff the gate is CZ up to local z-phases and a global phase.
pub fn cphase_invariant(diag: &[C64; 4]) -> C64 {
    diag[0] * diag[3] / (diag[1] * diag[2])
}

/// Population weight P = (2/2^N) Σ_{n=R+1}^N C(N−1, n−1) of the binomial
/// state beyond the link.
pub fn holonomy_p(n_sites: usize, link: usize) -> f64 {
    let sum: f64 = (link + 1..=n_sites).map(|n| binomial(n_sites - 1, n - 1)).sum();
    2.0 * sum / 2f64.powi(n_sites as i32)
}

fn holonomy_s(p: f64, theta: f64) -> f64 {
    let x = p * theta.sin();
    let z = 1.0 - p + p * theta.cos();
    0.5 * x.hypot(z)
}

/// Parameters of the linked-chain holonomy: network shape (N, R), loop
/// corner (θ, φ), and the derived quantities P and s with A_φ² = −s²·1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolonomyParams {
    pub n_sites: usize,
    pub link: usize,
    pub theta: f64,
    pub phi: f64,
    pub p: f64,
    pub s: f64,
}

impl HolonomyParams {
    pub fn new(n_sites: usize, link: usize, theta: f64, phi: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidSize(format!("need N >= 2, got {n_sites}")));
        }
        if link == 0 || link >= n_sites {
            return Err(Error::InvalidLink { r: link, max: n_sites - 1 });
        }
        let p = holonomy_p(n_sites, link);
        let s = holonomy_s(p, theta);
        if s <= 0.0 {
            return Err(Error::Numerical(format!("degenerate s for P = {p}, theta = {theta}")));
        }
        Ok(HolonomyParams { n_sites, link, theta, phi, p, s })
    }
}

/// The two top-band eigenvectors ψ₁, ψ₂ of the linked chains over the 2N
/// basis {|n⟩ = site n, |n′⟩ = site N+n}, in the phase convention with the
/// e^{−iφ} prefactor on ψ₂.
pub fn eigvec_pair(params: &HolonomyParams) -> (DVector<C64>, DVector<C64>) {
    let (n_sites, link) = (params.n_sites, params.link);
    let (ct, st) = ((params.theta / 2.0).cos(), (params.theta / 2.0).sin());
    let w = binomial_top_state(n_sites);
    let mut psi1 = DVector::<C64>::zeros(2 * n_sites);
    let mut psi2 = DVector::<C64>::zeros(2 * n_sites);
    let pref = C64::from_polar(1.0, -params.phi);
    for n in 1..=n_sites {
        let wn = w[n - 1];
        if n <= link {
            psi1[n - 1] = C64::new(wn, 0.0);
            psi2[n_sites + n - 1] = pref * wn;
        } else {
            psi1[n - 1] = C64::new(wn * ct, 0.0);
            psi1[n_sites + n - 1] = -C64::from_polar(wn * st, -params.phi);
            psi2[n_sites + n - 1] = pref * (wn * ct);
            psi2[n - 1] = C64::new(wn * st, 0.0); // e^{−iφ}·e^{iφ} = 1
        }
    }
    (psi1, psi2)
}

/// Closed-form loop matrix for (0,0) → (θ,0) → (θ,φ) → (0,φ) in the
/// {ψ₁, ψ₂} frame: U = cos(sφ)·1 + (sin(sφ)/s)·e^{−iPθσ_y}·A_φ with
/// A_φ = (i/2)(P sinθ σ_x + (1−P+P cosθ) σ_z). This is exactly
/// e^{−A_θθ} e^{A_φφ} e^{A_θθ} and is unitary.
///
/// Note: this is the path-ordered exponential of the connection under the
/// transport convention c' = +A c. Physical adiabatic transport obeys
/// c' = −A c, and [`adiabatic_holonomy`] converges to that result instead,
/// which is diagonal at P = 1/2 (see the acceptance suite).
pub fn holonomy_closed_form(params: &HolonomyParams) -> Matrix2<C64> {
    let (p, s, theta, phi) = (params.p, params.s, params.theta, params.phi);
    let x = p * theta.sin();
    let z = 1.0 - p + p * theta.cos();
    let i = C64::new(0.0, 1.0);
    let a_phi = Matrix2::new(
        i * (0.5 * z),
        i * (0.5 * x),
        i * (0.5 * x),
        -i * (0.5 * z),
    );
    let (c, sn) = ((p * theta).cos(), (p * theta).sin());
    let rot = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-sn, 0.0),
        C64::new(sn, 0.0),
        C64::new(c, 0.0),
    );
    let ident = Matrix2::identity();
    ident * C64::new((s * phi).cos(), 0.0) + rot * a_phi * C64::new((s * phi).sin() / s, 0.0)
}

/// θ and φ = π/(2s) making the closed-form holonomy a Hadamard: θ is the
/// smallest root of P sin((P+1)θ) + (1−P) sin(Pθ) = (1−P) cos(Pθ) +
/// P cos((P+1)θ) in [0, π/(P+1)], found by bisection.
pub fn holonomy_hadamard_params(p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("P must be in [0, 1], got {p}")));
    }
    let f = |theta: f64| {
        p * ((p + 1.0) * theta).sin() + (1.0 - p) * (p * theta).sin()
            - (1.0 - p) * (p * theta).cos()
            - p * ((p + 1.0) * theta).cos()
    };
    let (mut lo, mut hi) = (0.0, PI / (p + 1.0));
    if f(lo) * f(hi) > 0.0 {
        return Err(Error::NoRoot(p));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let s = holonomy_s(p, theta);
    Ok((theta, PI / (2.0 * s)))
}

/// Result of driving the full 2N-site system around the parameter loop.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyRun {
    /// Holonomy matrix in the {ψ₁, ψ₂} frame, dynamical phase removed.
    pub matrix: Matrix2<C64>,
    /// Weight lost from the top eigenspace.
    pub leakage: f64,
    /// Leakage exceeded 0.1: the run was too fast to be adiabatic.
    pub non_adiabatic: bool,
}

/// Adiabatic transport around (0,0) → (θ,0) → (θ,φ) → (0,φ) in three equal-
/// time legs of total duration T. The top eigenvalue λ(N−1)/2 is constant
/// along the path (the link is a unitary rail mixing), so the dynamical
/// phase is removed exactly by e^{+iE_max T}.
pub fn adiabatic_holonomy(
    n_sites: usize,
    link: usize,
    theta: f64,
    phi: f64,
    lambda: f64,
    total_time: f64,
    steps: usize,
) -> Result<HolonomyRun> {
    let path = |s: f64| -> (f64, f64) {
        if s < 1.0 / 3.0 {
            (3.0 * s * theta, 0.0)
        } else if s < 2.0 / 3.0 {
            (theta, (3.0 * s - 1.0) * phi)
        } else {
            ((3.0 - 3.0 * s) * theta, phi)
        }
    };
    // probe construction once so errors surface before the long evolution
    HolonomyParams::new(n_sites, link, theta, phi)?;
    let h = |s: f64| {
        let (th, ph) = path(s);
        let spec = build_linked_chains(n_sites, link, th, ph, lambda).expect("validated above");
        assemble(&spec, 1).expect("linked chains assemble")
    };
    let u = evolve_time_dependent(h, total_time, steps)?;
    let start = HolonomyParams::new(n_sites, link, 0.0, 0.0)?;
    let end = HolonomyParams::new(n_sites, link, 0.0, phi)?;
    let (s1, s2) = eigvec_pair(&start);
    let (e1, e2) = eigvec_pair(&end);
    let e_max = 0.5 * lambda * (n_sites as f64 - 1.0);
    let dyn_phase = C64::from_polar(1.0, e_max * total_time);
    let us1 = &u * &s1;
    let us2 = &u * &s2;
    let matrix = Matrix2::new(
        e1.dotc(&us1) * dyn_phase,
        e1.dotc(&us2) * dyn_phase,
        e2.dotc(&us1) * dyn_phase,
        e2.dotc(&us2) * dyn_phase,
    );
    let leakage = 1.0 - 0.5 * matrix.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(HolonomyRun { matrix, leakage, non_adiabatic: leakage > 0.1 })
}

/// Rotate |1⟩ into the binomial top-band eigenstate of λJx by evolving under
/// λ(Jx + Jz) — a √2λ rotation about the tilted axis — for t = π/(√2 λ).
pub fn prepare_top_eigenstate(n_sites: usize, lambda: f64) -> Result<StateVector> {
    let spec = build_pst_chain(n_sites, lambda)?;
    let h = assemble(&spec, 1)?.with_diagonal(&gradient_diagonal(n_sites, lambda, 0.0)?)?;
    propagate(&h, PI / (2f64.sqrt() * lambda), &StateVector::basis_state(n_sites, 1))
}

/// Blocking fidelity of a Zeeman switch: detune `site` by g_block and return
/// the minimum, over t ∈ [0, 2π/λ], of the probability that an excitation
/// launched at site 1 stays strictly left of the blocked site.
pub fn blocking_fidelity(
    n_sites: usize,
    lambda: f64,
    site: usize,
    g_block: f64,
    samples: usize,
) -> Result<f64> {
    if site < 2 {
        return Err(Error::InvalidSite { site, n_sites });
    }
    let spec = attach_onsite_block(&build_pst_chain(n_sites, lambda)?, site, g_block)?;
    let h = assemble(&spec, 1)?;
    let psi0 = StateVector::basis_state(n_sites, 1);
    let mut min_retained = 1.0f64;
    for k in 1..=samples {
        let t = 2.0 * PI / lambda * k as f64 / samples as f64;
        let out = propagate(&h, t, &psi0)?;
        let retained: f64 = (1..site).map(|s| out.amps[s - 1].norm_sqr()).sum();
        min_retained = min_retained.min(retained);
    }
    Ok(min_retained)
}
