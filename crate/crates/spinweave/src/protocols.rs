//! Interferometric chain protocols: the geometric-phase loop, semiclassical
//! chain-length metrology, fringe and frequency scans, gradient-offset
//! calibration, and the injected error model.
//!
//! Every protocol drives one end of a perfect chain with the Hadamard-split
//! input (|vac⟩ + |1⟩)/√2 and reads back the complex amplitude on site 1
//! relative to the vacuum reference. The loop itself is the three-segment
//! schedule [λJx for π/2λ, λJx + κJz for π/√(λ²+κ²), λJx for π/2λ]: a great-
//! circle excursion whose tilted middle axis carves out solid angle
//! Ω = 2 tan⁻¹(λ/κ) on the effective spin-J sphere, J = (N−1)/2.
//!
//! Under the e^{−iHt} convention used throughout, the simulated loop phase is
//! −J(Ω + π): linear in Ω with slope −J, i.e. |dθ/dΩ| = (N−1)/2, and equal to
//! π(N−1) mod 2π at κ = 0. The protocols only ever consume the slope and the
//! mod-2π structure, so they are insensitive to the overall sign convention.

use crate::dynamics::{assemble, run_schedule, Schedule, StateVector};
use crate::network::{build_pst_chain, gradient_diagonal, NetworkSpec};
use crate::{wrap_angle, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Injected imperfections. Coupling disorder is drawn once per network
/// instance from the seed alone (the fabricated chain is fixed for all
/// experiments); timing jitter is redrawn for every run from the seed mixed
/// with the run index. Identical seeds give bit-identical perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ErrorModel {
    /// Each segment duration is multiplied by 1 + u, u uniform in [−f, f].
    pub timing_jitter_frac: f64,
    /// Each edge amplitude is multiplied by 1 + u, u uniform in [−f, f].
    pub coupling_disorder_frac: f64,
    /// Uniform on-site energy offset present while the gradient is on.
    pub field_offset: f64,
    pub seed: u64,
}

const DISORDER_STREAM: u64 = 0x5d15_c0de_0000_0001;
const JITTER_STREAM: u64 = 0x5d15_c0de_0000_0002;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("timing_jitter_frac", self.timing_jitter_frac),
            ("coupling_disorder_frac", self.coupling_disorder_frac),
        ] {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidErrorModel(format!("{name} = {f} outside [0, 1)")));
            }
        }
        if !self.field_offset.is_finite() {
            return Err(Error::InvalidErrorModel("field_offset must be finite".into()));
        }
        Ok(())
    }

    fn uniform(rng: &mut ChaCha8Rng, f: f64) -> f64 {
        f * (2.0 * rng.gen::<f64>() - 1.0)
    }

    /// Frozen coupling disorder: same seed, same network ⇒ same perturbation.
    pub fn perturb_network(&self, spec: &NetworkSpec) -> NetworkSpec {
        let mut out = spec.clone();
        if self.coupling_disorder_frac > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ DISORDER_STREAM));
            for e in &mut out.edges {
                e.2 *= 1.0 + Self::uniform(&mut rng, self.coupling_disorder_frac);
            }
        }
        out
    }

    /// Fresh timing jitter for run `run_index` applied to base durations.
    pub fn jitter_durations(&self, run_index: u64, base: &[f64]) -> Vec<f64> {
        if self.timing_jitter_frac == 0.0 {
            return base.to_vec();
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ JITTER_STREAM ^ splitmix64(run_index)));
        base.iter().map(|&t| t * (1.0 + Self::uniform(&mut rng, self.timing_jitter_frac))).collect()
    }
}

/// One sweep point of any protocol, in the CSV column order
/// theta_or_chi, kappa, arrival_prob, phase, nu, chi0, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub theta_or_chi: f64,
    pub kappa: f64,
    pub arrival_prob: f64,
    pub phase: f64,
    pub nu: Option<f64>,
    pub chi0: Option<f64>,
    pub seed: u64,
}

/// Solid angle enclosed by the loop of rotation axes: Ω = 2 tan⁻¹(λ/κ) ∈ (0, π].
pub fn solid_angle(lambda: f64, kappa: f64) -> Result<f64> {
    if lambda <= 0.0 || kappa < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "solid_angle needs lambda > 0 and kappa >= 0, got ({lambda}, {kappa})"
        )));
    }
    Ok(if kappa == 0.0 { PI } else { 2.0 * (lambda / kappa).atan() })
}

/// Inverse of [`solid_angle`]: the gradient strength producing solid angle Ω.
pub fn kappa_for_omega(lambda: f64, omega: f64) -> f64 {
    if omega >= PI {
        0.0
    } else {
        lambda / (omega / 2.0).tan()
    }
}

/// Geometric phase magnitude predicted from the solid angle: ½(N−1)Ω.
pub fn predicted_phase(n_sites: usize, omega: f64) -> f64 {
    0.5 * (n_sites as f64 - 1.0) * omega
}

/// Complex fringe amplitude after `repeats` consecutive geometric loops on an
/// N-site chain: the site-1 amplitude divided by the vacuum reference.
/// The gradient segment carries any field offset from the error model;
/// `run_index` distinguishes sweep points for the timing-jitter draw.
pub fn loop_amplitude(
    n_sites: usize,
    lambda: f64,
    kappa: f64,
    repeats: usize,
    errors: Option<&ErrorModel>,
    run_index: u64,
) -> Result<C64> {
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig(format!("lambda must be > 0, got {lambda}")));
    }
    let mut spec = build_pst_chain(n_sites, lambda)?;
    if let Some(em) = errors {
        em.validate()?;
        spec = em.perturb_network(&spec);
    }
    let hx = assemble(&spec, 1)?;
    let mut hg = hx.with_diagonal(&gradient_diagonal(n_sites, kappa, 0.0)?)?;
    if let Some(em) = errors {
        if em.field_offset != 0.0 {
            hg = hg.with_uniform_shift(em.field_offset);
        }
    }
    let quarter = PI / (2.0 * lambda);
    let tilted = PI / lambda.hypot(kappa);
    let base: Vec<f64> =
        std::iter::repeat([quarter, tilted, quarter]).take(repeats).flatten().collect();
    let durations = match errors {
        Some(em) => em.jitter_durations(run_index, &base),
        None => base,
    };
    let ops = [&hx, &hg, &hx];
    let segments = durations.iter().enumerate().map(|(i, &t)| (ops[i % 3].clone(), t)).collect();
    let out = run_schedule(&Schedule::new(segments)?, &StateVector::vacuum_superposition(n_sites, 1))?;
    out.relative_amplitude(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopOutcome {
    /// |site-1 amplitude|² relative to its input weight; 1 for a closed loop.
    pub return_probability: f64,
    /// Vacuum-relative phase of the returned amplitude, in (−π, π].
    pub phase: f64,
}

/// One geometric loop: quarter x-rotation, full rotation about the tilted
/// axis, quarter x-rotation, applied to (|vac⟩ + |1⟩)/√2.
pub fn geometric_loop(
    n_sites: usize,
    lambda: f64,
    kappa: f64,
    errors: Option<&ErrorModel>,
    run_index: u64,
) -> Result<LoopOutcome> {
    let a = loop_amplitude(n_sites, lambda, kappa, 1, errors, run_index)?;
    Ok(LoopOutcome { return_probability: a.norm_sqr(), phase: wrap_angle(a.arg()) })
}

/// Probability of reading 0 after rotating the analysis frame by χ and
/// Hadamard-measuring the interferometer qubit: P = ½(1 + Re(a·e^{−iχ})).
pub fn interference_probability(a: C64, chi: f64) -> f64 {
    (0.5 * (1.0 + (a * C64::from_polar(1.0, -chi)).re)).clamp(0.0, 1.0)
}

/// Outcome of the semiclassical bit-extraction protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    pub n_est: usize,
    /// Some round landed within 0.05 of the ½ decision threshold.
    pub low_confidence: bool,
    /// Interference probability observed in each round, LSB first.
    pub bit_probabilities: Vec<f64>,
}

/// Semiclassical Fourier read-out of m = N−1, one bit per round.
///
/// Round 0 runs the plain κ = 0 loop: the phase is πm mod 2π, so the
/// interference probability is 1 or 0 by the parity of m. Round r ≥ 1 runs
/// two consecutive loops at Ω_r = π/2^r; the doubled loop phase is
/// −m(π + π/2^r) mod 2π, in which every bit above r contributes an even
/// multiple of π. Rotating the analysis frame by the contribution of the
/// already-known low bits (the accumulated half-angle correction) leaves
/// πb_r, read off by thresholding at ½.
pub fn estimate_length_bits(
    n_sites: usize,
    lambda: f64,
    max_bits: usize,
    errors: Option<&ErrorModel>,
) -> Result<LengthEstimate> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("need N >= 2, got {n_sites}")));
    }
    if max_bits == 0 || max_bits > 16 {
        return Err(Error::InvalidConfig(format!("max_bits must be in 1..=16, got {max_bits}")));
    }
    let mut m = 0usize;
    let mut low_confidence = false;
    let mut bit_probabilities = Vec::with_capacity(max_bits);
    for r in 0..max_bits {
        let (repeats, omega) = if r == 0 { (1, PI) } else { (2, PI / (1u64 << r) as f64) };
        let kappa = kappa_for_omega(lambda, omega);
        let a = loop_amplitude(n_sites, lambda, kappa, repeats, errors, r as u64)?;
        // compensation: phase the known low bits are guaranteed to contribute
        let chi = if r == 0 { 0.0 } else { -(m as f64) * (PI + omega) };
        let p = interference_probability(a, chi);
        if (p - 0.5).abs() < 0.05 {
            low_confidence = true;
        }
        if p < 0.5 {
            m |= 1 << r;
        }
        bit_probabilities.push(p);
    }
    Ok(LengthEstimate { n_est: m + 1, low_confidence, bit_probabilities })
}

/// Least-squares fit of an interference fringe to ½(1 + ν cos(χ − χ₀)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub nu: f64,
    pub chi0: f64,
}

/// Scan the analysis angle χ at fixed κ, fit the fringe, and return the fit
/// plus one record per scan point.
pub fn fringe_scan(
    n_sites: usize,
    lambda: f64,
    kappa: f64,
    chis: &[f64],
    errors: Option<&ErrorModel>,
) -> Result<(FringeFit, Vec<ExperimentRecord>)> {
    if chis.len() < 3 {
        return Err(Error::GridTooCoarse { points: chis.len(), needed: 3 });
    }
    let seed = errors.map_or(0, |e| e.seed);
    let mut rows = Vec::with_capacity(chis.len());
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (k, &chi) in chis.iter().enumerate() {
        let a = loop_amplitude(n_sites, lambda, kappa, 1, errors, k as u64)?;
        let p = interference_probability(a, chi);
        let basis = nalgebra::Vector3::new(1.0, chi.cos(), chi.sin());
        ata += basis * basis.transpose();
        atb += basis * p;
        rows.push(ExperimentRecord {
            theta_or_chi: chi,
            kappa,
            arrival_prob: a.norm_sqr(),
            phase: wrap_angle(a.arg()),
            nu: None,
            chi0: None,
            seed,
        });
    }
    let beta = ata
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular fringe fit (degenerate chi grid)".into()))?
        * atb;
    let nu = 2.0 * beta[1].hypot(beta[2]);
    let chi0 = wrap_angle(beta[2].atan2(beta[1]));
    let fit = FringeFit { nu, chi0 };
    for row in &mut rows {
        row.nu = Some(nu);
        row.chi0 = Some(chi0);
    }
    Ok((fit, rows))
}

/// Fitted slope dθ/dΩ of the loop phase over an Ω grid (error-free). The grid
/// must be fine enough that adjacent phase steps stay below π, i.e.
/// ΔΩ < 2π/(N−1), so the wrapped differences unwrap unambiguously.
pub fn phase_slope(n_sites: usize, lambda: f64, omegas: &[f64]) -> Result<f64> {
    if omegas.len() < 2 {
        return Err(Error::GridTooCoarse { points: omegas.len(), needed: 2 });
    }
    let mut unwrapped = Vec::with_capacity(omegas.len());
    let mut acc = 0.0;
    let mut prev = None;
    for &omega in omegas {
        let a = loop_amplitude(n_sites, lambda, kappa_for_omega(lambda, omega), 1, None, 0)?;
        let th = a.arg();
        match prev {
            None => acc = th,
            Some(p) => acc += wrap_angle(th - p),
        }
        prev = Some(th);
        unwrapped.push(acc);
    }
    let n = omegas.len() as f64;
    let mx = omegas.iter().sum::<f64>() / n;
    let my = unwrapped.iter().sum::<f64>() / n;
    let sxy: f64 = omegas.iter().zip(&unwrapped).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = omegas.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("degenerate omega grid".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub j_est: f64,
    pub n_est: usize,
}

/// Sweep θ over (0, π) with κ = λ cot(θ), record the χ = 0 interference
/// probability, and pick the half-integer J whose model
/// c₀ + c₁cos(2Jθ) + c₂sin(2Jθ) fits the scan with the smallest residual
/// (a least-squares periodogram; the explicit fit keeps the half-period
/// 2J = 1 fringe from leaking into the DC term). Needs ≥ 4 points per
/// oscillation, i.e. at least 2(N−1) grid points.
pub fn frequency_scan(
    n_sites: usize,
    lambda: f64,
    grid_points: usize,
    errors: Option<&ErrorModel>,
) -> Result<(FrequencyEstimate, Vec<ExperimentRecord>)> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("need N >= 2, got {n_sites}")));
    }
    let needed = 2 * (n_sites - 1);
    if grid_points < needed {
        return Err(Error::GridTooCoarse { points: grid_points, needed });
    }
    let seed = errors.map_or(0, |e| e.seed);
    let m = grid_points;
    let mut thetas = Vec::with_capacity(m);
    let mut probs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        let theta = PI * (k as f64 + 0.5) / m as f64;
        let kappa = lambda * theta.cos() / theta.sin();
        let a = loop_amplitude(n_sites, lambda, kappa, 1, errors, k as u64)?;
        let p = interference_probability(a, 0.0);
        thetas.push(theta);
        probs.push(p);
        rows.push(ExperimentRecord {
            theta_or_chi: theta,
            kappa,
            arrival_prob: a.norm_sqr(),
            phase: wrap_angle(a.arg()),
            nu: None,
            chi0: None,
            seed,
        });
    }
    let mut best = (0usize, f64::INFINITY);
    for twoj in 1..=(m / 2) {
        let w = twoj as f64;
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = nalgebra::Vector3::<f64>::zeros();
        for (&th, &p) in thetas.iter().zip(&probs) {
            let basis = nalgebra::Vector3::new(1.0, (w * th).cos(), (w * th).sin());
            ata += basis * basis.transpose();
            atb += basis * p;
        }
        let Some(inv) = ata.try_inverse() else { continue };
        let beta = inv * atb;
        let residual: f64 = thetas
            .iter()
            .zip(&probs)
            .map(|(&th, &p)| {
                let model = beta[0] + beta[1] * (w * th).cos() + beta[2] * (w * th).sin();
                (p - model) * (p - model)
            })
            .sum();
        if residual < best.1 {
            best = (twoj, residual);
        }
    }
    if best.0 == 0 {
        return Err(Error::Numerical("frequency fit failed for every candidate".into()));
    }
    let est = FrequencyEstimate { j_est: best.0 as f64 / 2.0, n_est: best.0 + 1 };
    Ok((est, rows))
}

/// Recover a uniform gradient-field offset b from the modified loop
/// [λJx for π/2λ, (λJx + κJz + b) for 2π/√(λ²+κ²), λJx for 3π/2λ].
/// The error-free modified loop is exactly the identity (two full 2π
/// rotations), so the measured vacuum-relative phase is the pure dynamical
/// contribution −b·2π/√(λ²+κ²); its negation is returned.
pub fn calibrate_offset(n_sites: usize, lambda: f64, kappa: f64, field_offset: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig(format!("lambda must be > 0, got {lambda}")));
    }
    let spec = build_pst_chain(n_sites, lambda)?;
    let hx = assemble(&spec, 1)?;
    let hg = hx.with_diagonal(&gradient_diagonal(n_sites, kappa, field_offset)?)?;
    let sched = Schedule::new(vec![
        (hx.clone(), PI / (2.0 * lambda)),
        (hg, 2.0 * PI / lambda.hypot(kappa)),
        (hx, 3.0 * PI / (2.0 * lambda)),
    ])?;
    let out = run_schedule(&sched, &StateVector::vacuum_superposition(n_sites, 1))?;
    let (_, phase) = out.site_amplitude_phase(1)?;
    Ok(wrap_angle(-phase))
}
