//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured numbers before asserting.
//!
//! Sign convention used throughout: propagation is e^{−iHt}, so a state
//! with positive energy accumulates a negative phase. The "acquired phase"
//! in the geometric-loop criteria is therefore the negative of the measured
//! amplitude argument.

use nalgebra::Matrix2;
use spinweave::dynamics::{assemble, propagate, StateVector};
use spinweave::gates::{
    ab_phase_gate, adiabatic_holonomy, blocking_fidelity, cnot_flip_probability_closed,
    cnot_flip_width, cnot_operator, cphase_invariant, eigvec_pair, exchange_cphase_gate,
    gate_distance, hadamard_gate, hadamard_matrix, holonomy_closed_form,
    holonomy_hadamard_params, logical_unitary, phase_diag, simulate_cnot,
    two_excitation_exchange, HolonomyParams,
};
use spinweave::network::{build_pst_chain, build_single_qubit_network, DualRailPorts};
use spinweave::protocols::{
    calibrate_offset, estimate_length_bits, fringe_scan, frequency_scan, geometric_loop,
    kappa_for_omega, phase_slope, solid_angle, ErrorModel,
};
use spinweave::{wrap_angle, C64};
use std::f64::consts::PI;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Trace distance ½‖A − e^{iφ}B‖₁ minimized over the global phase φ.
fn trace_distance(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 1e-14 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    let diff = a - b.map(|z| z * phase);
    0.5 * diff.singular_values().iter().sum::<f64>()
}

#[test]
fn criterion_01_perfect_transfer() {
    let start = Instant::now();
    let mut worst = 1.0f64;
    for n in 2..=12 {
        let h = assemble(&build_pst_chain(n, 1.0).unwrap(), 1).unwrap();
        let out = propagate(&h, PI, &StateVector::basis_state(n, 1)).unwrap();
        worst = worst.min(out.arrival_probability(&[n]));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst >= 1.0 - 1e-10 && elapsed < 1.0;
    report("01 perfect transfer", pass, &format!("min arrival {worst:.3e}, {elapsed:.2}s"));
    assert!(pass, "min arrival {worst} over N=2..=12, elapsed {elapsed:.2}s");
}

#[test]
fn criterion_02_geometric_loop() {
    let mut worst_return = 1.0f64;
    for n in [3usize, 8] {
        for kappa in [0.0, 0.5, 1.0, 3.0] {
            let out = geometric_loop(n, 1.0, kappa, None, 0).unwrap();
            worst_return = worst_return.min(out.return_probability);
        }
    }
    let mut worst_slope_dev = 0.0f64;
    for n in [3usize, 8] {
        let omegas: Vec<f64> = (0..64).map(|k| PI * (k as f64 + 0.5) / 64.0).collect();
        // acquired phase = −(measured amplitude argument)
        let slope = -phase_slope(n, 1.0, &omegas).unwrap();
        worst_slope_dev = worst_slope_dev.max((slope - 0.5 * (n as f64 - 1.0)).abs());
    }
    let pass = worst_return >= 1.0 - 1e-10 && worst_slope_dev < 1e-6;
    report(
        "02 geometric loop",
        pass,
        &format!("min return {worst_return:.3e}, max slope deviation {worst_slope_dev:.3e}"),
    );
    assert!(pass, "return {worst_return}, slope deviation {worst_slope_dev}");
}

#[test]
fn criterion_03_bit_metrology() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=16 {
        let est = estimate_length_bits(n, 1.0, 4, None).unwrap();
        if est.n_est != n || est.low_confidence {
            failures.push((n, est.n_est, est.low_confidence));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && elapsed < 10.0;
    report("03 bit metrology", pass, &format!("misses {failures:?}, {elapsed:.2}s"));
    assert!(pass, "misses {failures:?}, elapsed {elapsed:.2}s");
}

#[test]
fn criterion_04_fringe_law() {
    let (n, lambda, kappa) = (8usize, 1.0, 1.0);
    let chis: Vec<f64> = (0..64).map(|k| 2.0 * PI * k as f64 / 64.0).collect();
    let (fit, _) = fringe_scan(n, lambda, kappa, &chis, None).unwrap();
    let omega = solid_angle(lambda, kappa).unwrap();
    let j = 0.5 * (n as f64 - 1.0);
    let expected_chi0 = wrap_angle(j * omega);
    let nu_dev = (fit.nu - 1.0).abs();
    let chi0_dev = wrap_angle(fit.chi0 - expected_chi0).abs();
    let pass = nu_dev < 1e-6 && chi0_dev < 1e-6;
    report(
        "04 fringe law",
        pass,
        &format!(
            "nu = {:.9} (dev {nu_dev:.2e}); chi0 = {:.6} vs J*Omega = {expected_chi0:.6} \
             (dev {chi0_dev:.3e}); measured chi0 matches -J*(Omega+pi) = {:.6}",
            fit.nu,
            fit.chi0,
            wrap_angle(-j * (omega + PI)),
        ),
    );
    assert!(
        pass,
        "nu dev {nu_dev:.2e}; chi0 {:.6} vs expected {expected_chi0:.6}: the loop phase has an \
         exact extra great-circle term, chi0 = -J*(Omega+pi), so chi0 = J*Omega cannot hold \
         (see decisions ledger)",
        fit.chi0
    );
}

#[test]
fn criterion_05_robustness() {
    let start = Instant::now();
    let count = |jitter: f64, disorder: f64| -> (usize, usize) {
        let mut correct = 0usize;
        let mut votes = std::collections::HashMap::new();
        for seed in 0..100u64 {
            let em = ErrorModel {
                timing_jitter_frac: jitter,
                coupling_disorder_frac: disorder,
                field_offset: 0.0,
                seed,
            };
            let (est, _) = frequency_scan(8, 1.0, 256, Some(&em)).unwrap();
            *votes.entry(est.n_est).or_insert(0usize) += 1;
            if est.n_est == 8 {
                correct += 1;
            }
        }
        let majority = votes.into_iter().max_by_key(|&(_, c)| c).map(|(n, _)| n).unwrap();
        (correct, majority)
    };
    let (jitter_correct, jitter_majority) = count(0.5, 0.0);
    let (disorder_correct, _) = count(0.0, 0.8);
    let elapsed = start.elapsed().as_secs_f64();
    let jitter_pass = jitter_majority == 8;
    let disorder_pass = disorder_correct >= 90;
    let pass = jitter_pass && disorder_pass && elapsed < 120.0;
    report(
        "05 robustness",
        pass,
        &format!(
            "jitter 50%: majority N = {jitter_majority} ({jitter_correct}/100 correct); \
             disorder 80%: {disorder_correct}/100 correct (need >= 90); {elapsed:.1}s"
        ),
    );
    assert!(
        pass,
        "jitter majority {jitter_majority} ({jitter_correct}/100), disorder \
         {disorder_correct}/100: 80% coupling disorder destroys the fringe periodicity for \
         most draws under the faithful model (see decisions ledger)"
    );
}

#[test]
fn criterion_06_offset_calibration() {
    let (lambda, kappa) = (1.0f64, 1.0f64);
    let mut worst = 0.0f64;
    for b in [0.0, 0.1, -0.3] {
        let recovered = calibrate_offset(8, lambda, kappa, b).unwrap();
        let expected = wrap_angle(2.0 * PI * b / lambda.hypot(kappa));
        worst = worst.max(wrap_angle(recovered - expected).abs());
    }
    let pass = worst < 1e-6;
    report("06 offset calibration", pass, &format!("max deviation {worst:.3e}"));
    assert!(pass, "max deviation {worst:.3e}");
}

#[test]
fn criterion_07_ab_ring() {
    let mut worst_fid = 1.0f64;
    let mut arrivals = Vec::new();
    for phi in [0.0, PI / 3.0, PI] {
        let (gate, _) = ab_phase_gate(6, 1.0, phi).unwrap();
        worst_fid = worst_fid.min(gate.fidelity_to(&phase_diag(phi)));
        arrivals.push(gate.arrival_probability);
    }
    let arrival_spread =
        arrivals.iter().cloned().fold(f64::MIN, f64::max) - arrivals.iter().cloned().fold(f64::MAX, f64::min);
    let pass = worst_fid >= 1.0 - 1e-8 && arrival_spread < 1e-10;
    report(
        "07 AB ring",
        pass,
        &format!("min fidelity {worst_fid:.12}, arrival spread {arrival_spread:.3e}"),
    );
    assert!(pass, "fidelity {worst_fid}, arrival spread {arrival_spread}");
}

#[test]
fn criterion_08_fig4_gates() {
    let (gate, _) = hadamard_gate(1.0).unwrap();
    let h_fid = gate.fidelity_to(&hadamard_matrix());

    let ports = DualRailPorts { rail0_in: 1, rail1_in: 7, rail0_out: 6, rail1_out: 12 };
    let grid = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
    let mut worst = 0.0f64;
    for beta in grid {
        for gamma in grid {
            for delta in grid {
                let spec = build_single_qubit_network(beta, gamma, delta, 1.0).unwrap();
                let u = logical_unitary(&spec, &ports, PI).unwrap();
                let target = phase_diag(delta) * hadamard_matrix() * phase_diag(gamma)
                    * hadamard_matrix()
                    * phase_diag(beta);
                worst = worst.max(gate_distance(&u.matrix, &target));
            }
        }
    }
    let pass = h_fid >= 1.0 - 1e-8 && worst < 1e-6;
    report(
        "08 dual-rail gates",
        pass,
        &format!("Hadamard fidelity {h_fid:.12}, max composition distance {worst:.3e}"),
    );
    assert!(pass, "Hadamard fidelity {h_fid}, composition distance {worst}");
}

#[test]
fn criterion_09_cnot() {
    use nalgebra::DMatrix;
    // matrix equality to the relabeled 2N chain under a sign gauge on the b=1 block
    let mut worst_mat = 0.0f64;
    for n in [2usize, 3, 4, 8] {
        let h = cnot_operator(n, 1.0).unwrap();
        let chain = assemble(&build_pst_chain(2 * n, 1.0).unwrap(), 1).unwrap();
        let dim = 2 * n;
        let mut mapped = DMatrix::<C64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let site = |i: usize| if i < n { i } else { 2 * n - 1 - (i - n) };
                let sign = |i: usize| if i < n { 1.0 } else { -1.0 };
                mapped[(r, c)] = chain.matrix()[(site(r), site(c))] * C64::new(sign(r) * sign(c), 0.0);
            }
        }
        worst_mat = worst_mat
            .max((h.matrix() - &mapped).iter().map(|z| z.norm()).fold(0.0f64, f64::max));
    }
    // closed-form flip probability vs direct simulation
    let mut worst_p = 0.0f64;
    for n in [2usize, 3, 4, 8] {
        for k in 0..200 {
            let t = 2.0 * PI * (k as f64 + 0.5) / 200.0;
            let (p_sim, _) = simulate_cnot(n, t).unwrap();
            worst_p = worst_p.max((p_sim - cnot_flip_probability_closed(n, t)).abs());
        }
    }
    let (p_flip, _) = simulate_cnot(8, PI).unwrap();
    let widths: Vec<f64> = (2..=8).map(|n| cnot_flip_width(n, 4000)).collect();
    let monotone = widths.windows(2).all(|w| w[1] < w[0]);
    let pass = worst_mat < 1e-12 && worst_p <= 1e-10 && p_flip >= 1.0 - 1e-9 && monotone;
    report(
        "09 CNOT",
        pass,
        &format!(
            "matrix dev {worst_mat:.2e}, closed-form dev {worst_p:.2e}, p_flip {p_flip:.12}, \
             widths N=2..8 {widths:?}"
        ),
    );
    assert!(pass, "matrix {worst_mat}, p {worst_p}, flip {p_flip}, widths {widths:?}");
}

#[test]
fn criterion_10_exchange_cphase() {
    let mut worst_ratio = 0.0f64;
    for n in 2..=10 {
        for ((i, j), ratio) in two_excitation_exchange(n, 1.0).unwrap() {
            let dev = (ratio - C64::new(-1.0, 0.0)).norm();
            if dev > worst_ratio {
                worst_ratio = dev;
            }
            let _ = (i, j);
        }
    }
    // strip local z-phases: U' = diag(1,1,1, invariant); fidelity to CZ = |3 - inv|/4
    let diag = exchange_cphase_gate(6, 1.0).unwrap();
    let inv = cphase_invariant(&diag);
    let cz_fid = (C64::new(3.0, 0.0) - inv).norm() / 4.0;
    let pass = worst_ratio < 1e-8 && cz_fid >= 1.0 - 1e-8;
    report(
        "10 exchange cphase",
        pass,
        &format!("max ratio deviation {worst_ratio:.3e}, CZ fidelity {cz_fid:.12}"),
    );
    assert!(pass, "ratio dev {worst_ratio}, CZ fidelity {cz_fid}");
}

#[test]
fn criterion_11_holonomy() {
    let start = Instant::now();
    // eigenvector residuals
    let mut worst_res = 0.0f64;
    for (n, link, theta, phi) in [(4usize, 2usize, PI / 3.0, PI / 7.0), (5, 1, 0.9, 2.1)] {
        let params = HolonomyParams::new(n, link, theta, phi).unwrap();
        let spec = spinweave::network::build_linked_chains(n, link, theta, phi, 1.0).unwrap();
        let h = assemble(&spec, 1).unwrap();
        let e_max = 0.5 * (n as f64 - 1.0);
        let (p1, p2) = eigvec_pair(&params);
        for v in [&p1, &p2] {
            let res = (h.matrix() * v - v.map(|z| z * C64::new(e_max, 0.0))).norm();
            worst_res = worst_res.max(res);
        }
    }
    // Hadamard parameters at P = 1/2
    let (theta, phi) = holonomy_hadamard_params(0.5).unwrap();
    let param_dev =
        (theta - PI / 4.0).abs().max((phi - PI / (PI / 8.0).cos()).abs());
    let params = HolonomyParams::new(4, 2, theta, phi).unwrap();
    let closed = holonomy_closed_form(&params);
    let closed_gate = spinweave::gates::LogicalUnitary { matrix: closed, arrival_probability: 1.0 };
    let h_fid = closed_gate.fidelity_to(&hadamard_matrix());
    // adiabatic runs: T doubling 50, 100, 200
    let mut devs = Vec::new();
    for (t, steps) in [(50.0, 1000), (100.0, 2000), (200.0, 4000)] {
        let run = adiabatic_holonomy(4, 2, theta, phi, 1.0, t, steps).unwrap();
        devs.push(trace_distance(&run.matrix, &closed));
    }
    let monotone = devs.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst_res <= 1e-10
        && param_dev < 1e-9
        && h_fid >= 1.0 - 1e-10
        && devs[2] < 1e-2
        && monotone
        && elapsed < 60.0;
    report(
        "11 holonomy",
        pass,
        &format!(
            "eig residual {worst_res:.2e}, params dev {param_dev:.2e}, H fidelity {h_fid:.12}, \
             adiabatic deviations {devs:?}, {elapsed:.1}s"
        ),
    );
    assert!(
        pass,
        "res {worst_res}, params {param_dev}, fid {h_fid}, devs {devs:?}, {elapsed:.1}s. \
         The adiabatic run converges (leakage ~1e-4 at T=200) but to a diagonal matrix, not to \
         the closed form: the closed form is the path-ordered exponential of the connection \
         under c' = +A c, while physical transport obeys c' = -A c. With these \
         eigenvector conventions <psi_i|d psi_j> matches the closed form's A matrices (up to an \
         abelian trace term), and integrating -A along the loop reproduces the simulated \
         diagonal holonomy to 4 digits. At P = 1/2 the axis of A_phi sits at exactly theta/2 \
         from z, so the physical loop holonomy is abelian. See the decisions ledger."
    );
}

#[test]
fn criterion_12_zeeman_block() {
    let mut lnx = Vec::new();
    let mut lny = Vec::new();
    for k in 0..8 {
        let g = 10.0 * (10f64).powf(k as f64 / 7.0);
        let f = blocking_fidelity(6, 1.0, 3, g, 400).unwrap();
        lnx.push(g.ln());
        lny.push((1.0 - f).ln());
    }
    let m = lnx.len() as f64;
    let mx = lnx.iter().sum::<f64>() / m;
    let my = lny.iter().sum::<f64>() / m;
    let sxy: f64 = lnx.iter().zip(&lny).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lnx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let pass = (slope + 2.0).abs() <= 0.2;
    report("12 Zeeman block", pass, &format!("log-log slope {slope:.4}"));
    assert!(pass, "slope {slope}");
}

// Helper consistency check for the sweep used in criterion 2: the loop phase
// at each grid point is measured at the kappa that realizes the target Omega.
#[test]
fn omega_grid_roundtrip() {
    for omega in [0.3, 1.0, 2.0, 3.0] {
        let kappa = kappa_for_omega(1.0, omega);
        let back = solid_angle(1.0, kappa).unwrap();
        assert!((back - omega).abs() < 1e-12, "omega {omega} -> kappa {kappa} -> {back}");
    }
}
