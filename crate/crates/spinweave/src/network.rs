//! Graph-level description of spin networks and constructors for the
//! topologies used by the transfer, gate and holonomy experiments.
//!
//! Sites are 1-based, matching the basis labels |1⟩…|N⟩. The amplitude stored
//! on an edge (i, j) is the single-excitation hop matrix element i→j; the
//! reverse hop is its complex conjugate. For a spin coupling J(σxσx+σyσy)
//! the hop element is 2J, so the perfect chain stores (λ/2)√(n(N−n)).

use crate::{binomial, Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// A spin network: sites, Hermitian weighted edges, on-site energies and
/// named ports. Immutable once built; share freely across sweep workers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub n_sites: usize,
    /// (i, j, amplitude): the stored amplitude is the i→j hop element.
    pub edges: Vec<(usize, usize, C64)>,
    /// (site, energy) on-site terms; sites not listed sit at energy 0.
    pub onsite: Vec<(usize, f64)>,
    /// Named ordered site lists, e.g. "in", "out", "rail0_in".
    pub ports: BTreeMap<String, Vec<usize>>,
}

/// The four distinct sites of a dual-rail encoded qubit. |0_L⟩ is the
/// excitation on rail 0, |1_L⟩ on rail 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualRailPorts {
    pub rail0_in: usize,
    pub rail1_in: usize,
    pub rail0_out: usize,
    pub rail1_out: usize,
}

impl DualRailPorts {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        let sites = [self.rail0_in, self.rail1_in, self.rail0_out, self.rail1_out];
        let set: HashSet<_> = sites.iter().collect();
        if set.len() != 4 {
            return Err(Error::InvalidNetwork("dual-rail ports must be distinct".into()));
        }
        for &s in &sites {
            if s == 0 || s > n_sites {
                return Err(Error::InvalidSite { site: s, n_sites });
            }
        }
        Ok(())
    }
}

/// On-disk form: {n_sites, edges:[[i,j,re,im]], onsite:[[i,e]], ports:{...}}.
#[derive(Serialize, Deserialize)]
struct NetworkFile {
    n_sites: usize,
    edges: Vec<(usize, usize, f64, f64)>,
    onsite: Vec<(usize, f64)>,
    ports: BTreeMap<String, Vec<usize>>,
}

impl NetworkSpec {
    pub fn new(n_sites: usize) -> Self {
        NetworkSpec { n_sites, edges: Vec::new(), onsite: Vec::new(), ports: BTreeMap::new() }
    }

    /// Check the structural invariants: valid 1-based indices, no self-loops,
    /// at most one edge per unordered pair, ports in range and duplicate-free.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for &(i, j, _) in &self.edges {
            if i == 0 || i > self.n_sites {
                return Err(Error::InvalidSite { site: i, n_sites: self.n_sites });
            }
            if j == 0 || j > self.n_sites {
                return Err(Error::InvalidSite { site: j, n_sites: self.n_sites });
            }
            if i == j {
                return Err(Error::InvalidNetwork(format!("self-loop on site {i}")));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::InvalidNetwork(format!("duplicate edge {key:?}")));
            }
        }
        for &(i, _) in &self.onsite {
            if i == 0 || i > self.n_sites {
                return Err(Error::InvalidSite { site: i, n_sites: self.n_sites });
            }
        }
        for (name, sites) in &self.ports {
            let mut port_seen = HashSet::new();
            for &s in sites {
                if s == 0 || s > self.n_sites {
                    return Err(Error::InvalidSite { site: s, n_sites: self.n_sites });
                }
                if !port_seen.insert(s) {
                    return Err(Error::InvalidNetwork(format!("port {name} repeats site {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn add_edge(&mut self, i: usize, j: usize, amp: C64) {
        self.edges.push((i, j, amp));
    }

    pub fn set_port(&mut self, name: &str, sites: Vec<usize>) {
        self.ports.insert(name.to_string(), sites);
    }

    pub fn port(&self, name: &str) -> Option<&[usize]> {
        self.ports.get(name).map(|v| v.as_slice())
    }

    /// Total on-site energy at `site` (0 if never listed).
    pub fn onsite_energy(&self, site: usize) -> f64 {
        self.onsite.iter().filter(|&&(s, _)| s == site).map(|&(_, e)| e).sum()
    }

    /// Disjoint union: the sites of `other` are appended after ours and its
    /// port names gain `prefix`. Returns the site offset applied to `other`.
    pub fn disjoint_union(&mut self, other: &NetworkSpec, prefix: &str) -> usize {
        let offset = self.n_sites;
        self.n_sites += other.n_sites;
        for &(i, j, a) in &other.edges {
            self.edges.push((i + offset, j + offset, a));
        }
        for &(i, e) in &other.onsite {
            self.onsite.push((i + offset, e));
        }
        for (name, sites) in &other.ports {
            let shifted = sites.iter().map(|&s| s + offset).collect();
            self.ports.insert(format!("{prefix}{name}"), shifted);
        }
        offset
    }

    pub fn to_json(&self) -> Result<String> {
        let file = NetworkFile {
            n_sites: self.n_sites,
            edges: self.edges.iter().map(|&(i, j, a)| (i, j, a.re, a.im)).collect(),
            onsite: self.onsite.clone(),
            ports: self.ports.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(s)?;
        let spec = NetworkSpec {
            n_sites: file.n_sites,
            edges: file.edges.into_iter().map(|(i, j, re, im)| (i, j, C64::new(re, im))).collect(),
            onsite: file.onsite,
            ports: file.ports,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Hop amplitude of the perfect transfer chain between sites n and n+1:
/// (λ/2)√(n(N−n)). This is 2·J_n for the coupling J_n = λ√(n(N−n))/4.
pub fn pst_hop(n_sites: usize, n: usize, lambda: f64) -> f64 {
    0.5 * lambda * ((n * (n_sites - n)) as f64).sqrt()
}

/// Perfect state transfer chain of N sites. Ports "in" = [1], "out" = [N].
pub fn build_pst_chain(n_sites: usize, lambda: f64) -> Result<NetworkSpec> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("PST chain needs N >= 2, got {n_sites}")));
    }
    let mut spec = NetworkSpec::new(n_sites);
    for n in 1..n_sites {
        spec.add_edge(n, n + 1, C64::new(pst_hop(n_sites, n, lambda), 0.0));
    }
    spec.set_port("in", vec![1]);
    spec.set_port("out", vec![n_sites]);
    Ok(spec)
}

/// Linear-gradient on-site energies: entry n = (κ/2)(N+1−2n) + offset.
/// Traceless when offset = 0, so the vacuum (energy 0) stays a clean
/// phase reference.
pub fn gradient_diagonal(n_sites: usize, kappa: f64, offset: f64) -> Result<Vec<f64>> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("gradient needs N >= 2, got {n_sites}")));
    }
    Ok((1..=n_sites)
        .map(|n| 0.5 * kappa * (n_sites as f64 + 1.0 - 2.0 * n as f64) + offset)
        .collect())
}

/// Y-junction: two input sites feed site 3 with hop J_1-element/√2, then the
/// body of an N-site perfect chain. N+1 sites total; ports "in_pair" = [1, 2],
/// "out" = [N+1]. The symmetric input combination evolves exactly like site 1
/// of the N-site chain; the antisymmetric one is a dark state.
pub fn build_y_junction(n_sites: usize, lambda: f64) -> Result<NetworkSpec> {
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("Y junction needs N >= 3, got {n_sites}")));
    }
    let mut spec = NetworkSpec::new(n_sites + 1);
    let j1 = pst_hop(n_sites, 1, lambda) / 2f64.sqrt();
    spec.add_edge(1, 3, C64::new(j1, 0.0));
    spec.add_edge(2, 3, C64::new(j1, 0.0));
    // chain site n of the original maps to n+1 here
    for n in 2..n_sites {
        spec.add_edge(n + 1, n + 2, C64::new(pst_hop(n_sites, n, lambda), 0.0));
    }
    spec.set_port("in_pair", vec![1, 2]);
    spec.set_port("out", vec![n_sites + 1]);
    Ok(spec)
}

/// Perfect transfer ring with a threaded flux φ: sites A and B joined by two
/// parallel branches of N−2 sites, endpoint couplings scaled by 1/√2. Every
/// directed hop along a fixed orientation (A → upper branch → B → lower
/// branch → A) carries e^{iδ} with δ = φ/L, L = edge count of the graph.
/// Ports "in" = [A], "out" = [B].
pub fn build_flux_ring(n_sites: usize, lambda: f64, flux: f64) -> Result<NetworkSpec> {
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("flux ring needs N >= 3, got {n_sites}")));
    }
    let inner = n_sites - 2;
    let total = 2 + 2 * inner;
    // Site layout: A = 1, upper branch 2..=inner+1, B = inner+2,
    // lower branch inner+3..=2*inner+2.
    let a = 1;
    let b = inner + 2;
    let upper = |k: usize| 1 + k; // k = 1..=inner
    let lower = |k: usize| inner + 2 + k;
    let n_links = 2 * (n_sites - 1);
    let delta = flux / n_links as f64;
    let phase = C64::from_polar(1.0, delta);
    let sqrt2 = 2f64.sqrt();

    let mut spec = NetworkSpec::new(total);
    // Upper branch, oriented A -> B: the forward hop carries e^{i delta}.
    spec.add_edge(a, upper(1), C64::new(pst_hop(n_sites, 1, lambda) / sqrt2, 0.0) * phase);
    for k in 1..inner {
        spec.add_edge(upper(k), upper(k + 1), C64::new(pst_hop(n_sites, k + 1, lambda), 0.0) * phase);
    }
    spec.add_edge(upper(inner), b, C64::new(pst_hop(n_sites, n_sites - 1, lambda) / sqrt2, 0.0) * phase);
    // Lower branch, oriented B -> A (same ring orientation continues).
    spec.add_edge(b, lower(inner), C64::new(pst_hop(n_sites, n_sites - 1, lambda) / sqrt2, 0.0) * phase);
    for k in (1..inner).rev() {
        spec.add_edge(lower(k + 1), lower(k), C64::new(pst_hop(n_sites, k + 1, lambda), 0.0) * phase);
    }
    spec.add_edge(lower(1), a, C64::new(pst_hop(n_sites, 1, lambda) / sqrt2, 0.0) * phase);

    spec.set_port("in", vec![a]);
    spec.set_port("out", vec![b]);
    Ok(spec)
}

/// The 4-site Hadamard unit: straight hops +s, crossing L1→R2 = +s,
/// crossing L2→R1 = −s. In the rotated basis (|L1⟩±|L2⟩)/√2 it decouples
/// into two 2-site chains of strength √2·s (|+⟩ ↔ |R2⟩, |−⟩ ↔ |R1⟩), so at
/// t = π/(2√2·s) it maps |L1⟩ → −i(|R2⟩+|R1⟩)/√2 and
/// |L2⟩ → −i(|R2⟩−|R1⟩)/√2: a Hadamard (times the transfer phase −i) with
/// the output rails read in the crossed order rail0 = R2, rail1 = R1.
pub fn build_hadamard_unit(scale: f64) -> Result<NetworkSpec> {
    if scale <= 0.0 {
        return Err(Error::InvalidSize(format!("scale must be > 0, got {scale}")));
    }
    let s = C64::new(scale, 0.0);
    let mut spec = NetworkSpec::new(4);
    // Sites: L1 = 1, L2 = 2, R1 = 3, R2 = 4.
    spec.add_edge(1, 3, s);
    spec.add_edge(2, 4, s);
    spec.add_edge(1, 4, s);
    spec.add_edge(2, 3, -s);
    spec.set_port("rail0_in", vec![1]);
    spec.set_port("rail1_in", vec![2]);
    spec.set_port("rail0_out", vec![4]);
    spec.set_port("rail1_out", vec![3]);
    Ok(spec)
}

/// Arbitrary single-qubit rotation network: two rails of 6 sites with rail
/// couplings √5, 2, 3, 2, √5 (× λ/2), crossing units ±2 (× λ/2) replacing the
/// √8 sections of an N = 6 perfect chain, and phases β, γ, δ on the three
/// labeled upper-rail segments. Unitarily equivalent to two N = 6 perfect
/// chains; transfer time π/λ.
pub fn build_single_qubit_network(
    beta: f64,
    gamma_mid: f64,
    delta_out: f64,
    lambda: f64,
) -> Result<NetworkSpec> {
    let u = 0.5 * lambda;
    let r5 = 5f64.sqrt() * u;
    let two = 2.0 * u;
    let three = 3.0 * u;
    let mut spec = NetworkSpec::new(12);
    // Rail 0 (lower): sites 1..6. Rail 1 (upper): sites 7..12.
    spec.add_edge(1, 2, C64::new(r5, 0.0));
    spec.add_edge(2, 3, C64::new(two, 0.0));
    spec.add_edge(3, 4, C64::new(three, 0.0));
    spec.add_edge(4, 5, C64::new(two, 0.0));
    spec.add_edge(5, 6, C64::new(r5, 0.0));

    spec.add_edge(7, 8, C64::from_polar(r5, beta));
    spec.add_edge(8, 9, C64::new(two, 0.0));
    spec.add_edge(9, 10, C64::from_polar(three, gamma_mid));
    spec.add_edge(10, 11, C64::new(two, 0.0));
    spec.add_edge(11, 12, C64::from_polar(r5, delta_out));

    // Crossing units between columns 2-3 and 4-5.
    // Crossing units between columns 2-3 and 4-5, with opposite sign
    // orientation. In the column-pair gauge the first crossing block is
    // √8·Z·H and the second √8·H·Z, so the logical transfer at t = π/λ is
    // −i·D(δ)·H·D(γ)·H·D(β) with D(x) = diag(1, e^{ix}) — the Z factors
    // cancel around the diagonal D(γ). Same-orientation crossings would
    // leave stray π offsets on two of the phases.
    spec.add_edge(2, 9, C64::new(-two, 0.0));
    spec.add_edge(8, 3, C64::new(two, 0.0));
    spec.add_edge(4, 11, C64::new(two, 0.0));
    spec.add_edge(10, 5, C64::new(-two, 0.0));

    spec.set_port("rail0_in", vec![1]);
    spec.set_port("rail1_in", vec![7]);
    spec.set_port("rail0_out", vec![6]);
    spec.set_port("rail1_out", vec![12]);
    Ok(spec)
}

/// Two N-site perfect chains linked at position R: both rails carry
/// hop·cos(θ/2) across the link, the crossings carry hop·sin(θ/2)e^{±iφ}
/// with opposite signs. θ = 0 decouples the rails. Rail 0 = sites 1..N,
/// rail 1 = sites N+1..2N.
pub fn build_linked_chains(
    n_sites: usize,
    link: usize,
    theta: f64,
    phi: f64,
    lambda: f64,
) -> Result<NetworkSpec> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("linked chains need N >= 2, got {n_sites}")));
    }
    if link == 0 || link >= n_sites {
        return Err(Error::InvalidLink { r: link, max: n_sites - 1 });
    }
    let mut spec = NetworkSpec::new(2 * n_sites);
    let top = |n: usize| n;
    let bot = |n: usize| n_sites + n;
    for n in 1..n_sites {
        let hop = pst_hop(n_sites, n, lambda);
        if n == link {
            let straight = C64::new(hop * (theta / 2.0).cos(), 0.0);
            let cross = hop * (theta / 2.0).sin();
            spec.add_edge(top(n), top(n + 1), straight);
            spec.add_edge(bot(n), bot(n + 1), straight);
            // bottom R -> top R+1 carries e^{i phi}; top R -> bottom R+1 the
            // negated conjugate.
            spec.add_edge(bot(n), top(n + 1), C64::from_polar(cross, phi));
            spec.add_edge(top(n), bot(n + 1), -C64::from_polar(cross, -phi));
        } else {
            spec.add_edge(top(n), top(n + 1), C64::new(hop, 0.0));
            spec.add_edge(bot(n), bot(n + 1), C64::new(hop, 0.0));
        }
    }
    spec.set_port("rail0_in", vec![top(1)]);
    spec.set_port("rail0_out", vec![top(n_sites)]);
    spec.set_port("rail1_in", vec![bot(1)]);
    spec.set_port("rail1_out", vec![bot(n_sites)]);
    Ok(spec)
}

/// Add a Zeeman blocking detuning g_block to one site's on-site energy.
pub fn attach_onsite_block(spec: &NetworkSpec, site: usize, g_block: f64) -> Result<NetworkSpec> {
    if site == 0 || site > spec.n_sites {
        return Err(Error::InvalidSite { site, n_sites: spec.n_sites });
    }
    let mut out = spec.clone();
    if g_block != 0.0 {
        out.onsite.push((site, g_block));
    }
    Ok(out)
}

/// Binomial top-of-band amplitudes √(C(N−1, n−1)/2^{N−1}) of the perfect
/// chain; the maximum-eigenvalue eigenvector of λJ_x.
pub fn binomial_top_state(n_sites: usize) -> Vec<f64> {
    let norm = (2f64).powi(n_sites as i32 - 1).sqrt();
    (1..=n_sites).map(|n| binomial(n_sites - 1, n - 1).sqrt() / norm).collect()
}
