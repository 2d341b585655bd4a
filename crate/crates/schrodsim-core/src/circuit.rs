//! A small dense statevector emulator with the pieces the finite-difference
//! path needs: QFT circuits, phase-shift ladders diagonalizing the cyclic
//! shift operators, the phase-kickback diagonal unitary, and the
//! Schrödingerized evolution of the FD heat form.
//!
//! Qubits are labeled top-to-bottom starting at 0, with qubit 0 the most
//! significant bit of a basis index.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::exec;
use crate::grid::PGrid;
use crate::linalg::{CMat, CVec};
use crate::schrod::{Representation, SchrodState};

/// Dense statevectors refuse to grow beyond this many qubits.
pub const MAX_QUBITS: usize = 14;

const TAU: f64 = 2.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Gates and circuits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Phase { target: usize, theta: f64 },
    CPhase { target: usize, control: usize, theta: f64 },
    Swap(usize, usize),
}

impl Gate {
    fn max_qubit(&self) -> usize {
        match *self {
            Gate::H(t) | Gate::X(t) | Gate::Phase { target: t, .. } => t,
            Gate::CPhase { target, control, .. } => target.max(control),
            Gate::Swap(a, b) => a.max(b),
        }
    }

    fn inverse(&self) -> Gate {
        match *self {
            Gate::Phase { target, theta } => Gate::Phase { target, theta: -theta },
            Gate::CPhase { target, control, theta } => {
                Gate::CPhase { target, control, theta: -theta }
            }
            g => g,
        }
    }

    fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::CPhase { .. } | Gate::Swap(_, _))
    }
}

/// An ordered gate list over a fixed register width.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

/// Gate tallies reported per run; opaque units count emulated classical
/// maps (the kickback's reversible addition) that are not compiled to
/// elementary gates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub opaque: usize,
}

impl std::ops::Add for GateCounts {
    type Output = GateCounts;
    fn add(self, o: GateCounts) -> GateCounts {
        GateCounts {
            single_qubit: self.single_qubit + o.single_qubit,
            two_qubit: self.two_qubit + o.two_qubit,
            opaque: self.opaque + o.opaque,
        }
    }
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(CoreError::Resource(format!(
                "circuit width {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if let Some(g) = gates.iter().find(|g| g.max_qubit() >= n_qubits) {
            return Err(CoreError::Parameter(format!(
                "gate {g:?} addresses a qubit outside the {n_qubits}-qubit register"
            )));
        }
        Ok(Circuit { n_qubits, gates })
    }

    /// The textbook QFT: F|j⟩ = M^{-1/2} Σ_k e^{2πi jk/M} |k⟩.
    pub fn qft(n_qubits: usize) -> Result<Self> {
        let mut gates = Vec::new();
        for i in 0..n_qubits {
            gates.push(Gate::H(i));
            for j in 1..n_qubits - i {
                gates.push(Gate::CPhase {
                    target: i,
                    control: i + j,
                    theta: TAU / (1u64 << (j + 1)) as f64,
                });
            }
        }
        for i in 0..n_qubits / 2 {
            gates.push(Gate::Swap(i, n_qubits - 1 - i));
        }
        Circuit::new(n_qubits, gates)
    }

    /// The adjoint circuit: reversed order, inverted gates.
    pub fn inverted(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn counts(&self) -> GateCounts {
        let two = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        GateCounts { single_qubit: self.gates.len() - two, two_qubit: two, opaque: 0 }
    }

    /// The dense M×M unitary of this circuit (test- and verification-sized).
    pub fn dense_matrix(&self) -> Result<CMat> {
        let m = 1usize << self.n_qubits;
        let mut cols = Vec::with_capacity(m);
        for j in 0..m {
            let mut st = QuantumState::basis(self.n_qubits, j)?;
            st.apply_circuit(self)?;
            cols.push(CVec::from_vec(st.amplitudes));
        }
        Ok(CMat::from_columns(&cols))
    }
}

/// The phase-shift ladder U_{P,±} = ⊗_s P(±θ_s), θ_s = (2π/M)·2^{n_x−1−s}:
/// exactly n_x single-qubit gates, diagonal entries e^{±2πik/M}.
pub fn phase_ladder(n_x: usize, positive: bool) -> Result<(Circuit, Vec<C64>)> {
    if n_x == 0 {
        return Err(CoreError::Parameter("the ladder needs at least one qubit".into()));
    }
    let m = 1u64 << n_x;
    let sign = if positive { 1.0 } else { -1.0 };
    let gates = (0..n_x)
        .map(|s| Gate::Phase { target: s, theta: sign * TAU / m as f64 * (1u64 << (n_x - 1 - s)) as f64 })
        .collect();
    let circuit = Circuit::new(n_x, gates)?;
    let diagonal = (0..m).map(|k| (C64::i() * (sign * TAU * k as f64 / m as f64)).exp()).collect();
    Ok((circuit, diagonal))
}

// ---------------------------------------------------------------------------
// Statevector
// ---------------------------------------------------------------------------

/// A normalized statevector over `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub amplitudes: Vec<C64>,
    pub n_qubits: usize,
}

const PARALLEL_THRESHOLD: usize = 1 << 12;

impl QuantumState {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        Self::check_width(n_qubits)?;
        let m = 1usize << n_qubits;
        if index >= m {
            return Err(CoreError::Parameter(format!(
                "basis index {index} outside register of dimension {m}"
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); m];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes, n_qubits })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let m = amplitudes.len();
        if !m.is_power_of_two() {
            return Err(CoreError::Parameter(format!("amplitude count {m} is not a power of two")));
        }
        let n_qubits = m.trailing_zeros() as usize;
        Self::check_width(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(CoreError::Parameter(format!(
                "statevector norm is {norm}, expected 1 within 1e-12"
            )));
        }
        Ok(QuantumState { amplitudes, n_qubits })
    }

    fn check_width(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(CoreError::Resource(format!(
                "statevector width {n_qubits} outside 1..={MAX_QUBITS}; the dense emulator \
                 refuses rather than thrash"
            )));
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    fn bit(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.n_qubits {
            return Err(CoreError::Parameter(format!(
                "gate {gate:?} addresses a qubit outside the {}-qubit register",
                self.n_qubits
            )));
        }
        match gate {
            Gate::H(t) => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                self.paired_update(self.bit(t), |a, b| (r * (a + b), r * (a - b)));
            }
            Gate::X(t) => {
                self.paired_update(self.bit(t), |a, b| (b, a));
            }
            Gate::Phase { target, theta } => {
                let bit = self.bit(target);
                let ph = (C64::i() * theta).exp();
                self.elementwise(|idx, z| if idx & bit != 0 { z * ph } else { z });
            }
            Gate::CPhase { target, control, theta } => {
                if target == control {
                    return Err(CoreError::Parameter("control equals target".into()));
                }
                let mask = self.bit(target) | self.bit(control);
                let ph = (C64::i() * theta).exp();
                self.elementwise(|idx, z| if idx & mask == mask { z * ph } else { z });
            }
            Gate::Swap(a, b) => {
                if a == b {
                    return Ok(());
                }
                let (ba, bb) = (self.bit(a), self.bit(b));
                for i in 0..self.amplitudes.len() {
                    if i & ba != 0 && i & bb == 0 {
                        self.amplitudes.swap(i, i ^ ba ^ bb);
                    }
                }
            }
        }
        Ok(())
    }

    // update amplitude pairs (i, i|bit); blocks of 2*bit are contiguous and
    // disjoint, so the parallel schedule cannot change the result
    fn paired_update<F>(&mut self, bit: usize, f: F)
    where
        F: Fn(C64, C64) -> (C64, C64) + Sync + Send,
    {
        let block = 2 * bit;
        if self.amplitudes.len() >= PARALLEL_THRESHOLD {
            exec::for_each_chunk(&mut self.amplitudes, block, |_, chunk| {
                let (lo, hi) = chunk.split_at_mut(bit);
                for j in 0..bit {
                    let (a, b) = f(lo[j], hi[j]);
                    lo[j] = a;
                    hi[j] = b;
                }
            });
        } else {
            for chunk in self.amplitudes.chunks_mut(block) {
                let (lo, hi) = chunk.split_at_mut(bit);
                for j in 0..bit {
                    let (a, b) = f(lo[j], hi[j]);
                    lo[j] = a;
                    hi[j] = b;
                }
            }
        }
    }

    fn elementwise<F>(&mut self, f: F)
    where
        F: Fn(usize, C64) -> C64 + Sync + Send,
    {
        if self.amplitudes.len() >= PARALLEL_THRESHOLD {
            exec::for_each_chunk(&mut self.amplitudes, 1024, |start, chunk| {
                for (j, z) in chunk.iter_mut().enumerate() {
                    *z = f(start + j, *z);
                }
            });
        } else {
            for (i, z) in self.amplitudes.iter_mut().enumerate() {
                *z = f(i, *z);
            }
        }
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        self.apply_circuit_offset(circuit, 0)
    }

    /// Apply a circuit to the sub-register starting at `offset` (the
    /// circuit's qubit s acts on global qubit s + offset).
    pub fn apply_circuit_offset(&mut self, circuit: &Circuit, offset: usize) -> Result<()> {
        if offset + circuit.n_qubits > self.n_qubits {
            return Err(CoreError::Parameter(format!(
                "circuit of width {} at offset {offset} exceeds the {}-qubit register",
                circuit.n_qubits, self.n_qubits
            )));
        }
        for g in &circuit.gates {
            let shifted = match *g {
                Gate::H(t) => Gate::H(t + offset),
                Gate::X(t) => Gate::X(t + offset),
                Gate::Phase { target, theta } => Gate::Phase { target: target + offset, theta },
                Gate::CPhase { target, control, theta } => {
                    Gate::CPhase { target: target + offset, control: control + offset, theta }
                }
                Gate::Swap(a, b) => Gate::Swap(a + offset, b + offset),
            };
            self.apply(shifted)?;
        }
        Ok(())
    }

    /// Multiply amplitude k by phases[k]; `phases` must be unit-modulus.
    pub fn apply_diagonal(&mut self, phases: &[C64]) -> Result<()> {
        if phases.len() != self.amplitudes.len() {
            return Err(CoreError::Dimension(format!(
                "diagonal of length {} against a state of dimension {}",
                phases.len(),
                self.amplitudes.len()
            )));
        }
        if phases.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
            return Err(CoreError::Parameter("diagonal entries must have unit modulus".into()));
        }
        self.elementwise(|i, z| z * phases[i]);
        Ok(())
    }

    /// Relabel basis states: amplitude at i moves to perm[i].
    pub fn apply_permutation(&mut self, perm: &[usize]) -> Result<()> {
        let m = self.amplitudes.len();
        if perm.len() != m {
            return Err(CoreError::Dimension(format!(
                "permutation of length {} against a state of dimension {m}",
                perm.len()
            )));
        }
        let mut seen = vec![false; m];
        for &p in perm {
            if p >= m || seen[p] {
                return Err(CoreError::Parameter("not a permutation of the basis".into()));
            }
            seen[p] = true;
        }
        let mut out = vec![C64::new(0.0, 0.0); m];
        for (i, &p) in perm.iter().enumerate() {
            out[p] = self.amplitudes[i];
        }
        self.amplitudes = out;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Shift operators and finite differences
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftVariant {
    /// Unitary wraparound shift; `plus` maps |j⟩ → |j+1 mod M⟩ (the prose
    /// convention — the diagonalization lemma is stated for this one).
    Cyclic,
    /// The truncated banded matrices S^± = Σ_{j=1}^{M−1}|j∓1⟩⟨j∓0|…: no
    /// wrap, nilpotent, sub-unitary; used by the Dirichlet Laplacian.
    DirichletTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Plus,
    Minus,
}

/// Build the M×M shift matrix. Note the source convention mismatch: the
/// cyclic `plus` follows the prose action |j⟩ → |j+1⟩, while the truncated
/// `plus` is the written matrix Σ|j−1⟩⟨j| (superdiagonal). Their sum in the
/// Laplacian is the same either way.
pub fn build_shift(m: usize, variant: ShiftVariant, direction: ShiftDirection) -> Result<CMat> {
    if m < 2 {
        return Err(CoreError::Parameter(format!("shift needs M >= 2, got {m}")));
    }
    let one = C64::new(1.0, 0.0);
    let mut s = CMat::zeros(m, m);
    match (variant, direction) {
        (ShiftVariant::Cyclic, ShiftDirection::Plus) => {
            for j in 0..m {
                s[((j + 1) % m, j)] = one;
            }
        }
        (ShiftVariant::Cyclic, ShiftDirection::Minus) => {
            for j in 0..m {
                s[((j + m - 1) % m, j)] = one;
            }
        }
        (ShiftVariant::DirichletTruncated, ShiftDirection::Plus) => {
            for j in 1..m {
                s[(j - 1, j)] = one;
            }
        }
        (ShiftVariant::DirichletTruncated, ShiftDirection::Minus) => {
            for j in 1..m {
                s[(j, j - 1)] = one;
            }
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

/// The finite-difference Laplacian (S⁻ + S⁺ − 2I)/h² with ghost values from
/// the boundary condition.
pub fn build_fd_laplacian(m: usize, h: f64, bc: BoundaryCondition) -> Result<CMat> {
    if m < 2 {
        return Err(CoreError::Parameter(format!("Laplacian needs M >= 2, got {m}")));
    }
    if !(h > 0.0) {
        return Err(CoreError::Parameter(format!("mesh width must be positive, got {h}")));
    }
    let inv = 1.0 / (h * h);
    let mut d = CMat::zeros(m, m);
    for j in 0..m {
        d[(j, j)] = C64::new(-2.0 * inv, 0.0);
        if j + 1 < m {
            d[(j, j + 1)] = C64::new(inv, 0.0);
            d[(j + 1, j)] = C64::new(inv, 0.0);
        }
    }
    match bc {
        BoundaryCondition::Dirichlet => {}
        BoundaryCondition::Neumann => {
            // ghost u_{-1} = u_0 and u_M = u_{M-1}
            d[(0, 0)] = C64::new(-inv, 0.0);
            d[(m - 1, m - 1)] = C64::new(-inv, 0.0);
        }
        BoundaryCondition::Periodic => {
            d[(0, m - 1)] += C64::new(inv, 0.0);
            d[(m - 1, 0)] += C64::new(inv, 0.0);
        }
    }
    Ok(d)
}

/// Eigenvalues −(4/h²)sin²(πk/M) of the periodic FD Laplacian, k = 0..M−1.
pub fn periodic_laplacian_eigenvalues(m: usize, h: f64) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let s = (std::f64::consts::PI * k as f64 / m as f64).sin();
            -4.0 / (h * h) * s * s
        })
        .collect()
}

/// Max entrywise error of F†U_{P,±}F against the cyclic shifts, with F
/// built by running the QFT circuit on the emulator.
pub fn verify_shift_diagonalization(n_x: usize) -> Result<f64> {
    if n_x == 0 || n_x > 6 {
        return Err(CoreError::Parameter(format!("n_x must lie in 1..=6, got {n_x}")));
    }
    let m = 1usize << n_x;
    let f = Circuit::qft(n_x)?.dense_matrix()?;
    let mut worst: f64 = 0.0;
    for positive in [true, false] {
        let (_, diag) = phase_ladder(n_x, positive)?;
        let up = CMat::from_diagonal(&CVec::from_vec(diag));
        let got = f.adjoint() * up * &f;
        let want = build_shift(
            m,
            ShiftVariant::Cyclic,
            if positive { ShiftDirection::Plus } else { ShiftDirection::Minus },
        )?;
        worst = worst.max(crate::linalg::max_abs(&(got - want)));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Phase kickback
// ---------------------------------------------------------------------------

/// Result of running the kickback circuit: the transformed system register
/// and the gate tally (the reversible addition counts as one opaque unit).
pub struct KickbackOutcome {
    pub state: QuantumState,
    pub counts: GateCounts,
    /// Squared amplitude left on the ancilla's prepared state |1⟩_n; equals
    /// 1 up to roundoff because the ancilla uncomputes exactly.
    pub ancilla_return: f64,
}

/// The diagonal phases e^{-2πi q_x / M} the kickback realizes.
pub fn kickback_phases(q_table: &[u64], n: usize) -> Result<Vec<C64>> {
    let m = 1u64 << n;
    if q_table.len() != m as usize {
        return Err(CoreError::Dimension(format!(
            "q-table has {} entries for an {n}-qubit register (need {m})",
            q_table.len()
        )));
    }
    if let Some(&q) = q_table.iter().find(|&&q| q >= m) {
        return Err(CoreError::Parameter(format!(
            "q = {q} exceeds M-1 = {}; the scaling assumption 2πV(x) <= M-1 is violated",
            m - 1
        )));
    }
    Ok(q_table.iter().map(|&q| (-C64::i() * (TAU * q as f64 / m as f64)).exp()).collect())
}

/// Apply the diagonal unitary diag(e^{-2πi q_x/M}) to the system register by
/// phase kickback: ancilla prepared in |1⟩_n, QFT, modular addition of q_x
/// into the ancilla, inverse QFT. The addition is emulated at the
/// permutation level, as a single opaque reversible-arithmetic unit.
pub fn diagonal_unitary_kickback(system: &QuantumState, q_table: &[u64]) -> Result<KickbackOutcome> {
    let n = system.n_qubits;
    let m = 1usize << n;
    kickback_phases(q_table, n)?; // validates the table
    if 2 * n > MAX_QUBITS {
        return Err(CoreError::Resource(format!(
            "kickback needs {} qubits (system {n} + ancilla {n}), cap is {MAX_QUBITS}",
            2 * n
        )));
    }

    // joint register: system on the high bits, ancilla |1⟩_n on the low bits
    let mut joint = vec![C64::new(0.0, 0.0); m * m];
    for (x, amp) in system.amplitudes.iter().enumerate() {
        joint[x * m + 1] = *amp;
    }
    let mut joint = QuantumState { amplitudes: joint, n_qubits: 2 * n };

    let qft = Circuit::qft(n)?;
    joint.apply_circuit_offset(&qft, n)?;

    // V|x, y> = |x, y ⊕ q_x> (addition modulo M)
    let mut perm = vec![0usize; m * m];
    for x in 0..m {
        let q = q_table[x] as usize;
        for y in 0..m {
            perm[x * m + y] = x * m + ((y + q) & (m - 1));
        }
    }
    joint.apply_permutation(&perm)?;

    joint.apply_circuit_offset(&qft.inverted(), n)?;

    // the ancilla returns to |1⟩_n; read the system register off that slice
    let mut out = vec![C64::new(0.0, 0.0); m];
    let mut on_ancilla = 0.0;
    for x in 0..m {
        out[x] = joint.amplitudes[x * m + 1];
        on_ancilla += out[x].norm_sqr();
    }
    let counts = qft.counts() + qft.counts() + GateCounts { opaque: 1, ..Default::default() };
    Ok(KickbackOutcome {
        state: QuantumState { amplitudes: out, n_qubits: n },
        counts,
        ancilla_return: on_ancilla,
    })
}

// ---------------------------------------------------------------------------
// Schrödingerized FD heat evolution
// ---------------------------------------------------------------------------

/// Evolve the Schrödingerized FD heat system d/dt w̃ = −i(D^Δ ⊗ D_μ) w̃ for
/// the periodic Laplacian, as QFTs plus one diagonal unitary on an
/// (n_x + n_p)-qubit register. Returns the physical (x, p) state at time T
/// (unnormalized, ready for pointwise recovery) and the gate tally.
pub fn fd_heat_schrodingerized_evolve(
    n_x: usize,
    n_p: usize,
    h: f64,
    grid: &PGrid,
    psi0: &[C64],
    t: f64,
) -> Result<(SchrodState, GateCounts)> {
    let mx = 1usize << n_x;
    let mp = 1usize << n_p;
    if n_x + n_p > MAX_QUBITS {
        return Err(CoreError::Resource(format!(
            "register needs {} qubits, cap is {MAX_QUBITS}",
            n_x + n_p
        )));
    }
    if grid.np != mp {
        return Err(CoreError::Dimension(format!(
            "grid has {} points but the p register holds {mp}",
            grid.np
        )));
    }
    if psi0.len() != mx {
        return Err(CoreError::Dimension(format!(
            "initial data has {} entries but the x register holds {mx}",
            psi0.len()
        )));
    }
    if !(h > 0.0) {
        return Err(CoreError::Parameter(format!("mesh width must be positive, got {h}")));
    }

    // warped product state w(x_j, p_k) = psi0_j e^{-|p_k|}
    let mut amps = vec![C64::new(0.0, 0.0); mx * mp];
    for j in 0..mx {
        for k in 0..mp {
            amps[j * mp + k] = psi0[j] * (-grid.point(k).abs()).exp();
        }
    }
    let scale: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale <= 0.0 {
        return Err(CoreError::DegenerateState("initial state has zero norm".into()));
    }
    for a in amps.iter_mut() {
        *a /= scale;
    }
    let mut state = QuantumState { amplitudes: amps, n_qubits: n_x + n_p };

    // x register into the diagonal basis of the cyclic shifts (QFT), p
    // register into DFT coefficients (inverse QFT = the analysis transform)
    let qft_x = Circuit::qft(n_x)?;
    let qft_p = Circuit::qft(n_p)?;
    state.apply_circuit_offset(&qft_x, 0)?;
    state.apply_circuit_offset(&qft_p.inverted(), n_x)?;

    // diagonal phases e^{i d_k μ_b T}: H1 = -diag(d_k) and the per-mode phase
    // is e^{-i H1 μ t}
    let d: Vec<f64> = periodic_laplacian_eigenvalues(mx, h).iter().map(|x| -x).collect();
    let span = grid.right - grid.left;
    let mut phases = vec![C64::new(0.0, 0.0); mx * mp];
    for k in 0..mx {
        for b in 0..mp {
            let l = if b < mp / 2 { b as f64 } else { b as f64 - mp as f64 };
            let mu = TAU * l / span;
            phases[k * mp + b] = (C64::i() * d[k] * mu * t).exp();
        }
    }
    state.apply_diagonal(&phases)?;

    state.apply_circuit_offset(&qft_p, n_x)?;
    state.apply_circuit_offset(&qft_x.inverted(), 0)?;

    // back to physical amplitudes with the original scale, as an n×Np state
    let mut data = CMat::zeros(mx, mp);
    for j in 0..mx {
        for k in 0..mp {
            data[(j, k)] = state.amplitudes[j * mp + k] * scale;
        }
    }
    let counts = qft_x.counts() + qft_x.counts() + qft_p.counts() + qft_p.counts();
    Ok((SchrodState { data, representation: Representation::PhysicalP, time: t }, counts))
}

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------

/// One gate per line: `GATE target [control] [angle]`, angles printed with
/// 17 significant digits.
pub fn circuit_to_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    for g in &circuit.gates {
        match *g {
            Gate::H(t) => out.push_str(&format!("H {t}\n")),
            Gate::X(t) => out.push_str(&format!("X {t}\n")),
            Gate::Phase { target, theta } => out.push_str(&format!("P {target} {theta:.16e}\n")),
            Gate::CPhase { target, control, theta } => {
                out.push_str(&format!("CP {target} {control} {theta:.16e}\n"))
            }
            Gate::Swap(a, b) => out.push_str(&format!("SWAP {a} {b}\n")),
        }
    }
    out
}

pub fn circuit_from_text(n_qubits: usize, text: &str) -> Result<Circuit> {
    let mut gates = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| {
            CoreError::Parameter(format!("line {}: {what}: {line:?}", lineno + 1))
        };
        let qubit = |s: &str| s.parse::<usize>().map_err(|_| bad("bad qubit index"));
        let angle = |s: &str| s.parse::<f64>().map_err(|_| bad("bad angle"));
        let gate = match toks.as_slice() {
            ["H", t] => Gate::H(qubit(t)?),
            ["X", t] => Gate::X(qubit(t)?),
            ["P", t, a] => Gate::Phase { target: qubit(t)?, theta: angle(a)? },
            ["CP", t, c, a] => {
                Gate::CPhase { target: qubit(t)?, control: qubit(c)?, theta: angle(a)? }
            }
            ["SWAP", a, b] => Gate::Swap(qubit(a)?, qubit(b)?),
            _ => return Err(bad("unrecognized gate line")),
        };
        gates.push(gate);
    }
    Circuit::new(n_qubits, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qft_matches_dense_dft() {
        for n in 1..=5usize {
            let m = 1usize << n;
            let f = Circuit::qft(n).unwrap().dense_matrix().unwrap();
            let scale = 1.0 / (m as f64).sqrt();
            for j in 0..m {
                for k in 0..m {
                    let want = (C64::i() * (TAU * (j * k) as f64 / m as f64)).exp() * scale;
                    assert!((f[(k, j)] - want).norm() <= 1e-12, "n={n} ({k},{j})");
                }
            }
        }
    }

    #[test]
    fn qft_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [3usize, 6, 10] {
            let m = 1usize << n;
            let mut amps: Vec<C64> =
                (0..m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in amps.iter_mut() {
                *a /= norm;
            }
            let st0 = QuantumState::from_amplitudes(amps).unwrap();
            let mut st = st0.clone();
            let qft = Circuit::qft(n).unwrap();
            st.apply_circuit(&qft).unwrap();
            assert!((st.norm() - 1.0).abs() <= 1e-12);
            st.apply_circuit(&qft.inverted()).unwrap();
            let err: f64 = st
                .amplitudes
                .iter()
                .zip(&st0.amplitudes)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12, "n={n} err={err:.2e}");
        }
    }

    #[test]
    fn ladder_diagonal_entries() {
        // n_x = 1: U_{P,+} = diag(1, -1)
        let (circ, diag) = phase_ladder(1, true).unwrap();
        assert_eq!(circ.gates.len(), 1);
        assert!((diag[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((diag[1] - c(-1.0, 0.0)).norm() < 1e-15);

        // n_x = 2, k = 3: e^{i 3π/2}
        let (circ, diag) = phase_ladder(2, true).unwrap();
        assert_eq!(circ.gates.len(), 2);
        let want = (C64::i() * (1.5 * std::f64::consts::PI)).exp();
        assert!((diag[3] - want).norm() < 1e-14);

        // ladders with opposite signs cancel
        let (_, plus) = phase_ladder(3, true).unwrap();
        let (_, minus) = phase_ladder(3, false).unwrap();
        for (a, b) in plus.iter().zip(minus.iter()) {
            assert!((a * b - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn ladder_circuit_matches_its_diagonal() {
        for n in 1..=4usize {
            let (circ, diag) = phase_ladder(n, true).unwrap();
            let dense = circ.dense_matrix().unwrap();
            for k in 0..1usize << n {
                assert!((dense[(k, k)] - diag[k]).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn shift_matrices() {
        // cyclic plus wraps |3> -> |0> at M = 4
        let s = build_shift(4, ShiftVariant::Cyclic, ShiftDirection::Plus).unwrap();
        assert_eq!(s[(0, 3)], c(1.0, 0.0));
        assert_eq!(s[(1, 0)], c(1.0, 0.0));

        // truncated: 4th power vanishes
        let s = build_shift(4, ShiftVariant::DirichletTruncated, ShiftDirection::Plus).unwrap();
        let s4 = &s * &s * &s * &s;
        assert!(linalg::max_abs(&s4) == 0.0);

        // cyclic S+ = (S-)† = (S-)^{-1}
        let sp = build_shift(8, ShiftVariant::Cyclic, ShiftDirection::Plus).unwrap();
        let sm = build_shift(8, ShiftVariant::Cyclic, ShiftDirection::Minus).unwrap();
        assert!(linalg::max_abs(&(&sp - sm.adjoint())) == 0.0);
        assert!(linalg::max_abs(&(sp * sm - CMat::identity(8, 8))) == 0.0);
    }

    #[test]
    fn shift_diagonalization_identity() {
        for n in 1..=6 {
            let err = verify_shift_diagonalization(n).unwrap();
            assert!(err <= 1e-12, "n_x = {n}: err = {err:.2e}");
        }
        // n_x = 1 closed form: F† diag(1,-1) F = [[0,1],[1,0]]
        let f = Circuit::qft(1).unwrap().dense_matrix().unwrap();
        let up = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let s = f.adjoint() * up * f;
        assert!((s[(0, 1)] - c(1.0, 0.0)).norm() <= 1e-14);
        assert!((s[(1, 0)] - c(1.0, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn shift_circuit_moves_basis_states() {
        // QFT, ladder, inverse QFT maps |j> to |j+1 mod M>
        let n = 3;
        let m = 1usize << n;
        let qft = Circuit::qft(n).unwrap();
        let (ladder, _) = phase_ladder(n, true).unwrap();
        for j in 0..m {
            let mut st = QuantumState::basis(n, j).unwrap();
            st.apply_circuit(&qft).unwrap();
            st.apply_circuit(&ladder).unwrap();
            st.apply_circuit(&qft.inverted()).unwrap();
            let want = QuantumState::basis(n, (j + 1) % m).unwrap();
            assert!(st.fidelity(&want) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn fd_laplacian_variants() {
        let d = build_fd_laplacian(4, 1.0, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(d[(0, 0)], c(-2.0, 0.0));
        assert_eq!(d[(0, 1)], c(1.0, 0.0));
        assert_eq!(d[(0, 3)], c(0.0, 0.0));

        // periodic eigenvalues match the sine formula
        let m = 16;
        let d = build_fd_laplacian(m, 0.25, BoundaryCondition::Periodic).unwrap();
        let (vals, _) = linalg::eigh(&d).unwrap();
        let mut want = periodic_laplacian_eigenvalues(m, 0.25);
        want.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(want.iter()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        // constant vector in the kernel for periodic and neumann
        let ones = CVec::from_element(m, c(1.0, 0.0));
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Neumann] {
            let d = build_fd_laplacian(m, 0.5, bc).unwrap();
            assert!((&d * &ones).norm() <= 1e-13);
        }

        // dirichlet and periodic are negative semi-definite
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Periodic] {
            let d = build_fd_laplacian(12, 0.3, bc).unwrap();
            let (vals, _) = linalg::eigh(&d).unwrap();
            assert!(*vals.last().unwrap() <= 1e-10);
        }
    }

    #[test]
    fn kickback_identity_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 3;
        let m = 1usize << n;
        let mut amps: Vec<C64> =
            (0..m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        let st = QuantumState::from_amplitudes(amps).unwrap();
        let out = diagonal_unitary_kickback(&st, &vec![0; m]).unwrap();
        assert!(out.state.fidelity(&st) >= 1.0 - 1e-12);
        assert!((out.ancilla_return - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kickback_single_rotation_step() {
        // n = 3, q = 1 on one basis state: phase e^{-i 2π/8}
        let n = 3;
        let m = 1usize << n;
        let st = QuantumState::basis(n, 5).unwrap();
        let mut q = vec![0u64; m];
        q[5] = 1;
        let out = diagonal_unitary_kickback(&st, &q).unwrap();
        let want = (-C64::i() * (TAU / 8.0)).exp();
        assert!((out.state.amplitudes[5] - want).norm() <= 1e-13);
    }

    #[test]
    fn kickback_matches_dense_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 4, 6] {
            let m = 1usize << n;
            let mut amps: Vec<C64> =
                (0..m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for a in amps.iter_mut() {
                *a /= norm;
            }
            let st = QuantumState::from_amplitudes(amps).unwrap();
            let q: Vec<u64> = (0..m).map(|_| rng.gen_range(0..m as u64)).collect();
            let out = diagonal_unitary_kickback(&st, &q).unwrap();
            let mut want = st.clone();
            want.apply_diagonal(&kickback_phases(&q, n).unwrap()).unwrap();
            assert!(out.state.fidelity(&want) >= 1.0 - 1e-12, "n = {n}");
        }
    }

    #[test]
    fn kickback_rejects_out_of_range_table() {
        let st = QuantumState::basis(2, 0).unwrap();
        assert!(matches!(
            diagonal_unitary_kickback(&st, &[0, 4, 0, 0]),
            Err(CoreError::Parameter(_))
        ));
        // 2n over the cap
        let st = QuantumState::basis(8, 0).unwrap();
        assert!(matches!(
            diagonal_unitary_kickback(&st, &vec![0; 256]),
            Err(CoreError::Resource(_))
        ));
    }

    #[test]
    fn state_cap_enforced() {
        assert!(matches!(QuantumState::basis(15, 0), Err(CoreError::Resource(_))));
    }

    #[test]
    fn gate_norm_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 6;
        let m = 1usize << n;
        let mut amps: Vec<C64> =
            (0..m).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        let mut st = QuantumState::from_amplitudes(amps).unwrap();
        let gates = [
            Gate::H(0),
            Gate::X(3),
            Gate::Phase { target: 2, theta: 0.7 },
            Gate::CPhase { target: 1, control: 4, theta: -1.1 },
            Gate::Swap(0, 5),
        ];
        for g in gates {
            st.apply(g).unwrap();
            assert!((st.norm() - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn fd_evolution_matches_dense_reference() {
        use crate::linear_core::reference_evolve;
        let n_x = 4;
        let n_p = 7;
        let mx = 1usize << n_x;
        let h = 1.0 / mx as f64;
        let grid = PGrid::new(-6.0, 26.0, 1 << n_p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi0: Vec<C64> =
            (0..mx).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let t = 0.002; // diffusion on this mesh is stiff: d_max ~ 4/h^2
        let (state, counts) = fd_heat_schrodingerized_evolve(n_x, n_p, h, &grid, &psi0, t).unwrap();
        assert!(counts.two_qubit > 0);

        let d = build_fd_laplacian(mx, h, BoundaryCondition::Periodic).unwrap();
        let want = reference_evolve(&d, &CVec::from_vec(psi0.clone()), t).unwrap();
        let kstar = grid.index_at_or_above(5.0 * grid.dp).unwrap();
        let restored = crate::recovery::restore_pointwise(&state, &grid, 0.0, grid.point(kstar)).unwrap();
        let err = (restored - &want).norm() / want.norm();
        assert!(err <= 5.0 * grid.dp, "err = {err:.3e}");
    }

    #[test]
    fn fd_single_mode_decay() {
        // one x-Fourier mode decays by e^{-d_k T} after recovery
        let n_x = 3;
        let n_p = 7;
        let mx = 1usize << n_x;
        let h = 0.5;
        let grid = PGrid::new(-6.0, 26.0, 1 << n_p).unwrap();
        let k_mode = 2usize;
        let psi0: Vec<C64> = (0..mx)
            .map(|j| (C64::i() * (TAU * (k_mode * j) as f64 / mx as f64)).exp())
            .collect();
        let t = 0.05;
        let (state, _) = fd_heat_schrodingerized_evolve(n_x, n_p, h, &grid, &psi0, t).unwrap();
        let d_k = 4.0 / (h * h) * (std::f64::consts::PI * k_mode as f64 / mx as f64).sin().powi(2);
        let kstar = grid.index_at_or_above(5.0 * grid.dp).unwrap();
        let restored =
            crate::recovery::restore_pointwise(&state, &grid, 0.0, grid.point(kstar)).unwrap();
        let want_scale = (-d_k * t).exp();
        for (r, p0) in restored.iter().zip(psi0.iter()) {
            assert!((r - p0 * want_scale).norm() <= 5.0 * grid.dp);
        }
    }

    #[test]
    fn text_round_trip() {
        let circ = Circuit::qft(4).unwrap();
        let text = circuit_to_text(&circ);
        let back = circuit_from_text(4, &text).unwrap();
        assert_eq!(circ.gates.len(), back.gates.len());
        for (a, b) in circ.gates.iter().zip(back.gates.iter()) {
            match (a, b) {
                (
                    Gate::CPhase { target: t1, control: c1, theta: a1 },
                    Gate::CPhase { target: t2, control: c2, theta: a2 },
                ) => {
                    assert_eq!((t1, c1), (t2, c2));
                    assert_eq!(a1, a2); // 17 significant digits round-trip f64 exactly
                }
                _ => assert_eq!(a, b),
            }
        }
        assert!(circuit_from_text(4, "HADAMARD 0").is_err());
        assert!(circuit_from_text(2, "H 5").is_err());
    }

    #[test]
    fn gate_count_accounting() {
        let n = 5;
        let qft = Circuit::qft(n).unwrap();
        let counts = qft.counts();
        assert_eq!(counts.single_qubit, n);
        assert_eq!(counts.two_qubit, n * (n - 1) / 2 + n / 2);
        let (ladder, _) = phase_ladder(n, false).unwrap();
        assert_eq!(ladder.counts().single_qubit, n);
        assert_eq!(ladder.counts().two_qubit, 0);
    }
}
