//! QFT and Fourier-basis addition circuit builders.
//!
//! Conventions: within a register the first qubit is most significant, and
//! after the QFT that qubit carries the full binary fraction `0.a₁a₂…a_n`.
//! No terminal SWAP layer is emitted; the inverse QFT undoes the same
//! ordering.

use crate::dyadic::Dyadic;
use crate::error::{Result, SimError};
use crate::gate::{Circuit, Control, Gate, GateKind};

/// QFT over `register` (MSB first): basis `|a⟩` becomes the product of phase
/// qubits where qubit `j` carries the fraction `0.a_{j+1}…a_n`.
pub fn build_qft(register: &[usize]) -> Result<Circuit> {
    if register.is_empty() {
        return Err(SimError::EmptyRegister);
    }
    let n = register.len();
    let mut circuit = Circuit::new();
    for j in 0..n {
        circuit.push(Gate::h(register[j]));
        for m in j + 1..n {
            let k = (m - j + 1) as u8;
            circuit.push(Gate::rk(k, register[j]).controlled(Control::pos(register[m])));
        }
    }
    Ok(circuit)
}

/// Exact inverse of [`build_qft`] on the same register.
pub fn build_inv_qft(register: &[usize]) -> Result<Circuit> {
    Ok(build_qft(register)?.inverted())
}

/// Options for the Fourier adder.
#[derive(Clone, Copy, Default)]
pub struct AdderOpts {
    /// Subtract instead of add (emit `-R_k` gates).
    pub subtract: bool,
    /// Drop rotations finer than `1/2^{max_k}`, giving the truncated
    /// approximate adder. `None` builds at full precision.
    pub max_k: Option<u8>,
}

/// Adds the basis register `src` into the Fourier-form register `acc`,
/// modulo `2^{acc.len()}`. `src` may be narrower than `acc`; `shift` scales
/// the added value by `2^{shift}`. Every emitted rotation picks up
/// `extra_controls` on top of its source-bit control.
pub fn fourier_add_register(
    circuit: &mut Circuit,
    acc: &[usize],
    src: &[usize],
    shift: usize,
    opts: AdderOpts,
    extra_controls: &[Control],
) {
    let n = acc.len() as i64;
    let m = src.len() as i64;
    for j in 0..acc.len() {
        for i in 0..src.len() {
            // src bit i has weight 2^{m-1-i+shift}; acc qubit j carries the
            // fraction with denominator 2^{n-j}
            let k = n - j as i64 - (m - 1 - i as i64) - shift as i64;
            if k < 1 {
                continue; // whole turns
            }
            if let Some(max_k) = opts.max_k {
                if k > max_k as i64 {
                    continue;
                }
            }
            let kind = if opts.subtract { GateKind::NegRk(k as u8) } else { GateKind::Rk(k as u8) };
            let gate = Gate { kind, targets: vec![acc[j]], controls: vec![Control::pos(src[i])] }
                .with_controls(extra_controls);
            circuit.push(gate);
        }
    }
}

/// Adds the classical constant `value · 2^{shift}` into the Fourier-form
/// register `acc`, one rotation per set bit of the constant.
pub fn fourier_add_const(
    circuit: &mut Circuit,
    acc: &[usize],
    value: u64,
    shift: usize,
    opts: AdderOpts,
    controls: &[Control],
) {
    let n = acc.len() as i64;
    for j in 0..acc.len() {
        let mut bit = 0;
        while (value >> bit) != 0 {
            if (value >> bit) & 1 == 1 {
                let k = n - j as i64 - bit - shift as i64;
                if k >= 1 && opts.max_k.map_or(true, |mk| k <= mk as i64) {
                    let kind =
                        if opts.subtract { GateKind::NegRk(k as u8) } else { GateKind::Rk(k as u8) };
                    circuit.push(Gate {
                        kind,
                        targets: vec![acc[j]],
                        controls: controls.to_vec(),
                    });
                }
            }
            bit += 1;
        }
    }
}

/// The Fourier adder: with `a` already in Fourier form and `b` a basis
/// register of equal width, each `a` qubit gains `b`'s binary fraction at the
/// right offset; after the inverse QFT, `a` reads `(a + b) mod 2^n`.
pub fn build_adder(a: &[usize], b: &[usize]) -> Result<Circuit> {
    build_adder_with(a, b, AdderOpts::default())
}

pub fn build_adder_with(a: &[usize], b: &[usize], opts: AdderOpts) -> Result<Circuit> {
    if a.is_empty() || b.is_empty() {
        return Err(SimError::EmptyRegister);
    }
    if a.len() != b.len() {
        return Err(SimError::WidthMismatch(a.len(), b.len()));
    }
    let mut circuit = Circuit::new();
    fourier_add_register(&mut circuit, a, b, 0, opts, &[]);
    Ok(circuit)
}

/// Regroups a pure controlled-phase circuit into parallel rounds: round `k`
/// holds every `R_k`, and gates within a round touch pairwise-disjoint
/// qubits. All such gates are diagonal, so they commute and any execution
/// order gives the identical state.
pub fn schedule_parallel(circuit: &Circuit) -> Result<Circuit> {
    let mut keys = Vec::with_capacity(circuit.gates.len());
    for gate in &circuit.gates {
        if gate.kind.phase().is_none() {
            return Err(SimError::NonCommuting);
        }
        let k = match gate.kind {
            GateKind::Rk(k) | GateKind::NegRk(k) => k,
            GateKind::CPhase(t) | GateKind::NegCPhase(t) => t.log_denom(),
            _ => unreachable!(),
        };
        keys.push(k);
    }
    let mut order: Vec<usize> = (0..circuit.gates.len()).collect();
    order.sort_by_key(|&i| keys[i]);

    let mut gates = Vec::with_capacity(order.len());
    let mut rounds = Vec::with_capacity(order.len());
    let mut round_index = 0usize;
    let mut last_k = None;
    let mut used: Vec<usize> = Vec::new();
    for &i in &order {
        let gate = circuit.gates[i].clone();
        if last_k != Some(keys[i]) {
            if last_k.is_some() {
                round_index += 1;
            }
            last_k = Some(keys[i]);
            used.clear();
        }
        for q in gate.qubits() {
            if used.contains(&q) {
                // same-k gates of the adder ladder never collide; anything
                // else still schedules correctly as an extra round
                round_index += 1;
                used.clear();
                break;
            }
        }
        used.extend(gate.qubits());
        gates.push(gate);
        rounds.push(round_index);
    }
    Ok(Circuit { gates, rounds: Some(rounds) })
}

/// The per-qubit Fourier phases of the basis value `a` on an `n`-qubit
/// register: qubit `j` carries `(a mod 2^{n-j}) / 2^{n-j}`.
pub fn fourier_phases_of(value: u64, n: usize) -> Vec<Dyadic> {
    (0..n).map(|j| Dyadic::new(value, (n - j) as u8)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::{ProductState, QubitState, RegisterView};

    fn product_with(value: u64, n: usize) -> ProductState {
        let mut layout = crate::layout::RegisterLayout::new();
        layout.add("r", n);
        ProductState::init_basis(&layout, &[("r", value)]).unwrap()
    }

    #[test]
    fn qft_of_three_is_paper_phases() {
        // |11⟩ → phases (1/2 + 1/4, 1/2)
        let mut state = product_with(3, 2);
        state.run(&build_qft(&[0, 1]).unwrap()).unwrap();
        assert_eq!(state.qubit(0), QubitState::Fourier(Dyadic::new(3, 2)));
        assert_eq!(state.qubit(1), QubitState::Fourier(Dyadic::half()));
    }

    #[test]
    fn qft_of_zero_has_zero_phases() {
        for n in 1..=5 {
            let mut state = product_with(0, n);
            state.run(&build_qft(&(0..n).collect::<Vec<_>>()).unwrap()).unwrap();
            for q in 0..n {
                assert_eq!(state.qubit(q), QubitState::Fourier(Dyadic::zero()));
            }
        }
    }

    #[test]
    fn inv_qft_reads_phases_back() {
        // phases (1/2, 0 mod 1) → |10⟩
        let mut state = product_with(2, 2);
        state.run(&build_qft(&[0, 1]).unwrap()).unwrap();
        assert_eq!(state.qubit(0), QubitState::Fourier(Dyadic::half()));
        assert_eq!(state.qubit(1), QubitState::Fourier(Dyadic::zero()));
        state.run(&build_inv_qft(&[0, 1]).unwrap()).unwrap();
        assert_eq!(state.read_register(&[0, 1]).unwrap(), 2);
    }

    #[test]
    fn qft_round_trip_is_identity() {
        for a in 0..8 {
            let mut state = product_with(a, 3);
            state.run(&build_qft(&[0, 1, 2]).unwrap()).unwrap();
            state.run(&build_inv_qft(&[0, 1, 2]).unwrap()).unwrap();
            assert_eq!(state.read_register(&[0, 1, 2]).unwrap(), a);
        }
    }

    #[test]
    fn adder_gate_count_is_triangular() {
        for n in 1..=6 {
            let a: Vec<usize> = (0..n).collect();
            let b: Vec<usize> = (n..2 * n).collect();
            let circuit = build_adder(&a, &b).unwrap();
            assert_eq!(circuit.len(), n * (n + 1) / 2);
        }
    }

    #[test]
    fn adder_width_mismatch() {
        assert!(matches!(build_adder(&[0, 1], &[2]), Err(SimError::WidthMismatch(2, 1))));
    }

    #[test]
    fn adder_adds_modulo() {
        // classical oracle: (a + b) mod 2^n
        for n in 1..=4usize {
            let a_reg: Vec<usize> = (0..n).collect();
            let b_reg: Vec<usize> = (n..2 * n).collect();
            let mut layout = crate::layout::RegisterLayout::new();
            layout.add("a", n);
            layout.add("b", n);
            for a in 0..1u64 << n {
                for b in 0..1u64 << n {
                    let mut state =
                        ProductState::init_basis(&layout, &[("a", a), ("b", b)]).unwrap();
                    state.run(&build_qft(&a_reg).unwrap()).unwrap();
                    state.run(&build_adder(&a_reg, &b_reg).unwrap()).unwrap();
                    state.run(&build_inv_qft(&a_reg).unwrap()).unwrap();
                    assert_eq!(state.read_register(&a_reg).unwrap(), (a + b) % (1 << n));
                    assert_eq!(state.read_register(&b_reg).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn adder_identity_on_zero() {
        let a_reg = [0, 1, 2];
        let b_reg = [3, 4, 5];
        let mut layout = crate::layout::RegisterLayout::new();
        layout.add("a", 3);
        layout.add("b", 3);
        let mut state = ProductState::init_basis(&layout, &[("a", 5), ("b", 0)]).unwrap();
        state.run(&build_qft(&a_reg).unwrap()).unwrap();
        state.run(&build_adder(&a_reg, &b_reg).unwrap()).unwrap();
        state.run(&build_inv_qft(&a_reg).unwrap()).unwrap();
        assert_eq!(state.read_register(&a_reg).unwrap(), 5);
    }

    #[test]
    fn adder_fourier_phases_match_sum() {
        // SUM steps land on the Fourier phases of the sum (adding 2 twice on
        // three qubits walks 0 → 2 → 4)
        let a_reg = [0, 1, 2];
        let b_reg = [3, 4, 5];
        let mut layout = crate::layout::RegisterLayout::new();
        layout.add("a", 3);
        layout.add("b", 3);
        let mut state = ProductState::init_basis(&layout, &[("a", 0), ("b", 2)]).unwrap();
        state.run(&build_qft(&a_reg).unwrap()).unwrap();
        let adder = build_adder(&a_reg, &b_reg).unwrap();
        state.run(&adder).unwrap();
        assert_eq!(state.register_view(&a_reg), RegisterView::Phases(fourier_phases_of(2, 3)));
        state.run(&adder).unwrap();
        assert_eq!(state.register_view(&a_reg), RegisterView::Phases(fourier_phases_of(4, 3)));
    }

    #[test]
    fn schedule_produces_n_rounds() {
        let n = 3;
        let a: Vec<usize> = (0..n).collect();
        let b: Vec<usize> = (n..2 * n).collect();
        let scheduled = schedule_parallel(&build_adder(&a, &b).unwrap()).unwrap();
        assert_eq!(scheduled.num_rounds(), n);
        assert_eq!(scheduled.len(), n * (n + 1) / 2);
        // round sizes 3, 2, 1
        let rounds = scheduled.rounds.as_ref().unwrap();
        for (r, expect) in [(0, 3), (1, 2), (2, 1)] {
            assert_eq!(rounds.iter().filter(|&&x| x == r).count(), expect);
        }
    }

    #[test]
    fn schedule_single_gate() {
        let scheduled = schedule_parallel(&build_adder(&[0], &[1]).unwrap()).unwrap();
        assert_eq!(scheduled.num_rounds(), 1);
        assert_eq!(scheduled.len(), 1);
    }

    #[test]
    fn schedule_rejects_hadamard() {
        let qft = build_qft(&[0, 1]).unwrap();
        assert!(matches!(schedule_parallel(&qft), Err(SimError::NonCommuting)));
    }
}
