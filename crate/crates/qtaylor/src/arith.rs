//! Decrement, zero-check, and the repeated-addition multiplier.
//!
//! The multiplier is a fixed gate sequence: a data-dependent "repeat until the
//! multiplier register is empty" loop is statically unrolled into
//! `[zero-check][sum][decrement]` blocks, with a control qubit recording that
//! the multiplier register has hit zero and disabling the remaining sum
//! blocks.
//!
//! One departure from the naive unrolling is forced by unitarity: a gate
//! sequence cannot freeze the multiplier register at zero AND flip the control
//! exactly once, because the map (y→0, control→1, accumulator→x·y) collapses
//! distinct inputs when x = 0. The circuit therefore decrements the multiplier
//! register unconditionally — it passes through zero exactly once per full
//! period, so the zero-check fires exactly once — and, after the final block,
//! swaps the multiplier register (which is back at its initial value) into a
//! scratch "unload" register. The multiplier register then reads zero and the
//! scratch register keeps the copy that reversibility requires.

use std::fmt;

use crate::error::{Result, SimError};
use crate::gate::{Circuit, Control, Gate};
use crate::qft::{build_inv_qft, build_qft, fourier_add_const, fourier_add_register, AdderOpts};

/// Decrement circuit: QFT, a `-R_k` ladder subtracting the constant 1, then
/// the inverse QFT. With `enable_on_zero` set, the ladder is enabled only
/// while that qubit is `|0⟩`; the QFT brackets cancel on their own when the
/// ladder is disabled.
pub fn build_decrement(y: &[usize], enable_on_zero: Option<usize>) -> Result<Circuit> {
    if y.is_empty() {
        return Err(SimError::EmptyRegister);
    }
    let controls: Vec<Control> = enable_on_zero.into_iter().map(Control::neg).collect();
    let mut circuit = build_qft(y)?;
    fourier_add_const(&mut circuit, y, 1, 0, AdderOpts { subtract: true, max_k: None }, &controls);
    circuit.append(&build_inv_qft(y)?);
    Ok(circuit)
}

/// Flips `control` iff every qubit of `y` is `|0⟩`: one multi-controlled X
/// with all controls at negative polarity.
pub fn build_zero_check(y: &[usize], control: usize) -> Result<Circuit> {
    if y.is_empty() {
        return Err(SimError::EmptyRegister);
    }
    let mut circuit = Circuit::new();
    circuit.push(Gate::mcx(y.iter().map(|&q| Control::neg(q)).collect(), control));
    Ok(circuit)
}

/// Register plan for one multiplication.
#[derive(Clone, Debug)]
pub struct MultiplierLayout {
    pub multiplicand: Vec<usize>,
    pub multiplier: Vec<usize>,
    pub accumulator: Vec<usize>,
    pub control: usize,
    /// Scratch register the multiplier register is unloaded into; same width
    /// as the multiplier register, must start at `|0…0⟩`, ends holding the
    /// multiplier's initial value.
    pub unload: Vec<usize>,
}

impl MultiplierLayout {
    /// Sequential allocation with the conservative width check
    /// `n_acc ≥ n_x + n_y`.
    pub fn allocate(n_x: usize, n_y: usize, n_acc: usize) -> Result<Self> {
        if n_acc < n_x + n_y {
            return Err(SimError::AccumulatorTooNarrow { width: n_acc, needed: n_x + n_y });
        }
        Ok(Self::allocate_unchecked(n_x, n_y, n_acc))
    }

    /// Sequential allocation checked against known value bounds instead of
    /// worst-case register widths (the worked traces store small values in
    /// roomy registers).
    pub fn allocate_with_bounds(
        n_x: usize,
        n_y: usize,
        n_acc: usize,
        max_x: u64,
        max_y: u64,
    ) -> Result<Self> {
        let product = max_x
            .checked_mul(max_y)
            .ok_or(SimError::RegisterTooNarrow { width: n_acc, bound: u64::MAX })?;
        if n_acc < bits(product) {
            return Err(SimError::AccumulatorTooNarrow { width: n_acc, needed: bits(product) });
        }
        if n_x < bits(max_x) {
            return Err(SimError::RegisterTooNarrow { width: n_x, bound: max_x });
        }
        if n_y < bits(max_y) {
            return Err(SimError::RegisterTooNarrow { width: n_y, bound: max_y });
        }
        Ok(Self::allocate_unchecked(n_x, n_y, n_acc))
    }

    fn allocate_unchecked(n_x: usize, n_y: usize, n_acc: usize) -> Self {
        let mut next = 0;
        let mut take = |w: usize| {
            let r: Vec<usize> = (next..next + w).collect();
            next += w;
            r
        };
        MultiplierLayout {
            multiplicand: take(n_x),
            multiplier: take(n_y),
            accumulator: take(n_acc),
            control: take(1)[0],
            unload: take(n_y),
        }
    }

    /// Explicit qubit assignment for composed systems.
    pub fn from_registers(
        multiplicand: Vec<usize>,
        multiplier: Vec<usize>,
        accumulator: Vec<usize>,
        control: usize,
        unload: Vec<usize>,
    ) -> Result<Self> {
        if multiplier.len() != unload.len() {
            return Err(SimError::WidthMismatch(multiplier.len(), unload.len()));
        }
        let layout = MultiplierLayout { multiplicand, multiplier, accumulator, control, unload };
        let mut seen = Vec::new();
        for q in layout.all_qubits() {
            if seen.contains(&q) {
                return Err(SimError::RegisterOverlap(q));
            }
            seen.push(q);
        }
        Ok(layout)
    }

    pub fn all_qubits(&self) -> Vec<usize> {
        let mut qs = self.multiplicand.clone();
        qs.extend(&self.multiplier);
        qs.extend(&self.accumulator);
        qs.push(self.control);
        qs.extend(&self.unload);
        qs
    }

    pub fn num_qubits(&self) -> usize {
        self.all_qubits().iter().max().map_or(0, |m| m + 1)
    }
}

/// Labels for the multiplier's sections, so callers can snapshot the state
/// between them. Block indices count from 1.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MulStage {
    AccQft,
    Check(usize),
    Sum(usize),
    DecQft(usize),
    DecSub(usize),
    DecInvQft(usize),
    AccInvQft,
    Unload,
}

impl fmt::Display for MulStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MulStage::AccQft => write!(f, "acc.qft"),
            MulStage::Check(i) => write!(f, "block{i}.check"),
            MulStage::Sum(i) => write!(f, "block{i}.sum"),
            MulStage::DecQft(i) => write!(f, "block{i}.dec.qft"),
            MulStage::DecSub(i) => write!(f, "block{i}.dec.sub"),
            MulStage::DecInvQft(i) => write!(f, "block{i}.dec.invqft"),
            MulStage::AccInvQft => write!(f, "acc.invqft"),
            MulStage::Unload => write!(f, "unload"),
        }
    }
}

/// A circuit split into labeled sections.
#[derive(Clone, Debug)]
pub struct Staged<T> {
    pub stages: Vec<(T, Circuit)>,
}

impl<T> Staged<T> {
    pub fn flatten(&self) -> Circuit {
        let mut circuit = Circuit::new();
        for (_, c) in &self.stages {
            circuit.append(c);
        }
        circuit
    }

    pub fn gate_count(&self) -> usize {
        self.stages.iter().map(|(_, c)| c.len()).sum()
    }

    /// Runs each section in order, calling `after` with the section label
    /// once its gates have been applied.
    pub fn run_with<B, F>(&self, backend: &mut B, mut after: F) -> Result<()>
    where
        B: crate::backend::Backend,
        F: FnMut(&T, &mut B) -> Result<()>,
    {
        for (label, circuit) in &self.stages {
            backend.run(circuit)?;
            after(label, backend)?;
        }
        Ok(())
    }
}

/// Full multiplier with the full-period unroll of `2^{n_y}` blocks.
pub fn build_multiplier(layout: &MultiplierLayout) -> Result<Staged<MulStage>> {
    build_multiplier_with_blocks(layout, 1usize << layout.multiplier.len())
}

/// Multiplier with an explicit block count. `blocks` must exceed the largest
/// multiplier value ever run, otherwise the control qubit never flips and the
/// post-state contract is violated (that failure mode is under test).
pub fn build_multiplier_with_blocks(
    layout: &MultiplierLayout,
    blocks: usize,
) -> Result<Staged<MulStage>> {
    let mut stages = vec![(MulStage::AccQft, build_qft(&layout.accumulator)?)];
    stages.extend(build_multiplier_core(layout, blocks)?.stages);
    stages.push((MulStage::AccInvQft, build_inv_qft(&layout.accumulator)?));
    stages.push((MulStage::Unload, build_unload(layout)));
    Ok(Staged { stages })
}

/// The `[zero-check][sum][decrement]` blocks alone, for callers that keep the
/// accumulator in Fourier form across several multiplications. The caller
/// must still apply [`build_unload`] before reading the multiplier register.
pub fn build_multiplier_core(
    layout: &MultiplierLayout,
    blocks: usize,
) -> Result<Staged<MulStage>> {
    // the unroll is linear in the multiplier VALUE, not its width; refuse
    // circuits that would not fit in memory
    const MAX_BLOCKS: usize = 1 << 20;
    if blocks > MAX_BLOCKS {
        return Err(SimError::InvalidSpec(format!(
            "multiplier unroll of {blocks} blocks exceeds the {MAX_BLOCKS} limit"
        )));
    }
    let acc = &layout.accumulator;
    let y = &layout.multiplier;
    let x = &layout.multiplicand;
    let mut stages = Vec::new();

    for block in 1..=blocks {
        stages.push((MulStage::Check(block), build_zero_check(y, layout.control)?));

        // sum: Fourier-add the multiplicand, enabled while control is |0⟩
        let mut sum = Circuit::new();
        fourier_add_register(
            &mut sum,
            acc,
            x,
            0,
            AdderOpts::default(),
            &[Control::neg(layout.control)],
        );
        stages.push((MulStage::Sum(block), sum));

        // decrement runs unconditionally; see the module notes on unitarity
        stages.push((MulStage::DecQft(block), build_qft(y)?));
        let mut sub = Circuit::new();
        fourier_add_const(&mut sub, y, 1, 0, AdderOpts { subtract: true, max_k: None }, &[]);
        stages.push((MulStage::DecSub(block), sub));
        stages.push((MulStage::DecInvQft(block), build_inv_qft(y)?));
    }
    Ok(Staged { stages })
}

/// Swaps the (unconditionally decremented) multiplier register into the
/// scratch register, leaving the multiplier reading zero.
pub fn build_unload(layout: &MultiplierLayout) -> Circuit {
    let mut unload = Circuit::new();
    for (&a, &b) in layout.multiplier.iter().zip(&layout.unload) {
        unload.push(Gate::swap(a, b));
    }
    unload
}

pub(crate) fn bits(v: u64) -> usize {
    (64 - v.leading_zeros()).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::RegisterLayout;
    use crate::product::ProductState;

    fn run_decrement(y0: u64, n: usize) -> u64 {
        let mut layout = RegisterLayout::new();
        let y = layout.add("y", n);
        let mut state = ProductState::init_basis(&layout, &[("y", y0)]).unwrap();
        state.run(&build_decrement(&y, None).unwrap()).unwrap();
        state.read_register(&y).unwrap()
    }

    #[test]
    fn decrement_three_to_two() {
        assert_eq!(run_decrement(3, 2), 2);
    }

    #[test]
    fn decrement_one_to_zero() {
        assert_eq!(run_decrement(1, 3), 0);
    }

    #[test]
    fn decrement_wraps() {
        assert_eq!(run_decrement(0, 2), 3);
    }

    #[test]
    fn decrement_exhaustive_modular() {
        for n in 1..=4usize {
            for y0 in 0..1u64 << n {
                assert_eq!(run_decrement(y0, n), y0.wrapping_sub(1) & ((1 << n) - 1));
            }
        }
    }

    #[test]
    fn decrement_respects_enable() {
        let mut layout = RegisterLayout::new();
        let y = layout.add("y", 2);
        let c = layout.add("c", 1);
        // control |1⟩ disables the ladder
        let mut state = ProductState::init_basis(&layout, &[("y", 3), ("c", 1)]).unwrap();
        state.run(&build_decrement(&y, Some(c[0])).unwrap()).unwrap();
        assert_eq!(state.read_register(&y).unwrap(), 3);
        // control |0⟩ enables it
        let mut state = ProductState::init_basis(&layout, &[("y", 3), ("c", 0)]).unwrap();
        state.run(&build_decrement(&y, Some(c[0])).unwrap()).unwrap();
        assert_eq!(state.read_register(&y).unwrap(), 2);
    }

    #[test]
    fn zero_check_truth_table() {
        let mut layout = RegisterLayout::new();
        let y = layout.add("y", 3);
        let c = layout.add("c", 1);
        let check = build_zero_check(&y, c[0]).unwrap();

        let mut state = ProductState::init_basis(&layout, &[("y", 0), ("c", 0)]).unwrap();
        state.run(&check).unwrap();
        assert_eq!(state.read_register(&c).unwrap(), 1);

        let mut state = ProductState::init_basis(&layout, &[("y", 2), ("c", 0)]).unwrap();
        state.run(&check).unwrap();
        assert_eq!(state.read_register(&c).unwrap(), 0);

        // X is an involution
        let mut state = ProductState::init_basis(&layout, &[("y", 0), ("c", 1)]).unwrap();
        state.run(&check).unwrap();
        assert_eq!(state.read_register(&c).unwrap(), 0);
    }

    fn run_multiplier(x: u64, y: u64) -> (u64, u64, u64) {
        let layout = MultiplierLayout::allocate(3, 3, 6).unwrap();
        let mut state = ProductState::new(layout.num_qubits());
        for (i, &q) in layout.multiplicand.iter().enumerate() {
            if (x >> (layout.multiplicand.len() - 1 - i)) & 1 == 1 {
                state.apply(&Gate::x(q)).unwrap();
            }
        }
        for (i, &q) in layout.multiplier.iter().enumerate() {
            if (y >> (layout.multiplier.len() - 1 - i)) & 1 == 1 {
                state.apply(&Gate::x(q)).unwrap();
            }
        }
        let staged = build_multiplier(&layout).unwrap();
        state.run(&staged.flatten()).unwrap();
        (
            state.read_register(&layout.accumulator).unwrap(),
            state.read_register(&layout.multiplier).unwrap(),
            state.read_register(&[layout.control]).unwrap(),
        )
    }

    #[test]
    fn multiplier_small_cases() {
        assert_eq!(run_multiplier(2, 2), (4, 0, 1));
        assert_eq!(run_multiplier(5, 0), (0, 0, 1));
        assert_eq!(run_multiplier(3, 2), (6, 0, 1));
    }

    #[test]
    fn accumulator_width_checked() {
        assert!(matches!(
            MultiplierLayout::allocate(3, 3, 5),
            Err(SimError::AccumulatorTooNarrow { .. })
        ));
        assert!(MultiplierLayout::allocate_with_bounds(3, 3, 3, 2, 2).is_ok());
        assert!(matches!(
            MultiplierLayout::allocate_with_bounds(3, 3, 3, 3, 3),
            Err(SimError::AccumulatorTooNarrow { .. })
        ));
    }

    #[test]
    fn unroll_shorter_than_full_period_breaks_contract() {
        // with one block too few, y = 2^{n_y} − 1 never reaches zero at a
        // check, so the control qubit stays |0⟩
        let layout = MultiplierLayout::allocate(2, 2, 4).unwrap();
        let staged = build_multiplier_with_blocks(&layout, 3).unwrap();
        let mut state = ProductState::new(layout.num_qubits());
        state.apply(&Gate::x(layout.multiplicand[1])).unwrap(); // x = 1
        for &q in &layout.multiplier {
            state.apply(&Gate::x(q)).unwrap(); // y = 3
        }
        state.run(&staged.flatten()).unwrap();
        assert_eq!(state.read_register(&[layout.control]).unwrap(), 0);
    }
}
