//! Truncated power-series evaluation: Σ_k w_k·x^k with w_k ≈ 1/k! by default.
//!
//! Everything is fixed point with one global exponent −t. Weights are
//! truncated to t binary-fraction bits (floor, not round) and loaded into a
//! register by exact phase estimation of an eigenvalue whose phase is the
//! already-truncated dyadic — estimation is then deterministic. Each weighted
//! term m_k·x^k is accumulated by the repeated-addition multiplier with the
//! weight register as multiplicand and a consumable copy of x^k as multiplier.
//! Powers come from a "snake": the two power registers alternate as product
//! destination, and each multiplication consumes (zeroes) the previous power.

use serde::Deserialize;
use std::fmt;

use crate::arith::{
    bits, build_multiplier_core, build_multiplier_with_blocks, build_unload, MultiplierLayout,
    MulStage, Staged,
};
use crate::backend::Backend;
use crate::dyadic::Dyadic;
use crate::error::{Result, SimError};
use crate::gate::{Circuit, Gate};
use crate::product::{ProductState, RegisterView};
use crate::qft::{build_inv_qft, build_qft, fourier_add_const, fourier_add_register, AdderOpts};

/// `mantissa × 2^exponent`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FixedPointNumber {
    pub mantissa: u64,
    pub exponent: i32,
}

impl FixedPointNumber {
    pub fn new(mantissa: u64, exponent: i32) -> Self {
        FixedPointNumber { mantissa, exponent }
    }

    pub fn value(&self) -> f64 {
        self.mantissa as f64 * (self.exponent as f64).exp2()
    }

    /// Lossless realignment to a smaller (or equal) exponent.
    pub fn aligned_to(&self, target_exponent: i32) -> Result<FixedPointNumber> {
        if target_exponent > self.exponent {
            return Err(SimError::InvalidSpec(format!(
                "cannot align exponent {} down to larger {target_exponent}",
                self.exponent
            )));
        }
        let shift = (self.exponent - target_exponent) as u32;
        let mantissa = self
            .mantissa
            .checked_shl(shift)
            .filter(|m| m >> shift == self.mantissa)
            .ok_or(SimError::ValueOverflow { value: self.mantissa, width: 64 })?;
        Ok(FixedPointNumber { mantissa, exponent: target_exponent })
    }
}

impl fmt::Display for FixedPointNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × 2^{}", self.mantissa, self.exponent)
    }
}

/// Shifts every term to a common exponent; values are unchanged.
pub fn align_fixed_point(
    terms: &[FixedPointNumber],
    target_exponent: i32,
) -> Result<Vec<FixedPointNumber>> {
    terms.iter().map(|t| t.aligned_to(target_exponent)).collect()
}

pub fn factorial(k: usize) -> Option<u64> {
    if k > 20 {
        return None;
    }
    Some((1..=k as u64).product())
}

/// A series weight truncated to `t` binary-fraction bits:
/// `phase_numerator / 2^t` approximates the weight from below.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct WeightPhase {
    pub k: usize,
    pub t: u8,
    pub phase_numerator: u64,
}

impl WeightPhase {
    /// The default weight 1/k!, floor-truncated. Defined for k ≥ 2; the
    /// weights for k ∈ {0, 1} are exactly one and bypass phase loading.
    pub fn from_factorial(k: usize, t: u8) -> Result<Self> {
        if t < 1 {
            return Err(SimError::PrecisionTooSmall);
        }
        if t > 62 {
            return Err(SimError::PhasePrecision(t));
        }
        if k < 2 {
            return Err(SimError::InvalidSpec(format!(
                "factorial weight phases start at k = 2, got k = {k}"
            )));
        }
        let fact = factorial(k)
            .ok_or_else(|| SimError::InvalidSpec(format!("{k}! overflows u64")))?;
        Ok(WeightPhase { k, t, phase_numerator: (1u64 << t) / fact })
    }

    pub fn value(&self) -> f64 {
        self.phase_numerator as f64 / (1u64 << self.t) as f64
    }

    /// |phase/2^t − 1/k!| / (1/k!)
    pub fn relative_error(&self) -> f64 {
        let exact = 1.0 / factorial(self.k).unwrap() as f64;
        (self.value() - exact).abs() / exact
    }
}

/// CNOT fan-out copying a basis-state register into a zeroed one of the same
/// width. The caller guarantees `dst` is |0…0⟩ and `src` is a basis state;
/// the evaluator re-checks the zero precondition in debug builds.
pub fn build_copy(src: &[usize], dst: &[usize]) -> Result<Circuit> {
    if src.len() != dst.len() {
        return Err(SimError::WidthMismatch(src.len(), dst.len()));
    }
    if src.is_empty() {
        return Err(SimError::EmptyRegister);
    }
    let mut circuit = Circuit::new();
    for (&s, &d) in src.iter().zip(dst) {
        circuit.push(Gate::cnot(s, d));
    }
    Ok(circuit)
}

/// Phase estimation of the dyadic `phase_numerator / 2^t`: Hadamards on the
/// weight register, one controlled phase per qubit against the eigenstate
/// qubit (which must be |1⟩), and an inverse QFT. The register then reads
/// `phase_numerator` deterministically.
pub fn build_weight_loader(phi: &[usize], eigen: usize, phase_numerator: u64) -> Result<Circuit> {
    let t = phi.len();
    if t < 1 {
        return Err(SimError::PrecisionTooSmall);
    }
    if phase_numerator >> t != 0 {
        return Err(SimError::ValueOverflow { value: phase_numerator, width: t });
    }
    let mut circuit = Circuit::new();
    for &q in phi {
        circuit.push(Gate::h(q));
    }
    for (j, &q) in phi.iter().enumerate() {
        // controlled-U^{2^j}: the eigenvalue's phase times 2^j
        let theta = Dyadic::new(phase_numerator << j, t as u8);
        circuit.push(Gate::cphase(theta, q).controlled(crate::gate::Control::pos(eigen)));
    }
    circuit.append(&build_inv_qft(phi)?);
    Ok(circuit)
}

/// Mirror of the loader: returns the weight register to |0…0⟩ so it can be
/// reused, leaving the eigenstate qubit at |1⟩.
pub fn build_weight_eraser(phi: &[usize], eigen: usize, phase_numerator: u64) -> Result<Circuit> {
    Ok(build_weight_loader(phi, eigen, phase_numerator)?.inverted())
}

#[derive(Clone, Copy, Default, Debug, Deserialize)]
pub struct WidthOverrides {
    pub x: Option<usize>,
    pub power: Option<usize>,
    pub acc: Option<usize>,
}

/// What to evaluate: Σ_{k=0}^{order} (weights[k]/2^t)·x^k.
#[derive(Clone, Debug)]
pub struct SeriesSpec {
    pub order: usize,
    pub t: u8,
    /// Mantissa of each weight at scale 2^t, index k ∈ 0..=order; at most 2^t
    /// (2^t means exactly one).
    pub weights: Vec<u64>,
    pub widths: WidthOverrides,
}

impl SeriesSpec {
    /// e^x: weights 1, 1, then floor-truncated 1/k!.
    pub fn exponential(order: usize, t: u8) -> Result<Self> {
        if t < 1 {
            return Err(SimError::PrecisionTooSmall);
        }
        let mut weights = Vec::with_capacity(order + 1);
        for k in 0..=order {
            weights.push(if k < 2 {
                1u64 << t
            } else {
                WeightPhase::from_factorial(k, t)?.phase_numerator
            });
        }
        Ok(SeriesSpec { order, t, weights, widths: WidthOverrides::default() })
    }

    /// Config format: `{"order": K, "t": t, "weights": ["num/2^d", …],
    /// "widths": {"x":…, "power":…, "acc":…}}`; `weights` (one entry per k,
    /// k = 0…K, each d ≤ t) and `widths` are optional, defaulting to 1/k! and
    /// auto-sizing.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            order: usize,
            t: u8,
            weights: Option<Vec<String>>,
            widths: Option<WidthOverrides>,
        }
        let file: File = serde_json::from_str(text)
            .map_err(|e| SimError::InvalidSpec(e.to_string()))?;
        let mut spec = SeriesSpec::exponential(file.order, file.t)?;
        spec.widths = file.widths.unwrap_or_default();
        if let Some(strings) = file.weights {
            if strings.len() != file.order + 1 {
                return Err(SimError::InvalidSpec(format!(
                    "expected {} weights (k = 0..={}), got {}",
                    file.order + 1,
                    file.order,
                    strings.len()
                )));
            }
            spec.weights = strings
                .iter()
                .map(|s| parse_weight(s, file.t))
                .collect::<Result<Vec<u64>>>()?;
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(SimError::PrecisionTooSmall);
        }
        if self.weights.len() != self.order + 1 {
            return Err(SimError::InvalidSpec(format!(
                "need {} weights, have {}",
                self.order + 1,
                self.weights.len()
            )));
        }
        for (k, &m) in self.weights.iter().enumerate() {
            if m > 1u64 << self.t {
                return Err(SimError::InvalidSpec(format!(
                    "weight for k = {k} is {m}/2^{} > 1",
                    self.t
                )));
            }
        }
        Ok(())
    }
}

/// Parses "num/2^d" into a mantissa at scale 2^t.
fn parse_weight(s: &str, t: u8) -> Result<u64> {
    let bad = || SimError::InvalidSpec(format!("weight {s:?} is not of the form num/2^d"));
    let (num, denom) = s.trim().split_once("/2^").ok_or_else(bad)?;
    let num: u64 = num.trim().parse().map_err(|_| bad())?;
    let d: u8 = denom.trim().parse().map_err(|_| bad())?;
    if d > t {
        return Err(SimError::InvalidSpec(format!(
            "weight {s:?} needs more than t = {t} fraction bits"
        )));
    }
    num.checked_shl((t - d) as u32)
        .filter(|m| m >> (t - d) == num)
        .ok_or(SimError::ValueOverflow { value: num, width: 64 })
}

/// Register plan plus the staged circuit for one evaluation.
#[derive(Clone, Debug)]
pub struct SeriesRun {
    pub stages: Staged<String>,
    pub num_qubits: usize,
    pub exponent: i32,
    pub acc: Vec<usize>,
    /// Named registers for reporting, scratch included.
    pub registers: Vec<(String, Vec<usize>)>,
    /// For each ".copy" stage, the destination register (debug-checked zero).
    copy_dsts: Vec<(String, Vec<usize>)>,
}

/// Builds the whole evaluation as one gate stream over one system. Widths
/// are sized from the classical input; the build fails rather than let any
/// addition wrap.
pub fn plan_series(x: u64, spec: &SeriesSpec) -> Result<SeriesRun> {
    spec.validate()?;
    let kmax = spec.order;
    let t = spec.t;
    let one = 1u64 << t;
    let overflow = |value: u64| SimError::ValueOverflow { value, width: 64 };

    // classical bounds
    let mut powers = vec![1u64]; // x^0..x^K
    for _ in 1..=kmax {
        let next = powers.last().unwrap().checked_mul(x.max(1)).ok_or(overflow(x))?;
        powers.push(next);
    }
    if x == 0 {
        for p in powers.iter_mut().skip(1) {
            *p = 0;
        }
    }
    let mut total = 0u64;
    for k in 0..=kmax {
        let term = spec.weights[k].checked_mul(powers[k]).ok_or(overflow(powers[k]))?;
        total = total.checked_add(term).ok_or(overflow(term))?;
    }

    let pick = |auto: usize, given: Option<usize>, what: &str| -> Result<usize> {
        match given {
            None => Ok(auto),
            Some(w) if w >= auto => Ok(w),
            Some(w) => Err(SimError::InvalidSpec(format!(
                "{what} width {w} below required {auto}"
            ))),
        }
    };
    let n_x = pick(bits(x), spec.widths.x, "x")?;
    let n_pow = pick(bits(*powers.iter().max().unwrap()), spec.widths.power, "power")?;
    let n_acc = pick(bits(total), spec.widths.acc, "acc")?;

    // which terms use the loader/multiplier path
    let loads = |k: usize| k >= 1 && spec.weights[k] > 0 && spec.weights[k] < one;
    let need_loader = (1..=kmax).any(loads);
    let need_power = kmax >= 2;

    // the multiplier unrolls one block per unit of the multiplier VALUE;
    // bound the total circuit size before building anything
    const MAX_GATES: u128 = 10_000_000;
    let per_block =
        |xw: usize, yw: usize, aw: usize| (2 + xw * aw + yw * (yw + 1) + yw) as u128;
    let mut estimate: u128 = 0;
    for k in 1..=kmax {
        if k >= 2 {
            estimate += (powers[k - 1] as u128 + 1) * per_block(n_x, n_pow, n_pow);
        }
        if loads(k) {
            estimate += (powers[k] as u128 + 1) * per_block(t as usize, n_pow, n_acc);
        }
    }
    if estimate > MAX_GATES {
        return Err(SimError::InvalidSpec(format!(
            "evaluation would need about {estimate} gates (limit {MAX_GATES}); \
             reduce x or the order"
        )));
    }

    let mut next = 0usize;
    let mut take = |w: usize| -> Vec<usize> {
        let r: Vec<usize> = (next..next + w).collect();
        next += w;
        r
    };
    let x_reg = take(n_x);
    let snake = if need_power { [take(n_pow), take(n_pow)] } else { [vec![], vec![]] };
    let r1 = if need_loader { take(n_pow) } else { vec![] };
    let phi = if need_loader { take(t as usize) } else { vec![] };
    let eigen = if need_loader { Some(take(1)[0]) } else { None };
    let acc = take(n_acc);
    let control = if need_power || need_loader { Some(take(1)[0]) } else { None };

    let mut registers: Vec<(String, Vec<usize>)> = vec![("x".into(), x_reg.clone())];
    if need_power {
        registers.push(("r1".into(), snake[0].clone()));
        registers.push(("r3".into(), snake[1].clone()));
    }
    if need_loader {
        registers.push(("term".into(), r1.clone()));
        registers.push(("phi".into(), phi.clone()));
        registers.push(("eigen".into(), vec![eigen.unwrap()]));
    }
    registers.push(("acc".into(), acc.clone()));
    if let Some(c) = control {
        registers.push(("control".into(), vec![c]));
    }

    let mut stages: Vec<(String, Circuit)> = Vec::new();
    let mut copy_dsts = Vec::new();

    // initialization from |0…0⟩
    let mut init = Circuit::new();
    for (i, &q) in x_reg.iter().enumerate() {
        if (x >> (n_x - 1 - i)) & 1 == 1 {
            init.push(Gate::x(q));
        }
    }
    if let Some(e) = eigen {
        init.push(Gate::x(e));
    }
    stages.push(("init".into(), init));

    stages.push(("acc.qft".into(), build_qft(&acc)?));

    // k = 0: constant term
    if spec.weights[0] > 0 {
        let mut c = Circuit::new();
        fourier_add_const(&mut c, &acc, spec.weights[0], 0, AdderOpts::default(), &[]);
        stages.push(("k0.add".into(), c));
    }

    // one weighted term via copy → load → multiply → erase; unload scratch
    // registers are appended past the named ones
    let mut scratch_take = take;
    let term_stages = |stages: &mut Vec<(String, Circuit)>,
                       copy_dsts: &mut Vec<(String, Vec<usize>)>,
                       k: usize,
                       source: &[usize],
                       unload: Vec<usize>|
     -> Result<()> {
        let m = spec.weights[k];
        let label = |s: &str| format!("k{k}.{s}");
        if m == one {
            // weight exactly 1: add the power register straight in, scaled 2^t
            let mut c = Circuit::new();
            fourier_add_register(&mut c, &acc, source, t as usize, AdderOpts::default(), &[]);
            stages.push((label("add"), c));
            return Ok(());
        }
        if m == 0 {
            return Ok(());
        }
        let dst = &r1[r1.len() - source.len()..];
        stages.push((label("copy"), build_copy(source, dst)?));
        copy_dsts.push((label("copy"), r1.clone()));
        stages.push((label("load"), build_weight_loader(&phi, eigen.unwrap(), m)?));

        let layout = MultiplierLayout::from_registers(
            phi.clone(),
            r1.clone(),
            acc.clone(),
            control.unwrap(),
            unload,
        )?;
        let blocks = powers[k] as usize + 1;
        let mut mul = build_multiplier_core(&layout, blocks)?.flatten();
        mul.append(&build_unload(&layout));
        // the control always ends |1⟩ (the block count exceeds the multiplier
        // value), so one X resets it for the next term
        mul.push(Gate::x(control.unwrap()));
        stages.push((label("mul"), mul));

        stages.push((label("erase"), build_weight_eraser(&phi, eigen.unwrap(), m)?));
        Ok(())
    };

    // k = 1
    if kmax >= 1 {
        if spec.weights[1] == one {
            let mut c = Circuit::new();
            fourier_add_register(&mut c, &acc, &x_reg, t as usize, AdderOpts::default(), &[]);
            stages.push(("k1.add".into(), c));
        } else {
            let unload = scratch_take(r1.len());
            term_stages(&mut stages, &mut copy_dsts, 1, &x_reg, unload)?;
        }
    }

    // k ≥ 2: advance the power snake, then fold the term in
    for k in 2..=kmax {
        let (src, dst) = if k % 2 == 0 { (0, 1) } else { (1, 0) };
        if k == 2 {
            // the first multiplication consumes a copy of x, not x itself
            let w = snake[0].len();
            stages.push(("pow2.copy".into(), build_copy(&x_reg, &snake[0][w - n_x..])?));
            copy_dsts.push(("pow2.copy".into(), snake[0].clone()));
        }
        let layout = MultiplierLayout::from_registers(
            x_reg.clone(),
            snake[src].clone(),
            snake[dst].clone(),
            control.unwrap(),
            scratch_take(n_pow),
        )?;
        let mut mul = build_multiplier_with_blocks(&layout, powers[k - 1] as usize + 1)?.flatten();
        mul.push(Gate::x(control.unwrap()));
        stages.push((format!("pow{k}.mul"), mul));

        let unload = scratch_take(r1.len());
        term_stages(&mut stages, &mut copy_dsts, k, &snake[dst], unload)?;
    }

    stages.push(("acc.invqft".into(), build_inv_qft(&acc)?));

    let num_qubits = {
        // scratch_take advanced `next`; recover it from the highest index used
        stages
            .iter()
            .flat_map(|(_, c)| c.gates.iter())
            .flat_map(|g| g.qubits())
            .max()
            .map_or(0, |m| m + 1)
    };

    Ok(SeriesRun {
        stages: Staged { stages },
        num_qubits,
        exponent: -(t as i32),
        acc,
        registers,
        copy_dsts,
    })
}

/// Executes a plan on a zero-initialized backend; `snap` fires after every
/// stage. Returns the accumulator as a fixed-point number.
pub fn run_series<B, F>(plan: &SeriesRun, backend: &mut B, mut snap: F) -> Result<FixedPointNumber>
where
    B: Backend,
    F: FnMut(&str, &mut B) -> Result<()>,
{
    for (label, circuit) in &plan.stages.stages {
        #[cfg(debug_assertions)]
        if let Some((_, dst)) = plan.copy_dsts.iter().find(|(l, _)| l == label) {
            debug_assert_eq!(
                backend.read_register(dst)?,
                0,
                "copy destination not zeroed before stage {label}"
            );
        }
        backend.run(circuit)?;
        snap(label, backend)?;
    }
    let mantissa = backend.read_register(&plan.acc)?;
    Ok(FixedPointNumber { mantissa, exponent: plan.exponent })
}

/// Plans and runs on the product backend.
pub fn evaluate_series(x: u64, spec: &SeriesSpec) -> Result<FixedPointNumber> {
    let plan = plan_series(x, spec)?;
    let mut state = ProductState::new(plan.num_qubits);
    run_series(&plan, &mut state, |_, _| Ok(()))
}

/// One register plan + staged circuit for the standalone power chain x^K:
/// the snake alone, without the weighting machinery.
pub fn plan_power(x: u64, max_power: usize) -> Result<SeriesRun> {
    if max_power < 2 {
        return Err(SimError::InvalidSpec(format!(
            "power chain starts at exponent 2, got {max_power}"
        )));
    }
    // a series with a lone x^K term of weight one exercises exactly the snake;
    // strip the accumulator stages and read the final snake register instead
    let mut weights = vec![0u64; max_power + 1];
    weights[max_power] = 2; // t = 1 scale
    let spec = SeriesSpec { order: max_power, t: 1, weights, widths: WidthOverrides::default() };
    let mut plan = plan_series(x, &spec)?;
    plan.stages.stages.retain(|(label, _)| label.as_str() == "init" || label.starts_with("pow"));
    let final_reg = if max_power % 2 == 0 { "r3" } else { "r1" };
    plan.acc = plan
        .registers
        .iter()
        .find(|(n, _)| n == final_reg)
        .map(|(_, q)| q.clone())
        .unwrap();
    plan.exponent = 0;
    Ok(plan)
}

/// One labeled intermediate state of the worked example.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub label: String,
    pub detail: String,
    pub data: CheckpointData,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckpointData {
    /// A register in Fourier form, one dyadic phase per qubit.
    Phases(Vec<Dyadic>),
    /// A register in a basis state.
    Basis(u64),
    Fixed(FixedPointNumber),
    Note,
}

fn phases_of(state: &ProductState, reg: &[usize]) -> Result<Vec<Dyadic>> {
    match state.register_view(reg) {
        RegisterView::Phases(p) => Ok(p),
        _ => Err(SimError::InvalidSpec("register is not in Fourier form".into())),
    }
}

fn push_phases(
    out: &mut Vec<Checkpoint>,
    label: &str,
    what: &str,
    state: &ProductState,
    reg: &[usize],
) -> Result<()> {
    let phases = phases_of(state, reg)?;
    let detail = format!(
        "{what} in Fourier form: [{}]",
        phases.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
    );
    out.push(Checkpoint { label: label.into(), detail, data: CheckpointData::Phases(phases) });
    Ok(())
}

fn push_basis(
    out: &mut Vec<Checkpoint>,
    label: &str,
    what: &str,
    state: &ProductState,
    reg: &[usize],
) -> Result<()> {
    let v = state.read_register(reg)?;
    out.push(Checkpoint {
        label: label.into(),
        detail: format!("{what} = |{:0w$b}⟩ = {v}", v, w = reg.len()),
        data: CheckpointData::Basis(v),
    });
    Ok(())
}

/// Replays the worked second-order e^2 computation end to end on the product
/// backend, returning every checkpoint with its label: the 2×2
/// multiplication (2.2–2.7… labeled 5.2–5.7), the order-0/1 sum (5.8), the
/// one-qubit weight load (5.9–5.11), the fixed-point bookkeeping (5.12–5.13),
/// and the weighted accumulation (5.14–5.23).
pub fn trace_e2() -> Result<Vec<Checkpoint>> {
    let mut out = Vec::new();

    // 5.2–5.7: 2×2 in three-qubit registers
    let layout = MultiplierLayout::allocate_with_bounds(3, 3, 3, 2, 2)?;
    let mut st = ProductState::new(layout.num_qubits());
    st.apply(&Gate::x(layout.multiplicand[1]))?; // x = |010⟩
    st.run(&build_copy(&layout.multiplicand, &layout.multiplier)?)?;
    let staged = build_multiplier_with_blocks(&layout, 4)?;
    staged.run_with(&mut st, |stage, st| {
        match stage {
            MulStage::AccQft => push_phases(&mut out, "5.2", "accumulator", st, &layout.accumulator),
            MulStage::Sum(1) => push_phases(&mut out, "5.3", "accumulator", st, &layout.accumulator),
            MulStage::DecInvQft(1) => push_basis(&mut out, "5.4", "multiplier", st, &layout.multiplier),
            MulStage::Sum(2) => push_phases(&mut out, "5.5", "accumulator", st, &layout.accumulator),
            MulStage::DecInvQft(2) => push_basis(&mut out, "5.6", "multiplier", st, &layout.multiplier),
            MulStage::AccInvQft => push_basis(&mut out, "5.7", "accumulator", st, &layout.accumulator),
            _ => Ok(()),
        }
    })?;
    let x_squared = st.read_register(&layout.accumulator)?;

    // 5.8: orders 0 and 1 — R4 starts at 1, add x = 2
    let r4: Vec<usize> = vec![0, 1];
    let x_reg: Vec<usize> = vec![2, 3];
    let mut st = ProductState::new(4);
    st.apply(&Gate::x(r4[1]))?; // |01⟩ = 1
    st.apply(&Gate::x(x_reg[0]))?; // |10⟩ = 2
    st.run(&build_qft(&r4)?)?;
    let mut sum = Circuit::new();
    fourier_add_register(&mut sum, &r4, &x_reg, 0, AdderOpts::default(), &[]);
    st.run(&sum)?;
    st.run(&build_inv_qft(&r4)?)?;
    push_basis(&mut out, "5.8", "R4", &st, &r4)?;
    let low_orders = st.read_register(&r4)?;

    // 5.9–5.11: the order-2 weight 1/2 loaded by one-qubit phase estimation
    let weight = WeightPhase::from_factorial(2, 1)?;
    out.push(Checkpoint {
        label: "5.9".into(),
        detail: format!(
            "weight 1/2 is exact in one fraction bit: numerator {} at t = {}",
            weight.phase_numerator, weight.t
        ),
        data: CheckpointData::Note,
    });
    out.push(Checkpoint {
        label: "5.10".into(),
        detail: "controlled-U applies the phase 1/2^1 to the eigenstate |1⟩".into(),
        data: CheckpointData::Note,
    });
    let phi = vec![0usize];
    let eigen = 1usize;
    let mut wst = ProductState::new(2);
    wst.apply(&Gate::x(eigen))?;
    wst.run(&build_weight_loader(&phi, eigen, weight.phase_numerator)?)?;
    let loaded = wst.read_register(&phi)?;
    out.push(Checkpoint {
        label: "5.11".into(),
        detail: format!(
            "phase estimation result |{loaded}⟩|{}⟩",
            wst.read_register(&[eigen])?
        ),
        data: CheckpointData::Basis(loaded),
    });

    // 5.12–5.13: classical fixed-point bookkeeping at the common exponent −1
    let term2 = FixedPointNumber::new(weight.phase_numerator * x_squared, -1);
    out.push(Checkpoint {
        label: "5.12".into(),
        detail: format!("order-2 term: 1 × {x_squared} × 2^-1 = {}", term2.value()),
        data: CheckpointData::Fixed(term2),
    });
    let aligned = FixedPointNumber::new(low_orders, 0).aligned_to(-1)?;
    out.push(Checkpoint {
        label: "5.13".into(),
        detail: format!("{low_orders} = {aligned} after exponent alignment"),
        data: CheckpointData::Fixed(aligned),
    });

    // 5.14–5.22: accumulate the weighted term into R4 = |0110⟩
    let layout = MultiplierLayout::from_registers(
        (0..4).collect(),   // R2: multiplicand, the loaded weight numerator
        (4..8).collect(),   // R1: multiplier, consumed copy of x²
        (8..12).collect(),  // R4: accumulator
        12,
        (13..17).collect(),
    )?;
    let mut st = ProductState::new(17);
    for (reg, value) in [
        (&layout.multiplicand, loaded),
        (&layout.multiplier, x_squared),
        (&layout.accumulator, aligned.mantissa),
    ] {
        for (i, &q) in reg.iter().enumerate() {
            if (value >> (reg.len() - 1 - i)) & 1 == 1 {
                st.apply(&Gate::x(q))?;
            }
        }
    }
    let staged = build_multiplier_with_blocks(&layout, x_squared as usize + 1)?;
    staged.run_with(&mut st, |stage, st| {
        match stage {
            MulStage::AccQft => push_phases(&mut out, "5.14", "R4", st, &layout.accumulator),
            MulStage::Sum(1) => push_phases(&mut out, "5.15", "R4", st, &layout.accumulator),
            MulStage::DecInvQft(1) => push_basis(&mut out, "5.16", "R1", st, &layout.multiplier),
            MulStage::Sum(2) => push_phases(&mut out, "5.17", "R4", st, &layout.accumulator),
            MulStage::DecInvQft(2) => push_basis(&mut out, "5.18", "R1", st, &layout.multiplier),
            MulStage::Sum(3) => push_phases(&mut out, "5.19", "R4", st, &layout.accumulator),
            MulStage::DecInvQft(3) => push_basis(&mut out, "5.20", "R1", st, &layout.multiplier),
            MulStage::Sum(4) => push_phases(&mut out, "5.21", "R4", st, &layout.accumulator),
            MulStage::AccInvQft => push_basis(&mut out, "5.22", "R4", st, &layout.accumulator),
            _ => Ok(()),
        }
    })?;
    let mantissa = st.read_register(&layout.accumulator)?;

    // phase erasure frees the weight register for the next term
    wst.run(&build_weight_eraser(&phi, eigen, weight.phase_numerator)?)?;
    out.push(Checkpoint {
        label: "4.10b".into(),
        detail: format!("phase erasure returns the weight register to |{}⟩", wst.read_register(&phi)?),
        data: CheckpointData::Basis(wst.read_register(&phi)?),
    });

    let result = FixedPointNumber::new(mantissa, -1);
    out.push(Checkpoint {
        label: "5.23".into(),
        detail: format!("{result} = {}", result.value()),
        data: CheckpointData::Fixed(result),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_phases_match_printed_values() {
        assert_eq!(WeightPhase::from_factorial(2, 1).unwrap().phase_numerator, 1);
        assert_eq!(WeightPhase::from_factorial(3, 11).unwrap().phase_numerator, 341);
        assert_eq!(WeightPhase::from_factorial(6, 15).unwrap().phase_numerator, 45);
    }

    #[test]
    fn weight_error_below_one_ulp() {
        for k in 2..=8usize {
            for t in [1u8, 4, 8, 11, 15] {
                let w = WeightPhase::from_factorial(k, t).unwrap();
                let exact = 1.0 / factorial(k).unwrap() as f64;
                assert!((w.value() - exact).abs() < (-(t as f64)).exp2());
            }
        }
    }

    #[test]
    fn align_shifts_losslessly() {
        let three = FixedPointNumber::new(3, 0);
        assert_eq!(three.aligned_to(-1).unwrap(), FixedPointNumber::new(6, -1));
        assert_eq!(FixedPointNumber::new(2, 0).aligned_to(-2).unwrap().mantissa, 8);
        assert_eq!(three.aligned_to(0).unwrap(), three);
        assert!(three.aligned_to(1).is_err());
    }

    #[test]
    fn copy_fans_out() {
        let src = vec![0usize, 1, 2];
        let dst = vec![3usize, 4, 5];
        for v in 0..8u64 {
            let mut st = ProductState::new(6);
            for (i, &q) in src.iter().enumerate() {
                if (v >> (2 - i)) & 1 == 1 {
                    st.apply(&Gate::x(q)).unwrap();
                }
            }
            st.run(&build_copy(&src, &dst).unwrap()).unwrap();
            assert_eq!(st.read_register(&dst).unwrap(), v);
            assert_eq!(st.read_register(&src).unwrap(), v);
        }
    }

    #[test]
    fn loader_reads_numerator_exactly() {
        for (k, t) in [(2usize, 1u8), (3, 11), (6, 15)] {
            let w = WeightPhase::from_factorial(k, t).unwrap();
            let phi: Vec<usize> = (0..t as usize).collect();
            let eigen = t as usize;
            let mut st = ProductState::new(t as usize + 1);
            st.apply(&Gate::x(eigen)).unwrap();
            st.run(&build_weight_loader(&phi, eigen, w.phase_numerator).unwrap()).unwrap();
            assert_eq!(st.read_register(&phi).unwrap(), w.phase_numerator);
            assert_eq!(st.read_register(&[eigen]).unwrap(), 1);

            st.run(&build_weight_eraser(&phi, eigen, w.phase_numerator).unwrap()).unwrap();
            assert_eq!(st.read_register(&phi).unwrap(), 0);
            assert_eq!(st.read_register(&[eigen]).unwrap(), 1);
        }
    }

    fn oracle(x: u64, spec: &SeriesSpec) -> u64 {
        (0..=spec.order).map(|k| spec.weights[k] * x.pow(k as u32)).sum()
    }

    #[test]
    fn evaluates_e2_order_2() {
        let spec = SeriesSpec::exponential(2, 1).unwrap();
        let r = evaluate_series(2, &spec).unwrap();
        assert_eq!(r, FixedPointNumber::new(10, -1));
        assert_eq!(r.value(), 5.0);
    }

    #[test]
    fn evaluates_against_oracle() {
        for x in 0..=3u64 {
            for order in [2usize, 4] {
                let spec = SeriesSpec::exponential(order, 8).unwrap();
                let r = evaluate_series(x, &spec).unwrap();
                assert_eq!(r.mantissa, oracle(x, &spec), "x={x} order={order}");
                assert_eq!(r.exponent, -8);
            }
        }
    }

    #[test]
    fn power_plan_computes_powers() {
        for (x, k, want) in [(2u64, 2usize, 4u64), (2, 3, 8), (3, 2, 9), (1, 4, 1)] {
            let plan = plan_power(x, k).unwrap();
            let mut st = ProductState::new(plan.num_qubits);
            let got = run_series(&plan, &mut st, |_, _| Ok(())).unwrap();
            assert_eq!(got.mantissa, want, "x={x} k={k}");
        }
    }

    #[test]
    fn json_round_trip_and_custom_weights() {
        let spec = SeriesSpec::from_json(r#"{"order": 2, "t": 4}"#).unwrap();
        assert_eq!(spec.weights, vec![16, 16, 8]);

        // cosh-like: zero odd weights
        let spec = SeriesSpec::from_json(
            r#"{"order": 2, "t": 4, "weights": ["1/2^0", "0/2^0", "1/2^1"]}"#,
        )
        .unwrap();
        assert_eq!(spec.weights, vec![16, 0, 8]);
        let r = evaluate_series(2, &spec).unwrap();
        assert_eq!(r.mantissa, 16 + 0 + 8 * 4);

        assert!(SeriesSpec::from_json(r#"{"order": 2, "t": 4, "weights": ["1/3"]}"#).is_err());
    }

    #[test]
    fn trace_checkpoints_hit_known_values() {
        let cps = trace_e2().unwrap();
        let get = |label: &str| {
            cps.iter().find(|c| c.label == label).unwrap_or_else(|| panic!("missing {label}"))
        };
        assert_eq!(get("5.7").data, CheckpointData::Basis(4));
        assert_eq!(get("5.8").data, CheckpointData::Basis(3));
        assert_eq!(get("5.11").data, CheckpointData::Basis(1));
        assert_eq!(get("5.22").data, CheckpointData::Basis(10));
        assert_eq!(get("5.23").data, CheckpointData::Fixed(FixedPointNumber::new(10, -1)));
    }
}
