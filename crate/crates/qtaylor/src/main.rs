use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qtaylor::arith::{build_decrement, build_multiplier, MultiplierLayout};
use qtaylor::backend::Backend;
use qtaylor::gate::{Circuit, Gate};
use qtaylor::product::{ProductState, RegisterView};
use qtaylor::qft::{build_adder, build_inv_qft, build_qft, schedule_parallel};
use qtaylor::report::{RegisterSnapshot, RunReport, Snapshot};
use qtaylor::series::{
    evaluate_series, plan_power, plan_series, run_series, trace_e2, CheckpointData, SeriesSpec,
    WeightPhase,
};
use qtaylor::statevec::DenseState;
use qtaylor::{Result, SimError};

#[derive(Parser)]
#[command(name = "qtaylor", about = "Fourier-basis arithmetic circuits and series evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Backend to run on; defaults to both when the system fits 14 qubits,
    /// product otherwise.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendChoice>,
    /// Emit a JSON run report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Include per-stage register snapshots in the report.
    #[arg(long, global = true)]
    snapshots: bool,
    /// Include the full gate list in the JSON report.
    #[arg(long, global = true)]
    dump_circuit: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Dense,
    Product,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// (a + b) mod 2^n through the Fourier-basis adder.
    Add(AddArgs),
    /// (y - 1) mod 2^n.
    Dec(DecArgs),
    /// x · y by repeated addition.
    Mul(MulArgs),
    /// x^k through the alternating-register power chain.
    Pow(PowArgs),
    /// Load the truncated 1/k! weight by phase estimation.
    Weight(WeightArgs),
    /// Evaluate Σ w_k x^k in fixed point.
    Eval(EvalArgs),
    /// Replay the worked e² example, printing every checkpoint.
    TraceE2,
}

#[derive(Args)]
struct AddArgs {
    #[arg(long)]
    a: u64,
    #[arg(long)]
    b: u64,
    /// Register width; default fits the inputs.
    #[arg(long)]
    n: Option<usize>,
    /// Group commuting rotations into parallel rounds.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct DecArgs {
    #[arg(long)]
    y: u64,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct MulArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    y: u64,
    /// Width of the x and y registers; default fits the inputs.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct PowArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    k: usize,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    t: u8,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, conflicts_with = "config")]
    order: Option<usize>,
    #[arg(long, conflicts_with = "config")]
    t: Option<u8>,
    /// JSON series config: {"order", "t", "weights"?, "widths"?}.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits 2 on usage errors
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn bits(v: u64) -> usize {
    (64 - v.leading_zeros()).max(1) as usize
}

/// Which backends to run, given the system size.
fn backends(choice: Option<BackendChoice>, num_qubits: usize) -> Vec<BackendChoice> {
    match choice {
        Some(BackendChoice::Both) => vec![BackendChoice::Dense, BackendChoice::Product],
        Some(c) => vec![c],
        None if num_qubits <= 14 => vec![BackendChoice::Dense, BackendChoice::Product],
        None => vec![BackendChoice::Product],
    }
}

fn backend_name(c: BackendChoice) -> &'static str {
    match c {
        BackendChoice::Dense => "dense",
        BackendChoice::Product => "product",
        BackendChoice::Both => "both",
    }
}

struct Run<'a> {
    cli: &'a Cli,
    report: RunReport,
}

impl<'a> Run<'a> {
    fn new(cli: &'a Cli, op: &str, num_qubits: usize, gate_count: usize) -> Self {
        let used: Vec<&str> =
            backends(cli.backend, num_qubits).iter().map(|&c| backend_name(c)).collect();
        Run { cli, report: RunReport::new(op, &used.join("+"), num_qubits, gate_count) }
    }

    /// Runs `circuit` on every selected backend from the given basis
    /// assignment, reads `outputs`, and checks the backends agree.
    fn execute(
        &mut self,
        circuit: &Circuit,
        init: &[(&str, &[usize], u64)],
        outputs: &[(&str, &[usize])],
    ) -> Result<BTreeMap<String, u64>> {
        let num_qubits = self.report.num_qubits;
        let mut agreed: Option<BTreeMap<String, u64>> = None;
        for choice in backends(self.cli.backend, num_qubits) {
            let mut results = BTreeMap::new();
            match choice {
                BackendChoice::Dense => {
                    let mut st = DenseState::new(num_qubits)?;
                    run_init(&mut st, init)?;
                    st.run(circuit)?;
                    for (name, reg) in outputs {
                        results.insert(name.to_string(), st.read_register(reg)?);
                    }
                }
                BackendChoice::Product | BackendChoice::Both => {
                    let mut st = ProductState::new(num_qubits);
                    run_init(&mut st, init)?;
                    st.run(circuit)?;
                    for (name, reg) in outputs {
                        results.insert(name.to_string(), st.read_register(reg)?);
                    }
                }
            }
            if let Some(prev) = &agreed {
                for (name, &v) in &results {
                    if prev[name] != v {
                        return Err(SimError::BackendMismatch { dense: prev[name], product: v });
                    }
                }
            } else {
                agreed = Some(results);
            }
        }
        Ok(agreed.unwrap())
    }

    fn finish(mut self, circuit: Option<&Circuit>, lines: &[String]) {
        if self.cli.dump_circuit {
            self.report.circuit = circuit.map(|c| c.trace_records());
        }
        if self.cli.json {
            println!("{}", serde_json::to_string_pretty(&self.report).unwrap());
        } else {
            for line in lines {
                println!("{line}");
            }
        }
    }
}

fn run_init<B: Backend>(backend: &mut B, init: &[(&str, &[usize], u64)]) -> Result<()> {
    for (_, reg, value) in init {
        for (i, &q) in reg.iter().enumerate() {
            if (value >> (reg.len() - 1 - i)) & 1 == 1 {
                backend.apply(&Gate::x(q))?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Add(args) => cmd_add(cli, args),
        Command::Dec(args) => cmd_dec(cli, args),
        Command::Mul(args) => cmd_mul(cli, args),
        Command::Pow(args) => cmd_pow(cli, args),
        Command::Weight(args) => cmd_weight(cli, args),
        Command::Eval(args) => cmd_eval(cli, args),
        Command::TraceE2 => cmd_trace(cli),
    }
}

fn cmd_add(cli: &Cli, args: &AddArgs) -> Result<()> {
    let n = args.n.unwrap_or_else(|| bits(args.a.max(args.b)));
    for v in [args.a, args.b] {
        if bits(v) > n {
            return Err(SimError::ValueOverflow { value: v, width: n });
        }
    }
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..2 * n).collect();

    let mut circuit = build_qft(&a)?;
    let mut sum = build_adder(&a, &b)?;
    if args.parallel {
        sum = schedule_parallel(&sum)?;
        // round structure is reporting metadata; execution stays sequential
    }
    let rounds = sum.num_rounds();
    circuit.gates.extend(sum.gates.iter().cloned());
    circuit.append(&build_inv_qft(&a)?);

    let mut run = Run::new(cli, "add", 2 * n, circuit.len());
    run.report.input("a", args.a);
    run.report.input("b", args.b);
    run.report.input("n", n);
    if args.parallel {
        run.report.output("adder_rounds", rounds);
    }
    let out = run.execute(
        &circuit,
        &[("a", &a, args.a), ("b", &b, args.b)],
        &[("sum", &a)],
    )?;
    run.report.output("sum", out["sum"]);
    let line = format!("{} + {} mod 2^{} = {}", args.a, args.b, n, out["sum"]);
    run.finish(Some(&circuit), &[line]);
    Ok(())
}

fn cmd_dec(cli: &Cli, args: &DecArgs) -> Result<()> {
    let n = args.n.unwrap_or_else(|| bits(args.y));
    if bits(args.y) > n {
        return Err(SimError::ValueOverflow { value: args.y, width: n });
    }
    let y: Vec<usize> = (0..n).collect();
    let circuit = build_decrement(&y, None)?;

    let mut run = Run::new(cli, "dec", n, circuit.len());
    run.report.input("y", args.y);
    run.report.input("n", n);
    let out = run.execute(&circuit, &[("y", &y, args.y)], &[("result", &y)])?;
    run.report.output("result", out["result"]);
    let line = format!("{} - 1 mod 2^{} = {}", args.y, n, out["result"]);
    run.finish(Some(&circuit), &[line]);
    Ok(())
}

fn cmd_mul(cli: &Cli, args: &MulArgs) -> Result<()> {
    let n = args.n.unwrap_or_else(|| bits(args.x.max(args.y)));
    for v in [args.x, args.y] {
        if bits(v) > n {
            return Err(SimError::ValueOverflow { value: v, width: n });
        }
    }
    let layout = MultiplierLayout::allocate(n, n, 2 * n)?;
    let staged = build_multiplier(&layout)?;
    let circuit = staged.flatten();

    let mut run = Run::new(cli, "mul", layout.num_qubits(), circuit.len());
    run.report.input("x", args.x);
    run.report.input("y", args.y);
    run.report.input("n", n);

    // snapshots need the staged form; run it separately on the product backend
    if cli.snapshots {
        let mut st = ProductState::new(layout.num_qubits());
        run_init(
            &mut st,
            &[("x", &layout.multiplicand, args.x), ("y", &layout.multiplier, args.y)],
        )?;
        let mut snaps = Vec::new();
        staged.run_with(&mut st, |stage, st| {
            snaps.push(snapshot(
                &stage.to_string(),
                st,
                &[
                    ("y", &layout.multiplier),
                    ("acc", &layout.accumulator),
                    ("control", std::slice::from_ref(&layout.control)),
                ],
            ));
            Ok(())
        })?;
        run.report.snapshots = snaps;
    }

    let out = run.execute(
        &circuit,
        &[("x", &layout.multiplicand, args.x), ("y", &layout.multiplier, args.y)],
        &[
            ("product", &layout.accumulator),
            ("y", &layout.multiplier),
            ("control", std::slice::from_ref(&layout.control)),
        ],
    )?;
    run.report.output("product", out["product"]);
    run.report.output("y", out["y"]);
    run.report.output("control", out["control"]);
    let line = format!("{} × {} = {}", args.x, args.y, out["product"]);
    run.finish(Some(&circuit), &[line]);
    Ok(())
}

fn snapshot(label: &str, st: &ProductState, regs: &[(&str, &[usize])]) -> Snapshot {
    let mut registers = BTreeMap::new();
    for (name, reg) in regs {
        let snap = match st.register_view(reg) {
            RegisterView::Basis(v) => RegisterSnapshot::Basis { value: v },
            RegisterView::Phases(p) => {
                RegisterSnapshot::Phases { phases: p.iter().map(|d| d.to_string()).collect() }
            }
            RegisterView::Mixed => RegisterSnapshot::Mixed,
        };
        registers.insert(name.to_string(), snap);
    }
    Snapshot { label: label.to_string(), registers }
}

fn cmd_pow(cli: &Cli, args: &PowArgs) -> Result<()> {
    let plan = plan_power(args.x, args.k)?;
    let mut run = Run::new(cli, "pow", plan.num_qubits, plan.stages.gate_count());
    run.report.input("x", args.x);
    run.report.input("k", args.k);

    let mut results = Vec::new();
    for choice in backends(cli.backend, plan.num_qubits) {
        let snaps_wanted = cli.snapshots;
        let mut snaps = Vec::new();
        let value = match choice {
            BackendChoice::Dense => {
                let mut st = DenseState::new(plan.num_qubits)?;
                run_series(&plan, &mut st, |_, _| Ok(()))?
            }
            _ => {
                let mut st = ProductState::new(plan.num_qubits);
                let regs = &plan.registers;
                run_series(&plan, &mut st, |label, st| {
                    if snaps_wanted {
                        let views: Vec<(&str, &[usize])> =
                            regs.iter().map(|(n, q)| (n.as_str(), q.as_slice())).collect();
                        snaps.push(snapshot(label, st, &views));
                    }
                    Ok(())
                })?
            }
        };
        if !snaps.is_empty() {
            run.report.snapshots = snaps;
        }
        results.push(value.mantissa);
    }
    if results.windows(2).any(|w| w[0] != w[1]) {
        return Err(SimError::BackendMismatch { dense: results[0], product: results[1] });
    }
    run.report.output("power", results[0]);
    let line = format!("{}^{} = {}", args.x, args.k, results[0]);
    run.finish(Some(&plan.stages.flatten()), &[line]);
    Ok(())
}

fn cmd_weight(cli: &Cli, args: &WeightArgs) -> Result<()> {
    let w = WeightPhase::from_factorial(args.k, args.t)?;
    let t = args.t as usize;
    let phi: Vec<usize> = (0..t).collect();
    let eigen = t;
    let mut circuit = Circuit::new();
    circuit.push(Gate::x(eigen));
    circuit.append(&qtaylor::series::build_weight_loader(&phi, eigen, w.phase_numerator)?);

    let mut run = Run::new(cli, "weight", t + 1, circuit.len());
    run.report.input("k", args.k);
    run.report.input("t", args.t);
    let out = run.execute(&circuit, &[], &[("phi", &phi), ("eigen", &[eigen])])?;
    run.report.output("phi", out["phi"]);
    run.report.output("value", w.value());
    run.report.output("relative_error", w.relative_error());
    let line = format!(
        "1/{}! ≈ {}/2^{} = {:.6} (relative error {:.2e})",
        args.k,
        out["phi"],
        args.t,
        w.value(),
        w.relative_error()
    );
    run.finish(Some(&circuit), &[line]);
    Ok(())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SimError::InvalidSpec(format!("{}: {e}", path.display())))?;
            SeriesSpec::from_json(&text)?
        }
        None => {
            let order = args.order.ok_or_else(|| {
                SimError::InvalidSpec("either --config or --order and --t required".into())
            })?;
            let t = args.t.ok_or_else(|| {
                SimError::InvalidSpec("either --config or --order and --t required".into())
            })?;
            SeriesSpec::exponential(order, t)?
        }
    };
    let plan = plan_series(args.x, &spec)?;
    let mut run = Run::new(cli, "eval", plan.num_qubits, plan.stages.gate_count());
    run.report.input("x", args.x);
    run.report.input("order", spec.order);
    run.report.input("t", spec.t);

    let mut results = Vec::new();
    for choice in backends(cli.backend, plan.num_qubits) {
        let value = match choice {
            BackendChoice::Dense => {
                let mut st = DenseState::new(plan.num_qubits)?;
                run_series(&plan, &mut st, |_, _| Ok(()))?
            }
            _ => {
                let snaps_wanted = cli.snapshots;
                let mut snaps = Vec::new();
                let regs = &plan.registers;
                let mut st = ProductState::new(plan.num_qubits);
                let r = run_series(&plan, &mut st, |label, st| {
                    if snaps_wanted {
                        let views: Vec<(&str, &[usize])> =
                            regs.iter().map(|(n, q)| (n.as_str(), q.as_slice())).collect();
                        snaps.push(snapshot(label, st, &views));
                    }
                    Ok(())
                })?;
                if !snaps.is_empty() {
                    run.report.snapshots = snaps;
                }
                r
            }
        };
        results.push(value);
    }
    if results.windows(2).any(|w| w[0] != w[1]) {
        return Err(SimError::BackendMismatch {
            dense: results[0].mantissa,
            product: results[1].mantissa,
        });
    }
    let value = results[0];
    run.report.output("mantissa", value.mantissa);
    run.report.output("exponent", value.exponent);
    run.report.output("value", value.value());
    let shown = if value.value().fract() == 0.0 {
        format!("{}", value.value() as i64)
    } else {
        format!("{:.6}", value.value())
    };
    let line = format!("{value} = {shown}");
    run.finish(Some(&plan.stages.flatten()), &[line]);
    Ok(())
}

fn cmd_trace(cli: &Cli) -> Result<()> {
    let checkpoints = trace_e2()?;
    if cli.json {
        let mut report = RunReport::new("trace-e2", "product", 17, 0);
        for cp in &checkpoints {
            report.output(
                &cp.label,
                match &cp.data {
                    CheckpointData::Basis(v) => serde_json::json!({"value": v, "detail": cp.detail}),
                    CheckpointData::Phases(p) => serde_json::json!({
                        "phases": p.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                        "detail": cp.detail,
                    }),
                    CheckpointData::Fixed(f) => serde_json::json!({
                        "mantissa": f.mantissa, "exponent": f.exponent, "detail": cp.detail,
                    }),
                    CheckpointData::Note => serde_json::json!({"detail": cp.detail}),
                },
            );
        }
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        for cp in &checkpoints {
            println!("[{}] {}", cp.label, cp.detail);
        }
        let spec = SeriesSpec::exponential(4, 15)?;
        let order4 = evaluate_series(2, &spec)?;
        println!(
            "fourth order at t = 15: {order4} = {:.6} (rounds to {})",
            order4.value(),
            order4.value().round()
        );
    }
    Ok(())
}
