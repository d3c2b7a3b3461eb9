//! `sced` — solve dispatch problems, compute the price of security, and run
//! the experiment sweeps from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sced_core::cases;
use sced_core::dispatch::{DispatchModel, DispatchSolution, DispatchStatus};
use sced_core::experiments::{
    ablation_suite, format_sig, run_sweep, worst_case_search, AblationVariant, SweepMode,
    SweepResult, SweepSpec,
};
use sced_core::network::{load_instance, load_network, InputInstance, Network};
use sced_core::two_bus::TwoBusParams;

#[derive(Parser)]
#[command(
    name = "sced",
    version,
    about = "DC dispatch engine: economic dispatch, N-1 security-constrained dispatch, \
             and price-of-security analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolveArgs {
    /// Bundled case name (`2bus`, `pjm5`) or path to a case file.
    #[arg(long)]
    case: String,
    /// Path to an instance file (gen_capacity and demand by bus id).
    #[arg(long)]
    instance: PathBuf,
    /// CSV output path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the economic dispatch problem.
    SolveEd(SolveArgs),
    /// Solve the preventive N-1 security-constrained dispatch problem.
    SolveSced(SolveArgs),
    /// Solve both problems and report the price of security.
    Pos(SolveArgs),
    /// Closed-form 2-bus analysis from raw line parameters.
    TwoBusOracle {
        /// Cost coefficient at bus 1 ($/MWh).
        #[arg(long)]
        alpha1: f64,
        /// Cost coefficient at bus 2 ($/MWh).
        #[arg(long)]
        alpha2: f64,
        /// Thermal limit of line 1 (MW).
        #[arg(long)]
        limit1: f64,
        /// Thermal limit of line 2 (MW).
        #[arg(long)]
        limit2: f64,
        /// Susceptance of line 1.
        #[arg(long)]
        b1: f64,
        /// Susceptance of line 2.
        #[arg(long)]
        b2: f64,
        /// Demand at bus 1 (MW).
        #[arg(long)]
        d1: f64,
        /// Demand at bus 2 (MW).
        #[arg(long)]
        d2: f64,
    },
    /// Run an experiment sweep described by a JSON spec file.
    Sweep {
        #[arg(long)]
        case: String,
        /// One of: capacity-sweep, demand-grid, cheap-demand-sweep,
        /// fixed-aggregate-split, random-distribution-study.
        #[arg(long)]
        mode: String,
        /// Path to the sweep parameter file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exhaustive worst-case instance search over a demand grid.
    WorstCase {
        #[arg(long)]
        case: String,
        /// Demand grid step (MW).
        #[arg(long)]
        dstep: f64,
        /// Demand grid upper bound per bus (MW).
        #[arg(long)]
        dmax: f64,
        /// Uniform generation capacity per bus (MW); unlimited if omitted.
        #[arg(long)]
        qmax: Option<f64>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Topology-simplification study on the bundled 5-bus case.
    Ablation {
        /// One of: full, no-150-link, normalized, homogeneous.
        #[arg(long)]
        variant: String,
        #[arg(long, default_value_t = 500)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_case(case: &str) -> Result<Network> {
    if let Some(net) = cases::by_name(case) {
        return Ok(net);
    }
    let document = fs::read_to_string(case).with_context(|| format!("reading case {case}"))?;
    load_network(&document).with_context(|| format!("parsing case {case}"))
}

fn read_instance(net: &Network, path: &Path) -> Result<InputInstance> {
    let document =
        fs::read_to_string(path).with_context(|| format!("reading instance {}", path.display()))?;
    let instance = load_instance(net, &document)
        .with_context(|| format!("parsing instance {}", path.display()))?;
    let report = sced_core::network::validate_instance(net, &instance);
    if !report.is_valid() {
        for issue in &report.errors {
            eprintln!("error: {issue}");
        }
        bail!("instance {} failed validation", path.display());
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(instance)
}

fn generation_csv(net: &Network, solution: &DispatchSolution) -> String {
    let mut out = String::from("bus,generation\n");
    for (bus, q) in net.buses().iter().zip(&solution.generation) {
        out.push_str(&format!("{},{}\n", bus.id, format_sig(*q)));
    }
    out
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn print_solution(label: &str, solution: &DispatchSolution) {
    match solution.status {
        DispatchStatus::Optimal => {
            println!("{label}: optimal cost {}", format_sig(solution.cost));
            if !solution.binding_lines.is_empty() {
                let ids: Vec<String> =
                    solution.binding_lines.iter().map(ToString::to_string).collect();
                println!("  binding lines: {}", ids.join(", "));
            }
            if !solution.binding_contingencies.is_empty() {
                let pairs: Vec<String> = solution
                    .binding_contingencies
                    .iter()
                    .map(|(outaged, line)| format!("(out {outaged} -> line {line})"))
                    .collect();
                println!("  binding contingencies: {}", pairs.join(", "));
            }
        }
        DispatchStatus::Infeasible => println!("{label}: infeasible"),
    }
}

fn run_solve(args: &SolveArgs, security: bool) -> Result<()> {
    let net = load_case(&args.case)?;
    let model = DispatchModel::new(&net)?;
    let instance = read_instance(&net, &args.instance)?;
    let solution = if security {
        model.solve_sced(&instance)?
    } else {
        model.solve_ed(&instance)?
    };
    if solution.status != DispatchStatus::Optimal {
        print_solution(if security { "sced" } else { "ed" }, &solution);
        bail!("no optimal dispatch for this instance");
    }
    write_output(&args.output, &generation_csv(&net, &solution))?;
    print_solution(if security { "sced" } else { "ed" }, &solution);
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_pos(args: &SolveArgs) -> Result<()> {
    let net = load_case(&args.case)?;
    let model = DispatchModel::new(&net)?;
    let instance = read_instance(&net, &args.instance)?;
    let report = model.price_of_security(&instance)?;

    // The per-bus rows carry the security-constrained dispatch; the
    // unconstrained one is available through solve-ed.
    let mut csv = generation_csv(&net, &report.sc_solution);
    csv.push_str("cost_ed,cost_sc,pos\n");
    csv.push_str(&format!(
        "{},{},{}\n",
        format_sig(report.c_ed),
        format_sig(report.c_sc),
        format_sig(report.pos)
    ));
    write_output(&args.output, &csv)?;

    print_solution("ed", &report.ed_solution);
    print_solution("sced", &report.sc_solution);
    println!("price of security: {}", format_sig(report.pos));
    println!("wrote {}", args.output.display());
    Ok(())
}

fn run_two_bus_oracle(costs: [f64; 2], susceptances: [f64; 2], limits: [f64; 2], demands: [f64; 2]) -> Result<()> {
    let params = TwoBusParams::from_line_params(costs, susceptances, limits)?;
    println!(
        "cheap bus {} (alpha {}), expensive bus {} (alpha {})",
        params.cheap_bus, params.cheap_cost, params.expensive_bus, params.expensive_cost
    );
    println!(
        "base transfer limit {} MW, secure transfer limit {} MW",
        format_sig(params.base_transfer),
        format_sig(params.secure_transfer)
    );

    let d_cheap = if params.cheap_bus.0 == 1 { demands[0] } else { demands[1] };
    let d_expensive = if params.cheap_bus.0 == 1 { demands[1] } else { demands[0] };
    let (c_ed, c_sc) = params.closed_form_costs(d_cheap, d_expensive)?;
    let pos = params.closed_form_pos(d_cheap, d_expensive)?;
    println!(
        "c_ed = {}, c_sc = {}, PoS = {}",
        format_sig(c_ed),
        format_sig(c_sc),
        format_sig(pos)
    );

    let worst = params.worst_case();
    println!(
        "worst case: demand {} MW at bus {} (none at bus {}), cheap capacity >= {} MW, PoS = {}",
        format_sig(worst.demand_expensive),
        params.expensive_bus,
        params.cheap_bus,
        format_sig(worst.min_cheap_capacity),
        format_sig(worst.pos)
    );
    Ok(())
}

fn summarize_sweep(result: &SweepResult) {
    println!(
        "case {}, mode {}, seed {}: {} rows",
        result.metadata.case,
        result.metadata.mode,
        result.metadata.seed,
        result.rows.len()
    );
    if let Some((row, pos)) = result.peak() {
        let swept: Vec<String> = result.rows[row].swept.iter().map(|v| format_sig(*v)).collect();
        println!("  max PoS {} at ({})", format_sig(pos), swept.join(", "));
    }
}

fn run_sweep_command(case: &str, mode: &str, spec: &Path, output: &Path) -> Result<()> {
    let net = load_case(case)?;
    let mode: SweepMode = mode.parse()?;
    let document =
        fs::read_to_string(spec).with_context(|| format!("reading spec {}", spec.display()))?;
    let spec = SweepSpec::from_json(mode, &document)?;
    let result = run_sweep(&net, &spec)?;
    write_output(output, &result.to_csv())?;
    summarize_sweep(&result);
    println!("wrote {}", output.display());
    Ok(())
}

fn run_worst_case(case: &str, dstep: f64, dmax: f64, qmax: Option<f64>, output: &Path) -> Result<()> {
    let net = load_case(case)?;
    let capacity = vec![vec![qmax.unwrap_or(f64::INFINITY); net.bus_count()]];
    let result = worst_case_search(&net, &capacity, dmax, dstep)?;

    let mut csv = String::from("bus,demand,capacity\n");
    for ((bus, demand), capacity) in net
        .buses()
        .iter()
        .zip(&result.instance.demand)
        .zip(&result.instance.gen_capacity)
    {
        csv.push_str(&format!(
            "{},{},{}\n",
            bus.id,
            format_sig(*demand),
            format_sig(*capacity)
        ));
    }
    csv.push_str("cost_ed,cost_sc,pos\n");
    csv.push_str(&format!(
        "{},{},{}\n",
        format_sig(result.report.c_ed),
        format_sig(result.report.c_sc),
        format_sig(result.report.pos)
    ));
    write_output(output, &csv)?;

    println!(
        "evaluated {} grid points ({} feasible); worst-case PoS {}",
        result.evaluated,
        result.feasible,
        format_sig(result.report.pos)
    );
    let demands: Vec<String> = result.instance.demand.iter().map(|d| format_sig(*d)).collect();
    println!("  maximizer demand: ({})", demands.join(", "));
    println!("wrote {}", output.display());
    Ok(())
}

fn run_ablation(variant: &str, runs: usize, seed: u64, output: &Path) -> Result<()> {
    let variant: AblationVariant = variant.parse()?;
    let result = ablation_suite(variant, runs, seed)?;
    write_output(output, &result.to_csv())?;
    summarize_sweep(&result);
    if let Some((row, _)) = result.first_critical() {
        println!("  PoS first exceeds 1 at {} MW", format_sig(result.rows[row].swept[0]));
    }
    println!("wrote {}", output.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::SolveEd(args) => run_solve(args, false),
        Command::SolveSced(args) => run_solve(args, true),
        Command::Pos(args) => run_pos(args),
        Command::TwoBusOracle { alpha1, alpha2, limit1, limit2, b1, b2, d1, d2 } => {
            run_two_bus_oracle([*alpha1, *alpha2], [*b1, *b2], [*limit1, *limit2], [*d1, *d2])
        }
        Command::Sweep { case, mode, spec, output } => run_sweep_command(case, mode, spec, output),
        Command::WorstCase { case, dstep, dmax, qmax, output } => {
            run_worst_case(case, *dstep, *dmax, *qmax, output)
        }
        Command::Ablation { variant, runs, seed, output } => {
            run_ablation(variant, *runs, *seed, output)
        }
    }
}
