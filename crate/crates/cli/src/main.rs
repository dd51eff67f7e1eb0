use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use randgap::bounds::{build_copies, GapCheck, GapReport};
use randgap::feas::FeasibilitySystem;
use randgap::harness::{
    convert_instance, exit_code_for, generate_instance, repro_appendix, repro_uniform56, run_check,
    ExperimentConfig, Instance, Mode, Setting, EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATION,
};
use randgap::json::Num;
use randgap::mech::LotteryCap;
use randgap::opt::{myerson, optimal_dsic_lp, optimal_menu_lp, optimal_pricing_exact};
use randgap::{Error, Rational, Scalar};

const CSV_HEADER: [&str; 6] = [
    "instance_id",
    "inequality_id",
    "lhs",
    "rhs",
    "slack",
    "ratio",
];

#[derive(Parser)]
#[command(
    name = "randgap",
    version,
    about = "Lottery versus pricing revenue gaps on small exact instances"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// 1 independent values, 2 additive values, 3 item capacities, 4 matroid
    #[arg(long, default_value = "1", value_parser = parse_setting)]
    setting: Setting,
    /// Agents (ignored for settings 1 and 2)
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Largest support size of each value distribution
    #[arg(long, default_value_t = 2)]
    support: usize,
    /// Largest item capacity for setting 3
    #[arg(long, default_value_t = 2)]
    capacity: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Write <OUT>.json, and <OUT>.csv when the command checks inequalities;
    /// without it the JSON goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Which instance of the seeded family
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value = "rational")]
    mode: Mode,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate seeded instances as JSON
    Gen {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check every inequality of the setting on seeded instances
    Check {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "rational")]
        mode: Mode,
        /// Worker threads; 0 uses one per core
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Solve the optimal menu program (settings 1, 2) or DSIC program (3, 4)
    Lp(SingleArgs),
    /// Myerson's mechanism on the copies instance
    Myerson(SingleArgs),
    /// Optimal item pricing for a single buyer
    Pricing(SingleArgs),
    /// The equal-revenue menu that beats the copies bound
    ReproAppendix {
        #[arg(long, default_value_t = 1e4)]
        upper: f64,
        /// Grid cells of the discretized distribution
        #[arg(long, default_value_t = 2000)]
        cells: usize,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Uniform [5, 6] values: best symmetric price and a lottery that improves it
    ReproUniform56 {
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        /// Grid step of the optimal menu program
        #[arg(long, default_value_t = 0.2)]
        lp_step: f64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    let v: u8 = s
        .parse()
        .map_err(|_| format!("not a setting number: {s}"))?;
    Setting::try_from(v).map_err(|e| e.to_string())
}

impl InstanceArgs {
    fn config(&self, count: usize, mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            seed: self.seed,
            setting: self.setting,
            n: self.n,
            m: self.m,
            support: self.support,
            capacity: self.capacity,
            count,
            mode,
        }
    }
}

/// A failed command: message and exit status.
struct Failure(String, i32);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = exit_code_for(&e);
        Failure(e.to_string(), code)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(format!("cannot write output: {e}"), EXIT_CONFIG)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure(format!("cannot write output: {e}"), EXIT_CONFIG)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(format!("cannot encode output: {e}"), EXIT_CONFIG)
    }
}

type CmdResult = Result<i32, Failure>;

fn write_csv(path: &Path, rows: &[[String; 6]]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn emit(
    out: &OutArgs,
    value: &impl Serialize,
    rows: Option<&[[String; 6]]>,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match &out.out {
        None => {
            // a closed pipe (`| head`) is not an error
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
        Some(stem) => {
            if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(stem.with_extension("json"), text + "\n")?;
            if let Some(rows) = rows {
                write_csv(&stem.with_extension("csv"), rows)?;
            }
        }
    }
    Ok(())
}

fn status<T: Scalar>(report: &GapReport<T>) -> i32 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    }
}

fn gen(inst: &InstanceArgs, count: usize, out: &OutArgs) -> CmdResult {
    let cfg = inst.config(count, Mode::Rational);
    let all = (0..count)
        .map(|k| generate_instance(&cfg, k).map(|i| i.to_json()))
        .collect::<randgap::Result<Vec<_>>>()?;
    emit(out, &all, None)?;
    Ok(EXIT_PASS)
}

fn check<T: Scalar + Send + Sync>(
    cfg: &ExperimentConfig,
    workers: usize,
    out: &OutArgs,
) -> CmdResult {
    let run = run_check::<T>(cfg, workers)?;
    emit(out, &run.to_json(), Some(&run.csv_rows()))?;
    eprintln!(
        "{} instances checked, {} violations, {} instance errors",
        run.reports.len(),
        run.violations(),
        run.errors.len()
    );
    for e in &run.errors {
        eprintln!("{}: {}", e.instance_id, e.message);
    }
    Ok(run.exit_code())
}

fn single_instance<T: Scalar>(a: &SingleArgs) -> Result<Instance<T>, Failure> {
    let cfg = a.inst.config(a.index + 1, a.mode);
    Ok(convert_instance(&generate_instance(&cfg, a.index)?)?)
}

fn lp<T: Scalar>(a: &SingleArgs) -> CmdResult {
    let inst = single_instance::<T>(a)?;
    let value = match &inst.fs {
        None => {
            let opt = optimal_menu_lp(&inst.ts, LotteryCap::Simplex)?;
            json!({
                "instance_id": inst.id,
                "program": "menu",
                "revenue": Num(opt.revenue),
                "method": format!("{:?}", opt.solution.method),
                "pivots": opt.solution.pivots,
                "menu": opt.menu.to_json(),
            })
        }
        Some(fs) => {
            let opt = optimal_dsic_lp(&inst.ts, fs)?;
            json!({
                "instance_id": inst.id,
                "program": "dsic",
                "revenue": Num(opt.revenue),
                "method": format!("{:?}", opt.solution.method),
                "pivots": opt.solution.pivots,
                "table": opt.table.to_json(&inst.ts),
            })
        }
    };
    emit(&a.out, &value, None)?;
    Ok(EXIT_PASS)
}

fn myerson_cmd<T: Scalar>(a: &SingleArgs) -> CmdResult {
    let inst = single_instance::<T>(a)?;
    let fs = match inst.fs.clone() {
        Some(fs) => fs,
        None => FeasibilitySystem::single_agent(inst.ts.n_items())?,
    };
    let copies = build_copies(&inst.ts, &fs)?;
    let mye = myerson(&copies.ts, &copies.fs)?;
    let mut report = GapReport::new(inst.id.clone());
    report.push(GapCheck::eq(
        "myerson-virtual-surplus-equals-threshold",
        mye.virtual_surplus.clone(),
        mye.threshold_revenue.clone(),
    ));
    let value = json!({
        "instance_id": inst.id,
        "revenue": Num(mye.threshold_revenue.clone()),
        "virtual_surplus": Num(mye.virtual_surplus.clone()),
        "virtual_values": mye.virtual_values.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        "checks": report.to_json(),
    });
    emit(&a.out, &value, Some(&report.csv_rows()))?;
    Ok(status(&report))
}

fn pricing<T: Scalar>(a: &SingleArgs) -> CmdResult {
    let inst = single_instance::<T>(a)?;
    let opt = optimal_pricing_exact(&inst.ts)?;
    let mut report = GapReport::new(inst.id.clone());
    if let Some(grid) = &opt.grid_revenue {
        report.push(GapCheck::le(
            "grid-pricing-le-exact-pricing",
            grid.clone(),
            opt.revenue.clone(),
        ));
    }
    let value = json!({
        "instance_id": inst.id,
        "prices": opt.pricing.prices.iter().map(|p| p.clone().map(Num)).collect::<Vec<_>>(),
        "revenue": Num(opt.revenue),
        "vertices": opt.vertices,
        "checks": report.to_json(),
    });
    emit(&a.out, &value, Some(&report.csv_rows()))?;
    Ok(status(&report))
}

fn repro(report: &impl Serialize, checks: GapReport<f64>, out: &OutArgs) -> CmdResult {
    for c in &checks.checks {
        eprintln!("{} {}", if c.passed() { "PASS" } else { "FAIL" }, c.id);
    }
    let value = json!({ "result": report, "checks": checks.to_json() });
    emit(out, &value, Some(&checks.csv_rows()))?;
    Ok(status(&checks))
}

fn by_mode(
    mode: Mode,
    exact: impl FnOnce() -> CmdResult,
    float: impl FnOnce() -> CmdResult,
) -> CmdResult {
    match mode {
        Mode::Rational => exact(),
        Mode::Float => float(),
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.cmd {
        Cmd::Gen { inst, count, out } => gen(&inst, count, &out),
        Cmd::Check {
            inst,
            count,
            mode,
            workers,
            out,
        } => {
            let cfg = inst.config(count, mode);
            by_mode(
                mode,
                || check::<Rational>(&cfg, workers, &out),
                || check::<f64>(&cfg, workers, &out),
            )
        }
        Cmd::Lp(a) => by_mode(a.mode, || lp::<Rational>(&a), || lp::<f64>(&a)),
        Cmd::Myerson(a) => by_mode(
            a.mode,
            || myerson_cmd::<Rational>(&a),
            || myerson_cmd::<f64>(&a),
        ),
        Cmd::Pricing(a) => by_mode(a.mode, || pricing::<Rational>(&a), || pricing::<f64>(&a)),
        Cmd::ReproAppendix {
            upper,
            cells,
            workers,
            out,
        } => {
            let r = repro_appendix(upper, cells, workers)?;
            repro(&r, r.checks(), &out)
        }
        Cmd::ReproUniform56 {
            step,
            lp_step,
            workers,
            out,
        } => {
            let r = repro_uniform56(step, lp_step, workers)?;
            repro(&r, r.checks(), &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(Failure(msg, code)) => {
            eprintln!("error: {msg}");
            code
        }
    };
    ExitCode::from(code as u8)
}
