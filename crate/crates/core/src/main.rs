use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kdvrecip::calculus::{commutator, conservation_law_witness, variational_derivative, FlowLabel};
use kdvrecip::drpaper::{
    dispersionless_flow, primary_flows, verify_theorem_with, FamilySpec, VerificationReport, VerifyOptions,
};
use kdvrecip::lax::{kdv_flow, xi_kdv_flow};
use kdvrecip::text::{parse_expr_with_letter, parse_miura_map, parse_series_file, parse_system, render_system, render_text};
use kdvrecip::transforms::{
    evolve_formal_solution, miura_push_system, reciprocal_push_system, solution_transport, ReciprocalTransform,
};
use kdvrecip::TruncationContext;

#[derive(Parser)]
#[command(name = "kdvrecip", version, about = "Exact differential-polynomial algebra for KdV-type hierarchies")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct CtxArgs {
    /// Largest power of eps kept.
    #[arg(long, default_value_t = 4)]
    eps: u32,
    /// Largest polynomial degree in the jet variables kept.
    #[arg(long, default_value_t = 8)]
    deg: u32,
}

impl CtxArgs {
    fn ctx(self) -> TruncationContext {
        TruncationContext::new(self.eps, self.deg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the KdV density P_d.
    Kdv {
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Print the xi-KdV density P_d, obtained by the reciprocal transformation f = xi*u.
    Xikdv {
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Print the dispersionless matrix P_d of the rank-2 family.
    Disp {
        #[arg(long)]
        d: u32,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Print the primary flows of the rank-2 family as a system file.
    Primary {
        #[arg(long, default_value_t = 2)]
        dmax: u32,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Run every check of the splitting theorem.
    VerifyTheorem {
        #[arg(long)]
        dmax: u32,
        #[arg(long)]
        eps: u32,
        #[arg(long)]
        deg: u32,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
        /// Specialize xi to 0.
        #[arg(long)]
        xi0: bool,
    },
    /// Print the commutator of two flows; exit 1 unless it vanishes.
    Commute {
        #[arg(long)]
        file: PathBuf,
        a: String,
        b: String,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Check that F is a conservation law of every flow and print the fluxes.
    Conslaw {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Push a system through a Miura transformation read from a map file.
    MiuraApply {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Push a system through the reciprocal transformation given by f.
    RecipApply {
        #[arg(long)]
        f: String,
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        ctx: CtxArgs,
    },
    /// Solve the system from initial data to weight K and transport the solution by f.
    TransportSolution {
        #[arg(long)]
        f: String,
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        init: PathBuf,
        /// Weight bound of the series.
        #[arg(long)]
        deg: u32,
    },
}

/// Exit 1: a check failed. Exit 2: bad input.
enum Failure {
    Check(String),
    Input(String),
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{what}: {e}"))
}

fn check<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Check(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path, ctx: TruncationContext) -> Result<kdvrecip::calculus::EvolutionarySystem, Failure> {
    let src = read(path)?;
    parse_system(&src, ctx).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn print_report(r: &VerificationReport) {
    println!(
        "verify-theorem d_max = {}, eps_max = {}, deg_max = {}{}",
        r.d_max,
        r.eps_max,
        r.deg_max,
        if r.xi_zero { ", xi = 0" } else { "" }
    );
    for c in &r.checks {
        println!("  [{}] {} {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name);
        if let Some(e) = &c.error {
            println!("      error: {e}");
        }
        for d in &c.differences {
            println!("      {}: {}", d.label, d.difference);
        }
    }
    println!("{}", if r.passed { "all checks passed" } else { "verification FAILED" });
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Kdv { d, ctx } => {
            let p = kdv_flow(d, ctx.ctx()).map_err(check)?;
            println!("{}", render_text(&p, 'u'));
        }
        Cmd::Xikdv { d, ctx } => {
            let p = xi_kdv_flow(d, ctx.ctx()).map_err(check)?;
            println!("{}", render_text(&p, 'v'));
        }
        Cmd::Disp { d, ctx } => {
            let m = dispersionless_flow(&FamilySpec::new(ctx.ctx()), d).map_err(check)?;
            for (a, row) in m.iter().enumerate() {
                for (b, p) in row.iter().enumerate() {
                    println!("P[{}][{}] = {}", a + 1, b + 1, render_text(p, 'u'));
                }
            }
        }
        Cmd::Primary { dmax, ctx } => {
            let s = primary_flows(&FamilySpec::new(ctx.ctx()), dmax).map_err(check)?;
            if dmax > 0 {
                println!("# u1 components of the flows with d >= 1 are not known in closed form; printed as 0");
            }
            print!("{}", render_system(&s));
        }
        Cmd::VerifyTheorem { dmax, eps, deg, json, xi0 } => {
            let opts = VerifyOptions { xi_zero: xi0, fault: None };
            let r = verify_theorem_with(dmax, TruncationContext::new(eps, deg), &opts);
            if json {
                println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            } else {
                print_report(&r);
            }
            if !r.passed {
                return Err(Failure::Check("verification failed".into()));
            }
        }
        Cmd::Commute { file, a, b, ctx } => {
            let s = load_system(&file, ctx.ctx())?;
            let get = |name: &str| -> Result<_, Failure> {
                let label: FlowLabel = name.parse().map_err(Failure::Input)?;
                s.flow(label).ok_or_else(|| Failure::Input(format!("no flow {label} in {}", file.display())))
            };
            let c = commutator(get(&a)?, get(&b)?).map_err(check)?;
            for (i, p) in c.components().iter().enumerate() {
                println!("[{a}, {b}]^{} = {}", i + 1, render_text(p, s.letter()));
            }
            if !c.is_zero() {
                return Err(Failure::Check(format!("{a} and {b} do not commute")));
            }
        }
        Cmd::Conslaw { file, expr, ctx } => {
            let s = load_system(&file, ctx.ctx())?;
            let (f, _) = parse_expr_with_letter(&expr, s.n_vars(), ctx.ctx()).map_err(input("--expr"))?;
            let mut ok = true;
            for (label, h) in s.flows() {
                match conservation_law_witness(&f, h) {
                    Some(r) => println!("{label}: flux {}", render_text(&r, s.letter())),
                    None => {
                        ok = false;
                        let g = h.apply(&f);
                        let dv: Vec<String> = (0..s.n_vars())
                            .map(|a| render_text(&variational_derivative(&g, a), s.letter()))
                            .collect();
                        println!("{label}: not a conservation-law witness: δ/δu ≠ 0 ({})", dv.join(", "));
                    }
                }
            }
            if !ok {
                return Err(Failure::Check("not conserved by every flow".into()));
            }
        }
        Cmd::MiuraApply { map, file, ctx } => {
            let src = read(&map)?;
            let m = parse_miura_map(&src, ctx.ctx()).map_err(|e| Failure::Input(format!("{}:{e}", map.display())))?;
            let s = load_system(&file, ctx.ctx())?;
            print!("{}", render_system(&miura_push_system(&m, &s).map_err(check)?));
        }
        Cmd::RecipApply { f, file, ctx } => {
            let s = load_system(&file, ctx.ctx())?;
            let (fp, _) = parse_expr_with_letter(&f, s.n_vars(), ctx.ctx()).map_err(input("--f"))?;
            let t = ReciprocalTransform::new(fp).map_err(input("--f"))?;
            print!("{}", render_system(&reciprocal_push_system(&t, &s).map_err(check)?));
        }
        Cmd::TransportSolution { f, file, init, deg } => {
            let ctx = TruncationContext::new(deg, deg + 1);
            let s = load_system(&file, ctx)?;
            let (fp, _) = parse_expr_with_letter(&f, s.n_vars(), ctx).map_err(input("--f"))?;
            let t = ReciprocalTransform::new(fp).map_err(input("--f"))?;
            let src = read(&init)?;
            let u0 = parse_series_file(&src, deg).map_err(|e| Failure::Input(format!("{}:{e}", init.display())))?;
            let times = s.labels();
            let sol = evolve_formal_solution(&s, &times, &u0, deg).map_err(check)?;
            let names: Vec<String> = times.iter().enumerate().map(|(i, l)| format!("t{} = {l}", i + 1)).collect();
            println!("times: {}", names.join(", "));
            for (a, c) in sol.components.iter().enumerate() {
                println!("u{} = {c}", a + 1);
            }
            let out = solution_transport(&s, &t, &sol).map_err(check)?;
            println!("y = {}", out.y);
            println!("x = {}  (x in the y slot)", out.x_of_y);
            for (a, c) in out.solution.components.iter().enumerate() {
                println!("v{} = {c}  (x in the y slot)", a + 1);
            }
            print!("{}", render_system(&out.system));
            println!("closedness and residuals vanish to weight {}", out.solution.weight);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("kdvrecip: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("kdvrecip: {m}");
            ExitCode::from(2)
        }
    }
}
