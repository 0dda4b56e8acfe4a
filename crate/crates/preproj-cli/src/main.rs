//! `preproj`: check modules, build crystal truncations, compute
//! Littlewood–Richardson coefficients and evaluate convolution products.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use preproj::catalog::{a2d2_fixtures, b2_fixtures, g2_fixtures, make_e};
use preproj::convolution::{rational_string, serre_element, ConvExpr, Evaluator, ThetaMonomial};
use preproj::crystal::{
    compare_kostant, emit_dot, emit_json, generate_binfty, lr_decompose, lr_sum_rule, verify_axioms, CrystalGraph,
    DotOptions,
};
use preproj::io::{embedded_cartan, read_module, write_module, AnyRep};
use preproj::semicanonical::semicanonical_construct;
use preproj::{Algebra, CartanDatum, Error, Field, Fp, Rep, Result};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "preproj", version, about = "Generalized preprojective algebras: modules, crystals, convolution")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// TOML file with [cartan], [policy] and [budget] blocks.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    retries: Option<usize>,
    /// Prime used for generic representatives.
    #[arg(long, global = true)]
    prime: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Relations, local freeness, φ/φ* and Hom/Ext against every E_i.
    Check {
        #[arg(long)]
        module: PathBuf,
    },
    /// Generate the truncation of B(−∞) up to a height.
    Crystal {
        #[arg(long)]
        height: i64,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        check_axioms: bool,
        #[arg(long)]
        check_kostant: bool,
    },
    /// Multiplicities of V(ν) in V(λ) ⊗ V(μ).
    Lr {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu: Vec<i64>,
        #[arg(long)]
        height: Option<i64>,
    },
    /// Evaluate convolution products at a module.
    Conv {
        #[command(subcommand)]
        cmd: ConvCommand,
    },
    /// Functions dual to the components of one weight.
    Semican {
        #[arg(long, value_delimiter = ',')]
        weight: Vec<i64>,
        #[arg(long)]
        height: Option<i64>,
    },
    /// Print a bundled example module (or a direct sum) as module JSON.
    Fixture {
        /// One of b2, g2, a2d2.
        #[arg(long)]
        set: String,
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
    },
}

#[derive(Subcommand)]
enum ConvCommand {
    /// χ of a word such as "1,2,1" or "2,1^2" (leftmost factor at the bottom).
    Eval {
        #[arg(long)]
        module: PathBuf,
        #[arg(long)]
        word: String,
        /// Also print the fitted point-count polynomial.
        #[arg(long)]
        show_poly: bool,
    },
    /// The Serre element ad(θ_i)^{1−c_ij}(θ_j) at a module.
    Serre {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        module: PathBuf,
    },
}

struct Ctx {
    cfg: RunConfig,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self> {
        let mut cfg = match &g.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::empty(),
        };
        if let Some(s) = g.seed {
            cfg.policy.seed = s;
        }
        if let Some(s) = g.samples {
            cfg.policy.samples = s;
        }
        if let Some(r) = g.retries {
            cfg.policy.retries = r;
        }
        if let Some(p) = g.prime {
            cfg.policy.prime = p;
        }
        cfg.policy.validate()?;
        cfg.budget.seed = cfg.policy.seed;
        Ok(Ctx { cfg })
    }

    fn datum(&self, module_text: Option<&str>) -> Result<CartanDatum> {
        if let Some(c) = &self.cfg.cartan {
            return c.to_datum();
        }
        if let Some(text) = module_text {
            if let Some(c) = embedded_cartan(text)? {
                return c.to_datum();
            }
        }
        Err(Error::Input("no Cartan datum: pass --config or embed a \"cartan\" block in the module file".into()))
    }

    fn module(&self, path: &PathBuf) -> Result<(Arc<Algebra>, AnyRep)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let alg = Algebra::new(self.datum(Some(&text))?);
        let m = read_module(&alg, &text)?;
        Ok((alg, m))
    }

    fn graph(&self, height: i64) -> Result<CrystalGraph<Fp>> {
        let alg = Algebra::new(self.datum(None)?);
        generate_binfty(&alg, self.cfg.policy.field(), height, &self.cfg.policy)
    }
}

fn tuple<T: std::fmt::Display>(v: &[T]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

/// Returns whether the relations hold.
fn check_report<F: Field>(m: &Rep<F>, out: &mut String) -> bool {
    use std::fmt::Write as _;
    let n = m.n();
    let violations = m.check_relations();
    let _ = writeln!(out, "field {}", m.field());
    let _ = writeln!(out, "dims {}", tuple(m.dims()));
    if violations.is_empty() {
        let _ = writeln!(out, "relations ok");
    } else {
        for v in &violations {
            let _ = writeln!(out, "relation {} fails at ({},{}): {}", v.relation, v.row, v.col, v.value);
        }
        return false;
    }
    for i in 0..n {
        let _ = writeln!(out, "jordan type at {}: {}", i + 1, tuple(&m.jordan_type(i)));
    }
    match m.rank_vector() {
        Some(r) => {
            let _ = writeln!(out, "locally free, rank {}", tuple(&r));
            let _ = writeln!(out, "phi {}", tuple(&m.phis()));
            let _ = writeln!(out, "phi* {}", tuple(&m.phi_stars()));
            let alg = m.algebra();
            let es: Vec<Rep<F>> = (0..n).map(|i| make_e::<F>(alg, m.field(), i)).collect();
            let hom_to: Vec<usize> = es.iter().map(|e| m.hom_dim(e)).collect();
            let hom_from: Vec<usize> = es.iter().map(|e| e.hom_dim(m)).collect();
            let ext: Vec<String> =
                (0..n).map(|i| m.ext1_to_e(i).map(|x| x.to_string()).unwrap_or_else(|e| e.to_string())).collect();
            let _ = writeln!(out, "Hom(M,E_i) {}", tuple(&hom_to));
            let _ = writeln!(out, "Hom(E_i,M) {}", tuple(&hom_from));
            let _ = writeln!(out, "Ext1(M,E_i) {}", tuple(&ext));
        }
        None => {
            let _ = writeln!(out, "not locally free");
        }
    }
    let _ = writeln!(out, "End dim {}", m.end_dim());
    true
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(String, bool)> {
    use std::fmt::Write as _;
    let ctx = Ctx::new(&cli.global)?;
    let mut out = String::new();
    let mut ok = true;
    match cli.cmd {
        Command::Check { module } => {
            let (_, m) = ctx.module(&module)?;
            ok = match &m {
                AnyRep::Q(r) => check_report(r, &mut out),
                AnyRep::Fp(r) => check_report(r, &mut out),
            };
        }
        Command::Crystal { height, dot, json, check_axioms, check_kostant } => {
            let g = ctx.graph(height)?;
            let _ = writeln!(out, "layers {}", tuple(&g.layer_sizes()));
            let _ = writeln!(out, "nodes {}", g.len());
            if let Some(p) = dot {
                write_file(&p, &emit_dot(&g, &DotOptions::all()))?;
            }
            if let Some(p) = json {
                write_file(&p, &emit_json(&g))?;
            }
            if check_axioms {
                let rep = verify_axioms(&g, &ctx.cfg.policy)?;
                let total: usize = rep.checks.values().sum();
                let _ = writeln!(out, "axiom checks {total}, violations {}", rep.violations.len());
                for v in &rep.violations {
                    let _ = writeln!(out, "violation {} at {:?} vertex {}: {}", v.axiom, v.key, v.vertex, v.detail);
                }
                ok &= rep.is_ok();
            }
            if check_kostant {
                let rows = compare_kostant(&g)?;
                let bad: Vec<_> = rows.iter().filter(|r| r.nodes as u64 != r.kostant).collect();
                let _ = writeln!(out, "kostant weights {}, mismatches {}", rows.len(), bad.len());
                for r in bad {
                    let _ = writeln!(out, "mismatch at {}: {} nodes, {} partitions", tuple(&r.weight), r.nodes, r.kostant);
                }
                ok &= rows.iter().all(|r| r.nodes as u64 == r.kostant);
            }
        }
        Command::Lr { lambda, mu, height } => {
            let datum = ctx.datum(None)?;
            if lambda.len() != datum.n() || mu.len() != datum.n() {
                return Err(Error::Input(format!("weights need {} coordinates", datum.n())));
            }
            let need = preproj::crystal::lr_required_height(&datum, &lambda, &mu)?;
            let g = ctx.graph(height.unwrap_or(need.max(0)))?;
            let lr = lr_decompose(&g, &lambda, &mu)?;
            for (nu, m) in &lr.entries {
                let _ = writeln!(out, "{} {m}", tuple(nu));
            }
            let (sum, prod) = lr_sum_rule(&datum, &lambda, &mu, &lr)?;
            let _ = writeln!(out, "dimension check {sum} = {prod}");
            ok &= sum == prod;
        }
        Command::Conv { cmd } => match cmd {
            ConvCommand::Eval { module, word, show_poly } => {
                let (alg, m) = ctx.module(&module)?;
                let m = m.into_q()?;
                let w = ThetaMonomial::parse(&word, alg.n())?;
                let ev = Evaluator::new(&m, &ctx.cfg.budget)?.euler(&w)?;
                let _ = writeln!(out, "{}", ev.value);
                if show_poly {
                    let _ = writeln!(out, "count {} over primes {:?}", ev.poly, ev.poly.primes);
                }
            }
            ConvCommand::Serre { i, j, module } => {
                let (alg, m) = ctx.module(&module)?;
                let m = m.into_q()?;
                if i == 0 || j == 0 {
                    return Err(Error::Input("vertices are numbered from 1".into()));
                }
                let e = serre_element(&alg.datum, i - 1, j - 1)?;
                let v = Evaluator::new(&m, &ctx.cfg.budget)?.eval_expr(&e)?;
                let _ = writeln!(out, "{}", rational_string(&v));
            }
        },
        Command::Semican { weight, height } => {
            let h = height.unwrap_or(weight.iter().sum());
            let g = ctx.graph(h)?;
            let res = semicanonical_construct(&g, &weight, &ctx.cfg.policy, &ctx.cfg.budget)?;
            for (k, f) in &res.functions {
                let _ = writeln!(out, "{k:?}: {}", expr_string(f));
            }
            for row in &res.delta {
                let cells: Vec<String> = row.iter().map(rational_string).collect();
                let _ = writeln!(out, "rho {}", cells.join(" "));
            }
        }
        Command::Fixture { set, names } => {
            let fx = match set.as_str() {
                "b2" => b2_fixtures(),
                "g2" => g2_fixtures(),
                "a2d2" => a2d2_fixtures(),
                other => return Err(Error::Input(format!("unknown fixture set {other:?}"))),
            };
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let m = fx.sum::<preproj::Rational>(&refs, preproj::FieldKind::Rational)?;
            let mut v: serde_json::Value = serde_json::from_str(&write_module(&m)).expect("own output");
            let d = fx.datum();
            let omega: Vec<(usize, usize)> = d.omega().iter().map(|&(i, j)| (i + 1, j + 1)).collect();
            v["cartan"] = serde_json::json!({ "C": d.matrix(), "D": d.symmetrizer(), "Omega": omega });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"));
        }
    }
    Ok((out, ok))
}

fn expr_string(e: &ConvExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let parts: Vec<String> = e.terms.iter().map(|(m, c)| format!("{} [{m}]", rational_string(c))).collect();
    parts.join(" + ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("NUM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli) {
        Ok((out, ok)) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
