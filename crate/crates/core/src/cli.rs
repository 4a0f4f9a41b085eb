//! Command-line frontend.
//!
//! Exit codes: 0 success, 2 infeasible demand (the certificate is printed
//! on stdout), 3 input error, 4 resource limit, 1 anything else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::certify::{certify_partial_bound, certify_scc_bound, PartialParams};
use crate::chance::{FaithfulRounding, HalfHomogeneousRounding, HalfMode, IterativeRounding};
use crate::determinize::{determinize_exact_k, determinize_logblowup, determinize_scalefree};
use crate::error::{Error, Result};
use crate::expected::{
    mwu_lottery, reduce_support, sparsify_sampling, BruteForceKMedian, ExplicitLottery, KMedianSolver,
    LocalSearchKMedian,
};
use crate::io::{read_instance, read_json, to_json_string, DemandsJson, InstanceJson};
use crate::lottery::{ClusterLottery, PartialLottery, QDistribution, SCC_SHIFT_Q};
use crate::lp::{chance_lp, expectation_lp};
use crate::model::{DemandChance, DemandExpected, Instance, SolutionSet};
use crate::rounding::{RandomSource, Sampler};
use crate::verify::{gen_instance, mc_verify, GenKind, GenParams, Guarantees, DEFAULT_SLACK};

/// Mean-distance factor claimed for plain cluster rounding.
pub const GENERAL_MEAN_FACTOR: f64 = 1.0 + 2.0 / std::f64::consts::E;
/// Mean-distance factor claimed for partial-cluster rounding with the
/// tuned shift distribution.
pub const PARTIAL_MEAN_FACTOR: f64 = 1.592;

#[derive(Debug, Parser)]
#[command(name = "stoclot", version, about = "Stochastic k-center and k-supplier rounding toolkit")]
pub struct Cli {
    /// Root random seed.
    #[arg(long, global = true, env = "STOCLOT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sampling; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance.
    Gen(GenArgs),
    /// Run a rounding algorithm.
    Solve {
        #[command(subcommand)]
        what: SolveCommand,
    },
    /// Find a single set meeting expected-distance targets approximately.
    Determinize(DeterminizeArgs),
    /// Replace a lottery by a small-support explicit one.
    Sparsify(SparsifyArgs),
    /// Certify a worst-case expected-distance constant.
    Certify(CertifyArgs),
    /// Monte Carlo check of an algorithm's guarantees.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Chance k-coverage roundings.
    Chance(ChanceArgs),
    /// k-supplier lotteries.
    Lottery(LotteryArgs),
    /// Expected-distance lottery by multiplicative weights.
    Expected(ExpectedArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Euclidean,
    #[value(name = "random_metric")]
    RandomMetric,
    #[value(name = "uniform_gadget")]
    UniformGadget,
    Star,
}

impl From<KindArg> for GenKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Euclidean => GenKind::Euclidean,
            KindArg::RandomMetric => GenKind::RandomMetric,
            KindArg::UniformGadget => GenKind::UniformGadget,
            KindArg::Star => GenKind::Star,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Points (SCC) or clients.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Separate facilities; omit for an SCC instance.
    #[arg(long)]
    pub facilities: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Faithful,
    HalfP,
    HalfR,
    Iterative,
    General,
    Scc,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChanceAlgo {
    Faithful,
    HalfP,
    HalfR,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LotteryAlgo {
    General,
    Scc,
    Partial,
}

impl From<ChanceAlgo> for Algo {
    fn from(a: ChanceAlgo) -> Self {
        match a {
            ChanceAlgo::Faithful => Algo::Faithful,
            ChanceAlgo::HalfP => Algo::HalfP,
            ChanceAlgo::HalfR => Algo::HalfR,
            ChanceAlgo::Iterative => Algo::Iterative,
        }
    }
}

impl From<LotteryAlgo> for Algo {
    fn from(a: LotteryAlgo) -> Self {
        match a {
            LotteryAlgo::General => Algo::General,
            LotteryAlgo::Scc => Algo::Scc,
            LotteryAlgo::Partial => Algo::Partial,
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct SamplerArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Demand file; lotteries use the chance radii.
    #[arg(long)]
    pub demand: Option<PathBuf>,
    /// Center-shift probability for the SCC lottery.
    #[arg(long, default_value_t = SCC_SHIFT_Q)]
    pub q: f64,
    /// Shift distribution for the partial lottery (tuned default).
    #[arg(long)]
    pub qdist: Option<PathBuf>,
    /// Common radius for the partial lottery (guessed when omitted).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Additive slack on statistical checks.
    #[arg(long, default_value_t = DEFAULT_SLACK)]
    pub slack: f64,
}

#[derive(Debug, Args)]
pub struct ChanceArgs {
    #[arg(long, value_enum)]
    pub algo: ChanceAlgo,
    #[command(flatten)]
    pub common: SamplerArgs,
    /// Verify over this many samples instead of emitting one set.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write the LP in text form to this file.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LotteryArgs {
    #[arg(long, value_enum)]
    pub algo: LotteryAlgo,
    #[command(flatten)]
    pub common: SamplerArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Bruteforce,
    Localsearch,
}

#[derive(Debug, Args)]
pub struct ExpectedArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub demand: PathBuf,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "bruteforce")]
    pub solver: SolverArg,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Shrink the support to at most |C|+1 sets.
    #[arg(long)]
    pub reduce: bool,
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DetMode {
    Scalefree,
    Logblowup,
    ExactK,
}

#[derive(Debug, Args)]
pub struct DeterminizeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub demand: PathBuf,
    #[arg(long, value_enum)]
    pub mode: DetMode,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    #[arg(long, value_enum)]
    pub algo: LotteryAlgo,
    #[command(flatten)]
    pub common: SamplerArgs,
    /// Target factor c; defaults to the algorithm's mean factor.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CertifyMode {
    Partial,
    Scc,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub mode: CertifyMode,
    /// Grid width, written `2^-g` or as a decimal power of two.
    #[arg(long, default_value = "2^-8")]
    pub eps_grid: String,
    #[arg(long = "L", default_value_t = 7)]
    pub levels: usize,
    #[arg(long = "M", default_value_t = 10)]
    pub m_max: usize,
    #[arg(long)]
    pub qdist: Option<PathBuf>,
    #[arg(long)]
    pub sweep_p: bool,
    #[arg(long, default_value_t = SCC_SHIFT_Q)]
    pub q: f64,
    /// Cells in `s` for the SCC bound.
    #[arg(long, default_value_t = 1 << 20)]
    pub cells: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[command(flatten)]
    pub common: SamplerArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Report file; same as --out.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Looks up an algorithm by its command-line name, such as `half-p`.
pub fn parse_algo(name: &str) -> Result<Algo> {
    Algo::from_str(name, true).map_err(|_| Error::input(format!("unknown algorithm {name:?}")))
}

/// Parses a grid width such as `2^-12` or `0.000244140625` into its
/// negative base-2 exponent.
pub fn parse_eps_grid(s: &str) -> Result<u32> {
    let bad = || Error::input(format!("grid width {s:?} is not a power of two 2^-g"));
    if let Some(rest) = s.trim().strip_prefix("2^") {
        let e: i64 = rest.trim_start_matches('(').trim_end_matches(')').parse().map_err(|_| bad())?;
        return u32::try_from(-e).map_err(|_| bad());
    }
    let v: f64 = s.trim().parse().map_err(|_| bad())?;
    if !(v > 0.0 && v <= 1.0) {
        return Err(bad());
    }
    let g = -v.log2();
    if g.fract() != 0.0 || (-g).exp2() != v {
        return Err(bad());
    }
    Ok(g as u32)
}

fn load_demands(path: &Path) -> Result<DemandsJson> {
    read_json(path)
}

fn chance_demand(inst: &Instance, path: Option<&Path>) -> Result<DemandChance> {
    let path = path.ok_or_else(|| Error::input("--demand is required for this algorithm"))?;
    load_demands(path)?
        .chance_for(inst)?
        .ok_or_else(|| Error::input(format!("{} has no chance demands", path.display())))
}

fn expected_demand(inst: &Instance, path: &Path) -> Result<DemandExpected> {
    load_demands(path)?
        .expected_for(inst)?
        .ok_or_else(|| Error::input(format!("{} has no expected-distance targets", path.display())))
}

fn load_qdist(path: Option<&Path>) -> Result<QDistribution> {
    match path {
        Some(p) => {
            let q: QDistribution = read_json(p)?;
            q.validate()?;
            Ok(q)
        }
        None => Ok(QDistribution::tuned()),
    }
}

fn set_ids(inst: &Instance, set: &SolutionSet) -> Vec<crate::model::Id> {
    set.iter().map(|i| inst.facility_ids()[i].clone()).collect()
}

/// A prepared sampler with the guarantees it claims.
pub struct PreparedSampler {
    pub sampler: Box<dyn Sampler>,
    pub guarantees: Guarantees,
}

/// Algorithm inputs that do not come from the instance.
#[derive(Debug, Clone)]
pub struct SamplerOptions {
    /// Chance demand; lotteries read only the radii.
    pub demand: Option<DemandChance>,
    pub q: f64,
    pub qdist: QDistribution,
    /// Common radius of the partial lottery; guessed when `None`.
    pub radius: Option<f64>,
    pub slack: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            demand: None,
            q: SCC_SHIFT_Q,
            qdist: QDistribution::tuned(),
            radius: None,
            slack: DEFAULT_SLACK,
        }
    }
}

impl SamplerOptions {
    fn from_args(inst: &Instance, args: &SamplerArgs) -> Result<Self> {
        let demand = match &args.demand {
            Some(p) => Some(chance_demand(inst, Some(p))?),
            None => None,
        };
        Ok(SamplerOptions {
            demand,
            q: args.q,
            qdist: load_qdist(args.qdist.as_deref())?,
            radius: args.radius,
            slack: args.slack,
        })
    }

    fn chance(&self) -> Result<&DemandChance> {
        self.demand
            .as_ref()
            .ok_or_else(|| Error::input("a chance demand is required for this algorithm"))
    }
}

/// Builds the sampler for `algo` and the guarantees it claims.
pub fn prepare_sampler(algo: Algo, inst: &Instance, opts: &SamplerOptions) -> Result<PreparedSampler> {
    let k = inst.k();
    let mut g = Guarantees {
        max_size: Some(k),
        slack: opts.slack,
        ..Guarantees::default()
    };
    let sampler: Box<dyn Sampler> = match algo {
        Algo::Faithful | Algo::HalfP | Algo::HalfR | Algo::Iterative => {
            let dem = opts.chance()?;
            let (factor, prob_factor, sampler): (f64, f64, Box<dyn Sampler>) = match algo {
                Algo::Faithful => (
                    1.0,
                    1.0 - (-1.0f64).exp(),
                    Box::new(FaithfulRounding::prepare(inst, dem)?),
                ),
                Algo::HalfP | Algo::HalfR => {
                    let mode = if algo == Algo::HalfP { HalfMode::EqualP } else { HalfMode::EqualR };
                    let f = if inst.is_scc() { 2.0 } else { 3.0 };
                    (f, 1.0, Box::new(HalfHomogeneousRounding::prepare(inst, dem, mode)?))
                }
                _ => (9.0, 1.0, Box::new(IterativeRounding::prepare(inst, dem)?)),
            };
            g.coverage_radius = Some(dem.r.iter().map(|r| factor * r).collect());
            g.coverage_prob = Some(dem.p.iter().map(|p| prob_factor * p).collect());
            sampler
        }
        Algo::General | Algo::Scc => {
            let radii = opts.chance()?.r.clone();
            let (sampler, factor) = if algo == Algo::General {
                (ClusterLottery::general(inst, &radii)?, GENERAL_MEAN_FACTOR)
            } else {
                let bound = certify_scc_bound(opts.q, 1 << 16)?.bound;
                (ClusterLottery::scc(inst, &radii, opts.q)?, bound)
            };
            g.hard_radius = Some(radii.iter().map(|r| 3.0 * r).collect());
            g.mean = Some(radii.iter().map(|r| factor * r).collect());
            g.coverage_radius = Some(radii);
            Box::new(sampler)
        }
        Algo::Partial => {
            let tuned = opts.qdist == QDistribution::tuned();
            let lot = match opts.radius {
                Some(r) => PartialLottery::prepare(inst, r, opts.qdist.clone())?,
                None => PartialLottery::with_guessed_radius(inst, opts.qdist.clone())?,
            };
            let r = lot.radius;
            let n = inst.n_clients();
            g.hard_radius = Some(vec![3.0 * r; n]);
            if tuned {
                g.mean = Some(vec![PARTIAL_MEAN_FACTOR * r; n]);
            }
            g.coverage_radius = Some(vec![r; n]);
            Box::new(lot)
        }
    };
    Ok(PreparedSampler {
        sampler,
        guarantees: g,
    })
}

fn dump_chance_lp(inst: &Instance, args: &SamplerArgs, path: Option<&Path>) -> Result<()> {
    if let Some(path) = path {
        let dem = chance_demand(inst, args.demand.as_deref())?;
        std::fs::write(path, chance_lp(inst, &dem)?.to_lp_format())?;
    }
    Ok(())
}

fn run_sampler(cli: &Cli, algo: Algo, args: &SamplerArgs, samples: Option<usize>) -> Result<String> {
    let inst = read_instance(&args.instance, true)?;
    let prepared = prepare_sampler(algo, &inst, &SamplerOptions::from_args(&inst, args)?)?;
    match samples {
        Some(n) => {
            let rep = mc_verify(&inst, prepared.sampler.as_ref(), &prepared.guarantees, n, cli.seed, cli.jobs)?;
            to_json_string(&rep)
        }
        None => {
            let set = prepared.sampler.sample(&mut RandomSource::new(cli.seed))?;
            to_json_string(&json!({ "set": set_ids(&inst, &set) }))
        }
    }
}

fn kmedian_solver(arg: SolverArg, seed: u64) -> Box<dyn KMedianSolver> {
    match arg {
        SolverArg::Bruteforce => Box::new(BruteForceKMedian),
        SolverArg::Localsearch => Box::new(LocalSearchKMedian { seed }),
    }
}

#[derive(Serialize)]
struct LotteryOutput {
    #[serde(flatten)]
    lottery: crate::expected::LotteryJson,
    max_ratio: Option<f64>,
    expectations: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mwu: Option<crate::expected::MwuReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attempts: Option<usize>,
}

fn lottery_output(
    inst: &Instance,
    lot: &ExplicitLottery,
    targets: Option<&[f64]>,
    mwu: Option<crate::expected::MwuReport>,
    attempts: Option<usize>,
) -> Result<String> {
    to_json_string(&LotteryOutput {
        lottery: lot.to_json(inst),
        max_ratio: targets.map(|t| lot.max_ratio(inst, t)).transpose()?,
        expectations: lot.expectations(inst)?,
        mwu,
        attempts,
    })
}

fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Gen(a) => {
            let params = GenParams {
                n: a.n,
                k: a.k,
                n_facilities: a.facilities,
                dim: a.dim,
            };
            let inst = gen_instance(a.kind.into(), &params, cli.seed)?;
            to_json_string(&InstanceJson::from_instance(&inst))
        }
        Command::Solve { what } => match what {
            SolveCommand::Chance(a) => {
                let inst = read_instance(&a.common.instance, true)?;
                dump_chance_lp(&inst, &a.common, a.dump_lp.as_deref())?;
                run_sampler(cli, a.algo.into(), &a.common, a.samples)
            }
            SolveCommand::Lottery(a) => {
                if a.dump_lp.is_some() && a.algo != LotteryAlgo::Partial {
                    let inst = read_instance(&a.common.instance, true)?;
                    dump_chance_lp(&inst, &a.common, a.dump_lp.as_deref())?;
                }
                run_sampler(cli, a.algo.into(), &a.common, a.samples)
            }
            SolveCommand::Expected(a) => {
                let inst = read_instance(&a.instance, true)?;
                let t = expected_demand(&inst, &a.demand)?;
                if let Some(p) = &a.dump_lp {
                    std::fs::write(p, expectation_lp(&inst, &t)?.to_lp_format())?;
                }
                let solver = kmedian_solver(a.solver, cli.seed);
                let (mut lot, rep) = mwu_lottery(&inst, &t, a.epsilon, solver.as_ref(), a.max_rounds)?;
                if a.reduce {
                    lot = reduce_support(&inst, &lot)?;
                }
                lottery_output(&inst, &lot, Some(&t.t), Some(rep), None)
            }
        },
        Command::Determinize(a) => {
            let inst = read_instance(&a.instance, true)?;
            let t = expected_demand(&inst, &a.demand)?;
            let det = match a.mode {
                DetMode::Scalefree => determinize_scalefree(&inst, &t, a.alpha)?,
                DetMode::Logblowup => determinize_logblowup(&inst, &t, a.epsilon, &mut RandomSource::new(cli.seed))?,
                DetMode::ExactK => determinize_exact_k(&inst, &t)?,
            };
            to_json_string(&json!({
                "set": set_ids(&inst, &det.set),
                "alpha_achieved": det.alpha_achieved,
                "beta_achieved": det.beta_achieved,
                "alpha_declared": det.alpha_declared,
                "beta_declared": det.beta_declared,
                "attempts": det.attempts,
            }))
        }
        Command::Sparsify(a) => {
            let inst = read_instance(&a.common.instance, true)?;
            let algo: Algo = a.algo.into();
            let prepared = prepare_sampler(algo, &inst, &SamplerOptions::from_args(&inst, &a.common)?)?;
            let radii = prepared
                .guarantees
                .coverage_radius
                .clone()
                .ok_or_else(|| Error::invariant("lottery sampler without radii"))?;
            let c = match a.c {
                Some(c) => c,
                None => match algo {
                    Algo::General => GENERAL_MEAN_FACTOR,
                    Algo::Scc => certify_scc_bound(a.common.q, 1 << 16)?.bound,
                    _ => PARTIAL_MEAN_FACTOR,
                },
            };
            let (lot, attempts) = sparsify_sampling(
                &inst,
                prepared.sampler.as_ref(),
                &radii,
                c,
                a.epsilon,
                &mut RandomSource::new(cli.seed),
            )?;
            lottery_output(&inst, &lot, Some(&radii), None, Some(attempts))
        }
        Command::Certify(a) => match a.mode {
            CertifyMode::Partial => {
                let mut p = PartialParams::new(a.levels, a.m_max, parse_eps_grid(&a.eps_grid)?, load_qdist(a.qdist.as_deref())?);
                p.sweep_p = a.sweep_p;
                to_json_string(&certify_partial_bound(&p)?)
            }
            CertifyMode::Scc => to_json_string(&certify_scc_bound(a.q, a.cells)?),
        },
        Command::Verify(a) => run_sampler(cli, a.algo, &a.common, Some(a.samples)),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 2,
        Error::Input(_) | Error::Io(_) | Error::Json(_) => 3,
        Error::Resource(_) => 4,
        Error::Solver(_) | Error::Invariant(_) => 1,
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(Error::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let out = match &cli.command {
        Command::Verify(v) => v.report.clone().or_else(|| cli.out.clone()),
        _ => cli.out.clone(),
    };
    let result = execute(&cli).and_then(|text| write_output(out.as_deref(), &text));
    match result {
        Ok(()) => 0,
        Err(e) => {
            if let Error::Infeasible(cert) = &e {
                let body = json!({ "status": "infeasible", "certificate": cert });
                println!("{}", serde_json::to_string_pretty(&body).unwrap_or_default());
            }
            eprintln!("stoclot: {e}");
            exit_code(&e)
        }
    }
}
