use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use parrep::corrsamp::{self, SharedRandomStream};
use parrep::depbreak::{self, ConditionalOracle, CoordinateSet, DepBreak};
use parrep::games;
use parrep::matcore::{self, random};
use parrep::reduction::{self, ClassicalMode, QuantumMode, ReductionConfig, VERSION};
use parrep::strategy::{self, born_joint};
use parrep::values::{self, LogBase, SeesawConfig};
use parrep::{infotheory, matcore::facts::FactSummary};

#[derive(Parser, Debug)]
#[command(name = "parrep", version, about = "Parallel repetition toolkit for two-player entangled games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run an experiment and write its report.
    Run {
        #[arg(value_enum)]
        what: Experiment,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Matcore,
    Infotheory,
    Usefulness,
    Skew,
    Sampleability,
    Xi,
    Corrsamp,
    Qcs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Experiment {
    Reduction,
    Values,
    Bound,
    Choose,
    Corrsamp,
    Qcs,
    Export,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeClassical {
    #[value(name = "exact_conditional", alias = "exact")]
    ExactConditional,
    Holenstein,
    Joint,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeQuantum {
    #[value(name = "oracle_state", alias = "oracle")]
    OracleState,
    Embezzle,
}

/// Flags shared by every command. Each may also come from the `--config` TOML file;
/// flags given on the command line take precedence.
#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Opts {
    /// TOML file with any of these options (keys use underscores).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Game fixture name (chsh, trivial, asym3) or path to a game file.
    #[arg(long)]
    game: Option<String>,
    /// Strategy fixture name (tsirelson, printing, detprod) or path to a strategy file.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Conditioning set as 1-based comma-separated coordinates, "none", or "auto".
    #[arg(long = "C")]
    #[serde(rename = "C")]
    c: Option<String>,
    /// Shorthand: "exact" selects exact_conditional with oracle_state.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, value_enum)]
    mode_classical: Option<ModeClassical>,
    #[arg(long, value_enum)]
    mode_quantum: Option<ModeQuantum>,
    /// Junk dimension for embezzlement; accepts 2^k.
    #[arg(long)]
    dprime: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Trials for the randomized quantum Raz sweep.
    #[arg(long)]
    raz_trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; the report is printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t_max: Option<usize>,
    /// Answer bits for the bound calculator.
    #[arg(long)]
    s: Option<f64>,
    /// Constant for the bound calculator.
    #[arg(long)]
    c_const: Option<f64>,
    #[arg(long)]
    log_base: Option<String>,
    /// Grid of n as `2^a..2^b` (powers of two) or a comma-separated list.
    #[arg(long)]
    n_grid: Option<String>,
    /// Ansatz dimension for the seesaw.
    #[arg(long)]
    d: Option<usize>,
    /// Number of seesaw seeds.
    #[arg(long)]
    seeds: Option<u64>,
    /// Total variation distance between the two sampled distributions.
    #[arg(long)]
    tv: Option<f64>,
}

impl Opts {
    fn merged(self) -> Result<Opts, Usage> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = fs::read_to_string(&path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        let file: Opts = toml::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
        macro_rules! pick {
            ($($f:ident),*) => { Opts { config: self.config, $($f: self.$f.or(file.$f)),* } };
        }
        Ok(pick!(game, strategy, n, c, mode, mode_classical, mode_quantum, dprime, alpha, seed, trials, raz_trials, workers, out, eps, t_max, s, c_const, log_base, n_grid, d, seeds, tv))
    }

    fn game(&self) -> Result<games::Game, Usage> {
        reduction::resolve_game(self.game.as_deref().unwrap_or("chsh")).map_err(|e| Usage(e.to_string()))
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(2)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn strategy(&self, g: &games::Game) -> Result<strategy::EntangledStrategy, Usage> {
        reduction::resolve_strategy(self.strategy.as_deref().unwrap_or("tsirelson"), g, self.n()).map_err(|e| Usage(e.to_string()))
    }

    /// `None` means choose automatically.
    fn coords(&self) -> Result<Option<Vec<usize>>, Usage> {
        let n = self.n();
        match self.c.as_deref().map(str::trim) {
            None | Some("auto") => Ok(None),
            Some("" | "none" | "-") => Ok(Some(Vec::new())),
            Some(list) => list
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(k) if (1..=n).contains(&k) => Ok(k - 1),
                    _ => Err(Usage(format!("bad coordinate '{t}' in --C (expected 1..={n})"))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn coords_or_last(&self) -> Result<Vec<usize>, Usage> {
        Ok(self.coords()?.unwrap_or_else(|| vec![self.n() - 1]))
    }

    fn dprime(&self) -> Result<usize, Usage> {
        match self.dprime.as_deref() {
            None => Ok(1 << 16),
            Some(s) => parse_pow(s).ok_or_else(|| Usage(format!("bad --dprime '{s}'"))),
        }
    }
}

fn parse_pow(s: &str) -> Option<usize> {
    let s = s.trim();
    match s.split_once('^') {
        Some((b, e)) => b.trim().parse::<usize>().ok()?.checked_pow(e.trim().parse().ok()?),
        None => s.parse().ok(),
    }
}

fn parse_pow_u128(s: &str) -> Option<u128> {
    let s = s.trim();
    match s.split_once('^') {
        Some((b, e)) => b.trim().parse::<u128>().ok()?.checked_pow(e.trim().parse().ok()?),
        None => s.parse().ok(),
    }
}

#[derive(Debug)]
struct Usage(String);

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => match e.downcast_ref::<Usage>() {
            Some(Usage(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn dispatch(cli: Cli) -> Result<Outcome> {
    let (opts, name) = match &cli.command {
        Command::Verify { opts, suite } => (opts.clone(), format!("verify-{}", serde_plain(suite))),
        Command::Run { opts, what } => (opts.clone(), format!("run-{}", serde_plain(what))),
    };
    let opts = opts.merged()?;
    if let Some(w) = opts.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().map_err(|e| Usage(e.to_string()))?;
    }
    let (report, csv, pass) = match cli.command {
        Command::Verify { suite, .. } => verify(suite, &opts)?,
        Command::Run { what, .. } => run(what, &opts)?,
    };
    let doc = json!({ "version": VERSION, "command": name, "options": opts, "report": report, "pass": pass });
    emit(&opts, &name, &doc, csv.as_deref())?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn emit(opts: &Opts, name: &str, doc: &Value, csv: Option<&str>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match &opts.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write(&dir.join(format!("{name}.json")), &text)?;
            if let Some(c) = csv {
                write(&dir.join(format!("{name}.csv")), c)?;
            }
            eprintln!("wrote {}", dir.join(format!("{name}.json")).display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

type Produced = (Value, Option<String>, bool);

fn summaries(list: &[FactSummary]) -> (Value, bool) {
    (serde_json::to_value(list).unwrap_or(Value::Null), list.iter().all(FactSummary::passed))
}

fn verify(suite: Suite, o: &Opts) -> Result<Produced> {
    let seed = o.seed();
    match suite {
        Suite::Matcore => {
            let list = matcore::facts::run_all(o.trials.unwrap_or(1000), seed)?;
            let (v, ok) = summaries(&list);
            Ok((v, None, ok))
        }
        Suite::Infotheory => {
            let list = infotheory::facts::run_all(o.trials.unwrap_or(1000), o.raz_trials.unwrap_or(500), seed)?;
            let (v, ok) = summaries(&list);
            Ok((v, None, ok))
        }
        Suite::Usefulness => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let set = CoordinateSet::new(o.n(), o.coords_or_last()?).map_err(|e| Usage(e.to_string()))?;
            let joint = depbreak::extended_joint(&g, o.n(), &s, &set)?;
            let dep = DepBreak::build(&g, &s, set.clone())?;
            let oracle = ConditionalOracle::from_joint(&g, &joint, &set);
            let u = depbreak::usefulness_check(&dep, &oracle);
            let w = depbreak::weights_check(&dep, &oracle);
            let ok = u.max_residual <= 1e-8 && w.max_residual <= 1e-8 && dep.diagnostics.max_weight_sum_error <= 1e-8;
            let csv = depbreak::bundle_csv(&dep, Some(&oracle))?;
            Ok((json!({ "usefulness": u, "weights": w, "diagnostics": dep.diagnostics, "p_wc": dep.p_wc }), Some(csv), ok))
        }
        Suite::Skew => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let set = CoordinateSet::new(o.n(), o.coords_or_last()?).map_err(|e| Usage(e.to_string()))?;
            let joint = depbreak::extended_joint(&g, o.n(), &s, &set)?;
            let r = depbreak::skew_distances(&g, &joint, &set)?;
            let ok = r.per_coordinate.iter().all(|e| [e.item1, e.item2, e.item3].iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
            Ok((serde_json::to_value(&r)?, None, ok))
        }
        Suite::Sampleability => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let set = CoordinateSet::new(o.n(), o.coords_or_last()?).map_err(|e| Usage(e.to_string()))?;
            let dep = DepBreak::build(&g, &s, set)?;
            let r = depbreak::sampleability_distances(&dep);
            let ok = r.max_triangle_violation <= 1e-9;
            Ok((serde_json::to_value(&r)?, None, ok))
        }
        Suite::Xi => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let set = CoordinateSet::new(o.n(), o.coords_or_last()?).map_err(|e| Usage(e.to_string()))?;
            let r = depbreak::xi_raz_check(&g, &s, &set)?;
            let ok = r.ok;
            Ok((serde_json::to_value(&r)?, None, ok))
        }
        Suite::Corrsamp => {
            let r = corrsamp_experiment(o)?;
            let ok = r["equal_agreement"].as_f64() == Some(1.0)
                && r["disagreement"].as_f64().is_some_and(|v| v <= 4.0 * r["tv"].as_f64().unwrap_or(0.0) + 0.02)
                && r["marginal_tv_p"].as_f64().is_some_and(|v| v <= 0.02);
            Ok((r, None, ok))
        }
        Suite::Qcs => {
            let (v, csv) = qcs_experiment(o)?;
            let errs: Vec<f64> = v["points"].as_array().into_iter().flatten().filter_map(|p| p["err"].as_f64()).collect();
            let ok = errs.windows(2).all(|w| w[1] < w[0]) && v["deterministic"].as_bool() == Some(true);
            Ok((v, Some(csv), ok))
        }
    }
}

fn run(what: Experiment, o: &Opts) -> Result<Produced> {
    match what {
        Experiment::Reduction => {
            let cfg = reduction_config(o)?;
            let r = reduction::run_reduction(&cfg).map_err(|e| match e {
                reduction::ReductionError::Config(m) => anyhow!(Usage(m)),
                other => anyhow!(other),
            })?;
            let cmp = reduction::main_bound_compare(&r, cfg.eps);
            let csv = reduction::report_csv(&r)?;
            let ok = r.within_budget;
            Ok((json!({ "reduction": r, "comparison": cmp }), Some(csv), ok))
        }
        Experiment::Values => {
            let g = o.game()?;
            let n = o.n();
            let mut rows = Vec::new();
            for k in 1..=n {
                match values::classical_value(&g, k) {
                    Ok(v) => rows.push(json!({ "n": k, "classical_value": v.value })),
                    Err(e) => rows.push(json!({ "n": k, "classical_value": Value::Null, "skipped": e.to_string() })),
                }
            }
            let d = o.d.unwrap_or(2);
            let seeds = o.seeds.unwrap_or(10);
            let mut runs = Vec::new();
            for k in 0..seeds {
                let r = values::seesaw(&g, &SeesawConfig { d, seed: o.seed() + k, ..Default::default() })?;
                runs.push(json!({ "seed": o.seed() + k, "value": r.value, "iterations": r.iterations, "converged": r.converged }));
            }
            let best = runs.iter().filter_map(|r| r["value"].as_f64()).fold(f64::NEG_INFINITY, f64::max);
            let mut csv = String::from("n,classical_value\n");
            for r in &rows {
                csv.push_str(&format!("{},{}\n", r["n"], r["classical_value"]));
            }
            Ok((json!({ "classical": rows, "seesaw": { "n": 1, "d": d, "runs": runs, "best": best } }), Some(csv), true))
        }
        Experiment::Bound => {
            let eps = o.eps.unwrap_or(0.25);
            let s = o.s.unwrap_or(2.0);
            let c = o.c_const.unwrap_or(1.0);
            let base = match o.log_base.as_deref().unwrap_or("2") {
                "2" => LogBase::Two,
                "e" | "ln" => LogBase::Natural,
                other => bail!(Usage(format!("unknown --log-base '{other}'"))),
            };
            let grid = n_grid(o.n_grid.as_deref().unwrap_or("2^10..2^60"))?;
            let mut rows = Vec::new();
            let mut csv = String::from("n,raw,bound_value,vacuous\n");
            for n in grid {
                let r = values::repetition_bound(eps, s, n, c, base).map_err(|e| Usage(e.to_string()))?;
                csv.push_str(&format!("{},{:.17e},{:.17e},{}\n", r.n, r.raw, r.bound_value, r.vacuous));
                rows.push(r);
            }
            Ok((serde_json::to_value(&rows)?, Some(csv), true))
        }
        Experiment::Choose => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let born = born_joint(&g, o.n(), &s)?;
            let r = depbreak::choose_c(&born, &g, o.n(), o.eps.unwrap_or(0.1), o.t_max.unwrap_or(o.n() - 1))?;
            let public: Vec<usize> = r.c.iter().map(|i| i + 1).collect();
            Ok((json!({ "C": public, "choice": r }), None, true))
        }
        Experiment::Corrsamp => Ok((corrsamp_experiment(o)?, None, true)),
        Experiment::Qcs => {
            let (v, csv) = qcs_experiment(o)?;
            Ok((v, Some(csv), true))
        }
        Experiment::Export => {
            let g = o.game()?;
            let s = o.strategy(&g)?;
            let set = CoordinateSet::new(o.n(), o.coords_or_last()?).map_err(|e| Usage(e.to_string()))?;
            let joint = depbreak::extended_joint(&g, o.n(), &s, &set)?;
            let dep = DepBreak::build(&g, &s, set.clone())?;
            let oracle = ConditionalOracle::from_joint(&g, &joint, &set);
            let csv = depbreak::bundle_csv(&dep, Some(&oracle))?;
            let doc = json!({ "game": games::write_game(&g), "strategy": strategy::write_strategy(&s) });
            Ok((doc, Some(csv), true))
        }
    }
}

fn n_grid(spec: &str) -> Result<Vec<u128>> {
    if let Some((a, b)) = spec.split_once("..") {
        let exp = |t: &str| -> Option<u32> { t.trim().strip_prefix("2^")?.parse().ok() };
        let (Some(lo), Some(hi)) = (exp(a), exp(b)) else { bail!(Usage(format!("bad --n-grid '{spec}'"))) };
        if lo > hi || hi > 127 {
            bail!(Usage(format!("bad --n-grid '{spec}'")));
        }
        return Ok((lo..=hi).map(|k| 1u128 << k).collect());
    }
    spec.split(',').map(|t| parse_pow_u128(t).ok_or_else(|| anyhow!(Usage(format!("bad n '{t}' in --n-grid"))))).collect()
}

fn reduction_config(o: &Opts) -> Result<ReductionConfig> {
    let (mut mc, mut mq) = (ClassicalMode::ExactConditional, ModeQuantum::OracleState);
    if let Some(m) = o.mode.as_deref() {
        match m {
            "exact" => {}
            "holenstein" => mc = ClassicalMode::Holenstein,
            "joint" => mc = ClassicalMode::Joint,
            "embezzle" => mq = ModeQuantum::Embezzle,
            other => bail!(Usage(format!("unknown --mode '{other}'"))),
        }
    }
    if let Some(m) = o.mode_classical {
        mc = match m {
            ModeClassical::ExactConditional => ClassicalMode::ExactConditional,
            ModeClassical::Holenstein => ClassicalMode::Holenstein,
            ModeClassical::Joint => ClassicalMode::Joint,
        };
    }
    if let Some(m) = o.mode_quantum {
        mq = m;
    }
    let mode_quantum = match mq {
        ModeQuantum::OracleState => QuantumMode::OracleState,
        ModeQuantum::Embezzle => QuantumMode::Embezzle { d_prime: o.dprime()?, alpha: o.alpha.unwrap_or(corrsamp::DEFAULT_ALPHA) },
    };
    Ok(ReductionConfig {
        game: o.game.clone().unwrap_or_else(|| "chsh".into()),
        strategy: o.strategy.clone().unwrap_or_else(|| "tsirelson".into()),
        n: o.n(),
        c: o.coords()?,
        eps: o.eps.unwrap_or(0.1),
        t_max: o.t_max,
        mode_classical: mc,
        mode_quantum,
        seed: o.seed(),
        trials: o.trials.unwrap_or(100_000),
    })
}

/// Agreement with identical inputs, then disagreement and output marginals for a pair at distance `tv`.
fn corrsamp_experiment(o: &Opts) -> Result<Value> {
    let runs = o.trials.unwrap_or(100_000);
    let tv = o.tv.unwrap_or(0.1);
    if !(0.0..=0.25).contains(&tv) {
        bail!(Usage(format!("--tv must lie in [0, 0.25], got {tv}")));
    }
    let seed = o.seed();
    let p = [0.25, 0.25, 0.25, 0.25];
    let q = [0.25 + tv, 0.25 - tv, 0.25, 0.25];
    let max = corrsamp::recommended_max_draws(&p, &q);
    let mut equal = 0usize;
    let mut disagree = 0usize;
    let mut failures = 0usize;
    let mut counts_p = [0usize; 4];
    let mut counts_q = [0usize; 4];
    for t in 0..runs as u64 {
        let mut s = SharedRandomStream::new(seed, 2 * t, 4);
        if corrsamp::corr_sample_weights(&p, &p, &mut s, max)?.agreed {
            equal += 1;
        }
        let mut s = SharedRandomStream::new(seed, 2 * t + 1, 4);
        let r = corrsamp::corr_sample_weights(&p, &q, &mut s, max)?;
        failures += usize::from(r.failed());
        disagree += usize::from(!r.agreed);
        if let (Some(a), Some(b)) = (r.p_out, r.q_out) {
            counts_p[a] += 1;
            counts_q[b] += 1;
        }
    }
    let emp = |c: &[usize; 4], target: &[f64; 4]| {
        let tot: usize = c.iter().sum();
        0.5 * c.iter().zip(target).map(|(k, t)| (*k as f64 / tot.max(1) as f64 - t).abs()).sum::<f64>()
    };
    Ok(json!({
        "runs": runs,
        "tv": tv,
        "p": p,
        "q": q,
        "equal_agreement": equal as f64 / runs as f64,
        "disagreement": disagree as f64 / runs as f64,
        "failures": failures,
        "marginal_tv_p": emp(&counts_p, &p),
        "marginal_tv_q": emp(&counts_q, &q),
    }))
}

/// Embezzlement error for a seeded random state of local dimension `--d` (default 4) over a grid of `d'`.
fn qcs_experiment(o: &Opts) -> Result<(Value, String)> {
    let d = o.d.unwrap_or(4);
    let alpha = o.alpha.unwrap_or(corrsamp::DEFAULT_ALPHA);
    let grid: Vec<usize> = match o.n_grid.as_deref() {
        Some(g) => n_grid(g)?.into_iter().map(|v| v as usize).collect(),
        None => vec![1 << 8, 1 << 12, 1 << 16, 1 << 20],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed());
    let psi = random::pure_state(d * d, &mut rng);
    let mut points = Vec::new();
    let mut csv = String::from("d_prime,err,trace,min_eigenvalue\n");
    let mut deterministic = true;
    for &dp in &grid {
        let iso = corrsamp::qcs_isometry(&psi, dp, alpha).map_err(|e| Usage(e.to_string()))?;
        deterministic &= iso == corrsamp::qcs_isometry(&psi, dp, alpha)?;
        let out = corrsamp::qcs_execute(&iso, &iso, d)?;
        let m = out.produced_target.as_matrix();
        let lo = matcore::min_eigenvalue(m)?;
        let tr = m.trace().re;
        csv.push_str(&format!("{dp},{:.12e},{:.12e},{:.3e}\n", out.err, tr, lo));
        points.push(json!({ "d_prime": dp, "err": out.err, "trace": tr, "min_eigenvalue": lo }));
    }
    Ok((json!({ "d": d, "alpha": alpha, "points": points, "deterministic": deterministic }), csv))
}
