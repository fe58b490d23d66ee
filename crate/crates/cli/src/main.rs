use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use rankgame::approx::{fptas_solve_with, ptas_solve, FptasOptions};
use rankgame::exact::{
    cascade_solve, solve_linear_prize, solve_pure_two_action, solve_two_player_no_ties, CascadeOutcome,
    SupportSpec,
};
use rankgame::gen::{GeneratorSpec, PrizeModel, TiePolicy};
use rankgame::io::{parse_game, parse_profile, write_game};
use rankgame::oracle::{brute_force_two_player, grid_search_ne};
use rankgame::reductions::{lift_back, score_symmetrize};
use rankgame::{normalize, validate, verify, Error, MixedProfile, RankingGame, Rat, ScoreSymmetricGame};

const QUALITY_MISS: u8 = 1;
const MALFORMED: u8 = 2;
const MISMATCH: u8 = 3;

/// Two-player games up to this many strategies each are solved by support
/// enumeration under `auto` when no faster exact method applies.
const AUTO_BRUTE_LIMIT: usize = 8;

/// Largest number of joint grid choices per FPTAS block the CLI will attempt.
const FPTAS_BLOCK_LIMIT: f64 = 1e9;

#[derive(Parser)]
#[command(name = "rankgame", version, about = "Equilibria of competitiveness-based ranking games")]
struct Cli {
    /// Worker threads for parallel solvers.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an equilibrium and write its certificate.
    Solve(SolveArgs),
    /// Certify a given profile.
    Verify(VerifyArgs),
    /// Generate a random game.
    Gen(GenArgs),
    /// Rescale a game to unit prize range with free weakest strategies.
    Normalize(IoArgs),
    /// Transform a game into an equivalent one of a special class.
    #[command(subcommand)]
    Reduce(Reduction),
}

#[derive(Subcommand)]
enum Reduction {
    /// Put every player on one shared score ladder.
    ScoreSymmetric(ReduceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Pure2,
    TwoPlayerNoTies,
    Cascade,
    LinearPrize,
    Ptas,
    Fptas,
    Brute,
    Grid,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Pure2 => "pure2",
            Method::TwoPlayerNoTies => "two-player-no-ties",
            Method::Cascade => "cascade",
            Method::LinearPrize => "linear-prize",
            Method::Ptas => "ptas",
            Method::Fptas => "fptas",
            Method::Brute => "brute",
            Method::Grid => "grid",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    game: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    /// Requested accuracy; also the accuracy handed to approximate methods.
    #[arg(long, default_value = "1/4")]
    epsilon: String,
    /// Grid step for fptas and grid in place of the default.
    #[arg(long)]
    delta_override: Option<String>,
    /// Supports for cascade, e.g. "0,1;0;1,2".
    #[arg(long)]
    support: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    game: PathBuf,
    profile: PathBuf,
    #[arg(long, default_value = "0")]
    epsilon: String,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Forbid,
    Allow,
    ForceSharedLadder,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrizeArg {
    Single,
    Linear,
    RandomNonIncreasing,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    players: usize,
    #[arg(long)]
    actions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shorthand for --tie-policy forbid.
    #[arg(long)]
    no_ties: bool,
    #[arg(long, value_enum)]
    tie_policy: Option<TieArg>,
    #[arg(long, value_enum, default_value = "single")]
    prize_model: PrizeArg,
    #[arg(long, default_value_t = 20)]
    cost_denominator: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IoArgs {
    game: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    game: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Where to write the strategy map; defaults to `<output>.map.json`.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn malformed(message: impl Into<String>) -> Self {
        Failure { code: MALFORMED, message: message.into() }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        Failure { code: MISMATCH, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Precondition(_) | Error::DimensionMismatch(_) => MISMATCH,
            Error::Internal(_) => QUALITY_MISS,
            _ => MALFORMED,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T = u8> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(MALFORMED);
        }
    }
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Gen(args) => cmd_gen(&args),
        Command::Normalize(args) => cmd_normalize(&args),
        Command::Reduce(Reduction::ScoreSymmetric(args)) => cmd_reduce(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::malformed(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::malformed(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn parse_rat(text: &str, what: &str) -> Outcome<Rat> {
    text.parse::<Rat>()
        .map_err(|e| Failure::malformed(format!("--{what}: {e}")))
}

fn load_game(path: &Path) -> Outcome<RankingGame> {
    let game = parse_game(&read(path)?)?;
    let violations = validate(&game);
    if !violations.is_empty() {
        return Err(Error::InvalidGame(violations).into());
    }
    Ok(game)
}

fn rat_list(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_canonical())).collect())
}

struct Solution {
    method: Method,
    profile: MixedProfile,
    details: Map<String, Value>,
    all: Vec<MixedProfile>,
}

impl Solution {
    fn new(method: Method, profile: MixedProfile) -> Self {
        Solution { method, profile, details: Map::new(), all: Vec::new() }
    }

    fn detail(mut self, key: &str, value: Value) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

struct SolveOptions {
    epsilon: Rat,
    delta: Option<Rat>,
    support: Option<SupportSpec>,
}

fn cmd_solve(args: &SolveArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let epsilon = parse_rat(&args.epsilon, "epsilon")?;
    if epsilon.is_negative() {
        return Err(Failure::malformed("--epsilon must be non-negative"));
    }
    let delta = args
        .delta_override
        .as_deref()
        .map(|t| parse_rat(t, "delta-override"))
        .transpose()?;
    if delta.as_ref().is_some_and(|d| !d.is_positive()) {
        return Err(Failure::malformed("--delta-override must be positive"));
    }
    let support = args
        .support
        .as_deref()
        .map(SupportSpec::parse)
        .transpose()
        .map_err(|e| Failure::malformed(e.to_string()))?;
    let opts = SolveOptions { epsilon: epsilon.clone(), delta, support };

    let solution = match args.method {
        Method::Auto => solve_auto(&game, &opts)?,
        m => solve_with(m, &game, &opts)?,
    };

    let certificate = verify(&game, &solution.profile)?;
    let passes = certificate.passes(&epsilon);
    let mut report = match serde_json::to_value(&certificate).expect("certificate serializes") {
        Value::Object(map) => map,
        _ => unreachable!("certificates serialize to objects"),
    };
    report.insert("method".into(), json!(solution.method.name()));
    if args.method == Method::Auto {
        report.insert("requested_method".into(), json!("auto"));
    }
    report.insert("requested_epsilon".into(), json!(epsilon.to_canonical()));
    report.insert("passes".into(), json!(passes));
    if !solution.details.is_empty() {
        report.insert("details".into(), Value::Object(solution.details));
    }
    if !solution.all.is_empty() {
        let all = solution
            .all
            .iter()
            .map(|p| verify(&game, p).map(|c| serde_json::to_value(c).expect("certificate serializes")))
            .collect::<Result<Vec<_>, _>>()?;
        report.insert("equilibria".into(), Value::Array(all));
    }
    emit(
        args.output.as_deref(),
        &serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes"),
    )?;
    eprintln!(
        "{}: certified epsilon {} ({})",
        solution.method.name(),
        certificate.epsilon,
        if passes { "ok" } else { "above requested" }
    );
    Ok(if passes { 0 } else { QUALITY_MISS })
}

/// Tries exact methods whose preconditions hold, then an approximation scheme
/// on the score-symmetrized game.
fn solve_auto(game: &RankingGame, opts: &SolveOptions) -> Outcome<Solution> {
    let (norm, _) = normalize(game)?;
    let d = game.num_players();
    let no_ties = !game.has_ties();
    let mut route = Vec::new();
    if d == 2 && no_ties {
        route.push(Method::TwoPlayerNoTies);
    }
    if norm.is_score_symmetric() && norm.strategy_counts().iter().all(|&n| n == 2) {
        route.push(Method::Pure2);
    }
    if no_ties && game.linear_prize_coefficients().is_some() {
        route.push(Method::LinearPrize);
    }
    if d == 2 && game.strategy_counts().iter().all(|&n| n <= AUTO_BRUTE_LIMIT) {
        route.push(Method::Brute);
    }
    for method in route {
        let solution = solve_with(method, game, opts)?;
        if verify(game, &solution.profile)?.is_exact_equilibrium() {
            return Ok(solution);
        }
    }
    if d == 2 || opts.delta.is_some() {
        solve_with(Method::Fptas, game, opts)
    } else {
        solve_with(Method::Ptas, game, opts)
    }
}

fn solve_with(method: Method, game: &RankingGame, opts: &SolveOptions) -> Outcome<Solution> {
    Ok(match method {
        Method::Auto => unreachable!("auto is dispatched separately"),
        Method::TwoPlayerNoTies => Solution::new(method, solve_two_player_no_ties(game)?),
        Method::Pure2 => {
            let (norm, record) = normalize(game)?;
            let sym = ScoreSymmetricGame::from_ranking(&norm)?;
            let threshold = solve_pure_two_action(&sym)?;
            Solution::new(method, record.lift_profile(&threshold.to_profile()))
                .detail("order", json!(threshold.order))
                .detail("cutoff", json!(threshold.cutoff))
        }
        Method::Cascade => {
            let support = opts
                .support
                .as_ref()
                .ok_or_else(|| Failure::mismatch("cascade needs --support"))?;
            match cascade_solve(game, support)? {
                CascadeOutcome::Equilibrium(p) => {
                    Solution::new(method, p).detail("support", json!(support.sets))
                }
                CascadeOutcome::Rejected(why) => {
                    return Err(Failure {
                        code: QUALITY_MISS,
                        message: format!("support rejected: {why:?}"),
                    })
                }
            }
        }
        Method::LinearPrize => {
            let (a, b) = game
                .linear_prize_coefficients()
                .ok_or_else(|| Failure::mismatch("prizes are not affine in rank"))?;
            Solution::new(method, solve_linear_prize(game)?)
                .detail("a", json!(a.to_canonical()))
                .detail("b", json!(b.to_canonical()))
        }
        Method::Brute => {
            let all = brute_force_two_player(game)?;
            let first = all
                .first()
                .cloned()
                .ok_or_else(|| Failure { code: QUALITY_MISS, message: "no equilibrium found".into() })?;
            let mut s = Solution::new(method, first).detail("count", json!(all.len()));
            s.all = all;
            s
        }
        Method::Grid => {
            let delta = opts.delta.clone().unwrap_or_else(|| opts.epsilon.clone());
            let res = grid_search_ne(game, &delta, &opts.epsilon)?;
            Solution::new(method, res.profile)
                .detail("delta", json!(delta.to_canonical()))
                .detail("profiles_scored", json!(res.profiles_scored))
        }
        Method::Ptas => symmetric(method, game, |sym| {
            let res = ptas_solve(sym, &opts.epsilon)?;
            let mut details = Map::new();
            details.insert("epsilon".into(), json!(res.epsilon.to_canonical()));
            details.insert("rounded_epsilon".into(), json!(res.rounded_certificate.epsilon.to_canonical()));
            details.insert("types".into(), json!(res.types.len()));
            details.insert("grid_size".into(), json!(res.grid_size));
            details.insert("candidates_total".into(), json!(res.candidates_total.to_string()));
            details.insert("candidates_checked".into(), json!(res.candidates_checked.to_string()));
            Ok((res.profile, details))
        })?,
        Method::Fptas => symmetric(method, game, |sym| {
            if opts.delta.is_none() {
                let m = 4.0 * (sym.num_players() as f64).powi(2) * 3f64.powi(sym.num_players() as i32)
                    / opts.epsilon.to_f64();
                if (m + 1.0).powi(sym.num_players() as i32) > FPTAS_BLOCK_LIMIT {
                    return Err(Error::Precondition(format!(
                        "default grid 1/{m:.0} is too fine for {} players; pass --delta-override",
                        sym.num_players()
                    )));
                }
            }
            let options = FptasOptions { delta_override: opts.delta.clone(), node_budget: None };
            let res = fptas_solve_with(sym, &opts.epsilon, &options)?;
            let guarantee = &res.epsilon * &Rat::from_int(sym.num_strategies() as i64 + 2);
            let mut details = Map::new();
            details.insert("epsilon".into(), json!(res.epsilon.to_canonical()));
            details.insert("delta".into(), json!(res.delta.to_canonical()));
            details.insert("guarantee".into(), json!(guarantee.to_canonical()));
            details.insert("states_expanded".into(), json!(res.stats.states_expanded));
            details.insert("transitions_kept".into(), json!(res.stats.transitions_kept));
            details.insert("dead_states".into(), json!(res.stats.dead_states));
            details.insert("states_per_block".into(), json!(res.stats.states_per_block));
            Ok((res.profile, details))
        })?,
    })
}

/// Runs a score-symmetric solver on the normalized, symmetrized game and maps
/// its profile back to the input game.
fn symmetric(
    method: Method,
    game: &RankingGame,
    solve: impl Fn(&ScoreSymmetricGame) -> rankgame::Result<(MixedProfile, Map<String, Value>)>,
) -> Outcome<Solution> {
    let (norm, record) = normalize(game)?;
    let (sym, map) = score_symmetrize(&norm)?;
    let (profile, details) = solve(&sym)?;
    let lifted = record.lift_profile(&lift_back(&profile, &map, &norm));
    let mut solution = Solution { method, profile: lifted, details, all: Vec::new() };
    if !map.is_identity() {
        solution = solution
            .detail("ladder", rat_list(&map.ladder))
            .detail("symmetrized_profile", json!(profile.rows));
    }
    Ok(solution)
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let profile = parse_profile(&read(&args.profile)?)?;
    let epsilon = parse_rat(&args.epsilon, "epsilon")?;
    let certificate = verify(&game, &profile)?;
    let passes = certificate.passes(&epsilon);
    emit(args.output.as_deref(), &certificate.to_json())?;
    eprintln!(
        "certified epsilon {} ({})",
        certificate.epsilon,
        if passes { "ok" } else { "above requested" }
    );
    Ok(if passes { 0 } else { QUALITY_MISS })
}

fn cmd_gen(args: &GenArgs) -> Outcome {
    let tie_policy = match (args.no_ties, args.tie_policy) {
        (true, None) | (_, Some(TieArg::Forbid)) => TiePolicy::Forbid,
        (true, Some(_)) => return Err(Failure::malformed("--no-ties contradicts --tie-policy")),
        (false, Some(TieArg::Allow)) | (false, None) => TiePolicy::Allow,
        (false, Some(TieArg::ForceSharedLadder)) => TiePolicy::ForceSharedLadder,
    };
    let prize_model = match args.prize_model {
        PrizeArg::Single => PrizeModel::Single,
        PrizeArg::Linear => PrizeModel::Linear,
        PrizeArg::RandomNonIncreasing => PrizeModel::RandomNonIncreasing,
    };
    let game = GeneratorSpec::new(args.players, args.actions, args.seed)
        .with_ties(tie_policy)
        .with_prizes(prize_model)
        .with_cost_denominator(args.cost_denominator)
        .generate()
        .map_err(|e| Failure::malformed(e.to_string()))?;
    emit(args.output.as_deref(), &write_game(&game))?;
    Ok(0)
}

fn cmd_normalize(args: &IoArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let (norm, record) = normalize(&game)?;
    emit(args.output.as_deref(), &write_game(&norm))?;
    for (i, removed) in record.removed.iter().enumerate().filter(|(_, r)| !r.is_empty()) {
        eprintln!("player {i}: removed strategies {removed:?} (cost above prize range)");
    }
    if !record.discarded_prizes.is_empty() {
        eprintln!("discarded {} prizes beyond the last rank", record.discarded_prizes.len());
    }
    Ok(0)
}

fn cmd_reduce(args: &ReduceArgs) -> Outcome {
    let game = load_game(&args.game)?;
    let (norm, _) = normalize(&game)?;
    let (sym, map) = score_symmetrize(&norm)?;
    emit(args.output.as_deref(), &write_game(&sym.to_ranking()))?;
    let map_path = args.map.clone().or_else(|| {
        args.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".map.json");
            PathBuf::from(s)
        })
    });
    match map_path {
        Some(p) => emit(Some(&p), &map.to_json())?,
        None => eprintln!("{}", map.to_json()),
    }
    Ok(0)
}
