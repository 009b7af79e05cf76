use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use posgkit_core::bg::solve_bg;
use posgkit_core::checks::{pure_envelope, Target, Verdict};
use posgkit_core::model::{
    enumerate_aohs, extra_field, load_game, Agent, DecisionRule, GameFile, PosgModel,
};
use posgkit_core::nosg::build_nosg;
use posgkit_core::posg::{Caps, PlanTimeGame, Statistic};
use posgkit_core::rng::Lcg64;
use posgkit_core::suite::{self, SuiteConfig};
use posgkit_core::{Bg64, Error, GameFile64, Posg64};

mod exit {
    pub const CHECK_FAILED: u8 = 1;
    pub const INVALID_GAME: u8 = 2;
    pub const IO: u8 = 3;
    pub const CAPS: u8 = 4;
}

#[derive(Parser)]
#[command(
    name = "posgkit",
    version,
    about = "Plan-time analysis of small zero-sum POSGs and Bayesian games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct CapArgs {
    /// Maximum pure partial policies per agent (and flattened matrix cells).
    #[arg(long, default_value_t = posgkit_core::model::DEFAULT_POLICY_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
    cap_policies: u64,
    /// Maximum full histories summed by the exact evaluator.
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    cap_histories: u64,
}

impl CapArgs {
    fn caps(self) -> Caps {
        Caps {
            policies: self.cap_policies.into(),
            histories: self.cap_histories.into(),
            ..Caps::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a game file.
    Validate { file: PathBuf },
    /// Value at the initial statistic and the rational stage-0 rules.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        caps: CapArgs,
        /// Write the flattened payoff matrix as CSV.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Sample the value along a random marginal-space segment.
    Slice {
        file: PathBuf,
        #[arg(long)]
        stage: usize,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        pivot: u8,
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Run every structural check and print the report.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Build the plan-time NOSG and check it against the source game.
    NosgCheck {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the augmented-state index map as CSV.
        #[arg(long)]
        dump_states: Option<PathBuf>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Solve a Bayesian-game file.
    BgSolve { file: PathBuf },
}

enum Failure {
    Core(Error),
    Io(PathBuf, io::Error),
    Usage(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

/// Fixed-point with 12 decimals; negative zero prints as zero.
fn num(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn read_game(path: &Path) -> Result<(GameFile64, Vec<u8>), Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    let game = load_game(&bytes)?;
    Ok((game, bytes))
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn print_rule(
    out: &mut impl Write,
    model: &PosgModel<f64>,
    rule: &DecisionRule<f64>,
) -> io::Result<()> {
    let agent = rule.agent();
    let labels = enumerate_aohs(model, agent, rule.stage()).expect("rule stage is in range");
    for (aoh, row) in labels.iter().zip(rule.rows()) {
        let probs: Vec<String> = row.iter().map(|&p| num(p)).collect();
        writeln!(
            out,
            "rule agent={} stage={} aoh={} probs={}",
            agent.number(),
            rule.stage(),
            aoh.label(model),
            probs.join(",")
        )?;
    }
    Ok(())
}

fn print_bg_rules(
    out: &mut impl Write,
    game: &Bg64,
    rules: [&DecisionRule<f64>; 2],
) -> io::Result<()> {
    for rule in rules {
        let agent = rule.agent();
        for (t, row) in game.family.type_labels(agent).iter().zip(rule.rows()) {
            let probs: Vec<String> = row.iter().map(|&p| num(p)).collect();
            writeln!(
                out,
                "rule agent={} type={t} probs={}",
                agent.number(),
                probs.join(",")
            )?;
        }
    }
    Ok(())
}

fn cmd_validate(file: &Path) -> Outcome {
    let (game, _) = read_game(file)?;
    match game {
        GameFile::Posg(m) => println!(
            "valid posg horizon={} states={} actions={}x{} observations={}x{}",
            m.horizon(),
            m.num_states(),
            m.num_actions(Agent::One),
            m.num_actions(Agent::Two),
            m.num_observations(Agent::One),
            m.num_observations(Agent::Two)
        ),
        GameFile::Bg(g) => println!(
            "valid bg types={}x{} actions={}x{}",
            g.family.num_types(Agent::One),
            g.family.num_types(Agent::Two),
            g.family.num_actions(Agent::One),
            g.family.num_actions(Agent::Two)
        ),
    }
    Ok(())
}

fn solve_posg(model: &Posg64, caps: Caps, dump: Option<&Path>) -> Outcome {
    let game = PlanTimeGame::with_caps(model, caps);
    let sigma = Statistic::initial();
    let sol = game.solve_subgame(&sigma)?;
    let rational = game.behavioral_from_solution(&sol)?;
    if let Some(path) = dump {
        sol.flattened.matrix.write_csv(create(path)?)?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e| Failure::Io(PathBuf::from("<stdout>"), e);
    writeln!(out, "value={}", num(sol.value)).map_err(io_err)?;
    let rule = rational.stage_rules(0);
    print_rule(&mut out, model, &rule.one).map_err(io_err)?;
    print_rule(&mut out, model, &rule.two).map_err(io_err)?;
    Ok(())
}

fn cmd_bg_solve(game: &Bg64) -> Outcome {
    let sol = solve_bg(game)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |e| Failure::Io(PathBuf::from("<stdout>"), e);
    writeln!(out, "value={}", num(sol.value)).map_err(io_err)?;
    writeln!(out, "maxmin={} minmax={}", num(sol.maxmin), num(sol.minmax)).map_err(io_err)?;
    print_bg_rules(&mut out, game, [&sol.rule1, &sol.rule2]).map_err(io_err)?;
    Ok(())
}

fn cmd_slice(
    file: &Path,
    stage: usize,
    pivot: u8,
    grid: usize,
    out: &Path,
    seed: u64,
    caps: Caps,
) -> Outcome {
    let (game, _) = read_game(file)?;
    let pivot = Agent::from_number(pivot).expect("clap restricts the pivot to 1 or 2");
    let posg;
    let target = match &game {
        GameFile::Posg(m) => {
            m.check_stage(stage)?;
            posg = PlanTimeGame::with_caps(m, caps);
            Target::Posg { game: &posg, stage }
        }
        GameFile::Bg(g) => {
            if stage != 0 {
                return Err(Failure::Usage(
                    "a Bayesian game has a single stage (0)".into(),
                ));
            }
            Target::Family(&g.family)
        }
    };
    let mut rng = Lcg64::new(seed);
    let slice = target.random_slice(&mut rng, pivot, grid)?;
    let envelope = pure_envelope(&target, &slice)?;
    let mut w = create(out)?;
    let mut text = String::from("lambda,v_star,envelope,br_gap\n");
    for (k, env) in envelope.iter().enumerate() {
        let v = target.value(&slice.statistic(k))?;
        text.push_str(&format!(
            "{},{},{},{}\n",
            num(slice.lambda(k)),
            num(v),
            num(*env),
            num((v - env).abs())
        ));
    }
    w.write_all(text.as_bytes())
        .map_err(|e| Failure::Io(out.to_path_buf(), e))?;
    Ok(())
}

fn cmd_verify(file: &Path, seed: u64, caps: Caps) -> Outcome {
    let (game, bytes) = read_game(file)?;
    let plant = extra_field(&bytes, "plant");
    let cfg = SuiteConfig {
        seed,
        caps,
        ..SuiteConfig::default()
    };
    let report = suite::run(&game, plant.as_deref(), &cfg)?;
    print!("{}", report.render());
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn cmd_nosg_check(file: &Path, seed: u64, dump: Option<&Path>, caps: Caps) -> Outcome {
    let (game, _) = read_game(file)?;
    let GameFile::Posg(model) = game else {
        return Err(Failure::Usage("nosg-check needs a POSG file".into()));
    };
    if let Some(path) = dump {
        build_nosg(&model, caps)?.write_state_map(create(path)?)?;
    }
    let cfg = SuiteConfig {
        seed,
        caps,
        ..SuiteConfig::default()
    };
    let reports = suite::nosg_reports(&model, &cfg)?;
    for r in &reports {
        println!("{}", r.render());
    }
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Err(Failure::Checks)
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Solve {
            file,
            seed: _,
            caps,
            dump_matrix,
        } => {
            let (game, _) = read_game(&file)?;
            match &game {
                GameFile::Posg(m) => solve_posg(m, caps.caps(), dump_matrix.as_deref()),
                GameFile::Bg(g) => cmd_bg_solve(g),
            }
        }
        Command::Slice {
            file,
            stage,
            pivot,
            grid,
            out,
            seed,
            caps,
        } => cmd_slice(&file, stage, pivot, grid, &out, seed, caps.caps()),
        Command::Verify { file, seed, caps } => cmd_verify(&file, seed, caps.caps()),
        Command::NosgCheck {
            file,
            seed,
            dump_states,
            caps,
        } => cmd_nosg_check(&file, seed, dump_states.as_deref(), caps.caps()),
        Command::BgSolve { file } => match read_game(&file)?.0 {
            GameFile::Bg(g) => cmd_bg_solve(&g),
            GameFile::Posg(_) => Err(Failure::Usage("bg-solve needs a Bayesian-game file".into())),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(exit::CHECK_FAILED),
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(exit::IO)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(exit::INVALID_GAME)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) | Error::Csv(_) => exit::IO,
                Error::TooLarge { .. } | Error::Lp(_) => exit::CAPS,
                Error::Parse { .. }
                | Error::Invariant(_)
                | Error::Shape(_)
                | Error::StageOutOfRange { .. } => exit::INVALID_GAME,
            })
        }
    }
}
