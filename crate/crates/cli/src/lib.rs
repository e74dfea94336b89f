//! Command-line front end.
//!
//! [`run`] parses the arguments, dispatches to `wmg_core` and returns the
//! exit code together with everything destined for stdout and stderr, so
//! the whole interface can be exercised in-process.
//!
//! Exit codes: 0 solvable or true, 1 unsolvable or false, 2 input error,
//! 3 budget exhausted. Reports are `key: value` lines; a net or graph, when
//! not written to `--out`, follows the report after one blank line.

use std::fmt::{Debug, Display};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use wmg_core::acyclic::{synthesize_acyclic, AcyclicError};
use wmg_core::binary::{
    bezout_block, infinite_binary_candidate, predict_state_count, solve_binary_cyclic,
    synthesize_reversible_binary, verify_infinite_binary, BinaryCircuit, BinaryError,
};
use wmg_core::cyclic::{brute_force_cyclic_oracle, decide_cyclic, CyclicDecision, CyclicError};
use wmg_core::format::{emit_lts, emit_net, lts_to_dot, net_to_dot, parse_lts, parse_net};
use wmg_core::lts::compare_rooted;
use wmg_core::net::{reachability_graph, DEFAULT_STATE_BOUND};
use wmg_core::{Lts, LtsError, NetError, System, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "wmg", version, about = "Weighted marked graph synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Dot,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the net or graph here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a cyclic word over two labels with a two-place circuit.
    SolveBinary {
        word: String,
        #[command(flatten)]
        output: Output,
    },
    /// Decide cyclic solvability of a word over any number of labels.
    SolveCyclic {
        word: String,
        /// Skip the structural criteria and search exhaustively.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Synthesize a net for a finite acyclic LTS.
    SynthAcyclic {
        lts: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Synthesize a circuit for a finite reversible binary LTS.
    SynthReversible {
        lts: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Build the reachability graph of a net.
    Simulate {
        net: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Rooted isomorphism of two LTS files.
    Isomorphic { left: PathBuf, right: PathBuf },
    /// Exhaustive search for a cyclic word.
    Oracle {
        word: String,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Number of reachable markings of a binary circuit holding k tokens.
    PredictStates { n: u64, m: u64, k: u64 },
    /// Compare the single-place candidate for (n, m, i0) with an LTS prefix.
    InfiniteCheck {
        n: u64,
        m: u64,
        i0: u64,
        lts: PathBuf,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Render a net or LTS file as DOT.
    ExportDot {
        file: PathBuf,
        /// Render the reachability graph of a net instead of the net.
        #[arg(long)]
        reachability: bool,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        bound: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// A failure mapped to an exit code and a stable name.
#[derive(Debug)]
struct Failure {
    code: i32,
    name: String,
    detail: String,
}

impl Failure {
    fn new(code: i32, name: impl Into<String>, detail: impl Display) -> Self {
        Failure {
            code,
            name: name.into(),
            detail: detail.to_string(),
        }
    }

    fn input(name: &str, detail: impl Display) -> Self {
        Failure::new(EXIT_INPUT, name, detail)
    }
}

/// Variant name of an error enum, taken from its `Debug` form.
fn variant<E: Debug>(e: &E) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric() && c != '_')
        .next()
        .unwrap_or_default()
        .to_string()
}

impl From<LtsError> for Failure {
    fn from(e: LtsError) -> Self {
        let code = match e {
            LtsError::CycleBudgetExceeded(_) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure::new(code, variant(&e), e)
    }
}

impl From<NetError> for Failure {
    fn from(e: NetError) -> Self {
        let code = match e {
            NetError::BoundExceeded(_) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure::new(code, variant(&e), e)
    }
}

impl From<BinaryError> for Failure {
    fn from(e: BinaryError) -> Self {
        match e {
            BinaryError::Lts(e) => e.into(),
            BinaryError::Net(e) => e.into(),
            BinaryError::EmptyWord
            | BinaryError::NotBinary(_)
            | BinaryError::OrderViolated(..)
            | BinaryError::BelowThreshold { .. } => Failure::input(&variant(&e), e),
            _ => Failure::new(EXIT_NO, variant(&e), e),
        }
    }
}

impl From<AcyclicError> for Failure {
    fn from(e: AcyclicError) -> Self {
        match e {
            AcyclicError::Lts(e) => e.into(),
            AcyclicError::Net(e) => e.into(),
            _ => Failure::new(EXIT_NO, variant(&e), e),
        }
    }
}

impl From<CyclicError> for Failure {
    fn from(e: CyclicError) -> Self {
        match e {
            CyclicError::Lts(e) => e.into(),
            CyclicError::Net(e) => e.into(),
            CyclicError::SearchSpaceTooLarge { .. } => Failure::new(EXIT_BUDGET, variant(&e), e),
            CyclicError::EmptyWord
            | CyclicError::LabelAbsent(_)
            | CyclicError::OutOfTheoremScope(_) => Failure::input(&variant(&e), e),
            _ => Failure::new(EXIT_NO, variant(&e), e),
        }
    }
}

/// Accumulates `key: value` lines and an optional trailing artifact.
#[derive(Default)]
struct Report {
    lines: Vec<String>,
    artifact: Option<String>,
    code: i32,
}

impl Report {
    fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push(format!("{key}: {value}"));
        self
    }

    fn verdict(&mut self, holds: bool, value: impl Display) -> &mut Self {
        self.code = if holds { EXIT_OK } else { EXIT_NO };
        self.put("verdict", value)
    }

    /// Writes `text` to `out` when given, else keeps it for stdout.
    fn emit(&mut self, text: String, out: Option<&Path>) -> Result<(), Failure> {
        match out {
            Some(path) => {
                fs::write(path, text).map_err(|e| {
                    Failure::input("WriteFailed", format!("{}: {e}", path.display()))
                })?;
                self.put("written", path.display());
            }
            None => self.artifact = Some(text),
        }
        Ok(())
    }

    fn emit_net(&mut self, sys: &System, output: &Output) -> Result<(), Failure> {
        for (p, name) in sys.net.places().iter().enumerate() {
            self.put("place", format!("{name} tokens={}", sys.initial.get(p)));
        }
        let text = match output.format {
            Format::Text => emit_net(sys),
            Format::Dot => net_to_dot(sys),
        };
        self.emit(text, output.out.as_deref())
    }

    fn render(self) -> Outcome {
        let mut stdout = self.lines.join("\n");
        stdout.push('\n');
        if let Some(a) = self.artifact {
            stdout.push('\n');
            stdout.push_str(&a);
            if !a.ends_with('\n') {
                stdout.push('\n');
            }
        }
        Outcome {
            code: self.code,
            stdout,
            stderr: String::new(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input("ReadFailed", format!("{}: {e}", path.display())))
}

fn load_lts(path: &Path) -> Result<Lts, Failure> {
    parse_lts(&read(path)?)
        .map_err(|e| Failure::input("ParseError", format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<System, Failure> {
    parse_net(&read(path)?)
        .map_err(|e| Failure::input("ParseError", format!("{}: {e}", path.display())))
}

fn parse_word(text: &str) -> Result<Word, Failure> {
    Word::parse(text).map_err(|e| Failure::input("InvalidWord", e))
}

fn describe_circuit(r: &mut Report, c: &BinaryCircuit, states: usize) {
    r.put("a", &c.a);
    if let Some(b) = &c.b {
        r.put("b", b);
    }
    r.put("n", c.n).put("m", c.m);
    r.put("tokens_total", c.total_tokens())
        .put("states", states);
    r.put("certified", true);
}

fn solve_binary(word: &str, output: &Output) -> Result<Report, Failure> {
    let w = parse_word(word)?;
    let mut r = Report::default();
    match solve_binary_cyclic(&w) {
        Ok(c) => {
            let states = reachability_graph(&c.system, w.len() + 1)?.num_states();
            r.verdict(true, "Solvable");
            describe_circuit(&mut r, &c, states);
            r.emit_net(&c.system, output)?;
        }
        Err(e) => unsolvable(&mut r, e)?,
    }
    Ok(r)
}

/// Records an unsolvable verdict, or passes other failures through.
fn unsolvable(r: &mut Report, e: impl Into<Failure>) -> Result<(), Failure> {
    let f: Failure = e.into();
    if f.code != EXIT_NO {
        return Err(f);
    }
    r.verdict(false, "Unsolvable");
    r.put("reason", f.name).put("detail", f.detail);
    Ok(())
}

fn describe_decision(r: &mut Report, d: &CyclicDecision, output: &Output) -> Result<(), Failure> {
    r.verdict(d.verdict.is_solvable(), d.verdict);
    if let Some((x, y)) = &d.witness_pair {
        r.put("witness_pair", format!("{x},{y}"));
    }
    for p in &d.pairs {
        let (x, y) = &p.projection.pair;
        let status = match &p.failure {
            None => "ok".to_string(),
            Some(reason) => format!("fails ({reason})"),
        };
        r.put(
            "pair",
            format!(
                "{x},{y} root={} ell={} {status}",
                p.projection.root_v, p.projection.ell
            ),
        );
    }
    if d.within_searched_family {
        r.put("scope", "unsolvable within searched family");
    }
    if let Some(sys) = &d.system {
        r.put("tokens_total", sys.initial.total())
            .put("certified", true);
        r.emit_net(sys, output)?;
    }
    Ok(())
}

fn solve_cyclic(
    word: &str,
    oracle: bool,
    budget: Option<u64>,
    output: &Output,
) -> Result<Report, Failure> {
    let w = parse_word(word)?;
    let mut r = Report::default();
    match decide_cyclic(&w, oracle, budget) {
        Ok(d) => describe_decision(&mut r, &d, output)?,
        Err(e) => unsolvable(&mut r, e)?,
    }
    Ok(r)
}

fn run_oracle(word: &str, budget: Option<u64>, output: &Output) -> Result<Report, Failure> {
    let w = parse_word(word)?;
    let mut r = Report::default();
    match brute_force_cyclic_oracle(&w, budget) {
        Ok(d) => describe_decision(&mut r, &d, output)?,
        Err(e) => unsolvable(&mut r, e)?,
    }
    Ok(r)
}

fn synth_acyclic(path: &Path, output: &Output) -> Result<Report, Failure> {
    let lts = load_lts(path)?;
    let mut r = Report::default();
    match synthesize_acyclic(&lts) {
        Ok(sol) => {
            r.verdict(true, "Solvable");
            r.put("states", lts.num_states());
            for region in &sol.regions {
                r.put("region", region);
            }
            for c in &sol.counters {
                r.put("counter", c);
            }
            r.put("certified", true);
            r.emit_net(&sol.system, output)?;
        }
        Err(e) => unsolvable(&mut r, e)?,
    }
    Ok(r)
}

fn synth_reversible(path: &Path, output: &Output) -> Result<Report, Failure> {
    let lts = load_lts(path)?;
    let mut r = Report::default();
    match synthesize_reversible_binary(&lts) {
        Ok(c) => {
            r.verdict(true, "Solvable");
            describe_circuit(&mut r, &c, lts.num_states());
            r.emit_net(&c.system, output)?;
        }
        Err(e) => unsolvable(&mut r, e)?,
    }
    Ok(r)
}

fn simulate(path: &Path, bound: usize, output: &Output) -> Result<Report, Failure> {
    let sys = load_net(path)?;
    let rg = reachability_graph(&sys, bound)?;
    let mut r = Report::default();
    let deadlocks = (0..rg.num_states())
        .filter(|&s| rg.successors(s).is_empty())
        .count();
    r.put("states", rg.num_states())
        .put("arcs", rg.num_arcs())
        .put("deadlocks", deadlocks)
        .put("acyclic", rg.is_acyclic());
    let text = match output.format {
        Format::Text => emit_lts(&rg),
        Format::Dot => lts_to_dot(&rg),
    };
    r.emit(text, output.out.as_deref())?;
    Ok(r)
}

fn isomorphic(left: &Path, right: &Path) -> Result<Report, Failure> {
    let (g1, g2) = (load_lts(left)?, load_lts(right)?);
    let mut r = Report::default();
    match compare_rooted(&g1, &g2)? {
        Ok(iso) => {
            r.code = EXIT_OK;
            r.put("isomorphic", true);
            for (x, y) in iso.named_pairs(&g1, &g2) {
                r.put("map", format!("{x} -> {y}"));
            }
        }
        Err(d) => {
            r.code = EXIT_NO;
            r.put("isomorphic", false).put("divergence", d);
        }
    }
    Ok(r)
}

fn predict(n: u64, m: u64, k: u64) -> Result<Report, Failure> {
    let states = predict_state_count(n, m, k).map_err(|e| Failure::input(&variant(&e), e))?;
    let mut r = Report::default();
    r.put("states", states);
    Ok(r)
}

fn infinite_check(n: u64, m: u64, i0: u64, path: &Path, depth: usize) -> Result<Report, Failure> {
    let sys = infinite_binary_candidate(n, m, i0).map_err(|e| Failure::input(&variant(&e), e))?;
    let (k, l) = bezout_block(n, m).map_err(|e| Failure::input(&variant(&e), e))?;
    let lts = load_lts(path)?;
    let check = verify_infinite_binary(&sys, &lts, depth);
    let mut r = Report {
        code: if check.holds { EXIT_OK } else { EXIT_NO },
        ..Report::default()
    };
    r.put("holds", check.holds)
        .put("depth", depth)
        .put("bezout_block", format!("a^{k} b^{l}"));
    if let Some(d) = check.witness {
        r.put("divergence", d);
    }
    Ok(r)
}

/// Whether the first record of a file belongs to the LTS format.
fn looks_like_lts(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| {
            ["initial", "arc", "state", "label"]
                .contains(&l.split_whitespace().next().unwrap_or(""))
        })
}

fn export_dot(
    path: &Path,
    reachability: bool,
    bound: usize,
    out: Option<&Path>,
) -> Result<Report, Failure> {
    let text = read(path)?;
    let mut r = Report::default();
    let dot = if looks_like_lts(&text) {
        let lts = parse_lts(&text).map_err(|e| Failure::input("ParseError", e))?;
        r.put("kind", "lts").put("states", lts.num_states());
        lts_to_dot(&lts)
    } else {
        let sys = parse_net(&text).map_err(|e| Failure::input("ParseError", e))?;
        if reachability {
            let rg = reachability_graph(&sys, bound)?;
            r.put("kind", "reachability_graph")
                .put("states", rg.num_states());
            lts_to_dot(&rg)
        } else {
            r.put("kind", "net").put("places", sys.net.places().len());
            net_to_dot(&sys)
        }
    };
    r.emit(dot, out)?;
    Ok(r)
}

fn dispatch(cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::SolveBinary { word, output } => solve_binary(&word, &output),
        Command::SolveCyclic {
            word,
            oracle,
            budget,
            output,
        } => solve_cyclic(&word, oracle, budget, &output),
        Command::SynthAcyclic { lts, output } => synth_acyclic(&lts, &output),
        Command::SynthReversible { lts, output } => synth_reversible(&lts, &output),
        Command::Simulate { net, bound, output } => simulate(&net, bound, &output),
        Command::Isomorphic { left, right } => isomorphic(&left, &right),
        Command::Oracle {
            word,
            budget,
            output,
        } => run_oracle(&word, budget, &output),
        Command::PredictStates { n, m, k } => predict(n, m, k),
        Command::InfiniteCheck {
            n,
            m,
            i0,
            lts,
            depth,
        } => infinite_check(n, m, i0, &lts, depth),
        Command::ExportDot {
            file,
            reachability,
            bound,
            out,
        } => export_dot(&file, reachability, bound, out.as_deref()),
    }
}

/// Runs one command line; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(report) => report.render(),
        Err(f) => Outcome {
            code: f.code,
            stdout: format!("error: {}\ndetail: {}\n", f.name, f.detail),
            stderr: format!("wmg: {}\n", f.detail),
        },
    }
}
