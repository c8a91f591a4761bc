//! Finite MDPs, history-dependent policies, sampling with reset, and grid worlds.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::objective::{LabelingFunction, Objective, TailWord};
use crate::rational::{int, parse_rational, Rational};
use crate::text::{self, Line};

/// `(S, A, P, s0)` with exact rows. Symbol `s·|A| + a` of [`Mdp::alphabet`] is the pair `(s, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdp {
    states: Vec<String>,
    actions: Vec<String>,
    init: usize,
    /// Sparse rows `(s', P(s'|s,a))`, ascending in `s'`, zero entries dropped.
    rows: Vec<Vec<(usize, Rational)>>,
    /// `ceil(cumulative · 2^64)` per row entry.
    thresholds: Vec<Vec<u128>>,
    alphabet: Arc<Alphabet>,
}

impl Mdp {
    /// `rows[s][a][s']` must be a probability vector for every `(s, a)`.
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        init: usize,
        rows: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        if states.is_empty() || actions.is_empty() {
            return Err(Error::invalid("MDP", "needs at least one state and one action"));
        }
        if init >= states.len() {
            return Err(Error::invalid("MDP", "initial state out of range"));
        }
        if rows.len() != states.len() || rows.iter().any(|r| r.len() != actions.len()) {
            return Err(Error::invalid("MDP", "transition table must cover S × A"));
        }
        let mut sparse = Vec::with_capacity(states.len() * actions.len());
        for (s, per_action) in rows.iter().enumerate() {
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != states.len() {
                    return Err(Error::invalid(
                        "MDP",
                        format!("row ({}, {}) has {} entries", states[s], actions[a], row.len()),
                    ));
                }
                if row.iter().any(|p| p.is_negative()) {
                    return Err(Error::invalid(
                        "MDP",
                        format!("row ({}, {}) has a negative entry", states[s], actions[a]),
                    ));
                }
                let total: Rational = row.iter().sum();
                if !total.is_one() {
                    return Err(Error::invalid(
                        "MDP",
                        format!("row ({}, {}) sums to {total}", states[s], actions[a]),
                    ));
                }
                sparse.push(
                    row.iter()
                        .enumerate()
                        .filter(|(_, p)| !p.is_zero())
                        .map(|(t, p)| (t, p.clone()))
                        .collect::<Vec<_>>(),
                );
            }
        }
        let names: Vec<String> = states
            .iter()
            .flat_map(|s| actions.iter().map(move |a| format!("{s}:{a}")))
            .collect();
        let alphabet = Arc::new(Alphabet::named(&names)?);
        let thresholds = sparse.iter().map(|row| thresholds(row)).collect();
        Ok(Mdp {
            states,
            actions,
            init,
            rows: sparse,
            thresholds,
            alphabet,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    /// Alphabet of state-action pairs, named `state:action`.
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn symbol(&self, s: usize, a: usize) -> Symbol {
        Symbol((s * self.actions.len() + a) as u32)
    }

    pub fn pair(&self, sym: Symbol) -> (usize, usize) {
        (sym.index() / self.actions.len(), sym.index() % self.actions.len())
    }

    pub fn row(&self, s: usize, a: usize) -> &[(usize, Rational)] {
        &self.rows[s * self.actions.len() + a]
    }

    pub fn prob(&self, s: usize, a: usize, t: usize) -> Rational {
        self.row(s, a)
            .iter()
            .find(|(u, _)| *u == t)
            .map_or_else(Rational::zero, |(_, p)| p.clone())
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    /// Draws `s'` from `P(s, a)` with one 64-bit draw.
    pub fn sample_next(&self, s: usize, a: usize, rng: &mut impl Rng) -> usize {
        let idx = s * self.actions.len() + a;
        let r = u128::from(rng.random::<u64>());
        let row = &self.rows[idx];
        let pos = self.thresholds[idx].iter().position(|&t| r < t).unwrap_or(row.len() - 1);
        row[pos].0
    }
}

fn thresholds(row: &[(usize, Rational)]) -> Vec<u128> {
    let scale = Rational::from_integer(BigInt::one() << 64usize);
    let mut cum = Rational::zero();
    row.iter()
        .map(|(_, p)| {
            cum += p;
            let scaled = &cum * &scale;
            let (q, r) = scaled.numer().div_rem(scaled.denom());
            let ceil = if r.is_zero() { q } else { q + 1 };
            ceil.to_u128().unwrap_or(u128::MAX)
        })
        .collect()
}

impl fmt::Display for Mdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mdp")?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "actions {}", self.actions.join(" "))?;
        writeln!(f, "init {}", self.states[self.init])?;
        for (s, sname) in self.states.iter().enumerate() {
            for (a, aname) in self.actions.iter().enumerate() {
                write!(f, "row {sname} {aname} :")?;
                for (t, p) in self.row(s, a) {
                    write!(f, " {}={p}", self.states[*t])?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// A step or a reset in a session transcript. `state` is where the record started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Record {
    Step { state: usize, action: usize, next: usize },
    Reset { state: usize },
}

/// Sampling access with reset. The generator is ChaCha8 seeded from `seed`
/// on stream `stream`; sessions with the same `(seed, stream)` and the same
/// calls produce identical transcripts.
#[derive(Debug, Clone)]
pub struct SamplingSession {
    mdp: Arc<Mdp>,
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    current: usize,
    transcript: Vec<Record>,
    steps: u64,
    keep_transcript: bool,
}

impl SamplingSession {
    pub fn new(mdp: Arc<Mdp>, seed: u64) -> Self {
        Self::with_stream(mdp, seed, 0)
    }

    pub fn with_stream(mdp: Arc<Mdp>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let current = mdp.init;
        SamplingSession {
            mdp,
            rng,
            seed,
            stream,
            current,
            transcript: Vec::new(),
            steps: 0,
            keep_transcript: true,
        }
    }

    /// Stops recording the transcript (long learning runs).
    pub fn without_transcript(mut self) -> Self {
        self.keep_transcript = false;
        self
    }

    pub fn mdp(&self) -> &Arc<Mdp> {
        &self.mdp
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn transcript(&self) -> &[Record] {
        &self.transcript
    }

    /// Number of `step` calls so far.
    pub fn samples(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self, action: usize) -> Result<usize> {
        if action >= self.mdp.num_actions() {
            return Err(Error::Unknown {
                kind: "action",
                name: action.to_string(),
            });
        }
        let state = self.current;
        let next = self.mdp.sample_next(state, action, &mut self.rng);
        if self.keep_transcript {
            self.transcript.push(Record::Step { state, action, next });
        }
        self.current = next;
        self.steps += 1;
        Ok(next)
    }

    pub fn step_named(&mut self, action: &str) -> Result<usize> {
        let a = self.mdp.action_index(action).ok_or_else(|| Error::Unknown {
            kind: "action",
            name: action.to_string(),
        })?;
        self.step(a)
    }

    pub fn reset(&mut self) -> usize {
        if self.keep_transcript {
            self.transcript.push(Record::Reset { state: self.current });
        }
        self.current = self.mdp.init;
        self.current
    }
}

/// A history-dependent policy. Histories are `[s0, a0, s1, a1, ..., st]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Uniform { actions: usize },
    /// Histories missing from the table take `default`.
    Table {
        actions: usize,
        table: HashMap<Vec<usize>, usize>,
        default: usize,
    },
}

impl Policy {
    pub fn uniform(actions: usize) -> Self {
        Policy::Uniform { actions }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Policy::Uniform { actions } | Policy::Table { actions, .. } => *actions,
        }
    }

    pub fn distribution(&self, history: &[usize]) -> Vec<Rational> {
        match self {
            Policy::Uniform { actions } => vec![Rational::new(1.into(), (*actions).into()); *actions],
            Policy::Table { .. } => {
                let a = self.deterministic(history).expect("table policies are deterministic");
                let mut d = vec![Rational::zero(); self.num_actions()];
                d[a] = Rational::one();
                d
            }
        }
    }

    /// The chosen action, for deterministic policies.
    pub fn deterministic(&self, history: &[usize]) -> Option<usize> {
        match self {
            Policy::Uniform { .. } => None,
            Policy::Table { table, default, .. } => Some(*table.get(history).unwrap_or(default)),
        }
    }

    pub fn act(&self, history: &[usize], rng: &mut impl Rng) -> usize {
        match self {
            Policy::Uniform { actions } => rng.random_range(0..*actions),
            Policy::Table { .. } => self.deterministic(history).unwrap_or(0),
        }
    }

    /// `history action` lines for every table entry, sorted by history.
    pub fn render(&self, mdp: &Mdp) -> String {
        match self {
            Policy::Uniform { .. } => "uniform\n".to_string(),
            Policy::Table { table, default, .. } => {
                let mut entries: Vec<(&Vec<usize>, &usize)> = table.iter().collect();
                entries.sort();
                let mut out = format!("default {}\n", mdp.actions()[*default]);
                for (h, a) in entries {
                    let names: Vec<&str> = h
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| if i % 2 == 0 { mdp.states()[x].as_str() } else { mdp.actions()[x].as_str() })
                        .collect();
                    out.push_str(&format!("{} -> {}\n", names.join(" "), mdp.actions()[*a]));
                }
                out
            }
        }
    }
}

/// Monte Carlo estimate of `E[f]` under `policy`: the mean over `episodes`
/// rollouts of `approx(episode · rep^ω, n)`, where an episode is `horizon`
/// state-action letters and `rep` is the first symbol.
pub fn policy_value_estimate(
    mdp: &Mdp,
    policy: &Policy,
    objective: &dyn Objective,
    n: u32,
    episodes: usize,
    horizon: usize,
    seed: u64,
) -> Result<Rational> {
    if objective.alphabet().as_ref() != mdp.alphabet().as_ref() {
        return Err(Error::AlphabetMismatch(
            "objective must be over the MDP's state-action pairs".into(),
        ));
    }
    if episodes == 0 {
        return Err(Error::invalid("estimate", "needs at least one episode"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = Rational::zero();
    let mut history = Vec::with_capacity(2 * horizon + 1);
    let mut word = Vec::with_capacity(horizon);
    for _ in 0..episodes {
        history.clear();
        word.clear();
        let mut s = mdp.init;
        history.push(s);
        for _ in 0..horizon {
            let a = policy.act(&history, &mut rng);
            word.push(mdp.symbol(s, a));
            s = mdp.sample_next(s, a, &mut rng);
            history.push(a);
            history.push(s);
        }
        let w = TailWord {
            prefix: &word,
            rep: mdp.alphabet().first(),
        };
        total += objective.approx(&w, n)?;
    }
    Ok(total / int(episodes as i64))
}

/// A rectangular grid: state `y·W + x` is cell `(x, y)`, named `x{x}y{y}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub lava: Vec<(usize, usize)>,
    pub goals: Vec<(usize, usize)>,
    pub slip: Rational,
    pub start: (usize, usize),
}

impl GridSpec {
    /// The 4×2 grid with lava at (1,0), (2,0), goal at (3,0), start (0,0).
    pub fn figure() -> Self {
        GridSpec {
            width: 4,
            height: 2,
            lava: vec![(1, 0), (2, 0)],
            goals: vec![(3, 0)],
            slip: Rational::zero(),
            start: (0, 0),
        }
    }

    pub fn state(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

pub const GRID_ACTIONS: [&str; 4] = ["up", "down", "left", "right"];

/// Grid MDP and its labeling. `up` increases `y`. A move succeeds with
/// probability `1 − slip` unless a wall blocks it; otherwise the agent stays.
/// Labels depend only on the cell: `{goal}`, `{lava}`, both, or `{}`.
pub fn build_gridworld(spec: &GridSpec) -> Result<(Mdp, LabelingFunction)> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(Error::invalid("grid", "width and height must be positive"));
    }
    let inside = |&(x, y): &(usize, usize)| x < w && y < h;
    for c in spec.lava.iter().chain(&spec.goals).chain([&spec.start]) {
        if !inside(c) {
            return Err(Error::invalid("grid", format!("cell ({}, {}) is outside {w}×{h}", c.0, c.1)));
        }
    }
    if spec.slip.is_negative() || spec.slip >= Rational::one() {
        return Err(Error::invalid("grid", format!("slip {} must lie in [0, 1)", spec.slip)));
    }
    let n = w * h;
    let states: Vec<String> = (0..n).map(|s| format!("x{}y{}", s % w, s / w)).collect();
    let actions: Vec<String> = GRID_ACTIONS.iter().map(|a| a.to_string()).collect();
    let mut rows = vec![vec![vec![Rational::zero(); n]; 4]; n];
    for s in 0..n {
        let (x, y) = (s % w, s / w);
        let targets = [
            (y + 1 < h).then(|| spec.state(x, y + 1)),
            (y > 0).then(|| spec.state(x, y - 1)),
            (x > 0).then(|| spec.state(x - 1, y)),
            (x + 1 < w).then(|| spec.state(x + 1, y)),
        ];
        for (a, t) in targets.iter().enumerate() {
            match t {
                Some(t) => {
                    rows[s][a][*t] += Rational::one() - &spec.slip;
                    rows[s][a][s] += &spec.slip;
                }
                None => rows[s][a][s] = Rational::one(),
            }
        }
    }
    let mdp = Mdp::new(states, actions, spec.state(spec.start.0, spec.start.1), rows)?;
    let labels = (0..n)
        .flat_map(|s| {
            let cell = (s % w, s / w);
            let mut props = Vec::new();
            if spec.goals.contains(&cell) {
                props.push("goal");
            }
            if spec.lava.contains(&cell) {
                props.push("lava");
            }
            std::iter::repeat_n(format!("{{{}}}", props.join(",")), 4)
        })
        .collect();
    let labeling = LabelingFunction::new(mdp.alphabet().clone(), labels)?;
    Ok((mdp, labeling))
}

/// An environment file: a grid description or an explicit MDP, with labels.
#[derive(Debug, Clone)]
pub struct Environment {
    pub mdp: Arc<Mdp>,
    pub labeling: LabelingFunction,
    pub grid: Option<GridSpec>,
}

impl Environment {
    /// Grid files start with `grid W H`; MDP files with `mdp`.
    ///
    /// ```text
    /// grid 4 2            mdp
    /// lava 1 0            states s0 s1
    /// goal 3 0            actions go stay
    /// slip 1/4            init s0
    /// start 0 0           row s0 go : s0=1/2 s1=1/2
    ///                     label s1 {one}
    /// ```
    /// MDP labels are `label STATE LETTER` (every action) or
    /// `label STATE ACTION LETTER`; unlabeled pairs get `{}`.
    pub fn parse(input: &str) -> Result<Self> {
        let lines = text::lines(input)?;
        let first = lines.first().ok_or_else(|| Error::parse(1, 1, "empty environment file"))?;
        match first.keyword() {
            "grid" => parse_grid(&lines),
            "mdp" => parse_mdp(&lines),
            other => Err(first.error(1, format!("expected `grid` or `mdp`, found `{other}`"))),
        }
    }
}

fn parse_usize(line: &Line<'_>, i: usize) -> Result<usize> {
    let tok = &line.args()[i];
    tok.text
        .parse()
        .map_err(|_| line.error(tok.column, format!("expected a natural number, found `{}`", tok.text)))
}

fn parse_cell(line: &Line<'_>) -> Result<(usize, usize)> {
    line.expect_args(2)?;
    Ok((parse_usize(line, 0)?, parse_usize(line, 1)?))
}

fn parse_grid(lines: &[Line<'_>]) -> Result<Environment> {
    let header = &lines[0];
    header.expect_args(2)?;
    let mut spec = GridSpec {
        width: parse_usize(header, 0)?,
        height: parse_usize(header, 1)?,
        lava: Vec::new(),
        goals: Vec::new(),
        slip: Rational::zero(),
        start: (0, 0),
    };
    for line in &lines[1..] {
        match line.keyword() {
            "lava" => spec.lava.push(parse_cell(line)?),
            "goal" => spec.goals.push(parse_cell(line)?),
            "start" => spec.start = parse_cell(line)?,
            "slip" => {
                let tok = line.expect_args(1)?[0];
                spec.slip = parse_rational(tok.text).map_err(|e| line.error(tok.column, e.to_string()))?;
            }
            other => return Err(line.error(1, format!("unknown directive `{other}`"))),
        }
    }
    let (mdp, labeling) = build_gridworld(&spec)?;
    Ok(Environment {
        mdp: Arc::new(mdp),
        labeling,
        grid: Some(spec),
    })
}

fn parse_mdp(lines: &[Line<'_>]) -> Result<Environment> {
    let header = &lines[0];
    header.expect_args(0)?;
    let mut states: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut init: Option<&Line<'_>> = None;
    let mut rows: Vec<&Line<'_>> = Vec::new();
    let mut labels: Vec<&Line<'_>> = Vec::new();
    for line in &lines[1..] {
        match line.keyword() {
            "states" => states = Some(line.args().iter().map(|t| t.text.to_string()).collect()),
            "actions" => actions = Some(line.args().iter().map(|t| t.text.to_string()).collect()),
            "init" => {
                line.expect_args(1)?;
                init = Some(line);
            }
            "row" => rows.push(line),
            "label" => labels.push(line),
            other => return Err(line.error(1, format!("unknown directive `{other}`"))),
        }
    }
    let states = states.ok_or_else(|| header.error(1, "missing `states` line"))?;
    let actions = actions.ok_or_else(|| header.error(1, "missing `actions` line"))?;
    let sindex = text::state_index("MDP", &states)?;
    let aindex = text::state_index("MDP", &actions)?;
    let init_line = init.ok_or_else(|| header.error(1, "missing `init` line"))?;
    let init = text::lookup(&sindex, init_line, &init_line.args()[0])?;
    let mut table: Vec<Vec<Option<Vec<Rational>>>> = vec![vec![None; actions.len()]; states.len()];
    for line in rows {
        let args = line.args();
        if args.len() < 4 || args[2].text != ":" {
            return Err(line.error(1, "expected `row STATE ACTION : s1=p1 s2=p2 ...`"));
        }
        let s = text::lookup(&sindex, line, &args[0])?;
        let a = *aindex
            .get(args[1].text)
            .ok_or_else(|| line.error(args[1].column, format!("unknown action `{}`", args[1].text)))?;
        let mut row = vec![Rational::zero(); states.len()];
        for tok in &args[3..] {
            let (name, p) = tok.key_value(line)?;
            let t = *sindex
                .get(name)
                .ok_or_else(|| line.error(tok.column, format!("unknown state `{name}`")))?;
            row[t] += parse_rational(p).map_err(|e| line.error(tok.column, e.to_string()))?;
        }
        if table[s][a].replace(row).is_some() {
            return Err(line.error(1, format!("duplicate row for ({}, {})", states[s], actions[a])));
        }
    }
    let mut full = Vec::with_capacity(states.len());
    for (s, per_action) in table.into_iter().enumerate() {
        let mut out = Vec::with_capacity(actions.len());
        for (a, row) in per_action.into_iter().enumerate() {
            out.push(row.ok_or_else(|| {
                Error::invalid("MDP", format!("missing row for ({}, {})", states[s], actions[a]))
            })?);
        }
        full.push(out);
    }
    let mut label_table = vec!["{}".to_string(); states.len() * actions.len()];
    for line in labels {
        let args = line.args();
        let (s, acts, letter) = match args.len() {
            2 => (text::lookup(&sindex, line, &args[0])?, (0..actions.len()).collect::<Vec<_>>(), args[1].text),
            3 => {
                let a = *aindex
                    .get(args[1].text)
                    .ok_or_else(|| line.error(args[1].column, format!("unknown action `{}`", args[1].text)))?;
                (text::lookup(&sindex, line, &args[0])?, vec![a], args[2].text)
            }
            _ => return Err(line.error(1, "expected `label STATE [ACTION] LETTER`")),
        };
        for a in acts {
            label_table[s * actions.len() + a] = letter.to_string();
        }
    }
    let mdp = Arc::new(Mdp::new(states, actions, init, full)?);
    let labeling = LabelingFunction::new(mdp.alphabet().clone(), label_table)?;
    Ok(Environment {
        mdp,
        labeling,
        grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ConstantObjective;
    use crate::rational::ratio;

    fn coin() -> Arc<Mdp> {
        let half = ratio(1, 2);
        Arc::new(
            Mdp::new(
                vec!["s0".into(), "s1".into()],
                vec!["flip".into()],
                0,
                vec![vec![vec![half.clone(), half.clone()]], vec![vec![half.clone(), half]]],
            )
            .unwrap(),
        )
    }

    #[test]
    fn deterministic_rows_are_followed() {
        let (mdp, _) = build_gridworld(&GridSpec::figure()).unwrap();
        let mut s = SamplingSession::new(Arc::new(mdp), 7);
        assert_eq!(s.step_named("right").unwrap(), 1);
        assert_eq!(s.step_named("up").unwrap(), 5);
        assert_eq!(s.step_named("up").unwrap(), 5);
        assert_eq!(s.step_named("left").unwrap(), 4);
        assert_eq!(s.reset(), 0);
        assert!(s.step_named("jump").is_err());
        assert!(s.step(4).is_err());
        assert_eq!(s.samples(), 4);
        assert_eq!(s.transcript().len(), 5);
    }

    #[test]
    fn fair_coin_frequency() {
        let mut s = SamplingSession::new(coin(), 2024).without_transcript();
        let ones = (0..10_000).filter(|_| s.step(0).unwrap() == 1).count();
        assert!((ones as f64 / 10_000.0 - 0.5).abs() <= 0.02, "{ones}");
    }

    #[test]
    fn transcripts_replay() {
        let run = |seed, stream| {
            let mut s = SamplingSession::with_stream(coin(), seed, stream);
            for i in 0..50 {
                if i % 7 == 0 {
                    s.reset();
                } else {
                    s.step(0).unwrap();
                }
            }
            s.transcript().to_vec()
        };
        assert_eq!(run(1, 0), run(1, 0));
        assert_ne!(run(1, 0), run(1, 1));
        assert_ne!(run(1, 0), run(2, 0));
    }

    #[test]
    fn thresholds_are_exact_partitions() {
        let row = vec![(0, ratio(1, 3)), (1, ratio(2, 3))];
        let t = thresholds(&row);
        assert_eq!(t[1], 1u128 << 64);
        assert_eq!(t[0], (1u128 << 64) / 3 + 1);
    }

    #[test]
    fn grid_rows_normalized_with_slip() {
        let mut spec = GridSpec::figure();
        spec.slip = ratio(1, 4);
        let (mdp, labeling) = build_gridworld(&spec).unwrap();
        for s in 0..mdp.num_states() {
            for a in 0..4 {
                let total: Rational = mdp.row(s, a).iter().map(|(_, p)| p.clone()).sum();
                assert_eq!(total, int(1));
            }
        }
        assert_eq!(mdp.prob(0, 3, 1), ratio(3, 4));
        assert_eq!(mdp.prob(0, 3, 0), ratio(1, 4));
        assert_eq!(mdp.prob(0, 1, 0), int(1));
        assert_eq!(labeling.label(mdp.symbol(3, 0)), "{goal}");
        assert_eq!(labeling.label(mdp.symbol(1, 2)), "{lava}");
        assert_eq!(labeling.label(mdp.symbol(4, 1)), "{}");
    }

    #[test]
    fn single_cell_grid() {
        let spec = GridSpec {
            width: 1,
            height: 1,
            lava: vec![],
            goals: vec![],
            slip: Rational::zero(),
            start: (0, 0),
        };
        let (mdp, _) = build_gridworld(&spec).unwrap();
        for a in 0..4 {
            assert_eq!(mdp.row(0, a), [(0, int(1))]);
        }
        let mut bad = spec.clone();
        bad.lava.push((1, 0));
        assert!(build_gridworld(&bad).is_err());
    }

    #[test]
    fn mdp_file_round_trip() {
        let src = "mdp\nstates s0 s1\nactions flip stay\ninit s0\nrow s0 flip : s0=1/2 s1=1/2\nrow s0 stay : s0=1\nrow s1 flip : s1=1\nrow s1 stay : s1=1\nlabel s1 {one}\n";
        let env = Environment::parse(src).unwrap();
        assert_eq!(env.mdp.prob(0, 0, 1), ratio(1, 2));
        assert_eq!(env.labeling.label(env.mdp.symbol(1, 1)), "{one}");
        assert_eq!(env.labeling.label(env.mdp.symbol(0, 1)), "{}");
        let dumped = env.mdp.to_string();
        assert!(dumped.contains("row s0 flip : s0=1/2 s1=1/2"));
        let again = Environment::parse(&dumped).unwrap();
        assert_eq!(again.mdp, env.mdp);
        let bad = "mdp\nstates s0\nactions a\ninit s0\nrow s0 a : s0=1/2\n";
        assert!(matches!(Environment::parse(bad), Err(Error::Validation { .. })));
        let missing = "mdp\nstates s0\nactions a b\ninit s0\nrow s0 a : s0=1\n";
        assert!(Environment::parse(missing).is_err());
    }

    #[test]
    fn grid_file() {
        let env = Environment::parse("grid 4 2\nlava 1 0\nlava 2 0\ngoal 3 0\n").unwrap();
        assert_eq!(env.grid, Some(GridSpec::figure()));
        assert!(matches!(
            Environment::parse("grid 4 2\ngoal 3 x\n"),
            Err(Error::Parse { line: 2, column: 8, .. })
        ));
    }

    #[test]
    fn constant_objective_estimate() {
        let mdp = coin();
        let zero = ConstantObjective::new(mdp.alphabet().clone(), Rational::zero());
        let v = policy_value_estimate(&mdp, &Policy::uniform(1), &zero, 4, 10, 3, 1).unwrap();
        assert_eq!(v, Rational::zero());
    }
}
