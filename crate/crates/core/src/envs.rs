//! Small deterministic environments for exercising the constraint families:
//! a 1D corridor and a 2D grid with hazards.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constraint::{ActionSignal, EnvState, Move, Transition};

pub const GOAL_REWARD: f64 = 1.0;
pub const STEP_PENALTY: f64 = -0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("episode is over; call reset")]
    EpisodeDone,
    #[error("action {action} out of range (environment has {actions} actions)")]
    InvalidAction { action: usize, actions: usize },
    #[error("invalid environment: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: usize,
    pub reward: f64,
    /// Episode over.
    pub done: bool,
    /// Episode over because the goal was reached (not truncated by the
    /// step cap).
    pub terminal: bool,
    pub transition: Transition,
}

pub trait Environment {
    /// Size of the state index space.
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn max_steps(&self) -> usize;
    /// Starts a new episode and returns the initial state index.
    fn reset(&mut self) -> usize;
    fn state(&self) -> usize;
    fn is_done(&self) -> bool;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
    /// The transition `action` would produce from the current state,
    /// without changing anything.
    fn predict(&self, action: usize) -> Result<Transition, EnvError>;
    /// The action that never moves the agent.
    fn noop(&self) -> usize;
    fn action_name(&self, action: usize) -> String;
}

/// Corridor of `length` cells. The agent starts at `start` (or a seeded
/// random non-goal cell each episode) and is rewarded for reaching the
/// rightmost cell.
#[derive(Debug, Clone)]
pub struct Corridor1D {
    length: usize,
    max_steps: usize,
    start: Start,
    rng: ChaCha8Rng,
    pos: usize,
    steps: usize,
    done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Fixed(usize),
    Random,
}

impl Corridor1D {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const NOOP: usize = 2;
    pub const INTERACT: usize = 3;

    pub fn new(length: usize, max_steps: usize) -> Result<Self, EnvError> {
        Self::with_start(length, max_steps, Start::Fixed(0), 0)
    }

    pub fn with_start(length: usize, max_steps: usize, start: Start, seed: u64) -> Result<Self, EnvError> {
        if length < 2 {
            return Err(EnvError::Config(format!("corridor length must be >= 2, got {length}")));
        }
        if max_steps == 0 {
            return Err(EnvError::Config("max_steps must be positive".into()));
        }
        if let Start::Fixed(p) = start {
            if p >= length - 1 {
                return Err(EnvError::Config(format!(
                    "start {p} must lie left of the goal cell {}",
                    length - 1
                )));
            }
        }
        let mut env = Self {
            length,
            max_steps,
            start,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pos: 0,
            steps: 0,
            done: false,
        };
        env.reset();
        Ok(env)
    }

    pub fn goal(&self) -> usize {
        self.length - 1
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Places the agent at `pos` mid-episode (used by tests and oracles).
    pub fn set_position(&mut self, pos: usize) {
        assert!(pos < self.length);
        self.pos = pos;
        self.done = pos == self.goal();
    }

    fn target(&self, action: usize) -> usize {
        match action {
            Self::LEFT => self.pos.saturating_sub(1),
            Self::RIGHT => (self.pos + 1).min(self.length - 1),
            _ => self.pos,
        }
    }

    fn env_state(&self, pos: usize) -> EnvState {
        EnvState {
            index: pos,
            ..EnvState::default()
        }
    }

    fn check(&self, action: usize) -> Result<(), EnvError> {
        if action >= 4 {
            return Err(EnvError::InvalidAction { action, actions: 4 });
        }
        Ok(())
    }
}

impl Environment for Corridor1D {
    fn num_states(&self) -> usize {
        self.length
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self) -> usize {
        self.pos = match self.start {
            Start::Fixed(p) => p,
            Start::Random => self.rng.gen_range(0..self.length - 1),
        };
        self.steps = 0;
        self.done = false;
        self.pos
    }

    fn state(&self) -> usize {
        self.pos
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let transition = self.predict(action)?;
        self.pos = self.target(action);
        self.steps += 1;
        let at_goal = self.pos == self.goal();
        self.done = at_goal || self.steps >= self.max_steps;
        Ok(StepResult {
            state: self.pos,
            reward: if at_goal { GOAL_REWARD } else { STEP_PENALTY },
            done: self.done,
            terminal: at_goal,
            transition,
        })
    }

    fn predict(&self, action: usize) -> Result<Transition, EnvError> {
        self.check(action)?;
        Ok(Transition {
            prev: self.env_state(self.pos),
            action: ActionSignal {
                index: action,
                value: match action {
                    Self::LEFT => -1.0,
                    Self::RIGHT => 1.0,
                    _ => 0.0,
                },
                direction: match action {
                    Self::LEFT => Some(Move::Left),
                    Self::RIGHT => Some(Move::Right),
                    _ => None,
                },
                fire: action == Self::INTERACT,
            },
            next: self.env_state(self.target(action)),
            label: None,
        })
    }

    fn noop(&self) -> usize {
        Self::NOOP
    }

    fn action_name(&self, action: usize) -> String {
        ["left", "right", "noop", "interact"]
            .get(action)
            .map_or_else(|| format!("#{action}"), |s| s.to_string())
    }
}

/// `width × height` grid with hazard cells. Actions are the eight moves in
/// [`Move::ALL`] order followed by a no-op; moves off the grid leave the
/// agent in place. Hazards are not blocking: stepping onto one sets the
/// contact flag.
#[derive(Debug, Clone)]
pub struct HazardGrid2D {
    width: usize,
    height: usize,
    num_hazards: usize,
    max_steps: usize,
    relayout: bool,
    rng: ChaCha8Rng,
    layout: Layout,
    pos: (usize, usize),
    steps: usize,
    done: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Layout {
    start: (usize, usize),
    goal: (usize, usize),
    hazards: Vec<(usize, usize)>,
    is_hazard: Vec<bool>,
}

/// Attempts before giving up on finding a solvable layout.
const LAYOUT_ATTEMPTS: usize = 10_000;

impl HazardGrid2D {
    pub const NOOP: usize = 8;

    /// Seeded layout with the start and goal in opposite corners. With
    /// `relayout`, hazards are re-drawn at every reset.
    pub fn new(
        width: usize,
        height: usize,
        hazards: usize,
        max_steps: usize,
        seed: u64,
        relayout: bool,
    ) -> Result<Self, EnvError> {
        if width < 2 || height < 2 {
            return Err(EnvError::Config(format!(
                "grid must be at least 2x2, got {width}x{height}"
            )));
        }
        if hazards + 2 > width * height {
            return Err(EnvError::Config(format!(
                "{hazards} hazards do not fit on a {width}x{height} grid"
            )));
        }
        if max_steps == 0 {
            return Err(EnvError::Config("max_steps must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = Self::generate(width, height, hazards, &mut rng)?;
        let mut env = Self {
            width,
            height,
            num_hazards: hazards,
            max_steps,
            relayout: false,
            rng,
            layout,
            pos: (0, 0),
            steps: 0,
            done: false,
        };
        env.reset();
        env.relayout = relayout;
        Ok(env)
    }

    /// Fixed layout, for tests and hand-built scenarios.
    pub fn from_layout(
        width: usize,
        height: usize,
        start: (usize, usize),
        goal: (usize, usize),
        hazards: &[(usize, usize)],
        max_steps: usize,
    ) -> Result<Self, EnvError> {
        let in_grid = |(x, y): (usize, usize)| x < width && y < height;
        if !in_grid(start) || !in_grid(goal) || !hazards.iter().all(|&h| in_grid(h)) {
            return Err(EnvError::Config("layout cell outside the grid".into()));
        }
        if hazards.contains(&start) || hazards.contains(&goal) || start == goal {
            return Err(EnvError::Config("start, goal and hazards must be distinct".into()));
        }
        let layout = Layout::new(width, height, start, goal, hazards.to_vec());
        if !layout.solvable(width, height) {
            return Err(EnvError::Config("no hazard-free path from start to goal".into()));
        }
        let mut env = Self {
            width,
            height,
            num_hazards: hazards.len(),
            max_steps,
            relayout: false,
            rng: ChaCha8Rng::seed_from_u64(0),
            layout,
            pos: start,
            steps: 0,
            done: false,
        };
        env.reset();
        Ok(env)
    }

    fn generate(
        width: usize,
        height: usize,
        hazards: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Layout, EnvError> {
        let start = (0, 0);
        let goal = (width - 1, height - 1);
        let free: Vec<(usize, usize)> = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .filter(|&c| c != start && c != goal)
            .collect();
        for _ in 0..LAYOUT_ATTEMPTS {
            let chosen: Vec<(usize, usize)> = free.choose_multiple(rng, hazards).copied().collect();
            let layout = Layout::new(width, height, start, goal, chosen);
            if layout.solvable(width, height) {
                return Ok(layout);
            }
        }
        Err(EnvError::Config(format!(
            "no solvable layout found in {LAYOUT_ATTEMPTS} attempts"
        )))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    pub fn goal(&self) -> (usize, usize) {
        self.layout.goal
    }

    pub fn hazards(&self) -> &[(usize, usize)] {
        &self.layout.hazards
    }

    pub fn is_hazard(&self, (x, y): (usize, usize)) -> bool {
        self.layout.is_hazard[y * self.width + x]
    }

    /// Whether a hazard-free 8-connected path from start to goal exists.
    pub fn solvable(&self) -> bool {
        self.layout.solvable(self.width, self.height)
    }

    /// 1 − (Chebyshev distance to the nearest hazard) / (grid diameter),
    /// clamped to [0, 1]. 0 everywhere when there are no hazards.
    pub fn hazard_distance(&self, (x, y): (usize, usize)) -> f64 {
        let diameter = (self.width.max(self.height) - 1) as f64;
        let nearest = self
            .layout
            .hazards
            .iter()
            .map(|&(hx, hy)| x.abs_diff(hx).max(y.abs_diff(hy)))
            .min();
        match nearest {
            None => 0.0,
            Some(d) => (1.0 - d as f64 / diameter).clamp(0.0, 1.0),
        }
    }

    fn index(&self, (x, y): (usize, usize)) -> usize {
        y * self.width + x
    }

    fn target(&self, action: usize) -> (usize, usize) {
        let Some(m) = Move::ALL.get(action) else {
            return self.pos;
        };
        let (dx, dy) = m.offset();
        let x = self.pos.0 as i64 + dx;
        let y = self.pos.1 as i64 + dy;
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            self.pos
        } else {
            (x as usize, y as usize)
        }
    }

    fn env_state(&self, cell: (usize, usize)) -> EnvState {
        EnvState {
            index: self.index(cell),
            hazard_level: self.hazard_distance(cell),
            contact: self.is_hazard(cell),
        }
    }
}

impl Layout {
    fn new(
        width: usize,
        height: usize,
        start: (usize, usize),
        goal: (usize, usize),
        hazards: Vec<(usize, usize)>,
    ) -> Self {
        let mut is_hazard = vec![false; width * height];
        for &(x, y) in &hazards {
            is_hazard[y * width + x] = true;
        }
        Layout {
            start,
            goal,
            hazards,
            is_hazard,
        }
    }

    fn solvable(&self, width: usize, height: usize) -> bool {
        let mut seen = vec![false; width * height];
        let mut queue = VecDeque::from([self.start]);
        seen[self.start.1 * width + self.start.0] = true;
        while let Some((x, y)) = queue.pop_front() {
            if (x, y) == self.goal {
                return true;
            }
            for m in Move::ALL {
                let (dx, dy) = m.offset();
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                    continue;
                }
                let i = ny as usize * width + nx as usize;
                if !seen[i] && !self.is_hazard[i] {
                    seen[i] = true;
                    queue.push_back((nx as usize, ny as usize));
                }
            }
        }
        false
    }
}

impl Environment for HazardGrid2D {
    fn num_states(&self) -> usize {
        self.width * self.height
    }

    fn num_actions(&self) -> usize {
        9
    }

    fn max_steps(&self) -> usize {
        self.max_steps
    }

    fn reset(&mut self) -> usize {
        if self.relayout {
            // Validated to be feasible at construction.
            self.layout = Self::generate(self.width, self.height, self.num_hazards, &mut self.rng)
                .expect("layout parameters were feasible at construction");
        }
        self.pos = self.layout.start;
        self.steps = 0;
        self.done = false;
        self.index(self.pos)
    }

    fn state(&self) -> usize {
        self.index(self.pos)
    }

    fn is_done(&self) -> bool {
        self.done
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        let transition = self.predict(action)?;
        self.pos = self.target(action);
        self.steps += 1;
        let at_goal = self.pos == self.layout.goal;
        self.done = at_goal || self.steps >= self.max_steps;
        Ok(StepResult {
            state: self.index(self.pos),
            reward: if at_goal { GOAL_REWARD } else { STEP_PENALTY },
            done: self.done,
            terminal: at_goal,
            transition,
        })
    }

    fn predict(&self, action: usize) -> Result<Transition, EnvError> {
        if action >= 9 {
            return Err(EnvError::InvalidAction { action, actions: 9 });
        }
        Ok(Transition {
            prev: self.env_state(self.pos),
            action: ActionSignal {
                index: action,
                value: 0.0,
                direction: Move::ALL.get(action).copied(),
                fire: false,
            },
            next: self.env_state(self.target(action)),
            label: None,
        })
    }

    fn noop(&self) -> usize {
        Self::NOOP
    }

    fn action_name(&self, action: usize) -> String {
        match Move::ALL.get(action) {
            Some(m) => m.symbol().to_string(),
            None if action == Self::NOOP => "noop".into(),
            None => format!("#{action}"),
        }
    }
}

/// Environment description as written in experiment files, e.g.
/// `corridor1d(length=15, max_steps=200)` or
/// `hazardgrid(w=9, h=9, hazards=6, max_steps=300, seed=3)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Corridor1D {
        length: usize,
        max_steps: usize,
        start: Start,
    },
    HazardGrid {
        width: usize,
        height: usize,
        hazards: usize,
        max_steps: usize,
        /// Layout seed; the run seed is used when absent.
        seed: Option<u64>,
        relayout: bool,
    },
}

impl EnvSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (name, mut params) = crate::kv::parse_call(text)?;
        let spec = match name.as_str() {
            "corridor1d" => {
                let length = take_usize(&mut params, "length", 15)?;
                let max_steps = take_usize(&mut params, "max_steps", 200)?;
                let start = match params.remove("start").as_deref() {
                    None => Start::Fixed(0),
                    Some("random") => Start::Random,
                    Some(s) => Start::Fixed(
                        s.parse()
                            .map_err(|_| format!("start must be a cell index or `random`, got {s:?}"))?,
                    ),
                };
                EnvSpec::Corridor1D {
                    length,
                    max_steps,
                    start,
                }
            }
            "hazardgrid" => EnvSpec::HazardGrid {
                width: take_usize(&mut params, "w", 9)?,
                height: take_usize(&mut params, "h", 9)?,
                hazards: take_usize(&mut params, "hazards", 6)?,
                max_steps: take_usize(&mut params, "max_steps", 300)?,
                seed: params
                    .remove("seed")
                    .map(|s| s.parse().map_err(|_| format!("seed must be an integer, got {s:?}")))
                    .transpose()?,
                relayout: match params.remove("relayout").as_deref() {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(s) => return Err(format!("relayout must be true or false, got {s:?}")),
                },
            },
            other => return Err(format!("unknown environment {other:?}")),
        };
        if let Some(extra) = params.keys().next() {
            return Err(format!("unknown parameter {extra:?} for environment {name}"));
        }
        Ok(spec)
    }

    /// Builds an instance; `seed` drives start positions and, unless the
    /// spec pins one, the hazard layout.
    pub fn build(&self, seed: u64) -> Result<Box<dyn Environment + Send>, EnvError> {
        Ok(match *self {
            EnvSpec::Corridor1D {
                length,
                max_steps,
                start,
            } => Box::new(Corridor1D::with_start(length, max_steps, start, seed)?),
            EnvSpec::HazardGrid {
                width,
                height,
                hazards,
                max_steps,
                seed: layout_seed,
                relayout,
            } => Box::new(HazardGrid2D::new(
                width,
                height,
                hazards,
                max_steps,
                layout_seed.unwrap_or(seed),
                relayout,
            )?),
        })
    }

    pub fn max_steps(&self) -> usize {
        match self {
            EnvSpec::Corridor1D { max_steps, .. } | EnvSpec::HazardGrid { max_steps, .. } => *max_steps,
        }
    }
}

fn take_usize(params: &mut BTreeMap<String, String>, key: &str, default: usize) -> Result<usize, String> {
    params.remove(key).map_or(Ok(default), |s| {
        s.parse()
            .map_err(|_| format!("{key} must be a non-negative integer, got {s:?}"))
    })
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::Corridor1D {
                length,
                max_steps,
                start,
            } => {
                write!(f, "corridor1d(length={length}, max_steps={max_steps}")?;
                match start {
                    Start::Fixed(0) => {}
                    Start::Fixed(p) => write!(f, ", start={p}")?,
                    Start::Random => write!(f, ", start=random")?,
                }
                write!(f, ")")
            }
            EnvSpec::HazardGrid {
                width,
                height,
                hazards,
                max_steps,
                seed,
                relayout,
            } => {
                write!(
                    f,
                    "hazardgrid(w={width}, h={height}, hazards={hazards}, max_steps={max_steps}"
                )?;
                if let Some(s) = seed {
                    write!(f, ", seed={s}")?;
                }
                if *relayout {
                    write!(f, ", relayout=true")?;
                }
                write!(f, ")")
            }
        }
    }
}
