//! Two-player one-round games, their repetitions and the plain-text game format.
//!
//! Coordinates of a repeated game are 0-based in the library API. Question and
//! answer tuples are encoded as mixed-radix integers with coordinate 0 most
//! significant, matching the row-major order of joint tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{Event, FiniteDistribution, ProbError, Variable};

/// Cap on the number of question tuples `(|X||Y|)^n` enumerated for a repetition.
pub const MAX_QUESTION_TUPLES: usize = 1_000_000;
const MU_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game: {0}")]
    Invalid(String),
    #[error("repetition too large: {0} tuples (limit {1})")]
    TooLarge(u128, u128),
    #[error("coordinate {0} out of range for n = {1}")]
    BadCoordinate(usize, usize),
    #[error("game file: {0}")]
    Parse(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unvalidated game data, e.g. freshly parsed from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub x_size: usize,
    pub y_size: usize,
    pub a_size: usize,
    pub b_size: usize,
    /// Row-major over `(x, y)`.
    pub mu: Vec<f64>,
    /// Flat over `(x, y, a, b)`.
    pub predicate: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    x_size: usize,
    y_size: usize,
    a_size: usize,
    b_size: usize,
    mu: FiniteDistribution,
    predicate: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub answer_bits: f64,
    pub support: Vec<(usize, usize)>,
    pub warnings: Vec<String>,
}

pub fn validate_game(spec: &GameSpec) -> Result<(Game, ValidationReport), GameError> {
    let GameSpec { x_size, y_size, a_size, b_size, .. } = *spec;
    if x_size == 0 || y_size == 0 || a_size == 0 || b_size == 0 {
        return Err(GameError::Invalid("alphabet sizes must be positive".into()));
    }
    if spec.mu.len() != x_size * y_size {
        return Err(GameError::Invalid(format!("mu has {} entries, expected {}", spec.mu.len(), x_size * y_size)));
    }
    if spec.predicate.len() != x_size * y_size * a_size * b_size {
        return Err(GameError::Invalid(format!(
            "predicate has {} entries, expected {}",
            spec.predicate.len(),
            x_size * y_size * a_size * b_size
        )));
    }
    if spec.mu.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(GameError::Invalid("mu has a negative or non-finite entry".into()));
    }
    let total: f64 = spec.mu.iter().sum();
    if (total - 1.0).abs() > MU_SUM_TOL {
        return Err(GameError::Invalid(format!("mu sums to {total}")));
    }
    let mu = FiniteDistribution::new(vec![Variable::new("X", x_size), Variable::new("Y", y_size)], spec.mu.clone())?;
    let mut warnings = Vec::new();
    for x in 0..x_size {
        if (0..y_size).all(|y| spec.mu[x * y_size + y] == 0.0) {
            warnings.push(format!("question x={x} has zero probability"));
        }
    }
    for y in 0..y_size {
        if (0..x_size).all(|x| spec.mu[x * y_size + y] == 0.0) {
            warnings.push(format!("question y={y} has zero probability"));
        }
    }
    let support =
        (0..x_size).flat_map(|x| (0..y_size).map(move |y| (x, y))).filter(|&(x, y)| spec.mu[x * y_size + y] > 0.0).collect();
    let game = Game { x_size, y_size, a_size, b_size, mu, predicate: spec.predicate.clone() };
    let report = ValidationReport { answer_bits: game.answer_bits(), support, warnings };
    Ok((game, report))
}

impl Game {
    pub fn new(spec: GameSpec) -> Result<Self, GameError> {
        validate_game(&spec).map(|(g, _)| g)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }
    pub fn y_size(&self) -> usize {
        self.y_size
    }
    pub fn a_size(&self) -> usize {
        self.a_size
    }
    pub fn b_size(&self) -> usize {
        self.b_size
    }

    /// `log₂(|A|·|B|)`.
    pub fn answer_bits(&self) -> f64 {
        ((self.a_size * self.b_size) as f64).log2()
    }

    pub fn mu(&self, x: usize, y: usize) -> f64 {
        self.mu.weights()[x * self.y_size + y]
    }

    pub fn mu_table(&self) -> &FiniteDistribution {
        &self.mu
    }

    pub fn mu_x(&self, x: usize) -> f64 {
        (0..self.y_size).map(|y| self.mu(x, y)).sum()
    }

    pub fn mu_y(&self, y: usize) -> f64 {
        (0..self.x_size).map(|x| self.mu(x, y)).sum()
    }

    pub fn wins(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.predicate[((x * self.y_size + y) * self.a_size + a) * self.b_size + b]
    }

    pub fn spec(&self) -> GameSpec {
        GameSpec {
            x_size: self.x_size,
            y_size: self.y_size,
            a_size: self.a_size,
            b_size: self.b_size,
            mu: self.mu.weights().to_vec(),
            predicate: self.predicate.clone(),
        }
    }

    pub fn alice_tuples(&self, n: usize) -> Radix {
        Radix::new(self.x_size, n)
    }
    pub fn bob_tuples(&self, n: usize) -> Radix {
        Radix::new(self.y_size, n)
    }
    pub fn alice_answers(&self, n: usize) -> Radix {
        Radix::new(self.a_size, n)
    }
    pub fn bob_answers(&self, n: usize) -> Radix {
        Radix::new(self.b_size, n)
    }

    /// Variables of the joint question/answer table of `G^n`, ordered
    /// `X_1..X_n, Y_1..Y_n, A_1..A_n, B_1..B_n` (names are 1-based).
    pub fn joint_variables(&self, n: usize) -> Vec<Variable> {
        let mut v = Vec::with_capacity(4 * n);
        for (p, card) in [("X", self.x_size), ("Y", self.y_size), ("A", self.a_size), ("B", self.b_size)] {
            for i in 0..n {
                v.push(Variable::new(format!("{p}{}", i + 1), card));
            }
        }
        v
    }
}

/// Mixed-radix codec for length-`n` tuples over an alphabet of size `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radix {
    pub base: usize,
    pub n: usize,
}

impl Radix {
    pub fn new(base: usize, n: usize) -> Self {
        Self { base, n }
    }

    pub fn count(&self) -> usize {
        self.base.pow(self.n as u32)
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.base + d)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for k in (0..self.n).rev() {
            d[k] = idx % self.base;
            idx /= self.base;
        }
        d
    }

    pub fn digit(&self, idx: usize, k: usize) -> usize {
        (idx / self.base.pow((self.n - 1 - k) as u32)) % self.base
    }
}

/// One question tuple of `G^n` with its probability under `μ^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionTuple {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub weight: f64,
}

pub fn repetition_size(g: &Game, n: usize) -> u128 {
    ((g.x_size * g.y_size) as u128).saturating_pow(n as u32)
}

/// All question tuples of `G^n` with nonzero weight, in row-major order.
pub fn enumerate_tuples(g: &Game, n: usize) -> Result<Vec<QuestionTuple>, GameError> {
    let size = repetition_size(g, n);
    if size > MAX_QUESTION_TUPLES as u128 {
        return Err(GameError::TooLarge(size, MAX_QUESTION_TUPLES as u128));
    }
    let xs = g.alice_tuples(n);
    let ys = g.bob_tuples(n);
    let mut out = Vec::new();
    for xi in 0..xs.count() {
        let x = xs.decode(xi);
        for yi in 0..ys.count() {
            let y = ys.decode(yi);
            let w: f64 = x.iter().zip(&y).map(|(&a, &b)| g.mu(a, b)).product();
            if w > 0.0 {
                out.push(QuestionTuple { x: x.clone(), y, weight: w });
            }
        }
    }
    Ok(out)
}

/// Event `W_S` that every coordinate in `coords` is won, over [`Game::joint_variables`].
pub fn win_set(g: &Game, n: usize, coords: &[usize]) -> Result<Event, GameError> {
    if let Some(&bad) = coords.iter().find(|&&i| i >= n) {
        return Err(GameError::BadCoordinate(bad, n));
    }
    let vars = g.joint_variables(n);
    let size = vars.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.card)).unwrap_or(usize::MAX);
    if size > crate::prob::MAX_ENTRIES {
        return Err(GameError::Prob(ProbError::TooLarge(size)));
    }
    Ok(Event::over(vars, |a| coords.iter().all(|&i| g.wins(a[i], a[n + i], a[2 * n + i], a[3 * n + i]))))
}

pub mod fixtures {
    use super::*;

    /// CHSH: uniform questions, win iff `a ⊕ b = x ∧ y`.
    pub fn chsh() -> Game {
        let mut predicate = Vec::with_capacity(16);
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        predicate.push((a ^ b) == (x & y));
                    }
                }
            }
        }
        Game::new(GameSpec { x_size: 2, y_size: 2, a_size: 2, b_size: 2, mu: vec![0.25; 4], predicate })
            .expect("fixture is valid")
    }

    /// Binary game that is always won.
    pub fn trivial() -> Game {
        Game::new(GameSpec { x_size: 2, y_size: 2, a_size: 2, b_size: 2, mu: vec![0.25; 4], predicate: vec![true; 16] })
            .expect("fixture is valid")
    }

    /// Three questions per player with `μ(x,y) ∝ 1 + x + 2y`; win iff
    /// `a ⊕ b` equals the parity of `x + y`, except that `(2,2)` demands `a ⊕ b = 1`.
    pub fn asym3() -> Game {
        let mut mu = Vec::with_capacity(9);
        let mut predicate = Vec::with_capacity(36);
        for x in 0..3usize {
            for y in 0..3usize {
                mu.push((1 + x + 2 * y) as f64 / 36.0);
                let target = if x == 2 && y == 2 { 1 } else { (x + y) % 2 };
                for a in 0..2usize {
                    for b in 0..2usize {
                        predicate.push((a ^ b) == target);
                    }
                }
            }
        }
        Game::new(GameSpec { x_size: 3, y_size: 3, a_size: 2, b_size: 2, mu, predicate }).expect("fixture is valid")
    }

    pub fn by_name(name: &str) -> Option<Game> {
        match name {
            "chsh" => Some(chsh()),
            "trivial" => Some(trivial()),
            "asym3" => Some(asym3()),
            _ => None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct GameFile {
    x_size: usize,
    y_size: usize,
    a_size: usize,
    b_size: usize,
    mu: Vec<toml::Value>,
    predicate: Vec<i64>,
}

fn parse_weight(v: &toml::Value) -> Result<f64, GameError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => parse_number(s),
        other => Err(GameError::Parse(format!("mu entry {other} is not a number"))),
    }
}

/// Parse a decimal or a rational `p/q`.
pub fn parse_number(s: &str) -> Result<f64, GameError> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| GameError::Parse(format!("bad numerator in `{s}`")))?;
        let q: f64 = q.trim().parse().map_err(|_| GameError::Parse(format!("bad denominator in `{s}`")))?;
        if q == 0.0 {
            return Err(GameError::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(p / q);
    }
    s.parse().map_err(|_| GameError::Parse(format!("bad number `{s}`")))
}

pub fn parse_game(text: &str) -> Result<GameSpec, GameError> {
    let f: GameFile = toml::from_str(text).map_err(|e| GameError::Parse(e.to_string()))?;
    let mu = f.mu.iter().map(parse_weight).collect::<Result<Vec<_>, _>>()?;
    let predicate = f
        .predicate
        .iter()
        .map(|&v| match v {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(GameError::Parse(format!("predicate entry {other} is not 0/1"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GameSpec { x_size: f.x_size, y_size: f.y_size, a_size: f.a_size, b_size: f.b_size, mu, predicate })
}

/// Serialize a game. Weights are written in shortest round-trip form.
pub fn write_game(g: &Game) -> String {
    let spec = g.spec();
    let mu: Vec<String> = spec.mu.iter().map(|w| format!("{w:?}")).collect();
    let pred: Vec<&str> = spec.predicate.iter().map(|&b| if b { "1" } else { "0" }).collect();
    let mut out = format!(
        "x_size = {}\ny_size = {}\na_size = {}\nb_size = {}\n",
        spec.x_size, spec.y_size, spec.a_size, spec.b_size
    );
    out.push_str(&format!("mu = [{}]\n", mu.join(", ")));
    out.push_str(&format!("predicate = [{}]\n", pred.join(", ")));
    out
}

pub fn load_game(path: &std::path::Path) -> Result<Game, GameError> {
    let text = std::fs::read_to_string(path)?;
    Game::new(parse_game(&text)?)
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn chsh_validates() {
        let (_, report) = validate_game(&chsh().spec()).unwrap();
        assert_eq!(report.answer_bits, 2.0);
        assert_eq!(report.support.len(), 4);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn bad_mu_rejected() {
        let mut spec = chsh().spec();
        spec.mu = vec![0.225; 4];
        assert!(matches!(validate_game(&spec), Err(GameError::Invalid(_))));
    }

    #[test]
    fn empty_row_warns() {
        let mut spec = asym3().spec();
        spec.mu = vec![0.5, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (_, report) = validate_game(&spec).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("x=1")));
    }

    #[test]
    fn tuple_counts() {
        let t = enumerate_tuples(&chsh(), 2).unwrap();
        assert_eq!(t.len(), 16);
        assert!(t.iter().all(|q| q.weight == 1.0 / 16.0));
        assert!(enumerate_tuples(&chsh(), 11).is_err());
    }

    #[test]
    fn radix_round_trip() {
        let r = Radix::new(3, 4);
        for i in 0..r.count() {
            let d = r.decode(i);
            assert_eq!(r.encode(&d), i);
            for (k, &dk) in d.iter().enumerate() {
                assert_eq!(r.digit(i, k), dk);
            }
        }
    }

    #[test]
    fn rational_parse() {
        let text = "x_size = 1\ny_size = 1\na_size = 1\nb_size = 2\nmu = [\"1/1\"]\npredicate = [1, 0]\n";
        let g = Game::new(parse_game(text).unwrap()).unwrap();
        assert!(g.wins(0, 0, 0, 0));
        assert!(!g.wins(0, 0, 0, 1));
    }

    #[test]
    fn file_round_trip() {
        for g in [chsh(), trivial(), asym3()] {
            let text = write_game(&g);
            let back = Game::new(parse_game(&text).unwrap()).unwrap();
            assert_eq!(back.spec(), g.spec());
            assert_eq!(write_game(&back), text);
        }
    }
}
