//! Dense joint distributions over named finite variables.

use serde::Serialize;
use thiserror::Error;

/// Largest number of joint assignments a table may hold.
pub const MAX_ENTRIES: usize = 10_000_000;
/// Events with probability at or below this are treated as impossible.
pub const ZERO_PROB: f64 = 1e-15;
const NEG_CLAMP: f64 = -1e-12;
const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("conditioning on an event of probability {0:e}")]
    ZeroProbabilityEvent(f64),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("distributions are over different assignment spaces")]
    SpaceMismatch,
    #[error("table with {0} entries exceeds the limit of {MAX_ENTRIES}")]
    TooLarge(usize),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variable {
    pub name: String,
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Self { name: name.into(), card }
    }
}

fn table_size(vars: &[Variable]) -> Result<usize, ProbError> {
    let mut size: usize = 1;
    for v in vars {
        size = size.checked_mul(v.card).ok_or(ProbError::TooLarge(usize::MAX))?;
        if size > MAX_ENTRIES {
            return Err(ProbError::TooLarge(size));
        }
    }
    Ok(size)
}

/// Row-major strides, last variable fastest.
fn strides(vars: &[Variable]) -> Vec<usize> {
    let mut s = vec![1; vars.len()];
    for k in (0..vars.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * vars[k + 1].card;
    }
    s
}

/// Visit every assignment in row-major order.
pub fn for_each_assignment(cards: &[usize], mut f: impl FnMut(usize, &[usize])) {
    if cards.iter().any(|&c| c == 0) {
        return;
    }
    let total: usize = cards.iter().product();
    let mut a = vec![0usize; cards.len()];
    for idx in 0..total {
        f(idx, &a);
        for k in (0..cards.len()).rev() {
            a[k] += 1;
            if a[k] < cards[k] {
                break;
            }
            a[k] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution {
    vars: Vec<Variable>,
    weights: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl FiniteDistribution {
    /// Validate and store a table whose weights sum to one (±1e-9). Entries in
    /// `[-1e-12, 0)` are clamped.
    pub fn new(vars: Vec<Variable>, weights: Vec<f64>) -> Result<Self, ProbError> {
        Self::build(vars, weights, true)
    }

    fn build(vars: Vec<Variable>, mut weights: Vec<f64>, check_sum: bool) -> Result<Self, ProbError> {
        let size = table_size(&vars)?;
        if weights.len() != size {
            return Err(ProbError::InvalidWeights(format!("expected {size} weights, got {}", weights.len())));
        }
        let mut names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProbError::InvalidWeights("duplicate variable names".into()));
        }
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < NEG_CLAMP {
                return Err(ProbError::InvalidWeights(format!("weight {w} is negative or not finite")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= ZERO_PROB {
            return Err(ProbError::ZeroProbabilityEvent(total));
        }
        if check_sum && (total - 1.0).abs() > SUM_TOL {
            return Err(ProbError::InvalidWeights(format!("weights sum to {total}")));
        }
        // Leave nearly normalized input bit-exact.
        if (total - 1.0).abs() > 1e-12 {
            for w in weights.iter_mut() {
                *w /= total;
            }
        }
        let strides = strides(&vars);
        Ok(Self { vars, weights, strides })
    }

    /// Normalize arbitrary nonnegative weights.
    pub fn from_unnormalized(vars: Vec<Variable>, weights: Vec<f64>) -> Result<Self, ProbError> {
        Self::build(vars, weights, false)
    }

    pub fn uniform(vars: Vec<Variable>) -> Result<Self, ProbError> {
        let size = table_size(&vars)?;
        Self::from_unnormalized(vars, vec![1.0; size])
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.card).collect()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, name: &str) -> Result<usize, ProbError> {
        self.vars.iter().position(|v| v.name == name).ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    pub fn index(&self, assignment: &[usize]) -> usize {
        assignment.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut a = vec![0; self.vars.len()];
        for k in (0..self.vars.len()).rev() {
            a[k] = index % self.vars[k].card;
            index /= self.vars[k].card;
        }
        a
    }

    pub fn weight(&self, assignment: &[usize]) -> f64 {
        self.weights[self.index(assignment)]
    }

    pub fn for_each(&self, mut f: impl FnMut(&[usize], f64)) {
        for_each_assignment(&self.cards(), |i, a| f(a, self.weights[i]));
    }

    pub fn prob(&self, event: &Event) -> Result<f64, ProbError> {
        self.check_event(event)?;
        Ok(self.weights.iter().zip(&event.mask).filter(|(_, &m)| m).map(|(w, _)| w).sum())
    }

    fn check_event(&self, event: &Event) -> Result<(), ProbError> {
        if event.vars != self.vars {
            return Err(ProbError::SpaceMismatch);
        }
        Ok(())
    }

    /// `P(· | E)` on the same variables.
    pub fn condition(&self, event: &Event) -> Result<Self, ProbError> {
        let p = self.prob(event)?;
        if p <= ZERO_PROB {
            return Err(ProbError::ZeroProbabilityEvent(p));
        }
        let weights = self.weights.iter().zip(&event.mask).map(|(w, &m)| if m { w / p } else { 0.0 }).collect();
        Ok(Self { vars: self.vars.clone(), weights, strides: self.strides.clone() })
    }

    /// Marginal on the named variables, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<Self, ProbError> {
        let pos: Vec<usize> = names.iter().map(|n| self.position(n)).collect::<Result<_, _>>()?;
        let vars: Vec<Variable> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let st = strides(&vars);
        let mut weights = vec![0.0; table_size(&vars)?];
        for_each_assignment(&self.cards(), |i, a| {
            let w = self.weights[i];
            if w != 0.0 {
                let j: usize = pos.iter().zip(&st).map(|(&p, s)| a[p] * s).sum();
                weights[j] += w;
            }
        });
        Ok(Self { vars, weights, strides: st })
    }

    /// Total variation distance `½ Σ |P − Q|`.
    pub fn tv_distance(&self, other: &Self) -> Result<f64, ProbError> {
        if self.vars != other.vars {
            return Err(ProbError::SpaceMismatch);
        }
        Ok(0.5 * self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Reorder variables to match `names` (must be a permutation of the current names).
    pub fn reorder(&self, names: &[&str]) -> Result<Self, ProbError> {
        if names.len() != self.vars.len() {
            return Err(ProbError::SpaceMismatch);
        }
        self.marginal(names)
    }

    /// `P_{X}(x) · P_{Y|X}(y|x)` where `P_{Y|X}` is read off `joint` (a table containing
    /// all of `self`'s variables plus the new ones). The result lists `self`'s variables
    /// followed by the remaining variables of `joint` in their original order.
    pub fn product_extend(&self, joint: &Self) -> Result<Self, ProbError> {
        let x_names = self.names();
        let y_names: Vec<&str> = joint.names().into_iter().filter(|n| !x_names.contains(n)).collect();
        let mut order = x_names.clone();
        order.extend(y_names.iter().copied());
        let j = joint.marginal(&order)?;
        for (a, b) in self.vars.iter().zip(j.vars.iter()) {
            if a != b {
                return Err(ProbError::SpaceMismatch);
            }
        }
        let x_size = self.len();
        let y_size = j.len() / x_size.max(1);
        let mut weights = vec![0.0; j.len()];
        for x in 0..x_size {
            let px = self.weights[x];
            if px == 0.0 {
                continue;
            }
            let block = &j.weights[x * y_size..(x + 1) * y_size];
            let mass: f64 = block.iter().sum();
            if mass <= ZERO_PROB {
                return Err(ProbError::ZeroProbabilityEvent(mass));
            }
            for (y, w) in block.iter().enumerate() {
                weights[x * y_size + y] = px * w / mass;
            }
        }
        Self::from_unnormalized(j.vars, weights)
    }
}

/// A set of joint assignments over a fixed list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    vars: Vec<Variable>,
    mask: Vec<bool>,
}

impl Event {
    pub fn from_fn(dist: &FiniteDistribution, f: impl FnMut(&[usize]) -> bool) -> Self {
        Self::over(dist.variables().to_vec(), f)
    }

    pub fn over(vars: Vec<Variable>, mut f: impl FnMut(&[usize]) -> bool) -> Self {
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let mut mask = vec![false; cards.iter().product()];
        for_each_assignment(&cards, |i, a| mask[i] = f(a));
        Self { vars, mask }
    }

    /// Event that fixes the named variables to the given values.
    pub fn fixing(dist: &FiniteDistribution, fixed: &[(&str, usize)]) -> Result<Self, ProbError> {
        let pos: Vec<(usize, usize)> =
            fixed.iter().map(|(n, v)| Ok((dist.position(n)?, *v))).collect::<Result<_, ProbError>>()?;
        Ok(Self::from_fn(dist, |a| pos.iter().all(|&(p, v)| a[p] == v)))
    }

    pub fn all(dist: &FiniteDistribution) -> Self {
        Self { vars: dist.variables().to_vec(), mask: vec![true; dist.len()] }
    }

    pub fn and(&self, other: &Self) -> Result<Self, ProbError> {
        if self.vars != other.vars {
            return Err(ProbError::SpaceMismatch);
        }
        Ok(Self { vars: self.vars.clone(), mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect() })
    }

    pub fn complement(&self) -> Self {
        Self { vars: self.vars.clone(), mask: self.mask.iter().map(|m| !m).collect() }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> FiniteDistribution {
        FiniteDistribution::new(vec![Variable::new("X", 2), Variable::new("Y", 3)], vec![0.1, 0.2, 0.1, 0.3, 0.0, 0.3])
            .unwrap()
    }

    #[test]
    fn condition_on_marginal_value() {
        let d = xy();
        let e = Event::fixing(&d, &[("X", 1)]).unwrap();
        let c = d.condition(&e).unwrap();
        let y = c.marginal(&["Y"]).unwrap();
        assert!((y.weights()[0] - 0.5).abs() < 1e-15);
        assert!((y.weights()[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_event_rejected() {
        let d = xy();
        let e = Event::fixing(&d, &[("X", 1), ("Y", 1)]).unwrap();
        assert!(matches!(d.condition(&e), Err(ProbError::ZeroProbabilityEvent(_))));
    }

    #[test]
    fn marginal_orders_and_rejects_unknown() {
        let d = xy();
        let m = d.marginal(&["Y", "X"]).unwrap();
        assert_eq!(m.names(), vec!["Y", "X"]);
        assert!((m.weight(&[1, 0]) - 0.2).abs() < 1e-15);
        assert!(matches!(d.marginal(&["Z"]), Err(ProbError::UnknownVariable(_))));
    }

    #[test]
    fn tv_examples() {
        let v = vec![Variable::new("X", 2)];
        let p = FiniteDistribution::new(v.clone(), vec![1.0, 0.0]).unwrap();
        let q = FiniteDistribution::new(v.clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(p.tv_distance(&q).unwrap(), 1.0);
        assert_eq!(p.tv_distance(&p).unwrap(), 0.0);
        let other = FiniteDistribution::uniform(vec![Variable::new("Y", 2)]).unwrap();
        assert!(p.tv_distance(&other).is_err());
    }

    #[test]
    fn product_extend_replaces_marginal() {
        let d = xy();
        let px = FiniteDistribution::new(vec![Variable::new("X", 2)], vec![0.5, 0.5]).unwrap();
        let e = px.product_extend(&d).unwrap();
        assert!((e.weight(&[0, 1]) - 0.5 * 0.5).abs() < 1e-15);
        assert!((e.weight(&[1, 2]) - 0.5 * 0.5).abs() < 1e-15);
        let bad = FiniteDistribution::new(vec![Variable::new("X", 2)], vec![0.5, 0.5]).unwrap();
        let skewed =
            FiniteDistribution::new(vec![Variable::new("X", 2), Variable::new("Y", 1)], vec![1.0, 0.0]).unwrap();
        assert!(matches!(bad.product_extend(&skewed), Err(ProbError::ZeroProbabilityEvent(_))));
    }

    #[test]
    fn rejects_bad_tables() {
        let v = vec![Variable::new("X", 2)];
        assert!(FiniteDistribution::new(v.clone(), vec![0.5, 0.4]).is_err());
        assert!(FiniteDistribution::new(v.clone(), vec![1.5, -0.5]).is_err());
        assert!(FiniteDistribution::new(v, vec![1.0, -1e-13]).is_ok());
        assert!(matches!(
            FiniteDistribution::uniform(vec![Variable::new("X", 10_000), Variable::new("Y", 10_000)]),
            Err(ProbError::TooLarge(_))
        ));
    }
}
