//! Discrete stochastic process models and the classical oracles used to
//! validate every circuit-based result: exact path enumeration, exact sum
//! distributions and Monte Carlo sampling.
//!
//! Realization indices are 0-based. Path index vectors store level 1 first,
//! and the flattened path number uses level 1 as the least-significant
//! base-k digit, which for k = 2 coincides with the index-register layout
//! (qubit `l - 1` holds `j_l`).

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::stats::normal_quantile;

/// Default upper bound on the number of enumerated paths.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

const PROB_TOL: f64 = 1e-12;

/// Dependence structure of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[serde(alias = "Independent")]
    Independent,
    #[serde(alias = "FirstOrderMarkov", alias = "markov")]
    FirstOrderMarkov,
    #[serde(alias = "CorrelatedWalk", alias = "crw")]
    CorrelatedWalk,
}

/// Increment values of one level and their probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpec {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl LevelSpec {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("a level needs at least one realization"));
        }
        if values.len() != probs.len() {
            return Err(domain(format!(
                "level has {} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite increment value {v}")));
        }
        check_distribution(&probs, "level probabilities")?;
        Ok(Self { values, probs })
    }

    /// Two equally likely increments.
    pub fn fair(lo: f64, hi: f64) -> Self {
        Self {
            values: vec![lo, hi],
            probs: vec![0.5, 0.5],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    fn padded(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.values.resize(k, 0.0);
        out.probs.resize(k, 0.0);
        out
    }
}

fn check_distribution(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(domain(format!("{what} must be finite and non-negative")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(domain(format!("{what} sum to {total}, expected 1")));
    }
    Ok(())
}

/// A discrete stochastic process `S_n = x0 + X_1 + ... + X_n`.
///
/// Every kind is stored in a common first-order chain form: the
/// distribution of `j_1` plus one row-stochastic matrix per later level.
/// For independent models all rows of a level's matrix are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct DspModel {
    kind: ModelKind,
    x0: f64,
    k: usize,
    values: Vec<Vec<f64>>,
    initial: Vec<f64>,
    transitions: Vec<Vec<Vec<f64>>>,
    persistence: Option<(Vec<f64>, Vec<f64>)>,
}

/// One realization path of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRealization {
    pub index: Vec<usize>,
    pub prob: f64,
    pub sum: f64,
}

impl DspModel {
    /// Independent increments. Levels with fewer realizations than the
    /// widest level are padded with zero-probability entries.
    pub fn independent(x0: f64, levels: Vec<LevelSpec>) -> Result<Self> {
        check_x0(x0)?;
        if levels.is_empty() {
            return Err(domain("a model needs at least one level"));
        }
        let k = levels.iter().map(LevelSpec::k).max().unwrap_or(1);
        let levels: Vec<LevelSpec> = levels.iter().map(|l| l.padded(k)).collect();
        let transitions = levels[1..]
            .iter()
            .map(|l| vec![l.probs.clone(); k])
            .collect();
        Ok(Self {
            kind: ModelKind::Independent,
            x0,
            k,
            initial: levels[0].probs.clone(),
            values: levels.into_iter().map(|l| l.values).collect(),
            transitions,
            persistence: None,
        })
    }

    /// First-order Markov chain over realization indices. `transitions[i]`
    /// gives `P[j_{i+2} = b | j_{i+1} = a]` at row `a`, column `b`.
    pub fn markov(
        x0: f64,
        values: Vec<Vec<f64>>,
        initial: Vec<f64>,
        transitions: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        check_x0(x0)?;
        let n = values.len();
        if n == 0 {
            return Err(domain("a model needs at least one level"));
        }
        let k = initial.len();
        if k == 0 || values.iter().any(|v| v.len() != k) {
            return Err(domain(format!(
                "every level of a Markov model needs exactly k = {k} values"
            )));
        }
        if let Some(v) = values.iter().flatten().find(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite increment value {v}")));
        }
        check_distribution(&initial, "initial distribution")?;
        if transitions.len() != n - 1 {
            return Err(domain(format!(
                "{n} levels need {} transition matrices, got {}",
                n - 1,
                transitions.len()
            )));
        }
        for (i, t) in transitions.iter().enumerate() {
            if t.len() != k || t.iter().any(|row| row.len() != k) {
                return Err(domain(format!("transition matrix {i} is not {k}x{k}")));
            }
            for row in t {
                check_distribution(row, &format!("transition matrix {i} row"))?;
            }
        }
        Ok(Self {
            kind: ModelKind::FirstOrderMarkov,
            x0,
            k,
            values,
            initial,
            transitions,
            persistence: None,
        })
    }

    /// Correlated random walk with two step values (index order) and
    /// persistence parameters per level.
    ///
    /// Index-register semantics: `p[l] = P[j_l = 0 | j_{l-1} = 0]` and
    /// `q[l] = P[j_l = 0 | j_{l-1} = 1]`, matching the controlled
    /// `Ry(2 acos sqrt(p))` / `Ry(2 acos sqrt(q))` preparation. The first
    /// level follows an unbiased virtual predecessor, so
    /// `P[j_1 = 0] = (p[0] + q[0]) / 2`.
    pub fn correlated_walk(
        x0: f64,
        step_values: [f64; 2],
        p: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<Self> {
        check_x0(x0)?;
        if p.is_empty() {
            return Err(domain("a correlated walk needs at least one level"));
        }
        if p.len() != q.len() {
            return Err(domain(format!(
                "persistence lists differ in length ({} vs {})",
                p.len(),
                q.len()
            )));
        }
        if let Some(v) = p.iter().chain(&q).find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(domain(format!("persistence parameter {v} outside [0, 1]")));
        }
        if step_values.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite step value"));
        }
        let n = p.len();
        let first = 0.5 * (p[0] + q[0]);
        let transitions = (1..n)
            .map(|l| vec![vec![p[l], 1.0 - p[l]], vec![q[l], 1.0 - q[l]]])
            .collect();
        Ok(Self {
            kind: ModelKind::CorrelatedWalk,
            x0,
            k: 2,
            values: vec![step_values.to_vec(); n],
            initial: vec![first, 1.0 - first],
            transitions,
            persistence: Some((p, q)),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Number of levels (time steps).
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Realizations per level.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self, level: usize) -> &[f64] {
        &self.values[level]
    }

    /// Distribution of the first realization index.
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Transition matrix into `level` (0-based, `level >= 1`).
    pub fn transition(&self, level: usize) -> &[Vec<f64>] {
        &self.transitions[level - 1]
    }

    /// Per-level probabilities of an independent model.
    pub fn level_probs(&self, level: usize) -> Option<&[f64]> {
        match self.kind {
            ModelKind::Independent if level == 0 => Some(&self.initial),
            ModelKind::Independent => Some(&self.transitions[level - 1][0]),
            _ => None,
        }
    }

    pub fn persistence(&self) -> Option<(&[f64], &[f64])> {
        self.persistence
            .as_ref()
            .map(|(p, q)| (p.as_slice(), q.as_slice()))
    }

    fn conditional(&self, level: usize, prev: usize, j: usize) -> f64 {
        if level == 0 {
            self.initial[j]
        } else {
            self.transitions[level - 1][prev][j]
        }
    }

    /// Marginal distribution of each level's realization index.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n());
        let mut cur = self.initial.clone();
        out.push(cur.clone());
        for t in &self.transitions {
            let mut next = vec![0.0; self.k];
            for (a, pa) in cur.iter().enumerate() {
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += pa * t[a][b];
                }
            }
            cur = next;
            out.push(cur.clone());
        }
        out
    }

    /// `E[S_n]`, in O(n k^2).
    pub fn mean(&self) -> f64 {
        self.marginals()
            .iter()
            .zip(&self.values)
            .map(|(m, v)| m.iter().zip(v).map(|(p, x)| p * x).sum::<f64>())
            .sum::<f64>()
            + self.x0
    }

    /// Smallest and largest sums reachable with positive probability.
    pub fn attainable_range(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        let mut lo: Vec<f64> = (0..self.k)
            .map(|j| {
                if self.initial[j] > 0.0 {
                    self.values[0][j]
                } else {
                    inf
                }
            })
            .collect();
        let mut hi: Vec<f64> = (0..self.k)
            .map(|j| {
                if self.initial[j] > 0.0 {
                    self.values[0][j]
                } else {
                    -inf
                }
            })
            .collect();
        for level in 1..self.n() {
            let t = self.transition(level);
            let mut nlo = vec![inf; self.k];
            let mut nhi = vec![-inf; self.k];
            for a in 0..self.k {
                if lo[a] == inf {
                    continue;
                }
                for b in 0..self.k {
                    if t[a][b] > 0.0 {
                        nlo[b] = nlo[b].min(lo[a] + self.values[level][b]);
                        nhi[b] = nhi[b].max(hi[a] + self.values[level][b]);
                    }
                }
            }
            lo = nlo;
            hi = nhi;
        }
        let min = lo.iter().cloned().fold(inf, f64::min);
        let max = hi.iter().cloned().fold(-inf, f64::max);
        (self.x0 + min, self.x0 + max)
    }

    /// Number of index paths `k^n`, saturating at `u128::MAX`.
    pub fn path_count(&self) -> u128 {
        (self.k as u128)
            .checked_pow(self.n() as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn to_document(&self) -> ModelDocument {
        let mut doc = ModelDocument {
            kind: self.kind,
            x0: self.x0,
            levels: Vec::new(),
            transitions: Vec::new(),
            persistence_p: Vec::new(),
            persistence_q: Vec::new(),
            step_values: None,
        };
        match self.kind {
            ModelKind::Independent => {
                doc.levels = (0..self.n())
                    .map(|l| LevelDocument {
                        values: self.values[l].clone(),
                        probs: self.level_probs(l).map(<[f64]>::to_vec),
                    })
                    .collect();
            }
            ModelKind::FirstOrderMarkov => {
                doc.levels = (0..self.n())
                    .map(|l| LevelDocument {
                        values: self.values[l].clone(),
                        probs: (l == 0).then(|| self.initial.clone()),
                    })
                    .collect();
                doc.transitions = self.transitions.clone();
            }
            ModelKind::CorrelatedWalk => {
                let (p, q) = self.persistence.clone().unwrap_or_default();
                doc.persistence_p = p;
                doc.persistence_q = q;
                doc.step_values = Some([self.values[0][0], self.values[0][1]]);
            }
        }
        doc
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_x0(x0: f64) -> Result<()> {
    if x0.is_finite() {
        Ok(())
    } else {
        Err(domain("x0 must be finite"))
    }
}

/// One level as it appears in a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDocument {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

/// Serialized model.
///
/// * `independent`: `levels[*].values` and `levels[*].probs`.
/// * `first_order_markov`: `levels[*].values`, `levels[0].probs` as the
///   initial distribution and `transitions` with `n - 1` row-stochastic
///   matrices (later levels carry no `probs`).
/// * `correlated_walk`: `step_values` in index order plus
///   `persistence_p` / `persistence_q`, one entry per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub kind: ModelKind,
    #[serde(default)]
    pub x0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelDocument>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub persistence_p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub persistence_q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_values: Option<[f64; 2]>,
}

impl ModelDocument {
    pub fn into_model(self) -> Result<DspModel> {
        match self.kind {
            ModelKind::Independent => {
                let levels = self
                    .levels
                    .into_iter()
                    .enumerate()
                    .map(|(i, l)| {
                        let probs = l
                            .probs
                            .ok_or_else(|| domain(format!("level {i} is missing probs")))?;
                        LevelSpec::new(l.values, probs)
                    })
                    .collect::<Result<Vec<_>>>()?;
                DspModel::independent(self.x0, levels)
            }
            ModelKind::FirstOrderMarkov => {
                let mut initial = None;
                let mut values = Vec::with_capacity(self.levels.len());
                for (i, l) in self.levels.into_iter().enumerate() {
                    match (i, l.probs) {
                        (0, p) => initial = p,
                        (_, Some(_)) => {
                            return Err(domain(format!(
                                "level {i} of a Markov model must not carry probs"
                            )))
                        }
                        _ => {}
                    }
                    values.push(l.values);
                }
                let initial =
                    initial.ok_or_else(|| domain("level 0 must carry the initial distribution"))?;
                DspModel::markov(self.x0, values, initial, self.transitions)
            }
            ModelKind::CorrelatedWalk => {
                let steps = self
                    .step_values
                    .ok_or_else(|| domain("correlated walk needs step_values"))?;
                DspModel::correlated_walk(self.x0, steps, self.persistence_p, self.persistence_q)
            }
        }
    }
}

fn check_cap(model: &DspModel, cap: u64) -> Result<()> {
    let paths = model.path_count();
    if paths > cap as u128 {
        Err(Error::CapExceeded { paths, cap })
    } else {
        Ok(())
    }
}

/// Visits every path in flattened-index order (level 1 varies fastest).
pub fn for_each_path(
    model: &DspModel,
    cap: u64,
    mut visit: impl FnMut(&[usize], f64, f64),
) -> Result<()> {
    check_cap(model, cap)?;
    let n = model.n();
    let k = model.k();
    let mut idx = vec![0usize; n];
    let total = model.path_count() as u64;
    for _ in 0..total {
        let mut prob = 1.0;
        let mut sum = model.x0;
        for level in 0..n {
            let prev = if level == 0 { 0 } else { idx[level - 1] };
            prob *= model.conditional(level, prev, idx[level]);
            sum += model.values[level][idx[level]];
        }
        visit(&idx, prob, sum);
        for digit in idx.iter_mut() {
            *digit += 1;
            if *digit < k {
                break;
            }
            *digit = 0;
        }
    }
    Ok(())
}

/// All `k^n` paths with their probabilities and sums.
pub fn enumerate_paths(model: &DspModel) -> Result<Vec<PathRealization>> {
    enumerate_paths_capped(model, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_paths_capped(model: &DspModel, cap: u64) -> Result<Vec<PathRealization>> {
    check_cap(model, cap)?;
    let mut out = Vec::with_capacity(model.path_count() as usize);
    for_each_path(model, cap, |idx, prob, sum| {
        out.push(PathRealization {
            index: idx.to_vec(),
            prob,
            sum,
        })
    })?;
    Ok(out)
}

/// `E[f(S_n)]` by summing over every path.
pub fn expectation_brute_force(model: &DspModel, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for_each_path(model, DEFAULT_ENUMERATION_CAP, |_, prob, sum| {
        acc += prob * f(sum)
    })?;
    Ok(acc)
}

/// `φ(v) = E[exp(i v S_n)]` by summing over every path.
pub fn char_fn_brute_force(model: &DspModel, v: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_path(model, DEFAULT_ENUMERATION_CAP, |_, prob, sum| {
        acc += prob * Complex64::from_polar(1.0, v * sum)
    })?;
    Ok(acc)
}

/// Exact distribution of `S_n` as sorted `(sum, probability)` pairs.
///
/// Propagates a distribution over (current index, partial sum) level by
/// level and merges partial sums that agree within `1e-12` relative, so
/// models with many coincident sums (identical levels) stay tractable
/// far beyond the path-enumeration cap. The support size is still capped.
pub fn sum_distribution(model: &DspModel, cap: u64) -> Result<Vec<(f64, f64)>> {
    let k = model.k();
    // states[j] = partial sums ending in index j
    let mut states: Vec<Vec<(f64, f64)>> = (0..k)
        .map(|j| {
            if model.initial[j] > 0.0 {
                vec![(model.values[0][j], model.initial[j])]
            } else {
                Vec::new()
            }
        })
        .collect();
    for level in 1..model.n() {
        let t = model.transition(level);
        let mut next: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k];
        for (a, entries) in states.iter().enumerate() {
            for b in 0..k {
                let w = t[a][b];
                if w == 0.0 {
                    continue;
                }
                let x = model.values[level][b];
                next[b].extend(entries.iter().map(|&(s, p)| (s + x, p * w)));
            }
        }
        let mut support = 0u64;
        for list in next.iter_mut() {
            merge_sums(list);
            support += list.len() as u64;
        }
        if support > cap {
            return Err(Error::CapExceeded {
                paths: support as u128,
                cap,
            });
        }
        states = next;
    }
    let mut all: Vec<(f64, f64)> = states.into_iter().flatten().collect();
    merge_sums(&mut all);
    Ok(all.into_iter().map(|(s, p)| (s + model.x0, p)).collect())
}

fn merge_sums(list: &mut Vec<(f64, f64)>) {
    list.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(list.len());
    for &(s, p) in list.iter() {
        match out.last_mut() {
            Some(last) if (s - last.0).abs() <= 1e-12 * s.abs().max(last.0.abs()).max(1.0) => {
                last.1 += p
            }
            _ => out.push((s, p)),
        }
    }
    *list = out;
}

/// `E[f(S_n)]` from [`sum_distribution`].
pub fn expectation_by_distribution(
    model: &DspModel,
    f: impl Fn(f64) -> f64,
    cap: u64,
) -> Result<f64> {
    Ok(sum_distribution(model, cap)?
        .into_iter()
        .map(|(s, p)| p * f(s))
        .sum())
}

/// Result of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

fn sample_index(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = j;
            if u < acc {
                return j;
            }
        }
    }
    last
}

/// Samples `shots` paths and returns the sample mean of `f(S_n)` and its
/// standard error (sample standard deviation over `sqrt(shots)`).
pub fn monte_carlo_estimate(
    model: &DspModel,
    f: impl Fn(f64) -> f64,
    shots: u64,
    seed: u64,
) -> Result<McEstimate> {
    if shots < 2 {
        return Err(domain("Monte Carlo needs at least 2 shots"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..shots {
        let mut j = sample_index(&mut rng, &model.initial);
        let mut sum = model.x0 + model.values[0][j];
        for level in 1..model.n() {
            j = sample_index(&mut rng, &model.transition(level)[j]);
            sum += model.values[level][j];
        }
        let y = f(sum);
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (shots - 1) as f64;
    Ok(McEstimate {
        mean,
        stderr: (var / shots as f64).sqrt(),
    })
}

/// Number of ±1-valued measurements needed so that the estimated mean lies
/// within `eps` of the truth with confidence `1 - alpha`:
/// `ceil(z(1 - alpha/2)^2 / (4 eps^2))`.
pub fn sample_count_for_margin(alpha: f64, eps: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain(format!("eps = {eps} must be positive")));
    }
    let z = normal_quantile(1.0 - alpha / 2.0);
    Ok((z * z / (4.0 * eps * eps)).ceil() as u64)
}
