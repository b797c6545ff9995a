use rand::seq::SliceRandom;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

use super::standardize::Standardizer;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scene::DebrisClass;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Kernel as configured; an RBF width of `None` is resolved from the
/// training data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelChoice {
    Linear,
    Rbf { gamma: Option<f64> },
}

impl Default for KernelChoice {
    fn default() -> Self {
        KernelChoice::Rbf { gamma: None }
    }
}

impl KernelChoice {
    /// `γ = 1 / (n_features · var(X))` over all standardized entries.
    pub fn resolve(&self, x: &[Vec<f64>]) -> Kernel {
        match *self {
            KernelChoice::Linear => Kernel::Linear,
            KernelChoice::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: g },
            KernelChoice::Rbf { gamma: None } => {
                let d = x.first().map_or(1, |r| r.len()).max(1);
                let all: Vec<f64> = x.iter().flatten().copied().collect();
                let var = if all.is_empty() {
                    1.0
                } else {
                    let m = all.iter().sum::<f64>() / all.len() as f64;
                    all.iter().map(|v| (v - m).powi(2)).sum::<f64>() / all.len() as f64
                };
                let var = if var > 0.0 { var } else { 1.0 };
                Kernel::Rbf { gamma: 1.0 / (d as f64 * var) }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub kernel: KernelChoice,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { kernel: KernelChoice::default(), c: 1.0, tol: 1e-3, max_iter: 100_000, seed: 0 }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidConfig(format!("SVM penalty C={} must be > 0", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("SVM tolerance {} must be > 0", self.tol)));
        }
        if let KernelChoice::Rbf { gamma: Some(g) } = self.kernel {
            if !(g > 0.0) {
                return Err(Error::InvalidConfig(format!("RBF gamma {g} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Largest violation of the margin conditions under the final bias.
    pub kkt_residual: f64,
    pub dual_objective: f64,
}

/// Soft-margin dual by SMO with maximal-violating-pair selection.
/// `y` holds ±1; ties in the pair search are broken by a seeded scan order.
pub fn smo_solve(x: &[Vec<f64>], y: &[f64], kernel: &Kernel, c: f64, tol: f64, max_iter: usize, seed: u64) -> Result<SmoSolution> {
    let n = x.len();
    if n != y.len() || n == 0 {
        return Err(Error::DimensionMismatch(format!("{} rows vs {} labels", n, y.len())));
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::Training("both classes are required".into()));
    }
    let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| kernel.eval(&x[i], &x[j])).collect()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt < 0.0 && a < c) || (yt > 0.0 && a > 0.0);

    let mut iterations = 0;
    loop {
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for &t in &order {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            let bias = if i == usize::MAX || j == usize::MAX { 0.0 } else { (gmax + gmin) / 2.0 };
            let kkt_residual = kkt_residual(&grad, &alpha, y, c, bias);
            let dual_objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>();
            return Ok(SmoSolution { alpha, bias, iterations, kkt_residual, dual_objective });
        }
        if iterations >= max_iter {
            return Err(Error::NonConvergence { iterations, gap: gmax - gmin, best_alpha: alpha });
        }
        iterations += 1;

        // two-variable subproblem along y_i d_i = −y_j d_j
        let quad = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(1e-12);
        let step = (gmax - gmin) / quad;
        let (ai, aj) = (alpha[i], alpha[j]);
        // feasible step bounds so both multipliers stay inside [0, C]
        let lim_i = if y[i] > 0.0 { c - ai } else { ai };
        let lim_j = if y[j] > 0.0 { aj } else { c - aj };
        let s = step.min(lim_i).min(lim_j);
        alpha[i] = (ai + y[i] * s).clamp(0.0, c);
        alpha[j] = (aj - y[j] * s).clamp(0.0, c);
        let di = alpha[i] - ai;
        let dj = alpha[j] - aj;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k[t][i] * di + y[j] * k[t][j] * dj);
        }
    }
}

/// `max_i` violation of the complementary-slackness conditions, with
/// `f(x_i) = Σ α_j y_j K_ij + b` so that `y_i f(x_i) − 1 = G_i + y_i b`.
fn kkt_residual(grad: &[f64], alpha: &[f64], y: &[f64], c: f64, bias: f64) -> f64 {
    let eps = 1e-12 * c;
    grad.iter()
        .zip(alpha)
        .zip(y)
        .map(|((g, a), yv)| {
            let r = g + yv * bias;
            if *a <= eps {
                (-r).max(0.0)
            } else if *a >= c - eps {
                r.max(0.0)
            } else {
                r.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// One trained two-class machine; positive decision values pick `pos`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kkt_residual: f64,
    pub dual_sum: f64,
    pub iterations: usize,
}

impl BinaryModel {
    pub fn train(x: &[Vec<f64>], y: &[f64], kernel: Kernel, params: &SvmParams, seed: u64) -> Result<Self> {
        let sol = smo_solve(x, y, &kernel, params.c, params.tol, params.max_iter, seed)?;
        let mut support_vectors = Vec::new();
        let mut dual_coef = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(x[i].clone());
                dual_coef.push(a * y[i]);
            }
        }
        let dual_sum = sol.alpha.iter().zip(y).map(|(a, b)| a * b).sum();
        Ok(BinaryModel {
            kernel,
            support_vectors,
            dual_coef,
            bias: sol.bias,
            kkt_residual: sol.kkt_residual,
            dual_sum,
            iterations: sol.iterations,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors.iter().zip(&self.dual_coef).map(|(sv, c)| c * self.kernel.eval(sv, x)).sum::<f64>()
            + self.bias
    }
}

pub trait Label: Copy + Eq + Debug + Serialize + DeserializeOwned {
    /// Fixed class order used for tie-breaking.
    fn rank(&self) -> u64;
}

impl Label for bool {
    fn rank(&self) -> u64 {
        u64::from(!*self)
    }
}

impl Label for DebrisClass {
    fn rank(&self) -> u64 {
        self.index()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMachine {
    pub pos: usize,
    pub neg: usize,
    pub model: BinaryModel,
}

/// One-vs-one ensemble over `classes` (sorted by rank).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "L: Label")]
pub struct MulticlassSvm<L: Label> {
    pub classes: Vec<L>,
    pub machines: Vec<PairMachine>,
}

impl<L: Label> MulticlassSvm<L> {
    pub fn train(x: &[Vec<f64>], labels: &[L], params: &SvmParams) -> Result<Self> {
        params.validate()?;
        let mut classes: Vec<L> = Vec::new();
        for l in labels {
            if !classes.contains(l) {
                classes.push(*l);
            }
        }
        classes.sort_by_key(|c| c.rank());
        if classes.len() < 2 {
            return Err(Error::Training(format!("need at least 2 classes, got {}", classes.len())));
        }
        let kernel = params.kernel.resolve(x);
        let mut machines = Vec::new();
        for p in 0..classes.len() {
            for q in p + 1..classes.len() {
                let (mut xs, mut ys) = (Vec::new(), Vec::new());
                for (row, l) in x.iter().zip(labels) {
                    if *l == classes[p] {
                        xs.push(row.clone());
                        ys.push(1.0);
                    } else if *l == classes[q] {
                        xs.push(row.clone());
                        ys.push(-1.0);
                    }
                }
                let seed = derive_seed(params.seed, &[p as u64, q as u64]);
                let model = BinaryModel::train(&xs, &ys, kernel, params, seed)?;
                machines.push(PairMachine { pos: p, neg: q, model });
            }
        }
        Ok(MulticlassSvm { classes, machines })
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.machines.iter().map(|m| m.model.decision(x)).collect()
    }

    /// Majority vote; a zero decision value counts for the positive class.
    pub fn predict(&self, x: &[f64]) -> (L, Vec<f64>) {
        let values = self.decision_values(x);
        let mut votes = vec![0usize; self.classes.len()];
        let mut score = vec![0.0; self.classes.len()];
        for (m, &d) in self.machines.iter().zip(&values) {
            votes[if d >= 0.0 { m.pos } else { m.neg }] += 1;
            score[m.pos] += d;
            score[m.neg] -= d;
        }
        let mut best = 0;
        for c in 1..self.classes.len() {
            if votes[c] > votes[best] || (votes[c] == votes[best] && score[c] > score[best]) {
                best = c;
            }
        }
        (self.classes[best], values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "L: Label", rename_all = "snake_case")]
pub enum DecisionModel<L: Label> {
    Trained(MulticlassSvm<L>),
    /// Degenerate training data: always predict this label.
    Constant(L),
}

/// Scaler plus decision model; inputs are raw features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "L: Label")]
pub struct SvmModel<L: Label> {
    pub scaler: Standardizer,
    pub model: DecisionModel<L>,
}

impl<L: Label> SvmModel<L> {
    pub fn predict(&self, raw: &[f64]) -> Result<(L, Vec<f64>)> {
        let x = self.scaler.transform(raw)?;
        Ok(match &self.model {
            DecisionModel::Trained(m) => m.predict(&x),
            DecisionModel::Constant(l) => (*l, Vec::new()),
        })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.model, DecisionModel::Constant(_))
    }
}

/// Fits the scaler on `rows` and trains the one-vs-one ensemble.
pub fn train_svm<L: Label>(rows: &[Vec<f64>], labels: &[L], params: &SvmParams) -> Result<SvmModel<L>> {
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!("{} rows vs {} labels", rows.len(), labels.len())));
    }
    let scaler = Standardizer::fit(rows)?;
    if scaler.n_outputs() == 0 {
        return Err(Error::Training("every feature column has zero variance".into()));
    }
    let x = scaler.transform_all(rows)?;
    let model = DecisionModel::Trained(MulticlassSvm::train(&x, labels, params)?);
    Ok(SvmModel { scaler, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn blobs(n: usize, sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = rng_from_seed(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let c = if pos { sep / 2.0 } else { -sep / 2.0 };
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            x.push(vec![c + a, b]);
            y.push(pos);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_are_learned() {
        let (x, y) = blobs(60, 10.0, 1);
        for kernel in [KernelChoice::Linear, KernelChoice::Rbf { gamma: None }] {
            let m = train_svm(&x, &y, &SvmParams { kernel, ..Default::default() }).unwrap();
            for (r, l) in x.iter().zip(&y) {
                assert_eq!(m.predict(r).unwrap().0, *l);
            }
            if let DecisionModel::Trained(t) = &m.model {
                let b = &t.machines[0].model;
                assert!(b.kkt_residual <= 1e-3);
                assert!(b.dual_sum.abs() < 1e-6);
                assert!(b.dual_coef.iter().all(|c| c.abs() <= 1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]];
        assert!(matches!(train_svm(&x, &[true, true, true], &SvmParams::default()), Err(Error::Training(_))));
    }

    #[test]
    fn zero_decision_goes_to_positive_class() {
        let m = MulticlassSvm {
            classes: vec![true, false],
            machines: vec![PairMachine {
                pos: 0,
                neg: 1,
                model: BinaryModel {
                    kernel: Kernel::Linear,
                    support_vectors: vec![],
                    dual_coef: vec![],
                    bias: 0.0,
                    kkt_residual: 0.0,
                    dual_sum: 0.0,
                    iterations: 0,
                },
            }],
        };
        assert!(m.predict(&[1.0]).0);
    }

    #[test]
    fn three_class_vote() {
        let mut rng = rng_from_seed(4);
        let centers = [(-6.0, 0.0), (6.0, 0.0), (0.0, 8.0)];
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            let (cx, cy) = centers[i % 3];
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            x.push(vec![cx + a, cy + b]);
            y.push(DebrisClass::ALL[i % 3]);
        }
        let m = train_svm(&x, &y, &SvmParams::default()).unwrap();
        if let DecisionModel::Trained(t) = &m.model {
            assert_eq!(t.machines.len(), 3);
            assert_eq!(t.classes, DebrisClass::ALL.to_vec());
        }
        let errors = x.iter().zip(&y).filter(|(r, l)| m.predict(r).unwrap().0 != **l).count();
        assert_eq!(errors, 0);
    }
}
