//! Pool-based refinement over part compositions with a surrogate scorer.
//!
//! A composition picks one option per part category. The shipped scorer
//! runs a fixed-shape MLP on the one-hot encoding and turns its two outputs
//! into basal and induced expression for [`composite_reward`].

use crate::rng::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Options per category: promoter, activation domain, IDP domain, zinc
/// finger, terminator, spacer 1, orientation, binding-site number, core
/// promoter, spacer 2.
pub const CATEGORY_WIDTHS: [usize; 10] = [4, 4, 4, 4, 4, 3, 2, 3, 3, 3];
pub const CATEGORY_NAMES: [&str; 10] = [
    "promoter",
    "activation_domain",
    "idp_domain",
    "zinc_finger",
    "terminator",
    "spacer1",
    "orientation",
    "binding_sites",
    "core_promoter",
    "spacer2",
];
pub const INPUT_WIDTH: usize = 34;
/// Layer widths of the surrogate, input first.
pub const MLP_SHAPE: [usize; 6] = [INPUT_WIDTH, 160, 80, 40, 20, 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RefineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid design space: {0}")]
    Space(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("basal expression must be positive, got {0}")]
    Basal(f64),
    #[error("weights file line {line}: {message}")]
    Weights { line: usize, message: String },
}

/// Per-category option counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpace {
    widths: Vec<usize>,
}

impl DesignSpace {
    pub fn new(widths: Vec<usize>) -> Result<Self, RefineError> {
        if widths.is_empty() || widths.iter().any(|w| *w == 0 || *w > 256) {
            return Err(RefineError::Space(format!("widths {widths:?}")));
        }
        Ok(DesignSpace { widths })
    }

    /// The 10-category, 34-bit space the surrogate reads.
    pub fn classic() -> Self {
        DesignSpace { widths: CATEGORY_WIDTHS.to_vec() }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn encoded_width(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn size(&self) -> u128 {
        self.widths.iter().map(|w| *w as u128).product()
    }

    pub fn random(&self, rng: &mut SplitMix64) -> CompositionVector {
        CompositionVector { choices: self.widths.iter().map(|w| rng.below(*w) as u8).collect() }
    }

    /// Every composition in lexicographic order.
    pub fn enumerate(&self) -> impl Iterator<Item = CompositionVector> + '_ {
        let mut next = Some(vec![0u8; self.widths.len()]);
        std::iter::from_fn(move || {
            let cur = next.take()?;
            let mut succ = cur.clone();
            for i in (0..succ.len()).rev() {
                succ[i] += 1;
                if (succ[i] as usize) < self.widths[i] {
                    next = Some(succ);
                    break;
                }
                succ[i] = 0;
            }
            Some(CompositionVector { choices: cur })
        })
    }

    pub fn contains(&self, c: &CompositionVector) -> bool {
        c.choices.len() == self.widths.len() && c.choices.iter().zip(&self.widths).all(|(x, w)| (*x as usize) < *w)
    }
}

/// One option index per category; encodes to one hot bit per category block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CompositionVector {
    choices: Vec<u8>,
}

impl CompositionVector {
    pub fn new(choices: Vec<u8>, space: &DesignSpace) -> Result<Self, RefineError> {
        let c = CompositionVector { choices };
        if space.contains(&c) {
            Ok(c)
        } else {
            Err(RefineError::Shape(format!("choices {:?} outside space {:?}", c.choices, space.widths)))
        }
    }

    pub fn choices(&self) -> &[u8] {
        &self.choices
    }

    pub fn one_hot(&self, space: &DesignSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.encoded_width()];
        let mut offset = 0;
        for (c, w) in self.choices.iter().zip(&space.widths) {
            out[offset + *c as usize] = 1.0;
            offset += w;
        }
        out
    }

    pub fn from_one_hot(bits: &[f64], space: &DesignSpace) -> Result<Self, RefineError> {
        if bits.len() != space.encoded_width() {
            return Err(RefineError::Shape(format!("{} bits for width {}", bits.len(), space.encoded_width())));
        }
        let mut choices = Vec::with_capacity(space.widths.len());
        let mut offset = 0;
        for (k, w) in space.widths.iter().enumerate() {
            let block = &bits[offset..offset + w];
            let hot: Vec<usize> = block.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(i, _)| i).collect();
            if hot.len() != 1 || block[hot[0]] != 1.0 {
                return Err(RefineError::Shape(format!("category {k} block {block:?} is not one-hot")));
            }
            choices.push(hot[0] as u8);
            offset += w;
        }
        Ok(CompositionVector { choices })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major, `outputs` rows of `inputs` columns.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

/// Dense layers 34-160-80-40-20-2, tanh between layers, linear output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateWeights {
    layers: Vec<DenseLayer>,
}

impl SurrogateWeights {
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self, RefineError> {
        if layers.len() != MLP_SHAPE.len() - 1 {
            return Err(RefineError::Shape(format!("{} layers, expected {}", layers.len(), MLP_SHAPE.len() - 1)));
        }
        for (i, l) in layers.iter().enumerate() {
            let (n_in, n_out) = (MLP_SHAPE[i], MLP_SHAPE[i + 1]);
            if l.inputs != n_in || l.outputs != n_out || l.weights.len() != n_in * n_out || l.bias.len() != n_out {
                return Err(RefineError::Shape(format!(
                    "layer {i}: {}x{} with {} weights and {} biases, expected {n_in}x{n_out}",
                    l.inputs,
                    l.outputs,
                    l.weights.len(),
                    l.bias.len()
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(RefineError::Shape(format!("layer {i} has non-finite values")));
            }
        }
        Ok(SurrogateWeights { layers })
    }

    pub fn zeros() -> Self {
        let layers = MLP_SHAPE
            .windows(2)
            .map(|w| DenseLayer { inputs: w[0], outputs: w[1], weights: vec![0.0; w[0] * w[1]], bias: vec![0.0; w[1]] })
            .collect();
        SurrogateWeights { layers }
    }

    /// Uniform Glorot initialization from `seed`; biases drawn at a tenth of
    /// that scale so the output varies across compositions.
    pub fn random(seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let layers = MLP_SHAPE
            .windows(2)
            .map(|w| {
                let a = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let weights = (0..w[0] * w[1]).map(|_| rng.range_f64(-a, a)).collect();
                let bias = (0..w[1]).map(|_| rng.range_f64(-a, a) * 0.1).collect();
                DenseLayer { inputs: w[0], outputs: w[1], weights, bias }
            })
            .collect();
        SurrogateWeights { layers }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn forward(&self, x: &[f64]) -> Result<[f64; 2], RefineError> {
        if x.len() != INPUT_WIDTH {
            return Err(RefineError::Shape(format!("input width {} != {INPUT_WIDTH}", x.len())));
        }
        let mut h = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.apply(&h);
            if i < last {
                h.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
        Ok([h[0], h[1]])
    }

    /// Text format: a header naming the categories and layer widths, then
    /// each layer's weights (one output row per line) followed by its biases.
    pub fn to_text(&self) -> String {
        let mut out = String::from("gencircuit-mlp v1\n");
        let _ = writeln!(out, "categories {}", join(CATEGORY_WIDTHS.iter()));
        let _ = writeln!(out, "layers {}", join(MLP_SHAPE.iter()));
        for l in &self.layers {
            for row in l.weights.chunks(l.inputs) {
                out.push_str(&join(row.iter()));
                out.push('\n');
            }
            out.push_str(&join(l.bias.iter()));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RefineError> {
        let err = |line: usize, message: String| RefineError::Weights { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "gencircuit-mlp v1")) => {}
            Some((n, _)) => return Err(err(n, "expected header `gencircuit-mlp v1`".into())),
            None => return Err(err(0, "empty weights file".into())),
        }
        let mut header = |key: &str| -> Result<(usize, Vec<usize>), RefineError> {
            let (n, l) = lines.next().ok_or_else(|| err(0, format!("missing `{key}` line")))?;
            let rest = l.strip_prefix(key).ok_or_else(|| err(n, format!("expected `{key}`")))?;
            rest.split_whitespace()
                .map(|t| t.parse().map_err(|_| err(n, format!("bad integer `{t}`"))))
                .collect::<Result<Vec<usize>, _>>()
                .map(|v| (n, v))
        };
        let (n, cats) = header("categories")?;
        if cats != CATEGORY_WIDTHS {
            return Err(err(n, format!("categories {cats:?}, expected {CATEGORY_WIDTHS:?}")));
        }
        let (n, shape) = header("layers")?;
        if shape != MLP_SHAPE {
            return Err(err(n, format!("layers {shape:?}, expected {MLP_SHAPE:?}")));
        }
        let mut layers = Vec::new();
        for w in MLP_SHAPE.windows(2) {
            let mut row_values = |count: usize| -> Result<Vec<f64>, RefineError> {
                let (n, l) = lines.next().ok_or_else(|| err(0, "unexpected end of file".into()))?;
                let v: Vec<f64> = l
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err(n, format!("bad number `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if v.len() != count {
                    return Err(err(n, format!("{} values, expected {count}", v.len())));
                }
                Ok(v)
            };
            let mut weights = Vec::with_capacity(w[0] * w[1]);
            for _ in 0..w[1] {
                weights.extend(row_values(w[0])?);
            }
            let bias = row_values(w[1])?;
            layers.push(DenseLayer { inputs: w[0], outputs: w[1], weights, bias });
        }
        if let Some((n, _)) = lines.next() {
            return Err(err(n, "trailing data".into()));
        }
        SurrogateWeights::from_layers(layers)
    }
}

fn join<T: ToString>(it: impl Iterator<Item = T>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Raw surrogate outputs for a composition of the classic space.
pub fn mlp_forward(weights: &SurrogateWeights, x: &CompositionVector) -> Result<(f64, f64), RefineError> {
    let space = DesignSpace::classic();
    if !space.contains(x) {
        return Err(RefineError::Shape(format!("composition {:?} is not in the classic space", x.choices)));
    }
    let [a, b] = weights.forward(&x.one_hot(&space))?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardThresholds {
    pub fc_target: f64,
    /// Sigmoid scale of the fold-change term.
    pub s: f64,
    pub b_scale: f64,
}

impl RewardThresholds {
    pub fn new(fc_target: f64) -> Self {
        RewardThresholds { fc_target, s: fc_target / 5.0, b_scale: 0.1 }
    }
}

impl Default for RewardThresholds {
    fn default() -> Self {
        RewardThresholds::new(20.0)
    }
}

/// `0.3 r_topo + 0.5 r_fc + 0.2 r_basal` for `(basal, induced)` in RPU.
pub fn composite_reward(pred: (f64, f64), r_topo: f64, th: &RewardThresholds) -> Result<f64, RefineError> {
    let (basal, induced) = pred;
    if !(basal > 0.0) || !basal.is_finite() {
        return Err(RefineError::Basal(basal));
    }
    let fc = induced / basal;
    let r_fc = 1.0 / (1.0 + (-(fc - th.fc_target) / th.s).exp());
    let r_basal = 1.0 / (1.0 + basal / th.b_scale);
    Ok(0.3 * r_topo + 0.5 * r_fc + 0.2 * r_basal)
}

/// Seeded surrogate plus composite reward; outputs map to
/// basal = 0.05·e^o0 and induced = e^o1.
#[derive(Debug, Clone)]
pub struct SyntheticScorer {
    pub weights: SurrogateWeights,
    pub thresholds: RewardThresholds,
}

impl SyntheticScorer {
    pub fn new(weights: SurrogateWeights, thresholds: RewardThresholds) -> Self {
        SyntheticScorer { weights, thresholds }
    }

    pub fn expression(&self, x: &CompositionVector) -> Result<(f64, f64), RefineError> {
        let (o0, o1) = mlp_forward(&self.weights, x)?;
        Ok((0.05 * o0.exp(), o1.exp()))
    }

    pub fn score(&self, x: &CompositionVector) -> f64 {
        self.expression(x).and_then(|p| composite_reward(p, 1.0, &self.thresholds)).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub pool_size: usize,
    pub elite_frac: f64,
    pub mutation_rate: f64,
    pub fresh_frac: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig { pool_size: 2000, elite_frac: 0.15, mutation_rate: 0.3, fresh_frac: 0.10, iterations: 8, seed: 0 }
    }
}

impl RefineConfig {
    pub fn elite_count(&self) -> usize {
        (self.elite_frac * self.pool_size as f64 - 1e-9).ceil() as usize
    }

    pub fn fresh_count(&self) -> usize {
        (self.fresh_frac * self.pool_size as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), RefineError> {
        let in_open = |x: f64| x > 0.0 && x < 1.0;
        if !in_open(self.elite_frac) {
            return Err(RefineError::Config(format!("elite_frac {} not in (0,1)", self.elite_frac)));
        }
        // Zero mutation and zero fresh are allowed: they freeze the pool.
        if !(0.0..1.0).contains(&self.mutation_rate) || !(0.0..1.0).contains(&self.fresh_frac) {
            return Err(RefineError::Config(format!(
                "mutation_rate {} and fresh_frac {} must be in [0,1)",
                self.mutation_rate, self.fresh_frac
            )));
        }
        if (self.elite_frac * self.pool_size as f64) < 1.0 - 1e-9 {
            return Err(RefineError::Config(format!("elite_frac * pool_size < 1 for pool {}", self.pool_size)));
        }
        if self.elite_count() + self.fresh_count() > self.pool_size {
            return Err(RefineError::Config("elites plus fresh members exceed the pool".into()));
        }
        if self.iterations == 0 {
            return Err(RefineError::Config("iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iter: usize,
    pub mean_score: f64,
    pub elite_mean: f64,
    /// Best score seen in this or any earlier iteration.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOutcome {
    pub history: Vec<IterationStats>,
    pub best: CompositionVector,
    pub best_score: f64,
}

/// Scores the pool, keeps the top distinct compositions as elites and refills
/// with mutants of the elites plus fresh random members. NaN scores rank last.
pub fn refine_pool<F>(config: &RefineConfig, scorer: F, space: &DesignSpace) -> Result<RefineOutcome, RefineError>
where
    F: Fn(&CompositionVector) -> f64 + Sync,
{
    config.validate()?;
    let n = config.pool_size;
    let (n_elite, n_fresh) = (config.elite_count(), config.fresh_count());
    let mut rng = SplitMix64::new(config.seed);
    let mut pool: Vec<CompositionVector> = (0..n).map(|_| space.random(&mut rng)).collect();
    let mut history = Vec::with_capacity(config.iterations);
    let mut best: Option<(f64, CompositionVector)> = None;

    for iter in 1..=config.iterations {
        let scores: Vec<f64> = pool.par_iter().map(|c| rank_value(scorer(c))).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| pool[a].cmp(&pool[b])));

        let mut elites: Vec<(f64, CompositionVector)> = Vec::with_capacity(n_elite);
        for &i in &order {
            if elites.len() == n_elite {
                break;
            }
            if !elites.iter().any(|(_, c)| *c == pool[i]) {
                elites.push((scores[i], pool[i].clone()));
            }
        }
        let top = &elites[0];
        if best.as_ref().is_none_or(|(s, _)| top.0 > *s) {
            best = Some(top.clone());
        }
        history.push(IterationStats {
            iter,
            mean_score: scores.iter().sum::<f64>() / n as f64,
            elite_mean: elites.iter().map(|(s, _)| s).sum::<f64>() / elites.len() as f64,
            best: best.as_ref().unwrap().0,
        });
        if iter == config.iterations {
            break;
        }

        let mut next: Vec<CompositionVector> = elites.iter().map(|(_, c)| c.clone()).collect();
        let n_mutants = n - next.len() - n_fresh;
        for k in 0..n_mutants {
            let parent = &elites[k % elites.len()].1;
            next.push(mutate(parent, space, config.mutation_rate, &mut rng));
        }
        next.extend((0..n_fresh).map(|_| space.random(&mut rng)));
        pool = next;
    }
    let (best_score, best) = best.unwrap();
    Ok(RefineOutcome { history, best, best_score })
}

fn rank_value(s: f64) -> f64 {
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// Each category moves to a different option with probability `rate`.
fn mutate(parent: &CompositionVector, space: &DesignSpace, rate: f64, rng: &mut SplitMix64) -> CompositionVector {
    let mut choices = parent.choices.clone();
    for (c, w) in choices.iter_mut().zip(&space.widths) {
        if *w > 1 && rng.chance(rate) {
            let alt = rng.below(w - 1) as u8;
            *c = if alt >= *c { alt + 1 } else { alt };
        }
    }
    CompositionVector { choices }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_space() -> DesignSpace {
        DesignSpace::new(vec![4, 4, 4]).unwrap()
    }

    fn toy_scorer(seed: u64) -> impl Fn(&CompositionVector) -> f64 + Sync {
        let mut rng = SplitMix64::new(seed);
        let table: Vec<Vec<f64>> = (0..3).map(|_| (0..4).map(|_| rng.next_f64()).collect()).collect();
        move |c: &CompositionVector| c.choices().iter().enumerate().map(|(k, x)| table[k][*x as usize]).sum()
    }

    #[test]
    fn widths_sum_to_input() {
        assert_eq!(CATEGORY_WIDTHS.iter().sum::<usize>(), INPUT_WIDTH);
        assert_eq!(DesignSpace::classic().encoded_width(), INPUT_WIDTH);
        assert_eq!(toy_space().enumerate().count(), 64);
    }

    #[test]
    fn one_hot_round_trip() {
        let space = DesignSpace::classic();
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let c = space.random(&mut rng);
            let bits = c.one_hot(&space);
            assert_eq!(bits.iter().sum::<f64>(), 10.0);
            assert_eq!(CompositionVector::from_one_hot(&bits, &space).unwrap(), c);
        }
        let mut two_hot = DesignSpace::classic().random(&mut rng).one_hot(&space);
        two_hot[0] = 1.0;
        two_hot[1] = 1.0;
        assert!(CompositionVector::from_one_hot(&two_hot, &space).is_err());
    }

    #[test]
    fn zero_weights_give_zero() {
        let c = DesignSpace::classic().random(&mut SplitMix64::new(1));
        assert_eq!(mlp_forward(&SurrogateWeights::zeros(), &c).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn single_path_matches_scalar_chain() {
        let mut w = SurrogateWeights::zeros();
        let c = CompositionVector::new(vec![2, 0, 0, 0, 0, 0, 0, 0, 0, 0], &DesignSpace::classic()).unwrap();
        // input bit 2 -> unit 0 of each hidden layer -> output 1
        let gains = [0.7, -1.3, 0.9, 2.0, 1.5];
        let biases = [0.1, 0.0, -0.2, 0.05, 0.3];
        for (i, l) in w.layers.iter_mut().enumerate() {
            let (row, col) = if i == 0 { (0, 2) } else if i == 4 { (1, 0) } else { (0, 0) };
            l.weights[row * l.inputs + col] = gains[i];
            l.bias[row] = biases[i];
        }
        let mut h: f64 = 1.0;
        for i in 0..4 {
            h = (gains[i] * h + biases[i]).tanh();
        }
        let expect = gains[4] * h + biases[4];
        let (o0, o1) = mlp_forward(&w, &c).unwrap();
        assert_eq!(o0, 0.0);
        assert!((o1 - expect).abs() < 1e-15);
    }

    #[test]
    fn forward_is_deterministic_and_finite() {
        let w = SurrogateWeights::random(11);
        let c = DesignSpace::classic().random(&mut SplitMix64::new(2));
        let a = mlp_forward(&w, &c).unwrap();
        assert_eq!(a, mlp_forward(&w, &c).unwrap());
        assert!(a.0.is_finite() && a.1.is_finite());
        assert_eq!(w, SurrogateWeights::random(11));
    }

    #[test]
    fn shape_checks() {
        let mut layers = SurrogateWeights::zeros().layers;
        layers[2].bias.pop();
        assert!(matches!(SurrogateWeights::from_layers(layers), Err(RefineError::Shape(_))));
        let toy = CompositionVector::new(vec![0, 0, 0], &toy_space()).unwrap();
        assert!(mlp_forward(&SurrogateWeights::zeros(), &toy).is_err());
        assert!(SurrogateWeights::zeros().forward(&[0.0; 33]).is_err());
    }

    #[test]
    fn weights_text_round_trip() {
        let w = SurrogateWeights::random(5);
        let text = w.to_text();
        assert!(text.starts_with("gencircuit-mlp v1\ncategories 4 4 4 4 4 3 2 3 3 3\nlayers 34 160 80 40 20 2\n"));
        assert_eq!(SurrogateWeights::parse(&text).unwrap(), w);
        let broken = text.replacen("layers 34 160", "layers 34 161", 1);
        assert!(matches!(SurrogateWeights::parse(&broken), Err(RefineError::Weights { line: 3, .. })));
        let mut lines: Vec<&str> = text.lines().collect();
        lines[5] = "1 2 x";
        assert!(matches!(SurrogateWeights::parse(&lines.join("\n")), Err(RefineError::Weights { line: 6, .. })));
        lines.truncate(100);
        assert!(SurrogateWeights::parse(&lines.join("\n")).is_err());
    }

    #[test]
    fn composite_examples() {
        let th = RewardThresholds::new(10.0);
        let r = composite_reward((1e-12, 10.0 * 1e-12), 1.0, &th).unwrap();
        assert!((r - 0.75).abs() < 1e-9);
        // r_fc and r_basal only vanish in the limit
        let r = composite_reward((1e9, 1.0), 0.0, &th).unwrap();
        let expect = 0.5 / (1.0 + (5.0f64 - 1e-9 / 2.0).exp()) + 0.2 / (1.0 + 1e10);
        assert!((r - expect).abs() < 1e-12);
        let far = RewardThresholds { fc_target: 1e3, s: 1.0, b_scale: 0.1 };
        assert!(composite_reward((1e9, 1.0), 0.0, &far).unwrap() < 1e-9);
        let r = composite_reward((1e-9, 1e3), 1.0, &th).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        assert!(matches!(composite_reward((0.0, 1.0), 1.0, &th), Err(RefineError::Basal(_))));
        assert!(composite_reward((-1.0, 1.0), 1.0, &th).is_err());
    }

    #[test]
    fn config_accounting() {
        let c = RefineConfig::default();
        c.validate().unwrap();
        assert_eq!((c.elite_count(), c.fresh_count()), (300, 200));
        let small = RefineConfig { pool_size: 5, ..c };
        assert!(small.validate().is_err());
        assert!(RefineConfig { elite_frac: 1.0, ..c }.validate().is_err());
    }

    #[test]
    fn toy_space_reaches_optimum() {
        let space = toy_space();
        let mut hits = 0;
        for seed in 0..100 {
            let f = toy_scorer(1000 + seed);
            let optimum = space.enumerate().map(|c| f(&c)).fold(f64::NEG_INFINITY, f64::max);
            let config = RefineConfig { pool_size: 16, seed, ..RefineConfig::default() };
            let out = refine_pool(&config, &f, &space).unwrap();
            assert!(out.history.windows(2).all(|w| w[1].best >= w[0].best));
            if out.best_score == optimum {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}/100");
    }

    #[test]
    fn frozen_pool_keeps_elites() {
        let space = DesignSpace::classic();
        let scorer = SyntheticScorer::new(SurrogateWeights::random(2), RewardThresholds::default());
        let config = RefineConfig { pool_size: 200, mutation_rate: 0.0, fresh_frac: 0.0, seed: 4, ..RefineConfig::default() };
        let out = refine_pool(&config, |c| scorer.score(c), &space).unwrap();
        let first = out.history[0].elite_mean;
        assert!(out.history.iter().all(|h| (h.elite_mean - first).abs() < 1e-12));
    }

    #[test]
    fn constant_scorer() {
        let config = RefineConfig { pool_size: 100, ..RefineConfig::default() };
        let out = refine_pool(&config, |_| 0.5, &DesignSpace::classic()).unwrap();
        assert_eq!(out.history.len(), 8);
        assert!(out.history.iter().all(|h| h.elite_mean == 0.5 && h.mean_score == 0.5 && h.best == 0.5));
    }

    #[test]
    fn synthetic_scorer_elite_mean_rises() {
        let space = DesignSpace::classic();
        let (mut up, mut pairs) = (0, 0);
        for seed in 0..20 {
            let scorer = SyntheticScorer::new(SurrogateWeights::random(seed), RewardThresholds::default());
            let config = RefineConfig { pool_size: 400, seed, ..RefineConfig::default() };
            let out = refine_pool(&config, |c| scorer.score(c), &space).unwrap();
            for w in out.history.windows(2) {
                pairs += 1;
                up += (w[1].elite_mean >= w[0].elite_mean) as usize;
            }
        }
        assert!(up as f64 >= 0.9 * pairs as f64, "{up}/{pairs}");
    }
}
