//! The tiny two-layer network used by the joint-search tests, and an
//! independent replay of the greedy rule over a precomputed accuracy grid.

use dalr::compression::{dalr_compress, RidgeConfig};
use dalr::{Activations, Batch, DenseMatrix, Layer, Net, Network};

use super::{gaussian, relu_gaussian, rng};

pub const SCHEDULE: [usize; 4] = [16, 8, 4, 2];

pub struct SearchCase {
    pub net: Net,
    pub train: DenseMatrix<f64>,
    pub val: Batch,
    pub acts: (Activations, Activations),
}

/// 32 -> 16 -> 16 with ReLU in between. Validation labels are the original
/// network's predictions with every fifth one shifted, so the baseline is 0.8.
pub fn tiny_search_case(seed: u64) -> SearchCase {
    let mut r = rng(seed);
    let w0 = gaussian(&mut r, 16, 32).scale(1.0 / 32f64.sqrt());
    let b0: Vec<f64> = gaussian(&mut r, 16, 1)
        .into_vec()
        .iter()
        .map(|v| 0.5 + 0.1 * v)
        .collect();
    let w1 = gaussian(&mut r, 16, 16).scale(0.25);
    let b1 = gaussian(&mut r, 16, 1).scale(0.1).into_vec();
    let net = Network::mlp(vec![Layer::new(w0, b0).unwrap(), Layer::new(w1, b1).unwrap()]).unwrap();

    let train = relu_gaussian(&mut r, 32, 300, 0.5);
    let x_val = relu_gaussian(&mut r, 32, 200, 0.5);
    let out = net.forward(&x_val).unwrap();
    let labels = (0..200)
        .map(|j| {
            let top = dalr::network::argmax_column(&out, j);
            if j % 5 == 0 {
                (top + 1) % 16
            } else {
                top
            }
        })
        .collect();
    let val = Batch::new(x_val, labels).unwrap();
    let acts = (
        net.extract_activations(&train, 0).unwrap(),
        net.extract_activations(&train, 1).unwrap(),
    );
    SearchCase { net, train, val, acts }
}

/// One layer as the oracle evaluates it: either the original weights or a
/// factor pair applied as `a (b^T h)`.
enum Stage {
    Full(Layer),
    Pair {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
}

impl Stage {
    fn at_rank(layer: &Layer, acts: &Activations, rank: usize) -> Self {
        if rank >= layer.max_rank() {
            return Stage::Full(layer.clone());
        }
        let p = dalr_compress(layer, acts, rank, RidgeConfig::fixed(0.0).unwrap()).unwrap();
        Stage::Pair {
            a: super::to_rows(&p.a),
            b: super::to_rows(&p.b),
            bias: p.new_bias,
        }
    }

    fn apply(&self, h: &[f64]) -> Vec<f64> {
        match self {
            Stage::Full(l) => {
                let w = l.weights();
                (0..w.rows())
                    .map(|i| {
                        let mut acc = 0.0;
                        for t in 0..w.cols() {
                            acc += w[(i, t)] * h[t];
                        }
                        acc + l.bias()[i]
                    })
                    .collect()
            }
            Stage::Pair { a, b, bias } => {
                let k = a[0].len();
                let inner: Vec<f64> = (0..k)
                    .map(|c| {
                        let mut acc = 0.0;
                        for t in 0..b.len() {
                            acc += b[t][c] * h[t];
                        }
                        acc
                    })
                    .collect();
                (0..a.len())
                    .map(|i| {
                        let mut acc = 0.0;
                        for c in 0..k {
                            acc += a[i][c] * inner[c];
                        }
                        acc + bias[i]
                    })
                    .collect()
            }
        }
    }
}

/// Validation accuracy for every pair of schedule ranks, by per-sample loops.
pub fn accuracy_grid(case: &SearchCase) -> Vec<Vec<f64>> {
    let l0 = case.net.layer(0).unwrap();
    let l1 = case.net.layer(1).unwrap();
    let first: Vec<Stage> = SCHEDULE.iter().map(|&r| Stage::at_rank(l0, &case.acts.0, r)).collect();
    let second: Vec<Stage> = SCHEDULE.iter().map(|&r| Stage::at_rank(l1, &case.acts.1, r)).collect();
    let x = case.val.inputs();
    let mut grid = vec![vec![0.0; SCHEDULE.len()]; SCHEDULE.len()];
    for (ia, sa) in first.iter().enumerate() {
        for (ib, sb) in second.iter().enumerate() {
            let mut correct = 0;
            for j in 0..x.cols() {
                let h: Vec<f64> = sa.apply(&x.col(j)).into_iter().map(|v| v.max(0.0)).collect();
                let out = sb.apply(&h);
                let mut best = 0;
                for i in 1..out.len() {
                    if out[i] > out[best] {
                        best = i;
                    }
                }
                if best == case.val.labels()[j] {
                    correct += 1;
                }
            }
            grid[ia][ib] = correct as f64 / x.cols() as f64;
        }
    }
    grid
}

/// `(stepped layer or None for the start, rank_a, rank_b, accuracy)` per step.
pub type ReplayStep = (Option<usize>, usize, usize, f64);

/// Replays "advance whichever layer's next rank keeps the better accuracy,
/// ties to the first layer; stop once both exceed the drop or both schedules
/// are used up".
pub fn greedy_replay(grid: &[Vec<f64>], baseline: f64, max_drop: f64) -> Vec<ReplayStep> {
    let last = SCHEDULE.len() - 1;
    let (mut ia, mut ib) = (0, 0);
    let mut steps = vec![(None, SCHEDULE[0], SCHEDULE[0], grid[0][0])];
    loop {
        let ok = |acc: f64| baseline - acc <= max_drop;
        let a = (ia < last).then(|| grid[ia + 1][ib]).filter(|&v| ok(v));
        let b = (ib < last).then(|| grid[ia][ib + 1]).filter(|&v| ok(v));
        let stepped = match (a, b) {
            (None, None) => break,
            (Some(va), Some(vb)) if va >= vb => 0,
            (Some(_), None) => 0,
            _ => 1,
        };
        if stepped == 0 {
            ia += 1;
        } else {
            ib += 1;
        }
        steps.push((Some(stepped), SCHEDULE[ia], SCHEDULE[ib], grid[ia][ib]));
    }
    steps
}
