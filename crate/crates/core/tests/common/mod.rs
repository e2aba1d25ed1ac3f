//! Independent reference implementations used as test oracles. Each one
//! computes its quantity the slow, obvious way.

#![allow(dead_code)]

use clickbait::baseline::Split;
use clickbait::head::{batch_loss, gradients, HeadParams, HIDDEN_UNITS};
use clickbait::preprocess::{Vocab, MAX_WORD_CHARS, UNK};
use clickbait::Label;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probability that a random positive outscores a random negative, ties
/// counted as one half, over every positive–negative pair.
pub fn mann_whitney(scores: &[f64], truth: &[Label]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for (i, li) in truth.iter().enumerate() {
        if !li.is_positive() {
            continue;
        }
        for (j, lj) in truth.iter().enumerate() {
            if lj.is_positive() {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs as f64
}

/// Greedy longest-prefix segmentation by trying every end position from the
/// longest down.
pub fn wordpiece_oracle(text: &str, vocab: &Vocab) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        if chars.len() > MAX_WORD_CHARS {
            out.push(UNK.to_string());
            continue;
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let mut ok = true;
        while start < chars.len() {
            let mut matched = None;
            for end in (start + 1..=chars.len()).rev() {
                let body: String = chars[start..end].iter().collect();
                let candidate = if start == 0 { body } else { format!("##{body}") };
                if start == 0 && candidate.starts_with("##") {
                    continue;
                }
                if vocab.contains(&candidate) {
                    matched = Some((candidate, end));
                    break;
                }
            }
            match matched {
                Some((piece, end)) => {
                    pieces.push(piece);
                    start = end;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.extend(pieces);
        } else {
            out.push(UNK.to_string());
        }
    }
    out
}

/// Fleiss' kappa with observed agreement counted over ordered pairs of
/// distinct raters, from each item's expanded list of ratings.
pub fn fleiss_oracle(matrix: &[Vec<u32>]) -> f64 {
    let categories = matrix[0].len();
    let mut observed = 0.0;
    let mut used = vec![0usize; categories];
    let mut total = 0usize;
    for row in matrix {
        let ratings: Vec<usize> = row.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat(c).take(n as usize)).collect();
        let n = ratings.len();
        let mut agree = 0usize;
        for a in 0..n {
            for b in 0..n {
                if a != b && ratings[a] == ratings[b] {
                    agree += 1;
                }
            }
        }
        observed += agree as f64 / (n * (n - 1)) as f64;
        for &c in &ratings {
            used[c] += 1;
        }
        total += n;
    }
    observed /= matrix.len() as f64;
    let chance: f64 = used.iter().map(|&u| (u as f64 / total as f64).powi(2)).sum();
    if observed == 1.0 {
        return 1.0;
    }
    (observed - chance) / (1.0 - chance)
}

/// Exhaustive best split over dense rows: every feature, every midpoint
/// between consecutive distinct values, partition recomputed from scratch.
pub fn best_split_oracle(rows: &[Vec<f64>], grad: &[f64], hess: &[f64], subset: &[usize]) -> Option<Split> {
    let features = rows[0].len();
    let g: f64 = subset.iter().map(|&r| grad[r]).sum();
    let h: f64 = subset.iter().map(|&r| hess[r]).sum();
    let mut best: Option<Split> = None;
    for f in 0..features {
        let mut values: Vec<f64> = subset.iter().map(|&r| rows[r][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let mut threshold = 0.5 * (w[0] + w[1]);
            if threshold <= w[0] {
                threshold = w[1];
            }
            let left: Vec<usize> = subset.iter().copied().filter(|&r| rows[r][f] < threshold).collect();
            let gl: f64 = left.iter().map(|&r| grad[r]).sum();
            let hl: f64 = left.iter().map(|&r| hess[r]).sum();
            let (gr, hr) = (g - gl, h - hl);
            if hl <= 1e-12 || hr <= 1e-12 {
                continue;
            }
            let gain = 0.5 * (gl * gl / hl + gr * gr / hr - g * g / h);
            if best.map_or(true, |b| gain > b.gain + 1e-12) {
                best = Some(Split { feature: f as u32, threshold, gain });
            }
        }
    }
    best
}

pub fn random_scores(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Label>) {
    let n = rng.random_range(2..=200);
    // A coarse grid produces plenty of tied scores.
    let coarse = rng.random_bool(0.5);
    let mut truth: Vec<Label> =
        (0..n).map(|_| if rng.random_bool(0.5) { Label::Clickbait } else { Label::NonClickbait }).collect();
    truth[0] = Label::Clickbait;
    truth[1] = Label::NonClickbait;
    let scores = (0..n)
        .map(|_| if coarse { rng.random_range(0..10) as f64 / 10.0 } else { rng.random::<f64>() })
        .collect();
    (scores, truth)
}

/// A small vocabulary over `abcd#` and one text drawn from the same
/// alphabet plus an out-of-vocabulary letter.
pub fn random_wordpiece_case(rng: &mut ChaCha8Rng) -> (String, Vocab) {
    let alphabet = ['a', 'b', 'c', 'd'];
    let mut tokens: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"].map(String::from).to_vec();
    for _ in 0..rng.random_range(3..25) {
        let len = rng.random_range(1..=4);
        let body: String = (0..len).map(|_| alphabet[rng.random_range(0..4)]).collect();
        let token = if rng.random_bool(0.5) { format!("##{body}") } else { body };
        if !tokens.contains(&token) {
            tokens.push(token);
        }
    }
    let vocab = Vocab::from_tokens(tokens).unwrap();
    let letters = ['a', 'b', 'c', 'd', 'a', 'b', 'c', 'd', 'x', '#'];
    let words: Vec<String> = (0..rng.random_range(0..8))
        .map(|_| {
            let len = if rng.random_bool(0.02) { MAX_WORD_CHARS + 1 } else { rng.random_range(1..=10) };
            (0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect()
        })
        .collect();
    (words.join(" "), vocab)
}

/// Items × categories count matrix with a fixed number of raters per item.
pub fn random_rating_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    let items = rng.random_range(1..=12);
    let categories = rng.random_range(2..=4);
    let raters = rng.random_range(2..=6u32);
    loop {
        let m: Vec<Vec<u32>> = (0..items)
            .map(|_| {
                let mut row = vec![0u32; categories];
                for _ in 0..raters {
                    row[rng.random_range(0..categories)] += 1;
                }
                row
            })
            .collect();
        // Chance agreement of 1 leaves kappa undefined unless every item is
        // unanimous; both are covered elsewhere.
        let used = (0..categories).filter(|&c| m.iter().any(|r| r[c] > 0)).count();
        if used >= 2 {
            return m;
        }
    }
}

/// Dense fixture of at most 12 rows with tied and zero values, an
/// occasional duplicated column, and random gradients / hessians.
pub fn random_split_case(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = rng.random_range(2..=12);
    let features = rng.random_range(1..=4);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..features)
                .map(|_| match rng.random_range(0..4) {
                    0 => 0.0,
                    1 => rng.random_range(-3..=3) as f64 * 0.5,
                    _ => rng.random_range(-1.0..1.0),
                })
                .collect()
        })
        .collect();
    if features > 1 && rng.random_bool(0.3) {
        for r in &mut rows {
            r[features - 1] = r[0];
        }
    }
    let grad = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let hess = (0..n).map(|_| rng.random_range(0.01..0.25)).collect();
    let subset: Vec<usize> = if rng.random_bool(0.3) {
        let s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.7)).collect();
        if s.is_empty() {
            (0..n).collect()
        } else {
            s
        }
    } else {
        (0..n).collect()
    };
    (rows, grad, hess, subset)
}

/// Full-batch gradient descent logistic regression; training accuracy.
pub fn logistic_fit_accuracy(data: &[(Vec<f64>, bool)], steps: usize, rate: f64) -> f64 {
    let width = data[0].0.len();
    let mut w = vec![0.0; width];
    let mut b = 0.0;
    let n = data.len() as f64;
    let z = |w: &[f64], b: f64, x: &[f64]| b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
    for _ in 0..steps {
        let mut gw = vec![0.0; width];
        let mut gb = 0.0;
        for (x, y) in data {
            let e = 1.0 / (1.0 + (-z(&w, b, x)).exp()) - if *y { 1.0 } else { 0.0 };
            for (g, v) in gw.iter_mut().zip(x) {
                *g += e * v;
            }
            gb += e;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= rate * g / n;
        }
        b -= rate * gb / n;
    }
    data.iter().filter(|(x, y)| (z(&w, b, x) >= 0.0) == *y).count() as f64 / n
}

pub const STEP: f64 = 1e-4;
/// Pre-activations closer to zero than this are resampled, so the finite
/// difference never straddles a ReLU kink.
const KINK_MARGIN: f64 = 1e-2;

pub struct Fixture {
    pub params: HeadParams,
    pub batch: Vec<(Vec<f64>, Label)>,
}

fn pre_activations(p: &HeadParams, x: &[f64]) -> Vec<f64> {
    let h = p.input_width();
    (0..p.hidden())
        .map(|i| p.b1()[i] + p.w1()[i * h..(i + 1) * h].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}

/// Resamples the bias of any hidden unit whose pre-activation lies within
/// the margin of zero for some example.
fn clear_kinks(p: &mut HeadParams, batch: &[(Vec<f64>, Label)], rng: &mut ChaCha8Rng) {
    let margin = batch
        .iter()
        .flat_map(|(x, _)| x.iter())
        .fold(KINK_MARGIN, |m, v| m.max(4.0 * STEP * v.abs()));
    for i in 0..p.hidden() {
        while batch.iter().any(|(x, _)| pre_activations(p, x)[i].abs() <= margin) {
            p.b1_mut()[i] = rng.random_range(-0.5..0.5);
        }
    }
}

pub fn gradient_fixture(rng: &mut ChaCha8Rng) -> Fixture {
    let width = rng.random_range(1..=8);
    let n = rng.random_range(1..=6);
    let mut params = HeadParams::zeros(width, HIDDEN_UNITS);
    for v in params.as_mut_slice() {
        *v = rng.random_range(-0.5..0.5);
    }
    let batch: Vec<(Vec<f64>, Label)> = (0..n)
        .map(|_| {
            let x = (0..width).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = if rng.random_bool(0.5) { Label::Clickbait } else { Label::NonClickbait };
            (x, y)
        })
        .collect();
    clear_kinks(&mut params, &batch, rng);
    Fixture { params, batch }
}

/// Central-difference gradient of the mean batch loss.
pub fn numeric_gradient(f: &Fixture) -> Vec<f64> {
    let mut p = f.params.clone();
    (0..p.len())
        .map(|i| {
            let orig = p.as_slice()[i];
            p.as_mut_slice()[i] = orig + STEP;
            let up = batch_loss(&p, &f.batch).unwrap();
            p.as_mut_slice()[i] = orig - STEP;
            let down = batch_loss(&p, &f.batch).unwrap();
            p.as_mut_slice()[i] = orig;
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

/// Worst relative error over all coordinates, skipping those where both
/// gradients are negligible.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .filter(|(a, n)| a.abs() >= 1e-10 || n.abs() >= 1e-10)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()))
        .fold(0.0, f64::max)
}

/// Worst per-fixture relative error over `fixtures` random fixtures.
pub fn gradient_check(seed: u64, fixtures: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..fixtures)
        .map(|_| {
            let f = gradient_fixture(&mut rng);
            let analytic = gradients(&f.params, &f.batch).unwrap();
            max_relative_error(analytic.as_slice(), &numeric_gradient(&f))
        })
        .fold(0.0, f64::max)
}
