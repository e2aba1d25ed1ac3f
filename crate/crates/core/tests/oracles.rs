//! Library routines against their independent oracles.

mod common;

use clickbait::baseline::{find_best_split, SparseMatrix};
use clickbait::corpus::fleiss_kappa;
use clickbait::eval::{auc, roc_curve};
use clickbait::preprocess::wordpiece_tokenize;
use common::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn auc_equals_mann_whitney() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let (scores, truth) = random_scores(&mut rng);
        let a = auc(&roc_curve(&scores, &truth).unwrap());
        let mw = mann_whitney(&scores, &truth);
        assert!((a - mw).abs() < 1e-12, "case {case}: {a} vs {mw}");
    }
}

#[test]
fn roc_is_monotone_and_rank_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let (scores, truth) = random_scores(&mut rng);
        let pts = roc_curve(&scores, &truth).unwrap();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert!(pts.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
        let shift = rng.random_range(-2.0..2.0);
        let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s + shift).exp()).collect();
        let moved = roc_curve(&transformed, &truth).unwrap();
        assert_eq!(pts, moved);
        assert_eq!(auc(&pts), auc(&moved));
    }
}

#[test]
fn wordpiece_equals_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut with_continuations = 0;
    for case in 0..500 {
        let (text, vocab) = random_wordpiece_case(&mut rng);
        let got = wordpiece_tokenize(&text, &vocab);
        assert_eq!(got, wordpiece_oracle(&text, &vocab), "case {case}: {text:?}");
        with_continuations += usize::from(got.iter().any(|p| p.starts_with("##")));
    }
    assert!(with_continuations > 50, "only {with_continuations} cases produced continuation pieces");
}

#[test]
fn fleiss_kappa_equals_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..50 {
        let m = random_rating_matrix(&mut rng);
        let k = fleiss_kappa(&m).unwrap();
        let o = fleiss_oracle(&m);
        assert!((k - o).abs() < 1e-12, "case {case}: {k} vs {o} for {m:?}");
    }
}

#[test]
fn depth_one_split_equals_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut splits = 0;
    for case in 0..50 {
        let (rows, grad, hess, subset) = random_split_case(&mut rng);
        let x = SparseMatrix::from_dense(&rows);
        let got = find_best_split(&x, &grad, &hess, &subset);
        let want = best_split_oracle(&rows, &grad, &hess, &subset);
        match (got, want) {
            (None, None) => {}
            (Some(g), Some(w)) => {
                splits += 1;
                assert_eq!((g.feature, g.threshold), (w.feature, w.threshold), "case {case}");
                assert!((g.gain - w.gain).abs() < 1e-9);
            }
            other => panic!("case {case}: {other:?}"),
        }
    }
    assert!(splits >= 40, "only {splits} fixtures admitted a split");
}
