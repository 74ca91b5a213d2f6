//! Paired sign test.

use statrs::distribution::{Binomial, DiscreteCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided p-value of seeing at least `wins` wins among the untied
    /// pairs when both outcomes are equally likely.
    pub p_value: f64,
}

/// Sign test on paired values where smaller is better for `a`.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "paired samples");
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let ties = a.len() - wins - losses;
    let n = (wins + losses) as u64;
    let p_value = if wins == 0 {
        1.0
    } else {
        let dist = Binomial::new(0.5, n).expect("valid binomial");
        dist.sf(wins as u64 - 1)
    };
    SignTest {
        wins,
        losses,
        ties,
        p_value,
    }
}
