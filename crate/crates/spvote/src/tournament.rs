//! Tournament metrics: Copeland scores, top selection with exact tie
//! handling, and Kendall tau distances.
//!
//! Selection ties are reported as exact probabilities rather than resolved,
//! so downstream error metrics are exact expectations; a seeded sampling mode
//! exists for parity with sampled pipelines.

use rand::Rng;

use crate::aggregate::Tournament;
use crate::error::{Error, Result};
use crate::model::{pairs, AltId, Ranking};

fn ensure_complete(t: &Tournament) -> Result<()> {
    for (a, b) in t.pairs() {
        t.beats(a, b)?;
    }
    Ok(())
}

/// Out-degree of every alternative (number of pairwise wins).
pub fn copeland_scores(t: &Tournament) -> Result<Vec<usize>> {
    ensure_complete(t)?;
    let mut scores = vec![0usize; t.m()];
    for (a, b) in t.pairs() {
        if t.beats(a, b)? {
            scores[a] += 1;
        } else {
            scores[b] += 1;
        }
    }
    Ok(scores)
}

/// Result of selecting a single winner from a tournament.
#[derive(Debug, Clone, PartialEq)]
pub struct TopSelection {
    /// Alternatives sharing the maximal Copeland score, ascending by id.
    pub winners: Vec<AltId>,
    /// Exact probability of each alternative being chosen under a uniform
    /// tie-break; zero off the winner set, sums to 1.
    pub probabilities: Vec<f64>,
}

/// Selects the Copeland winner set with exact uniform tie-break weights.
pub fn select_top(t: &Tournament) -> Result<TopSelection> {
    let scores = copeland_scores(t)?;
    let best = *scores.iter().max().expect("m >= 2");
    let winners: Vec<AltId> = (0..t.m()).filter(|&a| scores[a] == best).collect();
    let p = 1.0 / winners.len() as f64;
    let mut probabilities = vec![0.0; t.m()];
    for &w in &winners {
        probabilities[w] = p;
    }
    Ok(TopSelection {
        winners,
        probabilities,
    })
}

/// Samples one winner from the uniform tie-break distribution.
pub fn sample_top(t: &Tournament, rng: &mut impl Rng) -> Result<AltId> {
    let sel = select_top(t)?;
    Ok(sel.winners[rng.random_range(0..sel.winners.len())])
}

/// Probability that the selection misses the true top alternative, taken as
/// an exact expectation over the uniform tie-break.
pub fn top_error(t: &Tournament, truth: &Ranking) -> Result<f64> {
    if truth.len() != t.m() {
        return Err(Error::LengthMismatch(truth.len(), t.m()));
    }
    let sel = select_top(t)?;
    Ok(1.0 - sel.probabilities[truth.top()])
}

/// Number of pairs the tournament directs against `truth`.
pub fn kt_distance(t: &Tournament, truth: &Ranking) -> Result<usize> {
    if truth.len() != t.m() {
        return Err(Error::LengthMismatch(truth.len(), t.m()));
    }
    ensure_complete(t)?;
    let mut d = 0;
    for (a, b) in t.pairs() {
        if t.beats(a, b)? != truth.prefers(a, b)? {
            d += 1;
        }
    }
    Ok(d)
}

/// Kendall tau distance between two rankings of the same alternatives.
pub fn ranking_kt(r1: &Ranking, r2: &Ranking) -> Result<usize> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch(r1.len(), r2.len()));
    }
    let mut d = 0;
    for (a, b) in pairs(r1.len()) {
        if r1.prefers(a, b)? != r2.prefers(a, b)? {
            d += 1;
        }
    }
    Ok(d)
}

/// Exact expected Kendall tau distance to `truth` of a ranking drawn by
/// ordering `groups` as given and each group internally uniformly at random.
///
/// `groups` must partition `0..truth.len()`. Cross-group pairs contribute 0
/// or 1 depending on `truth`; within-group pairs contribute exactly 1/2.
pub fn expected_kt_of_groups(groups: &[Vec<AltId>], truth: &Ranking) -> Result<f64> {
    let m = truth.len();
    let mut seen = vec![false; m];
    for g in groups {
        for &a in g {
            if a >= m || seen[a] {
                return Err(Error::Invalid(format!(
                    "groups must partition 0..{m}, saw {a} twice or out of range"
                )));
            }
            seen[a] = true;
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::Invalid(format!("groups must cover all of 0..{m}")));
    }

    let mut expected = 0.0;
    for (i, g) in groups.iter().enumerate() {
        let k = g.len() as f64;
        expected += k * (k - 1.0) / 4.0; // C(k,2) pairs, 1/2 each
        for h in &groups[i + 1..] {
            for &x in g {
                for &y in h {
                    if truth.prefers(y, x)? {
                        expected += 1.0;
                    }
                }
            }
        }
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rk(order: &[usize]) -> Ranking {
        Ranking::new(order.to_vec()).unwrap()
    }

    fn three_cycle() -> Tournament {
        let mut t = Tournament::empty(3).unwrap();
        t.set(0, 1, true).unwrap();
        t.set(1, 2, true).unwrap();
        t.set(2, 0, true).unwrap();
        t
    }

    #[test]
    fn copeland_on_a_transitive_tournament_counts_down() {
        let t = Tournament::from_ranking(&rk(&[0, 1, 2, 3]));
        assert_eq!(copeland_scores(&t).unwrap(), vec![3, 2, 1, 0]);
        let sel = select_top(&t).unwrap();
        assert_eq!(sel.winners, vec![0]);
        assert_eq!(sel.probabilities, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn three_cycle_selects_each_alternative_at_a_third() {
        let sel = select_top(&three_cycle()).unwrap();
        assert_eq!(sel.winners, vec![0, 1, 2]);
        for p in sel.probabilities {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let e = top_error(&three_cycle(), &rk(&[1, 0, 2])).unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_way_tie_containing_the_truth_errs_half() {
        let mut t = Tournament::empty(4).unwrap();
        t.set(0, 1, true).unwrap(); // 0 beats 1
        t.set(0, 2, true).unwrap();
        t.set(0, 3, false).unwrap(); // 3 beats 0
        t.set(1, 2, true).unwrap();
        t.set(1, 3, true).unwrap(); // 1 beats 3
        t.set(2, 3, true).unwrap(); // 2 beats 3
        // Scores: 0 -> 2, 1 -> 2, 2 -> 1, 3 -> 1.
        let sel = select_top(&t).unwrap();
        assert_eq!(sel.winners, vec![0, 1]);
        assert_eq!(top_error(&t, &rk(&[0, 1, 2, 3])).unwrap(), 0.5);
        assert_eq!(top_error(&t, &rk(&[2, 0, 1, 3])).unwrap(), 1.0);
    }

    #[test]
    fn sampling_stays_on_the_winner_set_and_reproduces() {
        let t = three_cycle();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = sample_top(&t, &mut rng).unwrap();
        assert!(a < 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(sample_top(&t, &mut rng).unwrap(), a);
    }

    #[test]
    fn kt_distances_hit_the_extremes() {
        let truth = rk(&[0, 1, 2, 3]);
        assert_eq!(
            kt_distance(&Tournament::from_ranking(&truth), &truth).unwrap(),
            0
        );
        assert_eq!(
            kt_distance(&Tournament::from_ranking(&truth.reversed()), &truth).unwrap(),
            6
        );
        assert_eq!(ranking_kt(&rk(&[1, 0, 2, 3]), &truth).unwrap(), 1);
        assert_eq!(ranking_kt(&truth.reversed(), &truth).unwrap(), 6);
        assert!(ranking_kt(&rk(&[0, 1]), &truth).is_err());
    }

    #[test]
    fn incomplete_tournaments_are_rejected() {
        let mut t = Tournament::empty(3).unwrap();
        t.set(0, 1, true).unwrap();
        assert!(copeland_scores(&t).is_err());
        assert!(kt_distance(&t, &rk(&[0, 1, 2])).is_err());
    }

    #[test]
    fn group_expectation_interpolates_between_exact_and_uniform() {
        let truth = rk(&[0, 1, 2]);
        // All singletons in truth order: exact distance 0.
        let zero = expected_kt_of_groups(&[vec![0], vec![1], vec![2]], &truth).unwrap();
        assert_eq!(zero, 0.0);
        // One big tie group: every pair contributes 1/2.
        let all = expected_kt_of_groups(&[vec![0, 1, 2]], &truth).unwrap();
        assert_eq!(all, 1.5);
        // Mixed: {1,2} tied below 0 agrees on cross pairs, half on the tie.
        let mixed = expected_kt_of_groups(&[vec![0], vec![1, 2]], &truth).unwrap();
        assert_eq!(mixed, 0.5);
        // Reversed cross order counts fully.
        let rev = expected_kt_of_groups(&[vec![2], vec![0, 1]], &truth).unwrap();
        assert_eq!(rev, 2.5);
        assert!(expected_kt_of_groups(&[vec![0, 1]], &truth).is_err());
        assert!(expected_kt_of_groups(&[vec![0, 0, 1, 2]], &truth).is_err());
    }

    fn arb_perm(m: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..m).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        /// On transitive tournaments the two distance functions agree, and
        /// the expectation over full enumeration of a single tie group equals
        /// the closed form.
        #[test]
        fn transitive_tournament_distance_matches_ranking_distance(
            a in arb_perm(5),
            b in arb_perm(5),
        ) {
            let ra = rk(&a);
            let rb = rk(&b);
            let t = Tournament::from_ranking(&ra);
            prop_assert_eq!(
                kt_distance(&t, &rb).unwrap(),
                ranking_kt(&ra, &rb).unwrap()
            );
        }
    }
}
