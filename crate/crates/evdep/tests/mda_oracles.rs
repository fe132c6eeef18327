//! Simulation oracles for the block-maxima heuristic: block maxima of data
//! whose copula is attracted to an extreme-value limit should pass the
//! extreme-value tests even when the raw data fail them, while block maxima
//! of already max-stable data keep the nominal level.

use evdep::*;
use rayon::prelude::*;

#[test]
fn clayton_blocks_are_attracted_to_the_extreme_value_class() {
    // Clayton raw data fail the two-moment test almost surely at this size;
    // componentwise maxima of blocks of 20 are approximately max-stable
    let reps = 100u64;
    let n = 4000;
    let m = 20;
    let family = family_from_tau(FamilyKind::Clayton, 0.5).unwrap();
    let mult = MultiplierConfig::new(1, 0); // unused by the inner s2n
    let results: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let seed = numeric::mix_seed(&[900, rep]);
            let data = sample(&family, n, seed).unwrap();
            let raw_reject = test_s2n(&data).unwrap().p_value <= 0.05;
            let blocked = test_mda_blockmax(&data, m, MdaInnerTest::S2n, &mult).unwrap();
            assert!(blocked.heuristic);
            assert_eq!(blocked.extras["n_blocks"], (n / m) as f64);
            (raw_reject, blocked.p_value <= 0.05)
        })
        .collect();
    let raw_rate = results.iter().filter(|r| r.0).count() as f64 / reps as f64;
    let blocked_rate = results.iter().filter(|r| r.1).count() as f64 / reps as f64;
    assert!(raw_rate >= 0.9, "raw rejection rate {raw_rate}");
    assert!(
        blocked_rate <= 0.3,
        "blocked rejection rate {blocked_rate} should drop far below {raw_rate}"
    );
}

#[test]
fn gumbel_blocks_keep_the_nominal_level() {
    // max-stability: block maxima of Gumbel-Hougaard data are
    // Gumbel-Hougaard again, so the inner test keeps its level
    let reps = 300u64;
    let n = 4000;
    let m = 20;
    let family = family_from_tau(FamilyKind::Gumbel, 0.5).unwrap();
    let mult = MultiplierConfig::new(1, 0);
    let rejections: usize = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let seed = numeric::mix_seed(&[901, rep]);
            let data = sample(&family, n, seed).unwrap();
            let blocked = test_mda_blockmax(&data, m, MdaInnerTest::S2n, &mult).unwrap();
            usize::from(blocked.p_value <= 0.05)
        })
        .sum();
    let rate = rejections as f64 / reps as f64;
    assert!(
        (0.01..=0.11).contains(&rate),
        "blocked level {rate} should stay near 0.05"
    );
}
