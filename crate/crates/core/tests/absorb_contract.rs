mod common;

use common::AbsorbInstance;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]
    #[test]
    fn absorption_covers_all_but_four(seed in any::<u64>()) {
        let inst = AbsorbInstance::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let covered = inst.check().map_err(TestCaseError::fail)?;
        prop_assert!(covered <= inst.ys.len());
    }
}

#[test]
fn complete_adjacency_covers_exactly_all_but_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mut inst = AbsorbInstance::random(&mut rng);
        inst.missing.clear();
        let covered = inst.check().unwrap();
        assert_eq!(covered, inst.ys.len().saturating_sub(4));
    }
}
