use std::time::Instant;

use helmholtz_core::expr::ZeroTester;
use helmholtz_core::identities::run;
use helmholtz_core::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn identities_hold_on_random_sprays() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..51u64 {
        let n = (k % 3) as usize + 1;
        let s = random::semispray(&mut rng, n);
        let tester = ZeroTester::new(n, 32, 1e-9, k);
        for c in run(&s, &tester, k).unwrap() {
            assert!(c.verdict.is_zero(), "{} failed on {s:?}: {:?}", c.name, c.verdict);
        }
    }
    eprintln!("identity fuzz: {:.1}s", start.elapsed().as_secs_f64());
}
