use proptest::prelude::*;

use wankelmut::controllers::{
    Controller, CtrnnGenome, CtrnnSettings, HandCodedController, CTRNN_GENES,
};
use wankelmut::evolution::{select_proportionate, selection_weights};
use wankelmut::fitness::{evaluate, EvalConfig, Regime, Scheme};
use wankelmut::world::{erf, Environment, JudgeState, Mode, Orientation, Profile};

fn erf_world(n: usize, o: Orientation) -> Environment {
    Environment::erf(n, o).unwrap()
}

proptest! {
    #[test]
    fn clamp_is_idempotent(n in 4usize..200, p in 0usize..200, d in -1i32..=1) {
        let env = erf_world(n, Orientation::Normal);
        let p = p % n;
        let once = env.step(p, d).unwrap();
        prop_assert_eq!(env.step(once, 0).unwrap(), once);
        prop_assert!(once < n);
    }

    #[test]
    fn flipped_world_mirrors_trajectories(
        n in 4usize..120,
        p0 in 0usize..120,
        deltas in prop::collection::vec(-1i32..=1, 0..300),
        profile in prop_oneof![Just(Profile::Erf), Just(Profile::Gaussian), Just(Profile::Linear)],
    ) {
        let normal = Environment::new(n, profile, Orientation::Normal, 4.0).unwrap();
        let flipped = Environment::new(n, profile, Orientation::Flipped, 4.0).unwrap();
        let mut a = p0 % n;
        let mut b = n - 1 - a;
        for d in deltas {
            let (l, r) = normal.sense(a);
            prop_assert_eq!(flipped.sense(b), (r, l));
            a = normal.step(a, d).unwrap();
            b = flipped.step(b, -d).unwrap();
            prop_assert_eq!(a + b, n - 1);
        }
    }

    #[test]
    fn judge_parity(qs in prop::collection::vec(-1.0f64..=1.0, 0..500)) {
        let mut j = JudgeState::default();
        for q in qs {
            let before = j.switch_count;
            let (next, switched) = j.update(q);
            j = next;
            prop_assert_eq!(j.switch_count, before + u32::from(switched));
            prop_assert_eq!(j.switch_count % 2 == 0, j.mode == Mode::Uphill);
        }
    }

    #[test]
    fn erf_is_odd_and_monotone(x in -6.0f64..6.0, dx in 1e-6f64..1.0) {
        prop_assert_eq!(erf(-x), -erf(x));
        prop_assert!(erf(x + dx) >= erf(x));
        prop_assert!(erf(x).abs() <= 1.0);
    }

    #[test]
    fn erf_world_strictly_increases_in_the_core(n in 4usize..1000) {
        let env = erf_world(n, Orientation::Normal);
        let q = env.quality();
        for i in 1..n {
            let u = 4.0 * (i as f64 - n as f64 / 2.0) / n as f64;
            if u.abs() < 5.0 {
                prop_assert!(q[i] > q[i - 1], "n={} i={}", n, i);
            }
            prop_assert!((-1.0..=1.0).contains(&q[i]));
        }
    }

    #[test]
    fn gaussian_peaks_in_the_middle(n in 4usize..300) {
        let env = Environment::new(n, Profile::Gaussian, Orientation::Normal, 4.0).unwrap();
        let q = env.quality();
        let peak = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = (n - 1) / 2;
        prop_assert_eq!(q[mid], peak);
        for i in 1..=mid {
            prop_assert!(q[i] >= q[i - 1]);
        }
        for i in n / 2..n - 1 {
            prop_assert!(q[i + 1] <= q[i]);
        }
    }

    #[test]
    fn min_never_exceeds_mean(steps in 0usize..300, start in 0usize..40) {
        let base = EvalConfig { steps, start: Some(start), ..EvalConfig::default() };
        for regime in Regime::ALL {
            let min = EvalConfig { scheme: Scheme::DoubleMin, weights: regime.weights(), ..base };
            let mean = EvalConfig { scheme: Scheme::DoubleMean, ..min };
            let a = evaluate(&mut HandCodedController::default(), &min).unwrap().score;
            let b = evaluate(&mut HandCodedController::default(), &mean).unwrap().score;
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn selection_stays_in_range(fs in prop::collection::vec(-1e3f64..1e3, 1..50), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            prop_assert!(select_proportionate(&fs, &mut rng) < fs.len());
        }
        prop_assert!(selection_weights(&fs).iter().all(|&w| w > 0.0));
    }

    #[test]
    fn controllers_replay_after_reset(
        genes in prop::collection::vec(-3.0f64..3.0, CTRNN_GENES),
        inputs in prop::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 1..50),
    ) {
        let mut genes = genes;
        for t in &mut genes[CTRNN_GENES - 11..] {
            *t = t.abs() + 0.5;
        }
        let mut c = CtrnnGenome::from_genes(&genes).unwrap().decode(CtrnnSettings::default()).unwrap();
        let first: Vec<u64> = inputs.iter().map(|&(l, r)| c.act(l, r).to_bits()).collect();
        c.reset();
        let second: Vec<u64> = inputs.iter().map(|&(l, r)| c.act(l, r).to_bits()).collect();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn uniform_selection_passes_chi_square() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let draws = 100_000;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        counts[select_proportionate(&[1.0, 1.0, 1.0], &mut rng)] += 1;
    }
    let expected = draws as f64 / 3.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9th percentile of chi-square with 2 degrees of freedom
    assert!(chi2 < 13.82, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn shifted_selection_matches_closed_form() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let fs = [-5.0, -1.0, -3.0];
    let w = selection_weights(&fs);
    let total: f64 = w.iter().sum();
    let draws = 200_000;
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        counts[select_proportionate(&fs, &mut rng)] += 1;
    }
    for i in 0..3 {
        let p = w[i] / total;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        let got = counts[i] as f64 / draws as f64;
        assert!((got - p).abs() <= 5.0 * sd + 1e-9, "i={i} p={p} got={got}");
    }
    // the lowest individual is all but never chosen
    assert!(counts[0] < 10);
}

#[test]
fn handcoded_double_traces_mirror_from_every_start() {
    for start in 0..40 {
        let cfg = EvalConfig {
            start: Some(start),
            ..EvalConfig::default()
        };
        let ev = evaluate(&mut HandCodedController::default(), &cfg).unwrap();
        let a = ev.traces[0].as_ref().unwrap();
        let b = ev.traces[1].as_ref().unwrap();
        assert_eq!(a.r_switch, b.r_switch, "start {start}");
        assert!(a
            .positions
            .iter()
            .zip(&b.positions)
            .all(|(x, y)| x + y == 39));
    }
}
