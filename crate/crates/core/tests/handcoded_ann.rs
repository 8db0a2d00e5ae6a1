use wankelmut::analysis::{posthoc_controller, Classification, PosthocConfig};
use wankelmut::controllers::{Controller, HandCodedController, MoveMode};
use wankelmut::fitness::run_episode;
use wankelmut::genome::handcoded_ann;
use wankelmut::world::{Environment, Orientation, Profile, DEFAULT_STEEPNESS};

fn worlds() -> Vec<(Environment, Vec<usize>)> {
    let mut out = Vec::new();
    for n in [24, 40, 80] {
        for o in [Orientation::Normal, Orientation::Flipped] {
            let env = Environment::erf(n, o).unwrap();
            let starts = vec![0, env.centre(), env.mirror_cell(env.centre()), n - 1];
            out.push((env, starts));
        }
        let bell = Environment::new(
            2 * n,
            Profile::Gaussian,
            Orientation::Normal,
            DEFAULT_STEEPNESS,
        )
        .unwrap();
        out.push((bell, vec![0, 2 * n - 1]));
    }
    out
}

#[test]
fn weight_set_replays_the_reference_controller() {
    for (env, starts) in worlds() {
        for start in starts {
            let mut reference = HandCodedController::default();
            let mut net = handcoded_ann().decode();
            let a = run_episode(&mut reference, &env, 250, start, MoveMode::AlwaysMove).unwrap();
            let b = run_episode(&mut net, &env, 250, start, MoveMode::AlwaysMove).unwrap();
            assert_eq!(a.positions, b.positions, "{:?} start {start}", env.spec());
            assert_eq!(a.switch_times, b.switch_times);
        }
    }
}

#[test]
fn weight_set_matches_on_random_sensor_streams() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let mut reference = HandCodedController::default();
        let mut net = handcoded_ann().decode();
        for _ in 0..100 {
            // keep away from the exact decision boundaries, where the
            // network's steep sigmoids are not a perfect step
            let l: f64 = rng.gen_range(-1.0..1.0);
            let r: f64 = rng.gen_range(-1.0..1.0);
            if (l - r).abs() < 0.01 || ((l + r) / 2.0).abs() > 0.94 && ((l + r) / 2.0).abs() < 0.96
            {
                continue;
            }
            let want = reference.act(l, r);
            let got = net.act(l, r);
            assert_eq!(want > 0.0, got > 0.0, "l={l} r={r}");
        }
    }
}

#[test]
fn weight_set_is_reactive() {
    let mut net = handcoded_ann().decode();
    let r = posthoc_controller(&mut net, &PosthocConfig::default()).unwrap();
    assert_eq!(r.classification, Classification::Reactive);
}
